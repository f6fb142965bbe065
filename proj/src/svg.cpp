#include "admm_eki/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

namespace admm_eki::svg {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

// Piecewise-linear ramp through a few viridis stops, t in [0, 1].
std::string ramp(double t) {
  static const std::array<std::array<double, 3>, 5> stops{{{68, 1, 84},
                                                           {59, 82, 139},
                                                           {33, 145, 140},
                                                           {94, 201, 98},
                                                           {253, 231, 37}}};
  t = std::clamp(t, 0.0, 1.0) * (stops.size() - 1);
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(t), stops.size() - 2);
  const double f = t - static_cast<double>(i);
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                static_cast<int>(std::lround(stops[i][0] + f * (stops[i + 1][0] - stops[i][0]))),
                static_cast<int>(std::lround(stops[i][1] + f * (stops[i + 1][1] - stops[i][1]))),
                static_cast<int>(std::lround(stops[i][2] + f * (stops[i + 1][2] - stops[i][2]))));
  return buf;
}

std::string grey(double t) {
  const int v = static_cast<int>(std::lround(255 - 120 * std::clamp(t, 0.0, 1.0)));
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", v, v, v);
  return buf;
}

}  // namespace

Canvas::Canvas(double width, double height, Eigen::Vector2d world_min,
               Eigen::Vector2d world_max, double pad)
    : width_(width), height_(height), min_(world_min) {
  const Eigen::Vector2d span = world_max - world_min;
  if (!(span.x() > 0.0) || !(span.y() > 0.0)) throw std::invalid_argument("svg: empty extent");
  scale_ = std::min((width - 2 * pad) / span.x(), (height - 2 * pad) / span.y());
  offset_x_ = (width - scale_ * span.x()) / 2.0;
  offset_y_ = (height - scale_ * span.y()) / 2.0;
}

Eigen::Vector2d Canvas::to_px(const Eigen::Vector2d& w) const {
  return {offset_x_ + scale_ * (w.x() - min_.x()), height_ - offset_y_ - scale_ * (w.y() - min_.y())};
}

void Canvas::rect(double x, double y, double w, double h, const std::string& fill) {
  body_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" +
           num(h) + "\" fill=\"" + fill + "\"/>\n";
}

void Canvas::circle(const Eigen::Vector2d& c, double r_world, const std::string& fill,
                    const std::string& stroke, double opacity) {
  const Eigen::Vector2d p = to_px(c);
  body_ += "<circle cx=\"" + num(p.x()) + "\" cy=\"" + num(p.y()) + "\" r=\"" +
           num(r_world * scale_) + "\" fill=\"" + fill + "\" stroke=\"" + stroke +
           "\" fill-opacity=\"" + num(opacity) + "\"/>\n";
}

void Canvas::dot(const Eigen::Vector2d& c, double r_px, const std::string& fill) {
  const Eigen::Vector2d p = to_px(c);
  body_ += "<circle cx=\"" + num(p.x()) + "\" cy=\"" + num(p.y()) + "\" r=\"" + num(r_px) +
           "\" fill=\"" + fill + "\"/>\n";
}

void Canvas::polyline(const std::vector<Eigen::Vector2d>& pts, const std::string& stroke,
                      double width, bool closed) {
  if (pts.empty()) return;
  body_ += std::string("<") + (closed ? "polygon" : "polyline") + " fill=\"none\" stroke=\"" +
           stroke + "\" stroke-width=\"" + num(width) + "\" points=\"";
  for (const auto& w : pts) {
    const Eigen::Vector2d p = to_px(w);
    body_ += num(p.x()) + "," + num(p.y()) + " ";
  }
  body_ += "\"/>\n";
}

void Canvas::line(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const std::string& stroke,
                  double width) {
  const Eigen::Vector2d p = to_px(a), q = to_px(b);
  body_ += "<line x1=\"" + num(p.x()) + "\" y1=\"" + num(p.y()) + "\" x2=\"" + num(q.x()) +
           "\" y2=\"" + num(q.y()) + "\" stroke=\"" + stroke + "\" stroke-width=\"" + num(width) +
           "\"/>\n";
}

void Canvas::text(double px, double py, const std::string& s, int size) {
  body_ += "<text x=\"" + num(px) + "\" y=\"" + num(py) + "\" font-family=\"sans-serif\" font-size=\"" +
           std::to_string(size) + "\">" + escape(s) + "</text>\n";
}

void Canvas::embed(const Canvas& inner, double px, double py) {
  body_ += "<g transform=\"translate(" + num(px) + "," + num(py) + ")\">\n" + inner.body() +
           "</g>\n";
}

std::string Canvas::document() const {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width_) + "\" height=\"" +
         num(height_) + "\" viewBox=\"0 0 " + num(width_) + " " + num(height_) + "\">\n" +
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" + body_ + "</svg>\n";
}

void Canvas::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << document();
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

void rastrigin_snapshots(const std::string& path, const rastrigin::RastriginParams& params,
                         const std::vector<rastrigin::Snapshot>& snapshots) {
  // Per outer iteration: the ensemble after the first inner update and the
  // path of the mean across inner iterations.
  std::map<Index, std::vector<const rastrigin::Snapshot*>> last;
  for (const auto& s : snapshots) last[s.outer].push_back(&s);

  const double panel = 220.0;
  const int cols = std::max<int>(1, std::min<int>(5, static_cast<int>(last.size())));
  const int rows_n = std::max<int>(1, (static_cast<int>(last.size()) + cols - 1) / cols);
  Canvas page(cols * panel, rows_n * (panel + 20.0), {0.0, 0.0}, {1.0, 1.0}, 0.0);

  const double b = params.box;
  const int cells = 40;
  double lo = 1e300, hi = -1e300;
  std::vector<double> field(cells * cells);
  for (int i = 0; i < cells; ++i) {
    for (int j = 0; j < cells; ++j) {
      const Eigen::Vector2d x(-b + (i + 0.5) * 2 * b / cells, -b + (j + 0.5) * 2 * b / cells);
      const double v = rastrigin::forward(x);
      field[i * cells + j] = v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }

  int idx = 0;
  for (const auto& [outer, snaps] : last) {
    Canvas c(panel, panel, {-b, -b}, {b, b}, 8.0);
    const double cell = 2 * b / cells;
    for (int i = 0; i < cells; ++i) {
      for (int j = 0; j < cells; ++j) {
        const Eigen::Vector2d corner = c.to_px({-b + i * cell, -b + (j + 1) * cell});
        c.rect(corner.x(), corner.y(), cell * c.scale() + 0.3, cell * c.scale() + 0.3,
               grey((field[i * cells + j] - lo) / (hi - lo)));
      }
    }
    for (const auto& d : params.disks) c.circle(d.center, d.radius, "#d62728", "#8b0000", 0.35);
    const Matrix& first = snaps.front()->particles;
    for (Index p = 0; p < first.cols(); ++p) c.dot(first.col(p), 2.0, "#1f77b4");
    std::vector<Eigen::Vector2d> trail;
    for (const auto* s : snaps) trail.push_back(s->mean);
    c.polyline(trail, "#ff7f0e", 1.2);
    c.dot(snaps.back()->mean, 4.0, "#ff7f0e");
    page.embed(c, (idx % cols) * panel, (idx / cols) * (panel + 20.0) + 20.0);
    page.text((idx % cols) * panel + 8.0, (idx / cols) * (panel + 20.0) + 15.0,
              "outer iteration " + std::to_string(outer));
    ++idx;
  }
  page.save(path);
}

void race_track(const std::string& path, const racing::RaceEnvironment& env,
                const std::vector<StepRow>& rows) {
  const auto& t = env.track();
  const double margin = t.radius + t.half_width + 1.0;
  Canvas c(900.0, 900.0 * (2 * margin) / (t.straight_length + 2 * margin),
           {-margin, -margin}, {t.straight_length + margin, margin}, 10.0);

  const double len = racing::RaceEnvironment::track_length(t);
  std::vector<Eigen::Vector2d> inner, outer, center;
  const int n = 400;
  for (int i = 0; i < n; ++i) {
    const racing::RacePoint p = racing::RaceEnvironment::centerline(t, len * i / n);
    const Eigen::Vector2d normal(-std::sin(p.heading), std::cos(p.heading));
    center.push_back(p.position);
    inner.push_back(p.position + t.half_width * normal);
    outer.push_back(p.position - t.half_width * normal);
  }
  c.polyline(outer, "#444444", 1.5, true);
  c.polyline(inner, "#444444", 1.5, true);
  c.polyline(center, "#bbbbbb", 0.8, true);

  for (const auto& o : env.obstacles()) {
    c.circle(o.center, o.radius + env.margin(), "#f4a6a6", "none", 0.6);
    c.circle(o.center, o.radius, "#b22222", "none", 1.0);
  }

  double vmax = 1e-9;
  for (const auto& r : rows) vmax = std::max(vmax, r.speed);
  Eigen::Vector2d prev = racing::start_state(env).head<2>();
  for (const auto& r : rows) {
    const Eigen::Vector2d p = r.state.head<2>();
    c.line(prev, p, ramp(r.speed / vmax), 2.0);
    prev = p;
  }
  c.text(12.0, 20.0, "speed 0 to " + num(vmax) + " m/s, " + std::to_string(rows.size()) + " steps");
  c.save(path);
}

}  // namespace admm_eki::svg
