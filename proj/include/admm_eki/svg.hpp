#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "admm_eki/mpc.hpp"
#include "admm_eki/racing.hpp"
#include "admm_eki/rastrigin.hpp"

namespace admm_eki::svg {

/// Minimal SVG document with a world-to-pixel transform (y up).
class Canvas {
 public:
  Canvas(double width, double height, Eigen::Vector2d world_min, Eigen::Vector2d world_max,
         double pad = 10.0);

  void rect(double x, double y, double w, double h, const std::string& fill);
  void circle(const Eigen::Vector2d& c, double r_world, const std::string& fill,
              const std::string& stroke = "none", double opacity = 1.0);
  void dot(const Eigen::Vector2d& c, double r_px, const std::string& fill);
  void polyline(const std::vector<Eigen::Vector2d>& pts, const std::string& stroke,
                double width, bool closed = false);
  void line(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const std::string& stroke,
            double width);
  void text(double px, double py, const std::string& s, int size = 12);
  /// Places a nested canvas (panel) at pixel offset (px, py).
  void embed(const Canvas& inner, double px, double py);

  double width() const { return width_; }
  double height() const { return height_; }
  Eigen::Vector2d to_px(const Eigen::Vector2d& w) const;
  double scale() const { return scale_; }

  std::string body() const { return body_; }
  std::string document() const;
  void save(const std::string& path) const;

 private:
  double width_, height_;
  Eigen::Vector2d min_;
  double scale_;
  double offset_x_, offset_y_;
  std::string body_;
};

/// Panels of particle snapshots (last inner iteration of each outer
/// iteration) over a shaded Rastrigin landscape with the constraint disks.
void rastrigin_snapshots(const std::string& path, const rastrigin::RastriginParams& params,
                         const std::vector<rastrigin::Snapshot>& snapshots);

/// Track boundaries, raceline, obstacles and the driven trajectory colored
/// by speed.
void race_track(const std::string& path, const racing::RaceEnvironment& env,
                const std::vector<StepRow>& rows);

}  // namespace admm_eki::svg
