#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

#include "admm_eki/types.hpp"

namespace admm_eki {

/// Runs fn(i) for i in [0, count) on up to `threads` workers.
///
/// Work is split into contiguous chunks so results depend only on i. If any
/// call throws, the exception from the lowest index is rethrown after all
/// workers join.
template <class Fn>
void parallel_for(Index count, int threads, Fn&& fn) {
  if (threads <= 1 || count < 2) {
    for (Index i = 0; i < count; ++i) fn(i);
    return;
  }
  const Index workers = std::min<Index>(threads, count);
  std::vector<std::exception_ptr> errors(static_cast<size_t>(count));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (Index w = 0; w < workers; ++w) {
    const Index begin = count * w / workers;
    const Index end = count * (w + 1) / workers;
    pool.emplace_back([&, begin, end] {
      for (Index i = begin; i < end; ++i) {
        try {
          fn(i);
        } catch (...) {
          errors[static_cast<size_t>(i)] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace admm_eki
