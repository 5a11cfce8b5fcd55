#pragma once

#include <algorithm>
#include <vector>

#include "cubefuzz/types.hpp"

namespace cubefuzz {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Interval&) const = default;
};

/// The n-dimensional cube I_1 x ... x I_n, clamped to the valid pixel range.
struct SearchRegion {
  std::vector<Interval> intervals;
  Shape shape;

  std::size_t size() const { return intervals.size(); }

  bool contains(const Image& x) const {
    if (x.size() != intervals.size()) return false;
    for (std::size_t i = 0; i < intervals.size(); ++i)
      if (x.data[i] < intervals[i].lo || x.data[i] > intervals[i].hi) return false;
    return true;
  }

  bool is_vertex(const Image& x) const {
    if (x.size() != intervals.size()) return false;
    for (std::size_t i = 0; i < intervals.size(); ++i)
      if (x.data[i] != intervals[i].lo && x.data[i] != intervals[i].hi) return false;
    return true;
  }

  Image lower_vertex() const {
    Image v;
    v.shape = shape;
    v.data.reserve(intervals.size());
    for (const Interval& iv : intervals) v.data.push_back(iv.lo);
    return v;
  }

  Image upper_vertex() const {
    Image v;
    v.shape = shape;
    v.data.reserve(intervals.size());
    for (const Interval& iv : intervals) v.data.push_back(iv.hi);
    return v;
  }

  void validate() const {
    if (intervals.empty() || intervals.size() != shape.size())
      throw std::invalid_argument("region intervals do not match shape");
    for (const Interval& iv : intervals) {
      if (!(iv.lo <= iv.hi)) throw std::invalid_argument("region interval with lo > hi");
      if (iv.lo < kPixelMin || iv.hi > kPixelMax)
        throw std::invalid_argument("region interval outside [0, 255]");
    }
  }
};

/// B(x,d) intersected with [0,255]^n.
inline SearchRegion make_region(const Image& x, double d) {
  if (d < 0.0) throw std::invalid_argument("make_region: d must be non-negative");
  SearchRegion r;
  r.shape = x.shape;
  r.intervals.reserve(x.size());
  for (double v : x.data)
    r.intervals.push_back(Interval{std::max(kPixelMin, v - d), std::min(kPixelMax, v + d)});
  return r;
}

}  // namespace cubefuzz
