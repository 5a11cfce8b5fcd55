#include "cubefuzz/search.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cubefuzz {

namespace {

// Endpoint comparison: the upper endpoint wins ties.
// minimize: keep upper iff f(upper) <= f(lower); maximize: iff f(upper) > f(lower).
bool select_upper(double f_upper, double f_lower, bool minimize) {
  return minimize ? (f_upper <= f_lower) : (f_upper > f_lower);
}

SweepResult sweep_from_vertex(const Image& x, const Objective& obj, ScoreOracle& oracle,
                              const SearchRegion& region, bool minimize,
                              std::optional<ScoreVector> cached_scores,
                              const std::optional<Label>& original) {
  SweepResult res;
  res.point = x;

  if (!cached_scores) {
    if (oracle.remaining() == 0) {
      res.complete = false;
      res.objective_value = std::numeric_limits<double>::quiet_NaN();
      return res;
    }
    cached_scores = oracle.evaluate(x);
    ++res.queries_used;
  }
  res.scores = *cached_scores;
  res.objective_value = obj.value(*cached_scores);
  if (original && argmax_label(*cached_scores) != *original) {
    res.adversarial = true;
    return res;
  }

  for (std::size_t i = 0; i < region.size(); ++i) {
    const Interval& iv = region.intervals[i];
    if (iv.lo == iv.hi) continue;
    bool at_upper = res.point.data[i] == iv.hi;

    if (oracle.remaining() == 0) {
      res.complete = false;
      return res;
    }
    Image candidate = res.point;
    candidate.data[i] = at_upper ? iv.lo : iv.hi;
    ScoreVector cand_scores = oracle.evaluate(candidate);
    ++res.queries_used;
    double cand_value = obj.value(cand_scores);

    double f_upper = at_upper ? res.objective_value : cand_value;
    double f_lower = at_upper ? cand_value : res.objective_value;
    bool accept_candidate = select_upper(f_upper, f_lower, minimize) != at_upper;

    if (original && argmax_label(cand_scores) != *original) {
      res.point = std::move(candidate);
      res.scores = std::move(cand_scores);
      res.objective_value = cand_value;
      res.adversarial = true;
      return res;
    }
    if (accept_candidate) {
      res.point = std::move(candidate);
      res.scores = std::move(cand_scores);
      res.objective_value = cand_value;
    }
  }
  return res;
}

// Per-dimension comparison relative to the fixed base point, two evaluations
// per dimension (one when the base sits on an endpoint and its score is known).
SweepResult sweep_from_interior(const Image& x, const Objective& obj, ScoreOracle& oracle,
                                const SearchRegion& region, bool minimize,
                                const std::optional<ScoreVector>& cached_scores,
                                const std::optional<Label>& original) {
  SweepResult res;
  res.point = x;
  res.scores.reset();
  res.objective_value = std::numeric_limits<double>::quiet_NaN();

  std::optional<double> base_value;
  if (cached_scores) base_value = obj.value(*cached_scores);

  for (std::size_t i = 0; i < region.size(); ++i) {
    const Interval& iv = region.intervals[i];
    if (iv.lo == iv.hi) {
      res.point.data[i] = iv.lo;
      continue;
    }

    auto side_value = [&](double bound) -> std::optional<double> {
      if (x.data[i] == bound && base_value) return base_value;
      if (oracle.remaining() == 0) return std::nullopt;
      Image candidate = x;
      candidate.data[i] = bound;
      ScoreVector s = oracle.evaluate(candidate);
      ++res.queries_used;
      if (original && argmax_label(s) != *original) {
        res.adversarial = true;
        res.point = std::move(candidate);
        res.scores = std::move(s);
        res.objective_value = obj.value(*res.scores);
        return std::nullopt;  // caller checks res.adversarial
      }
      return obj.value(s);
    };

    std::optional<double> f_upper = side_value(iv.hi);
    if (res.adversarial) return res;
    if (!f_upper) {
      res.complete = false;
      return res;
    }
    std::optional<double> f_lower = side_value(iv.lo);
    if (res.adversarial) return res;
    if (!f_lower) {
      res.complete = false;
      return res;
    }
    res.point.data[i] = select_upper(*f_upper, *f_lower, minimize) ? iv.hi : iv.lo;
  }
  return res;
}

SweepResult sweep(const Image& x, const Objective& obj, ScoreOracle& oracle,
                  const SearchRegion& region, bool minimize,
                  std::optional<ScoreVector> cached_scores, const std::optional<Label>& original) {
  if (x.size() != region.size()) throw std::invalid_argument("point/region dimension mismatch");
  if (!region.contains(x)) throw std::invalid_argument("point outside region");
  if (region.is_vertex(x))
    return sweep_from_vertex(x, obj, oracle, region, minimize, std::move(cached_scores), original);
  return sweep_from_interior(x, obj, oracle, region, minimize, cached_scores, original);
}

}  // namespace

SweepResult approx_min(const Image& x, const Objective& obj, ScoreOracle& oracle,
                       const SearchRegion& region, std::optional<ScoreVector> cached_scores,
                       std::optional<Label> original) {
  return sweep(x, obj, oracle, region, /*minimize=*/true, std::move(cached_scores), original);
}

SweepResult approx_max(const Image& x, const Objective& obj, ScoreOracle& oracle,
                       const SearchRegion& region, std::optional<ScoreVector> cached_scores,
                       std::optional<Label> original) {
  return sweep(x, obj, oracle, region, /*minimize=*/false, std::move(cached_scores), original);
}

SweepResult approx_min_grouped(const Image& x, const Objective& obj, ScoreOracle& oracle,
                               const SearchRegion& region, const Grouping& grouping,
                               SplitMix64& rng, std::size_t batch_size,
                               ScoreVector cached_scores, std::optional<Label> original) {
  if (!region.is_vertex(x)) throw std::invalid_argument("grouped pass requires a vertex start");
  if (batch_size == 0) throw std::invalid_argument("batch size must be >= 1");

  SweepResult res;
  res.point = x;
  res.scores = cached_scores;
  res.objective_value = obj.value(cached_scores);

  std::vector<std::size_t> order(grouping.group_count());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);

  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    std::size_t want = std::min(batch_size, order.size() - start);
    std::uint64_t room = oracle.remaining();
    if (room == 0) {
      res.complete = false;
      return res;
    }
    std::size_t take = static_cast<std::size_t>(std::min<std::uint64_t>(want, room));

    // one candidate per group: the group flipped to its opposite bound,
    // relative to the batch-start base point
    const Image base = res.point;
    double f_base = res.objective_value;
    struct Candidate {
      std::size_t group;
      bool to_upper;  // candidate puts the group at upper bounds
      std::vector<std::size_t> idx;
    };
    std::vector<Candidate> cands;
    std::vector<Image> inputs;
    for (std::size_t b = 0; b < take; ++b) {
      std::size_t group = order[start + b];
      auto idx = grouping.indices(group);
      // treat the group as at-upper when all coords sit on their upper bound
      bool all_upper = true;
      for (std::size_t i : idx)
        if (base.data[i] != region.intervals[i].hi) all_upper = false;
      Image cand = base;
      for (std::size_t i : idx)
        cand.data[i] = all_upper ? region.intervals[i].lo : region.intervals[i].hi;
      cands.push_back(Candidate{group, !all_upper, std::move(idx)});
      inputs.push_back(std::move(cand));
    }

    std::vector<ScoreVector> scores = oracle.evaluate_batch(inputs);
    res.queries_used += inputs.size();

    // apply improving flips cumulatively, in batch order, judged against the
    // batch-start base point
    std::size_t accepted = 0;
    for (std::size_t b = 0; b < cands.size(); ++b) {
      double f_cand = obj.value(scores[b]);
      if (original && argmax_label(scores[b]) != *original) {
        res.point = inputs[b];
        res.scores = scores[b];
        res.objective_value = f_cand;
        res.adversarial = true;
        return res;
      }
      double f_upper = cands[b].to_upper ? f_cand : f_base;
      double f_lower = cands[b].to_upper ? f_base : f_cand;
      bool flip = select_upper(f_upper, f_lower, /*minimize=*/true) == cands[b].to_upper;
      if (flip) {
        if (accepted == 0) res.point = base;
        for (std::size_t i : cands[b].idx)
          res.point.data[i] = cands[b].to_upper ? region.intervals[i].hi : region.intervals[i].lo;
        ++accepted;
        if (accepted == 1) {
          res.scores = scores[b];
          res.objective_value = f_cand;
        } else {
          // combined effect of several flips is only measured per-flip; keep a
          // conservative cached value and drop the stale score vector
          res.scores.reset();
          res.objective_value = std::min(res.objective_value, f_cand);
        }
      }
    }
    if (take < want) {
      res.complete = false;
      return res;
    }
  }
  return res;
}

Image project(const SearchRegion& region, const Image& x, bool nearest_bound_fallback) {
  if (x.size() != region.size()) throw std::invalid_argument("point/region dimension mismatch");
  Image out = x;
  for (std::size_t i = 0; i < region.size(); ++i) {
    const Interval& iv = region.intervals[i];
    double v = x.data[i];
    if (v >= iv.hi)
      out.data[i] = iv.hi;
    else if (v <= iv.lo)
      out.data[i] = iv.lo;
    else if (nearest_bound_fallback)
      out.data[i] = (v - iv.lo <= iv.hi - v) ? iv.lo : iv.hi;
    else
      throw std::invalid_argument("project: coordinate strictly inside the region");
  }
  return out;
}

VertexExtrema brute_force_extremum(const Objective& obj, ScoreOracle& oracle,
                                   const SearchRegion& region) {
  std::size_t n = region.size();
  if (n > 20) throw std::invalid_argument("brute_force_extremum limited to n <= 20");

  VertexExtrema ext;
  Image v = region.lower_vertex();
  bool first = true;
  // lexicographic order, dimension 0 most significant, lower endpoint first;
  // strict improvement keeps the lexicographically lowest extremal vertex
  std::uint64_t total = 1ULL << n;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    for (std::size_t i = 0; i < n; ++i) {
      bool upper = (mask >> (n - 1 - i)) & 1;
      v.data[i] = upper ? region.intervals[i].hi : region.intervals[i].lo;
    }
    double val = obj.value(oracle.evaluate(v));
    if (first || val < ext.min_value) {
      ext.min_value = val;
      ext.min_vertex = v;
    }
    if (first || val > ext.max_value) {
      ext.max_value = val;
      ext.max_vertex = v;
    }
    first = false;
  }
  return ext;
}

}  // namespace cubefuzz
