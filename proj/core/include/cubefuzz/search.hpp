#pragma once

#include <optional>
#include <vector>

#include "cubefuzz/grouping.hpp"
#include "cubefuzz/objective.hpp"
#include "cubefuzz/oracle.hpp"
#include "cubefuzz/region.hpp"
#include "cubefuzz/rng.hpp"

namespace cubefuzz {

struct SweepResult {
  Image point;
  std::optional<ScoreVector> scores;  // scores at point, when known
  double objective_value = 0.0;       // cached objective at point (exact when scores set)
  bool complete = true;               // false when the budget ran out mid-sweep
  bool adversarial = false;           // an evaluated point flipped the label
  std::uint64_t queries_used = 0;
};

/// One coordinate-wise pass selecting, per dimension, the interval endpoint
/// that decreases (increases) the objective. Exact for linear objectives.
/// When x is a vertex the side equal to the current coordinate reuses the
/// cached score, so the pass consumes at most n fresh queries (n+1 without a
/// cached score); from a non-vertex it consumes at most 2n.
SweepResult approx_min(const Image& x, const Objective& obj, ScoreOracle& oracle,
                       const SearchRegion& region,
                       std::optional<ScoreVector> cached_scores = std::nullopt,
                       std::optional<Label> original = std::nullopt);
SweepResult approx_max(const Image& x, const Objective& obj, ScoreOracle& oracle,
                       const SearchRegion& region,
                       std::optional<ScoreVector> cached_scores = std::nullopt,
                       std::optional<Label> original = std::nullopt);

/// Group-wise pass over a vertex: each group is compared at all-upper vs
/// all-lower bounds, one fresh query per group, candidates issued in batches.
/// Groups are visited in a seeded-random order.
SweepResult approx_min_grouped(const Image& x, const Objective& obj, ScoreOracle& oracle,
                               const SearchRegion& region, const Grouping& grouping,
                               SplitMix64& rng, std::size_t batch_size,
                               ScoreVector cached_scores,
                               std::optional<Label> original = std::nullopt);

/// Maps a per-dimension outside-or-on-the-boundary point to a vertex of the
/// region: u_i if x_i >= u_i, l_i if x_i <= l_i. Idempotent.
Image project(const SearchRegion& region, const Image& x, bool nearest_bound_fallback = false);

struct VertexExtrema {
  Image min_vertex;
  Image max_vertex;
  double min_value = 0.0;
  double max_value = 0.0;
};

/// Exhaustive 2^n vertex enumeration; verification oracle only. Ties break
/// toward the lexicographically lower vertex. Charge to a verification
/// ledger, never the attack ledger.
VertexExtrema brute_force_extremum(const Objective& obj, ScoreOracle& oracle,
                                   const SearchRegion& region);

}  // namespace cubefuzz
