#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cubefuzz/oracle.hpp"
#include "cubefuzz/region.hpp"
#include "cubefuzz/search.hpp"

namespace cubefuzz {

enum class AttackStatus { AdversarialFound, BudgetExhausted, MaxIterations, Skipped, Error };

std::string to_string(AttackStatus s);

enum class AttackVariant { PairwiseMargin, ClassScore };

struct AttackConfig {
  double d = 8.0;               // L-inf radius on the 0--255 scale
  std::uint64_t budget = 20000; // query budget L
  std::uint64_t max_num = 0;    // iteration cap; 0 = budget-limited
  AttackVariant variant = AttackVariant::PairwiseMargin;
  std::size_t group_side = 4;   // initial group side k
  std::size_t split_factor = 2; // m
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  bool refine = true;
  double refine_tolerance = 0.5;  // bisect bracket width, 0--255 scale

  void validate() const;
};

struct PassStats {
  std::size_t groups = 0;
  std::uint64_t queries = 0;
  double objective = 0.0;
  bool operator==(const PassStats&) const = default;
};

struct AttackOutcome {
  AttackStatus status = AttackStatus::Error;
  Image final_input;
  Label final_label;
  std::uint64_t attack_queries = 0;
  std::uint64_t refinement_queries = 0;
  double linf = 0.0;  // vs the original input
  double l2 = 0.0;
  std::vector<double> trace;                       // per-pass objective values
  std::vector<PassStats> passes;                   // hierarchy instrumentation
  std::vector<std::size_t> selected_objectives;    // multiclass: j chosen per iteration
  std::size_t iterations = 0;
  bool operator==(const AttackOutcome&) const = default;
};

/// Iterative full-dimension linear approximation for a two-class model
/// (objective f = score_0 - score_1; f = 0 counts as the second class).
AttackOutcome ds_binary(const Image& x, const Image& x_init, Label original, ScoreOracle& oracle,
                        const AttackConfig& cfg);

/// Per iteration minimizes the pairwise margin g_ir with the smallest current
/// value (tie toward the lowest class index).
AttackOutcome ds_multiclass(const Image& x, const Image& x_init, Label original,
                            ScoreOracle& oracle, const AttackConfig& cfg);

/// Variant minimizing the original class score f_i every iteration.
AttackOutcome ds_multiclass_alt(const Image& x, const Image& x_init, Label original,
                                ScoreOracle& oracle, const AttackConfig& cfg);

/// Hierarchical grouping: k x k blocks, single-step grouped passes, blocks
/// split by m x m after each pass while the side allows it.
AttackOutcome ds_hierarchy(const Image& x, const Image& x_init, Label original,
                           ScoreOracle& oracle, const AttackConfig& cfg);

/// Bisect-shrink of the radius alternated with re-search; all queries charged
/// to the refinement counter. trace holds the accepted d' sequence.
AttackOutcome ds_refinement(const Image& x, const Image& x_adv, Label original,
                            ScoreOracle& oracle, const AttackConfig& cfg);

/// Uniformly random vertices of B(x,d), one query each.
AttackOutcome random_fuzz_baseline(const Image& x, Label original, ScoreOracle& oracle,
                                   const AttackConfig& cfg);

/// The standard recipe: ds_hierarchy, then ds_refinement on success.
AttackOutcome run_attack(const Image& x, Label original, ScoreOracle& oracle,
                         const AttackConfig& cfg);

}  // namespace cubefuzz
