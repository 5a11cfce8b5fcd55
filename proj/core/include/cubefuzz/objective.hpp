#pragma once

#include <cstddef>
#include <stdexcept>

#include "cubefuzz/types.hpp"

namespace cubefuzz {

/// A scalar objective read off a single score vector; one oracle query per value.
struct Objective {
  enum class Kind { BinaryMargin, PairwiseMargin, ClassScore };

  Kind kind = Kind::BinaryMargin;
  std::size_t i = 0;
  std::size_t j = 0;

  double value(const ScoreVector& scores) const {
    switch (kind) {
      case Kind::BinaryMargin:
        return scores[0] - scores[1];
      case Kind::PairwiseMargin:
        return scores[i] - scores[j];
      case Kind::ClassScore:
        return scores[i];
    }
    throw std::logic_error("unreachable");
  }

  // f for a two-class model, oriented so f > 0 means class index 0
  static Objective binary_margin() { return Objective{Kind::BinaryMargin, 0, 0}; }
  // g_ij = f_i - f_j
  static Objective pairwise(std::size_t i, std::size_t j) {
    return Objective{Kind::PairwiseMargin, i, j};
  }
  static Objective class_score(std::size_t i) { return Objective{Kind::ClassScore, i, 0}; }
};

}  // namespace cubefuzz
