#pragma once

#include <algorithm>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cubefuzz/attack.hpp"
#include "cubefuzz/types.hpp"

namespace cubefuzz {

/// Fraction of attempted attacks (skipped rows excluded) that found an
/// adversarial example.
inline double success_rate(const std::vector<AttackOutcome>& outcomes) {
  std::size_t attempted = 0;
  std::size_t found = 0;
  for (const AttackOutcome& o : outcomes) {
    if (o.status == AttackStatus::Skipped) continue;
    ++attempted;
    if (o.status == AttackStatus::AdversarialFound) ++found;
  }
  if (attempted == 0) throw std::invalid_argument("success_rate over no attempted attacks");
  return static_cast<double>(found) / static_cast<double>(attempted);
}

/// Mean over pairs of ||x - x_adv|| / ||x|| in the L-infinity norm.
inline double avg_distortion_linf(const std::vector<std::pair<Image, Image>>& pairs) {
  if (pairs.empty()) throw std::invalid_argument("avg_distortion over no pairs");
  double sum = 0.0;
  for (const auto& [x, x_adv] : pairs) {
    double denom = linf_norm(x);
    if (denom == 0.0) throw std::invalid_argument("avg_distortion: zero-norm original");
    sum += linf_distance(x, x_adv) / denom;
  }
  return sum / static_cast<double>(pairs.size());
}

inline double avg_distortion_l2(const std::vector<std::pair<Image, Image>>& pairs) {
  if (pairs.empty()) throw std::invalid_argument("avg_distortion over no pairs");
  double sum = 0.0;
  for (const auto& [x, x_adv] : pairs) {
    double denom = l2_norm(x);
    if (denom == 0.0) throw std::invalid_argument("avg_distortion: zero-norm original");
    sum += l2_distance(x, x_adv) / denom;
  }
  return sum / static_cast<double>(pairs.size());
}

struct QueryStats {
  double average = 0.0;
  double median = 0.0;
};

/// Average and median attack queries over successful outcomes only;
/// refinement queries excluded. Even-sized medians are the mean of the two
/// central values (half-integers allowed).
inline QueryStats query_stats(const std::vector<AttackOutcome>& outcomes) {
  std::vector<double> q;
  for (const AttackOutcome& o : outcomes)
    if (o.status == AttackStatus::AdversarialFound)
      q.push_back(static_cast<double>(o.attack_queries));
  if (q.empty()) throw std::invalid_argument("query_stats over no successful attacks");
  std::sort(q.begin(), q.end());
  double sum = 0.0;
  for (double v : q) sum += v;
  QueryStats s;
  s.average = sum / static_cast<double>(q.size());
  std::size_t mid = q.size() / 2;
  s.median = q.size() % 2 == 1 ? q[mid] : 0.5 * (q[mid - 1] + q[mid]);
  return s;
}

}  // namespace cubefuzz
