#pragma once

#include <functional>
#include <vector>

#include "cubefuzz/ledger.hpp"
#include "cubefuzz/types.hpp"

namespace cubefuzz {

/// The only gateway to the classifier. Every evaluation of one input charges
/// the active phase counter by one; a batch of B inputs charges B.
class ScoreOracle {
 public:
  using Backend = std::function<std::vector<ScoreVector>(const std::vector<Image>&)>;

  ScoreOracle(Backend backend, QueryLedger& ledger)
      : backend_(std::move(backend)), ledger_(&ledger) {}

  QueryLedger& ledger() { return *ledger_; }
  const QueryLedger& ledger() const { return *ledger_; }

  QueryPhase phase() const { return phase_; }
  void set_phase(QueryPhase p) { phase_ = p; }

  std::uint64_t remaining() const { return ledger_->remaining(phase_); }

  ScoreVector evaluate(const Image& x) {
    ledger_->charge(phase_, 1);
    auto out = backend_({x});
    if (out.size() != 1) throw std::runtime_error("backend returned wrong batch size");
    return std::move(out[0]);
  }

  std::vector<ScoreVector> evaluate_batch(const std::vector<Image>& xs) {
    if (xs.empty()) return {};
    ledger_->charge(phase_, xs.size());
    auto out = backend_(xs);
    if (out.size() != xs.size()) throw std::runtime_error("backend returned wrong batch size");
    return out;
  }

  /// True iff argmax of scores at x differs from the original label. One query.
  bool is_adversarial(const Image& x, Label original) {
    return argmax_label(evaluate(x)) != original;
  }

 private:
  Backend backend_;
  QueryLedger* ledger_;
  QueryPhase phase_ = QueryPhase::Attack;
};

}  // namespace cubefuzz
