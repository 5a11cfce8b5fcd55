#pragma once

#include <atomic>
#include <cstdint>
#include <stdexcept>

namespace cubefuzz {

enum class QueryPhase { Attack, Refinement };

struct budget_exhausted_error : std::runtime_error {
  budget_exhausted_error() : std::runtime_error("query budget exhausted") {}
};

/// Attack-query and refinement-query counters against budget L.
/// Counters only ever increase; the attack counter never exceeds the budget.
class QueryLedger {
 public:
  // budget 0 is allowed and means no queries at all
  explicit QueryLedger(std::uint64_t budget) : budget_(budget) {}

  std::uint64_t budget() const { return budget_; }
  std::uint64_t attack_queries() const { return attack_.load(); }
  std::uint64_t refinement_queries() const { return refinement_.load(); }

  std::uint64_t remaining(QueryPhase phase) const {
    std::uint64_t used = phase == QueryPhase::Attack ? attack_.load() : refinement_.load();
    return used >= budget_ ? 0 : budget_ - used;
  }

  void charge(QueryPhase phase, std::uint64_t count) {
    if (phase == QueryPhase::Attack) {
      std::uint64_t prev = attack_.fetch_add(count);
      if (prev + count > budget_) {
        attack_.fetch_sub(count);
        throw budget_exhausted_error{};
      }
    } else {
      refinement_.fetch_add(count);
    }
  }

 private:
  std::atomic<std::uint64_t> attack_{0};
  std::atomic<std::uint64_t> refinement_{0};
  std::uint64_t budget_;
};

}  // namespace cubefuzz
