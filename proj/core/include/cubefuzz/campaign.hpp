#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cubefuzz/attack.hpp"
#include "cubefuzz/dataset.hpp"
#include "cubefuzz/oracle.hpp"

namespace cubefuzz {

struct CampaignRow {
  std::size_t index = 0;
  Label original;
  AttackOutcome outcome;
  std::string error;  // non-empty iff outcome.status == Error
};

struct CampaignReport {
  std::vector<CampaignRow> rows;  // input order
  std::size_t attempted = 0;
  std::size_t succeeded = 0;
  std::size_t skipped = 0;
  std::size_t errors = 0;
  double asr = 0.0;
  double avg_dr_linf = 0.0;    // NaN when no successes
  double avg_dr_l2 = 0.0;      // NaN when no successes
  double avg_queries = 0.0;    // NaN when no successes
  double median_queries = 0.0; // NaN when no successes
  AttackConfig config;
  std::string model_id;

  std::string to_json() const;
  std::string to_csv() const;
};

/// Runs the composite attack over every image, skipping misclassified
/// originals. `backend_factory` is called once per image so each run owns its
/// oracle connection; it must be callable from worker threads. Per-image seeds
/// are config seed XOR image index, so the report is parallelism-invariant.
CampaignReport run_campaign(const Dataset& ds,
                            const std::function<ScoreOracle::Backend()>& backend_factory,
                            const AttackConfig& cfg, std::size_t parallelism,
                            const std::string& model_id);

}  // namespace cubefuzz
