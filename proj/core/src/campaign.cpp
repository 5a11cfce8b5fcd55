#include "cubefuzz/campaign.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <thread>
#include <utility>

#include <json.hpp>

#include "cubefuzz/metrics.hpp"

namespace cubefuzz {

using nlohmann::json;

namespace {

const char* variant_name(AttackVariant v) {
  return v == AttackVariant::PairwiseMargin ? "pairwise" : "class-score";
}

json config_json(const AttackConfig& cfg) {
  json j;
  j["d"] = cfg.d;
  j["budget"] = cfg.budget;
  j["max_num"] = cfg.max_num;
  j["variant"] = variant_name(cfg.variant);
  j["group_side"] = cfg.group_side;
  j["split_factor"] = cfg.split_factor;
  j["batch_size"] = cfg.batch_size;
  j["seed"] = cfg.seed;
  j["refine"] = cfg.refine;
  j["refine_tolerance"] = cfg.refine_tolerance;
  return j;
}

json number_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CampaignRow attack_one(const Dataset& ds, std::size_t i,
                       const std::function<ScoreOracle::Backend()>& backend_factory,
                       const AttackConfig& cfg) {
  CampaignRow row;
  row.index = i;
  row.original = ds.labels[i];
  const Image& x = ds.images[i];
  try {
    ScoreOracle::Backend backend = backend_factory();

    // screening pass: attack only correctly classified originals
    ScoreVector scores = backend({x})[0];
    if (argmax_label(scores) != ds.labels[i]) {
      row.outcome.status = AttackStatus::Skipped;
      row.outcome.final_input = x;
      row.outcome.final_label = argmax_label(scores);
      return row;
    }

    AttackConfig per_image = cfg;
    per_image.seed = cfg.seed ^ static_cast<std::uint64_t>(i);
    QueryLedger ledger(cfg.budget);
    ScoreOracle oracle(std::move(backend), ledger);
    row.outcome = run_attack(x, ds.labels[i], oracle, per_image);
  } catch (const std::exception& e) {
    row.outcome = AttackOutcome{};
    row.outcome.status = AttackStatus::Error;
    row.outcome.final_input = x;
    row.outcome.final_label = ds.labels[i];
    row.error = e.what();
  }
  return row;
}

}  // namespace

CampaignReport run_campaign(const Dataset& ds,
                            const std::function<ScoreOracle::Backend()>& backend_factory,
                            const AttackConfig& cfg, std::size_t parallelism,
                            const std::string& model_id) {
  ds.validate();
  cfg.validate();
  if (parallelism == 0) throw std::invalid_argument("parallelism must be >= 1");

  // reject out-of-range labels up front, before any attack runs
  std::size_t m = backend_factory()({ds.images[0]})[0].size();
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (ds.labels[i].index >= m)
      throw std::invalid_argument("dataset label " + std::to_string(ds.labels[i].index) +
                                  " at image " + std::to_string(i) +
                                  " outside the model's " + std::to_string(m) + " classes");

  CampaignReport report;
  report.config = cfg;
  report.model_id = model_id;
  report.rows.resize(ds.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= ds.size()) break;
      report.rows[i] = attack_one(ds, i, backend_factory, cfg);
    }
  };
  if (parallelism == 1 || ds.size() == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    std::size_t workers = std::min(parallelism, ds.size());
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<AttackOutcome> outcomes;
  std::vector<std::pair<Image, Image>> success_pairs;
  for (const CampaignRow& row : report.rows) {
    switch (row.outcome.status) {
      case AttackStatus::Skipped:
        ++report.skipped;
        continue;
      case AttackStatus::Error:
        ++report.errors;
        ++report.attempted;
        break;
      case AttackStatus::AdversarialFound:
        ++report.succeeded;
        ++report.attempted;
        success_pairs.emplace_back(ds.images[row.index], row.outcome.final_input);
        break;
      default:
        ++report.attempted;
        break;
    }
    outcomes.push_back(row.outcome);
  }
  if (report.attempted == 0)
    throw std::runtime_error("campaign: no correctly classified images to attack");

  report.asr = success_rate(outcomes);
  double nan = std::numeric_limits<double>::quiet_NaN();
  if (report.succeeded > 0) {
    report.avg_dr_linf = avg_distortion_linf(success_pairs);
    report.avg_dr_l2 = avg_distortion_l2(success_pairs);
    QueryStats qs = query_stats(outcomes);
    report.avg_queries = qs.average;
    report.median_queries = qs.median;
  } else {
    report.avg_dr_linf = nan;
    report.avg_dr_l2 = nan;
    report.avg_queries = nan;
    report.median_queries = nan;
  }
  return report;
}

std::string CampaignReport::to_json() const {
  json j;
  j["config"] = config_json(config);
  j["model"] = model_id;
  j["counts"] = {{"total", rows.size()},
                 {"attempted", attempted},
                 {"succeeded", succeeded},
                 {"skipped", skipped},
                 {"errors", errors}};
  j["aggregates"] = {{"success_rate", asr},
                     {"avg_distortion_linf", number_or_null(avg_dr_linf)},
                     {"avg_distortion_l2", number_or_null(avg_dr_l2)},
                     {"avg_queries", number_or_null(avg_queries)},
                     {"median_queries", number_or_null(median_queries)}};
  json jrows = json::array();
  for (const CampaignRow& row : rows) {
    json r;
    r["index"] = row.index;
    r["status"] = to_string(row.outcome.status);
    r["original_label"] = row.original.index;
    r["final_label"] = row.outcome.final_label.index;
    r["attack_queries"] = row.outcome.attack_queries;
    r["refinement_queries"] = row.outcome.refinement_queries;
    r["linf"] = row.outcome.linf;
    r["l2"] = row.outcome.l2;
    if (!row.error.empty()) r["error"] = row.error;
    jrows.push_back(std::move(r));
  }
  j["rows"] = std::move(jrows);
  return j.dump(2) + "\n";
}

std::string CampaignReport::to_csv() const {
  std::string out = "# model=" + model_id + " d=" + format_double(config.d) +
                    " budget=" + std::to_string(config.budget) +
                    " max_num=" + std::to_string(config.max_num) +
                    " variant=" + variant_name(config.variant) +
                    " group_side=" + std::to_string(config.group_side) +
                    " split_factor=" + std::to_string(config.split_factor) +
                    " batch_size=" + std::to_string(config.batch_size) +
                    " seed=" + std::to_string(config.seed) +
                    " refine=" + (config.refine ? "1" : "0") +
                    " refine_tolerance=" + format_double(config.refine_tolerance) + "\n";
  out +=
      "index,status,original_label,final_label,attack_queries,refinement_queries,linf,l2,error\n";
  for (const CampaignRow& row : rows) {
    out += std::to_string(row.index);
    out += ',';
    out += to_string(row.outcome.status);
    out += ',';
    out += std::to_string(row.original.index);
    out += ',';
    out += std::to_string(row.outcome.final_label.index);
    out += ',';
    out += std::to_string(row.outcome.attack_queries);
    out += ',';
    out += std::to_string(row.outcome.refinement_queries);
    out += ',';
    out += format_double(row.outcome.linf);
    out += ',';
    out += format_double(row.outcome.l2);
    out += ',';
    out += row.error;
    out += '\n';
  }
  return out;
}

}  // namespace cubefuzz
