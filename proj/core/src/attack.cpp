#include "cubefuzz/attack.hpp"

#include <cmath>
#include <stdexcept>

namespace cubefuzz {

std::string to_string(AttackStatus s) {
  switch (s) {
    case AttackStatus::AdversarialFound: return "adversarial-found";
    case AttackStatus::BudgetExhausted: return "budget-exhausted";
    case AttackStatus::MaxIterations: return "max-iterations";
    case AttackStatus::Skipped: return "skipped";
    case AttackStatus::Error: return "error";
  }
  return "unknown";
}

void AttackConfig::validate() const {
  if (!(d > 0.0)) throw std::invalid_argument("d must be positive");
  if (group_side < 1) throw std::invalid_argument("group side must be >= 1");
  if (split_factor < 2) throw std::invalid_argument("split factor must be >= 2");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (!(refine_tolerance > 0.0)) throw std::invalid_argument("refine tolerance must be positive");
}

namespace {

struct LedgerSnapshot {
  std::uint64_t attack;
  std::uint64_t refinement;
  explicit LedgerSnapshot(const QueryLedger& l)
      : attack(l.attack_queries()), refinement(l.refinement_queries()) {}
};

void finalize(AttackOutcome& out, const Image& x, const QueryLedger& ledger,
              const LedgerSnapshot& before) {
  out.attack_queries = ledger.attack_queries() - before.attack;
  out.refinement_queries = ledger.refinement_queries() - before.refinement;
  out.linf = linf_distance(x, out.final_input);
  out.l2 = l2_distance(x, out.final_input);
}

Label binary_label(double f) { return f > 0.0 ? Label{0} : Label{1}; }

// r := argmin_j g_ij = the j != i with the largest score; ties toward lowest j
std::size_t select_runner_up(const ScoreVector& scores, std::size_t i) {
  std::size_t r = i == 0 ? 1 : 0;
  for (std::size_t j = 0; j < scores.size(); ++j)
    if (j != i && scores[j] > scores[r]) r = j;
  return r;
}

}  // namespace

AttackOutcome ds_binary(const Image& x, const Image& x_init, Label original, ScoreOracle& oracle,
                        const AttackConfig& cfg) {
  cfg.validate();
  SearchRegion region = make_region(x, cfg.d);
  if (!region.contains(x_init)) throw std::invalid_argument("x_init outside B(x,d)");

  LedgerSnapshot before(oracle.ledger());
  AttackOutcome out;
  out.final_input = x_init;
  out.final_label = original;
  out.status = AttackStatus::BudgetExhausted;

  Objective obj = Objective::binary_margin();
  if (oracle.remaining() == 0) {
    finalize(out, x, oracle.ledger(), before);
    return out;
  }
  ScoreVector scores = oracle.evaluate(x_init);
  if (scores.size() != 2) throw std::invalid_argument("ds_binary needs a two-class model");
  double f0 = obj.value(scores);
  out.final_label = binary_label(f0);
  if (out.final_label != original) {
    out.status = AttackStatus::AdversarialFound;
    finalize(out, x, oracle.ledger(), before);
    return out;
  }

  bool minimize = f0 > 0.0;
  Image cur = x_init;
  std::optional<ScoreVector> cur_scores = scores;
  while (true) {
    SweepResult sweep = minimize ? approx_min(cur, obj, oracle, region, cur_scores)
                                 : approx_max(cur, obj, oracle, region, cur_scores);
    cur = sweep.point;
    cur_scores = sweep.scores;
    out.final_input = cur;
    ++out.iterations;

    if (!cur_scores) {
      if (oracle.remaining() == 0) {
        out.status = AttackStatus::BudgetExhausted;
        break;
      }
      cur_scores = oracle.evaluate(cur);
      sweep.objective_value = obj.value(*cur_scores);
    }
    out.trace.push_back(sweep.objective_value);
    out.final_label = binary_label(sweep.objective_value);
    if (out.final_label != original) {
      out.status = AttackStatus::AdversarialFound;
      break;
    }
    if (!sweep.complete) {
      out.status = AttackStatus::BudgetExhausted;
      break;
    }
    if (cfg.max_num > 0 && out.iterations >= cfg.max_num) {
      out.status = AttackStatus::MaxIterations;
      break;
    }
    if (oracle.remaining() == 0) {
      out.status = AttackStatus::BudgetExhausted;
      break;
    }
  }
  finalize(out, x, oracle.ledger(), before);
  return out;
}

namespace {

AttackOutcome multiclass_driver(const Image& x, const Image& x_init, Label original,
                                ScoreOracle& oracle, const AttackConfig& cfg,
                                AttackVariant variant) {
  cfg.validate();
  SearchRegion region = make_region(x, cfg.d);
  if (!region.contains(x_init)) throw std::invalid_argument("x_init outside B(x,d)");

  LedgerSnapshot before(oracle.ledger());
  AttackOutcome out;
  out.final_input = x_init;
  out.final_label = original;
  out.status = AttackStatus::BudgetExhausted;

  if (oracle.remaining() == 0) {
    finalize(out, x, oracle.ledger(), before);
    return out;
  }
  ScoreVector scores = oracle.evaluate(x_init);
  if (original.index >= scores.size()) throw std::invalid_argument("label outside model classes");
  out.final_label = argmax_label(scores);
  if (out.final_label != original) {
    out.status = AttackStatus::AdversarialFound;
    finalize(out, x, oracle.ledger(), before);
    return out;
  }

  Image cur = x_init;
  std::optional<ScoreVector> cur_scores = scores;
  while (true) {
    Objective obj;
    if (variant == AttackVariant::PairwiseMargin) {
      std::size_t r = select_runner_up(*cur_scores, original.index);
      obj = Objective::pairwise(original.index, r);
      out.selected_objectives.push_back(r);
    } else {
      obj = Objective::class_score(original.index);
      out.selected_objectives.push_back(original.index);
    }

    SweepResult sweep = approx_min(cur, obj, oracle, region, cur_scores, original);
    cur = sweep.point;
    cur_scores = sweep.scores;
    out.final_input = cur;
    ++out.iterations;

    if (sweep.adversarial) {
      out.trace.push_back(sweep.objective_value);
      out.final_label = argmax_label(*cur_scores);
      out.status = AttackStatus::AdversarialFound;
      break;
    }
    if (!cur_scores) {
      if (oracle.remaining() == 0) {
        out.status = AttackStatus::BudgetExhausted;
        break;
      }
      cur_scores = oracle.evaluate(cur);
      sweep.objective_value = obj.value(*cur_scores);
    }
    out.trace.push_back(sweep.objective_value);
    out.final_label = argmax_label(*cur_scores);
    if (out.final_label != original) {
      out.status = AttackStatus::AdversarialFound;
      break;
    }
    if (!sweep.complete) {
      out.status = AttackStatus::BudgetExhausted;
      break;
    }
    if (cfg.max_num > 0 && out.iterations >= cfg.max_num) {
      out.status = AttackStatus::MaxIterations;
      break;
    }
    if (oracle.remaining() == 0) {
      out.status = AttackStatus::BudgetExhausted;
      break;
    }
  }
  finalize(out, x, oracle.ledger(), before);
  return out;
}

}  // namespace

AttackOutcome ds_multiclass(const Image& x, const Image& x_init, Label original,
                            ScoreOracle& oracle, const AttackConfig& cfg) {
  return multiclass_driver(x, x_init, original, oracle, cfg, AttackVariant::PairwiseMargin);
}

AttackOutcome ds_multiclass_alt(const Image& x, const Image& x_init, Label original,
                                ScoreOracle& oracle, const AttackConfig& cfg) {
  return multiclass_driver(x, x_init, original, oracle, cfg, AttackVariant::ClassScore);
}

AttackOutcome ds_hierarchy(const Image& x, const Image& x_init, Label original,
                           ScoreOracle& oracle, const AttackConfig& cfg) {
  cfg.validate();
  SearchRegion region = make_region(x, cfg.d);
  if (!region.contains(x_init)) throw std::invalid_argument("x_init outside B(x,d)");
  if (!region.is_vertex(x_init))
    throw std::invalid_argument("ds_hierarchy requires a vertex x_init");

  LedgerSnapshot before(oracle.ledger());
  AttackOutcome out;
  out.final_input = x_init;
  out.final_label = original;
  out.status = AttackStatus::BudgetExhausted;

  if (oracle.remaining() == 0) {
    finalize(out, x, oracle.ledger(), before);
    return out;
  }
  ScoreVector scores = oracle.evaluate(x_init);
  if (original.index >= scores.size()) throw std::invalid_argument("label outside model classes");
  out.final_label = argmax_label(scores);
  if (out.final_label != original) {
    out.status = AttackStatus::AdversarialFound;
    finalize(out, x, oracle.ledger(), before);
    return out;
  }

  Grouping grouping = initial_grouping(x.shape, cfg.group_side);
  SplitMix64 rng(cfg.seed);
  Image cur = x_init;
  std::optional<ScoreVector> cur_scores = scores;

  while (true) {
    if (!cur_scores) {
      if (oracle.remaining() == 0) {
        out.status = AttackStatus::BudgetExhausted;
        break;
      }
      cur_scores = oracle.evaluate(cur);
    }

    Objective obj;
    if (cfg.variant == AttackVariant::PairwiseMargin) {
      std::size_t r = select_runner_up(*cur_scores, original.index);
      obj = Objective::pairwise(original.index, r);
      out.selected_objectives.push_back(r);
    } else {
      obj = Objective::class_score(original.index);
      out.selected_objectives.push_back(original.index);
    }

    SweepResult pass = approx_min_grouped(cur, obj, oracle, region, grouping, rng,
                                          cfg.batch_size, *cur_scores, original);
    out.passes.push_back(PassStats{grouping.group_count(), pass.queries_used,
                                   pass.objective_value});
    out.trace.push_back(pass.objective_value);
    ++out.iterations;
    cur = pass.point;
    cur_scores = pass.scores;
    out.final_input = cur;

    if (pass.adversarial) {
      out.final_label = argmax_label(*pass.scores);
      out.status = AttackStatus::AdversarialFound;
      break;
    }
    if (!pass.complete) {
      out.status = AttackStatus::BudgetExhausted;
      break;
    }
    if (cfg.max_num > 0 && out.iterations >= cfg.max_num) {
      out.status = AttackStatus::MaxIterations;
      break;
    }
    if (oracle.remaining() == 0) {
      out.status = AttackStatus::BudgetExhausted;
      break;
    }
    if (grouping.block_side > 1 && grouping.block_side >= cfg.split_factor)
      grouping = divide_grouping(grouping, cfg.split_factor);
  }
  finalize(out, x, oracle.ledger(), before);
  return out;
}

AttackOutcome ds_refinement(const Image& x, const Image& x_adv, Label original,
                            ScoreOracle& oracle, const AttackConfig& cfg) {
  cfg.validate();
  LedgerSnapshot before(oracle.ledger());
  QueryPhase saved = oracle.phase();
  oracle.set_phase(QueryPhase::Refinement);

  AttackOutcome out;
  out.status = AttackStatus::AdversarialFound;  // x_adv is adversarial by precondition
  out.final_input = x_adv;
  out.final_label = original;  // updated below from verified probes

  Image best = x_adv;
  double d = linf_distance(x, x_adv);
  SplitMix64 seeds(cfg.seed ^ 0x526566696e65ULL);

  while (d > 0.0) {
    // bisect the smallest d' <= d whose projection of best stays adversarial
    double lo = 0.0, hi = d;
    Image hi_point = best;
    bool out_of_probes = false;
    while (hi - lo > cfg.refine_tolerance) {
      if (oracle.remaining() == 0) {
        out_of_probes = true;
        break;
      }
      double mid = 0.5 * (lo + hi);
      Image p = project(make_region(x, mid), best);
      ScoreVector s = oracle.evaluate(p);
      if (argmax_label(s) != original) {
        hi = mid;
        hi_point = std::move(p);
        out.final_label = argmax_label(s);
      } else {
        lo = mid;
      }
    }
    if (out_of_probes) break;

    double d_shrunk = hi;
    if (d_shrunk >= d - 1e-12) break;  // no progress possible at this tolerance
    out.trace.push_back(d_shrunk);
    best = hi_point;
    out.final_input = best;

    // restart the search inside the smaller region from the all-lower vertex
    AttackConfig inner_cfg = cfg;
    inner_cfg.d = d_shrunk;
    inner_cfg.refine = false;
    inner_cfg.seed = seeds.next();
    SearchRegion inner_region = make_region(x, d_shrunk);
    AttackOutcome inner =
        ds_hierarchy(x, inner_region.lower_vertex(), original, oracle, inner_cfg);
    if (inner.status != AttackStatus::AdversarialFound) break;

    best = inner.final_input;
    out.final_input = best;
    out.final_label = inner.final_label;
    d = linf_distance(x, best);
  }

  oracle.set_phase(saved);
  finalize(out, x, oracle.ledger(), before);
  return out;
}

AttackOutcome random_fuzz_baseline(const Image& x, Label original, ScoreOracle& oracle,
                                   const AttackConfig& cfg) {
  cfg.validate();
  SearchRegion region = make_region(x, cfg.d);
  LedgerSnapshot before(oracle.ledger());
  SplitMix64 rng(cfg.seed);

  AttackOutcome out;
  out.final_input = x;
  out.final_label = original;
  out.status = AttackStatus::BudgetExhausted;

  Image candidate = region.lower_vertex();
  while (oracle.remaining() > 0) {
    for (std::size_t i = 0; i < candidate.size(); ++i)
      candidate.data[i] = rng.coin() ? region.intervals[i].hi : region.intervals[i].lo;
    ScoreVector s = oracle.evaluate(candidate);
    ++out.iterations;
    Label label = argmax_label(s);
    if (label != original) {
      out.status = AttackStatus::AdversarialFound;
      out.final_input = candidate;
      out.final_label = label;
      break;
    }
  }
  finalize(out, x, oracle.ledger(), before);
  return out;
}

AttackOutcome run_attack(const Image& x, Label original, ScoreOracle& oracle,
                         const AttackConfig& cfg) {
  cfg.validate();
  SearchRegion region = make_region(x, cfg.d);
  AttackOutcome out = ds_hierarchy(x, region.lower_vertex(), original, oracle, cfg);
  if (out.status == AttackStatus::AdversarialFound && cfg.refine) {
    AttackOutcome refined = ds_refinement(x, out.final_input, original, oracle, cfg);
    out.final_input = refined.final_input;
    out.final_label = refined.final_label;
    out.refinement_queries = refined.refinement_queries;
    out.linf = refined.linf;
    out.l2 = refined.l2;
  }
  return out;
}

}  // namespace cubefuzz
