// Acceptance gate: one pass/fail line per criterion, nonzero exit on any failure.
// argv[1] = path to the CLI binary, argv[2] = pinned fixtures directory.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>
#include <thread>
#include <vector>

#include "cubefuzz/attack.hpp"
#include "cubefuzz/campaign.hpp"
#include "cubefuzz/dataset.hpp"
#include "cubefuzz/fixtures.hpp"
#include "cubefuzz/metrics.hpp"
#include "cubefuzz/model.hpp"
#include "cubefuzz/remote.hpp"
#include "cubefuzz/rng.hpp"
#include "cubefuzz/search.hpp"

using namespace cubefuzz;

namespace {

std::string g_cli;
std::string g_fixtures;

struct LinearFixture {
  std::shared_ptr<const FeedForwardModel> model;
  std::vector<double> w;
};

LinearFixture random_linear(SplitMix64& rng, std::size_t n, double bias) {
  LinearFixture fx;
  for (std::size_t i = 0; i < n; ++i) {
    double mag = 0.05 + 0.95 * rng.uniform();
    fx.w.push_back(rng.coin() ? mag : -mag);
  }
  LinearModel lm;
  lm.classes = 2;
  lm.dims = n;
  lm.weights = fx.w;
  lm.weights.insert(lm.weights.end(), n, 0.0);
  lm.bias = {bias, 0.0};
  fx.model = std::make_shared<const FeedForwardModel>(lm.to_feedforward(PostProcess::Logits));
  return fx;
}

Image random_image(SplitMix64& rng, std::size_t n, double lo, double hi) {
  Image x;
  x.shape = Shape{1, n, 1};
  for (std::size_t i = 0; i < n; ++i) x.data.push_back(lo + (hi - lo) * rng.uniform());
  return x;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// 1. exact vertex extremization on >= 500 random linear models, zero tolerance
bool criterion_extremization() {
  auto start = std::chrono::steady_clock::now();
  SplitMix64 rng(20260823);
  for (int t = 0; t < 500; ++t) {
    std::size_t n = 1 + rng.below(12);
    LinearFixture fx = random_linear(rng, n, rng.uniform() * 2.0 - 1.0);
    Image x = random_image(rng, n, 20, 235);
    SearchRegion region = make_region(x, 1.0 + 15.0 * rng.uniform());
    Objective obj = Objective::binary_margin();

    QueryLedger sl(1u << 16);
    ScoreOracle so(model_backend(fx.model), sl);
    SweepResult mn = approx_min(region.lower_vertex(), obj, so, region);
    SweepResult mx = approx_max(region.lower_vertex(), obj, so, region);
    QueryLedger vl(1u << 16);
    ScoreOracle vo(model_backend(fx.model), vl);
    VertexExtrema exact = brute_force_extremum(obj, vo, region);
    if (mn.objective_value != exact.min_value) return false;
    if (mx.objective_value != exact.max_value) return false;
  }
  auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return secs < 10.0;
}

// 2. projecting the outer minimum vertex lands on the inner exhaustive minimum
bool criterion_projection() {
  auto start = std::chrono::steady_clock::now();
  SplitMix64 rng(1517);
  for (int t = 0; t < 200; ++t) {
    std::size_t n = 1 + rng.below(10);
    LinearFixture fx = random_linear(rng, n, rng.uniform() * 2.0 - 1.0);
    Image x = random_image(rng, n, 30, 220);
    double d_outer = 4.0 + 12.0 * rng.uniform();
    SearchRegion outer = make_region(x, d_outer);
    SearchRegion inner = make_region(x, d_outer * (0.2 + 0.6 * rng.uniform()));
    Objective obj = Objective::binary_margin();

    QueryLedger lo(1u << 16);
    ScoreOracle oo(model_backend(fx.model), lo);
    VertexExtrema outer_exact = brute_force_extremum(obj, oo, outer);
    QueryLedger li(1u << 16);
    ScoreOracle oi(model_backend(fx.model), li);
    VertexExtrema inner_exact = brute_force_extremum(obj, oi, inner);

    Image projected = project(inner, outer_exact.min_vertex);
    if (obj.value(fx.model->evaluate(projected)) != inner_exact.min_value) return false;
  }
  auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return secs < 10.0;
}

std::shared_ptr<const FeedForwardModel> relu_model(std::uint64_t seed, std::size_t n,
                                                   std::size_t hidden, std::size_t m) {
  FixtureSpec spec;
  spec.seed = seed;
  spec.shape = Shape{1, n, 1};
  spec.hidden = hidden;
  spec.classes = m;
  return std::make_shared<const FeedForwardModel>(generate_fixture_model(spec));
}

// 3. query bounds: <= 2n + n(k-1) for full-dimension drivers, <= group count per pass
bool criterion_query_bounds() {
  SplitMix64 rng(31337);
  for (int t = 0; t < 10; ++t) {
    std::size_t n = 12;
    auto model = relu_model(900 + t, n, 8, 3);
    Image x = random_image(rng, n, 60, 200);
    Label original = argmax_label(model->evaluate(x));

    for (std::uint64_t k : {1, 2, 3, 5}) {
      AttackConfig cfg;
      cfg.budget = 1u << 20;
      cfg.max_num = k;
      SearchRegion region = make_region(x, cfg.d);

      QueryLedger l1(cfg.budget);
      ScoreOracle o1(model_backend(model), l1);
      AttackOutcome mc = ds_multiclass(x, region.lower_vertex(), original, o1, cfg);
      if (mc.attack_queries > 2 * n + n * (k - 1)) return false;

      QueryLedger l2(cfg.budget);
      ScoreOracle o2(model_backend(model), l2);
      AttackOutcome alt = ds_multiclass_alt(x, region.lower_vertex(), original, o2, cfg);
      if (alt.attack_queries > 2 * n + n * (k - 1)) return false;
    }

    Image sq = random_image(rng, 64, 60, 200);
    sq.shape = Shape{8, 8, 1};
    auto model8 = relu_model(950 + t, 64, 16, 4);
    Label orig8 = argmax_label(model8->evaluate(sq));
    AttackConfig hcfg;
    hcfg.budget = 4000;
    hcfg.max_num = 6;
    hcfg.seed = t;
    SearchRegion region8 = make_region(sq, hcfg.d);
    QueryLedger l3(hcfg.budget);
    ScoreOracle o3(model_backend(model8), l3);
    AttackOutcome h = ds_hierarchy(sq, region8.lower_vertex(), orig8, o3, hcfg);
    for (const PassStats& p : h.passes)
      if (p.queries > p.groups) return false;
  }
  return true;
}

CampaignReport fixture_campaign(std::uint64_t budget, std::uint64_t seed, bool refine,
                                std::size_t group_side) {
  auto model = std::make_shared<const FeedForwardModel>(load_model(g_fixtures + "/model.dsmodel"));
  Dataset ds = load_dataset(g_fixtures + "/dataset.dsimg");
  AttackConfig cfg;
  cfg.budget = budget;
  cfg.seed = seed;
  cfg.refine = refine;
  cfg.group_side = group_side;
  return run_campaign(ds, [model] { return model_backend(model); }, cfg, 4, "fixture");
}

// 4. every adversarial row re-verifies: flipped label, linf <= d + 1e-9, valid pixels
bool criterion_soundness() {
  auto model = std::make_shared<const FeedForwardModel>(load_model(g_fixtures + "/model.dsmodel"));
  Dataset ds = load_dataset(g_fixtures + "/dataset.dsimg");
  for (std::uint64_t seed : {0, 1, 2}) {
    CampaignReport report = fixture_campaign(2000, seed, true, 4);
    for (const CampaignRow& row : report.rows) {
      if (row.outcome.status != AttackStatus::AdversarialFound) continue;
      if (argmax_label(model->evaluate(row.outcome.final_input)) == row.original) return false;
      if (linf_distance(ds.images[row.index], row.outcome.final_input) > 8.0 + 1e-9) return false;
      for (double v : row.outcome.final_input.data)
        if (!(v >= 0.0 && v <= 255.0)) return false;
    }
  }
  return true;
}

// 5. refinement reaches the analytic minimal L-inf radius |f(x)| / ||w||_1
bool criterion_refinement() {
  SplitMix64 rng(555);
  for (int t = 0; t < 50; ++t) {
    std::size_t n = 8;
    Image x = random_image(rng, n, 100, 155);
    LinearFixture raw = random_linear(rng, n, 0.0);
    double at_x = 0.0, w1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) at_x += raw.w[i] * x.data[i];
    for (double w : raw.w) w1 += std::abs(w);
    double target = (0.2 + 0.6 * rng.uniform()) * 8.0 * w1;
    LinearModel lm;
    lm.classes = 2;
    lm.dims = n;
    lm.weights = raw.w;
    lm.weights.insert(lm.weights.end(), n, 0.0);
    lm.bias = {-at_x + target, 0.0};
    auto model = std::make_shared<const FeedForwardModel>(lm.to_feedforward(PostProcess::Logits));

    AttackConfig cfg;
    cfg.budget = 20000;
    cfg.group_side = 2;
    cfg.seed = t;
    SearchRegion region = make_region(x, cfg.d);
    QueryLedger sl(cfg.budget);
    ScoreOracle so(model_backend(model), sl);
    SweepResult mn = approx_min(region.lower_vertex(), Objective::binary_margin(), so, region);
    if (!(mn.objective_value < 0.0)) return false;

    QueryLedger ledger(cfg.budget);
    ScoreOracle oracle(model_backend(model), ledger);
    AttackOutcome ref = ds_refinement(x, mn.point, Label{0}, oracle, cfg);
    if (ledger.attack_queries() != 0) return false;
    if (argmax_label(model->evaluate(ref.final_input)) == Label{0}) return false;
    double analytic = target / w1;
    if (ref.linf > analytic + 0.5 + 1e-9) return false;
    for (std::size_t i = 1; i < ref.trace.size(); ++i)
      if (!(ref.trace[i] < ref.trace[i - 1])) return false;
  }
  return true;
}

// 6. fixture-suite efficacy: ASR >= 0.9, strictly above random fuzzing, median < budget/4
bool criterion_efficacy() {
  CampaignReport report = fixture_campaign(2000, 0, true, 4);
  if (report.asr < 0.9) return false;
  if (!(report.median_queries < 2000.0 / 4.0)) return false;

  auto model = std::make_shared<const FeedForwardModel>(load_model(g_fixtures + "/model.dsmodel"));
  Dataset ds = load_dataset(g_fixtures + "/dataset.dsimg");
  std::vector<AttackOutcome> random_outcomes;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    AttackConfig cfg;
    cfg.budget = 2000;
    cfg.seed = i;
    QueryLedger ledger(cfg.budget);
    ScoreOracle oracle(model_backend(model), ledger);
    random_outcomes.push_back(random_fuzz_baseline(ds.images[i], ds.labels[i], oracle, cfg));
  }
  return report.asr > success_rate(random_outcomes);
}

// 7. hierarchical grouping reduces queries versus per-pixel passes
bool criterion_hierarchy_reduction() {
  CampaignReport grouped = fixture_campaign(2000, 0, false, 4);
  CampaignReport per_pixel = fixture_campaign(2000, 0, false, 1);
  if (grouped.succeeded == 0 || per_pixel.succeeded == 0) return false;
  return grouped.avg_queries <= per_pixel.avg_queries;
}

// 8. metric conventions: ratio-of-norms distortion, half-integer medians, exact arithmetic
bool criterion_metrics() {
  std::vector<AttackOutcome> rows;
  for (int i = 0; i < 831; ++i) {
    AttackOutcome o;
    o.status = AttackStatus::AdversarialFound;
    o.attack_queries = 100 + i;
    rows.push_back(o);
  }
  for (int i = 0; i < 169; ++i) {
    AttackOutcome o;
    o.status = AttackStatus::BudgetExhausted;
    rows.push_back(o);
  }
  if (std::abs(success_rate(rows) - 0.831) > 1e-12) return false;

  AttackOutcome a, b;
  a.status = b.status = AttackStatus::AdversarialFound;
  a.attack_queries = 423;
  b.attack_queries = 424;
  if (query_stats({a, b}).median != 423.5) return false;

  SplitMix64 rng(4242);
  std::vector<std::pair<Image, Image>> pairs;
  for (int t = 0; t < 16; ++t) {
    Image x = random_image(rng, 8, 1, 255);
    Image adv = random_image(rng, 8, 1, 255);
    pairs.emplace_back(x, adv);
  }
  double linf_sum = 0.0, l2_sum = 0.0;
  for (auto& [x, adv] : pairs) {
    double num_linf = 0.0, num_l2 = 0.0, den_linf = 0.0, den_l2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      num_linf = std::max(num_linf, std::abs(x.data[i] - adv.data[i]));
      den_linf = std::max(den_linf, std::abs(x.data[i]));
      num_l2 += (x.data[i] - adv.data[i]) * (x.data[i] - adv.data[i]);
      den_l2 += x.data[i] * x.data[i];
    }
    linf_sum += num_linf / den_linf;
    l2_sum += std::sqrt(num_l2) / std::sqrt(den_l2);
  }
  if (std::abs(avg_distortion_linf(pairs) - linf_sum / 16) > 1e-12) return false;
  if (std::abs(avg_distortion_l2(pairs) - l2_sum / 16) > 1e-12) return false;
  return true;
}

// 9. loopback remote outcomes match in-process outcomes query for query
bool criterion_remote_equivalence() {
  FeedForwardModel model = load_model(g_fixtures + "/model.dsmodel");
  auto shared = std::make_shared<const FeedForwardModel>(model);
  Dataset ds = load_dataset(g_fixtures + "/dataset.dsimg");

  std::atomic<bool> stop{false};
  std::atomic<std::uint16_t> ready{0};
  std::thread server([&] { serve_oracle_tcp(model, 0, stop, &ready); });
  while (ready.load() == 0) std::this_thread::sleep_for(std::chrono::milliseconds(1));

  bool ok = true;
  for (std::size_t i = 0; i < 4 && ok; ++i) {
    AttackConfig cfg;
    cfg.budget = 2000;
    cfg.seed = i;

    QueryLedger l1(cfg.budget);
    ScoreOracle local(model_backend(shared), l1);
    AttackOutcome in_process = run_attack(ds.images[i], ds.labels[i], local, cfg);

    RemoteOracleConfig rc;
    rc.port = ready.load();
    QueryLedger l2(cfg.budget);
    ScoreOracle remote(remote_backend(std::make_shared<RemoteOracleClient>(rc)), l2);
    AttackOutcome via_remote = run_attack(ds.images[i], ds.labels[i], remote, cfg);

    ok = in_process.status == via_remote.status &&
         in_process.final_label == via_remote.final_label &&
         in_process.attack_queries == via_remote.attack_queries &&
         in_process.refinement_queries == via_remote.refinement_queries;
  }
  stop.store(true);
  server.join();
  return ok;
}

// 10. repeated CLI runs with one seed produce byte-identical artifacts
bool criterion_determinism() {
  std::string out1 = "/tmp/cubefuzz_accept_out1.json";
  std::string out2 = "/tmp/cubefuzz_accept_out2.json";
  std::string base = "\"" + g_cli + "\" attack --model \"" + g_fixtures +
                     "/model.dsmodel\" --input \"" + g_fixtures +
                     "/dataset.dsimg\" --index 1 --seed 7 --budget 2000 --out ";
  if (std::system((base + out1 + " > /dev/null").c_str()) != 0) return false;
  if (std::system((base + out2 + " > /dev/null").c_str()) != 0) return false;
  std::string a = read_file(out1);
  std::string b = read_file(out2);
  if (a.empty() || a != b) return false;

  std::string rep1 = "/tmp/cubefuzz_accept_rep1.json";
  std::string rep2 = "/tmp/cubefuzz_accept_rep2.json";
  std::string camp = "\"" + g_cli + "\" campaign --model \"" + g_fixtures +
                     "/model.dsmodel\" --dataset \"" + g_fixtures +
                     "/dataset.dsimg\" --seed 7 --budget 500 --parallelism 4 --json ";
  if (std::system((camp + rep1 + " > /dev/null").c_str()) != 0) return false;
  if (std::system((camp + rep2 + " > /dev/null").c_str()) != 0) return false;
  std::string r1 = read_file(rep1);
  std::string r2 = read_file(rep2);
  return !r1.empty() && r1 == r2;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: %s <cli-binary> <fixtures-dir>\n", argv[0]);
    return 2;
  }
  g_cli = argv[1];
  g_fixtures = argv[2];

  struct Criterion {
    const char* name;
    bool (*run)();
  };
  const Criterion criteria[] = {
      {"1 exact-vertex-extremization", criterion_extremization},
      {"2 projection-onto-nested-regions", criterion_projection},
      {"3 query-bounds", criterion_query_bounds},
      {"4 adversarial-soundness", criterion_soundness},
      {"5 refinement-minimal-radius", criterion_refinement},
      {"6 fixture-suite-efficacy", criterion_efficacy},
      {"7 hierarchy-query-reduction", criterion_hierarchy_reduction},
      {"8 metrics-arithmetic", criterion_metrics},
      {"9 remote-oracle-equivalence", criterion_remote_equivalence},
      {"10 run-determinism", criterion_determinism},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    bool ok = false;
    try {
      ok = c.run();
    } catch (const std::exception& e) {
      std::printf("FAIL criterion %s (exception: %s)\n", c.name, e.what());
      ++failures;
      continue;
    }
    std::printf("%s criterion %s\n", ok ? "PASS" : "FAIL", c.name);
    if (!ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
