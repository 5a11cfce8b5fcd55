#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "cubefuzz/attack.hpp"
#include "cubefuzz/campaign.hpp"
#include "cubefuzz/dataset.hpp"
#include "cubefuzz/fixtures.hpp"
#include "cubefuzz/model.hpp"
#include "cubefuzz/remote.hpp"
#include "cubefuzz/rng.hpp"
#include "cubefuzz/search.hpp"

// exit codes: 0 success, 1 runtime/config/IO error, 2 usage error,
// 3 verification failure (verify-core, gen-fixtures --check)

namespace {

using namespace cubefuzz;
using nlohmann::json;

struct ModelSource {
  std::string model_path;
  std::string remote_host;
  std::uint16_t remote_port = 0;
  std::string remote_command;
  std::uint64_t timeout_ms = 5000;

  void add_flags(CLI::App* cmd, bool required) {
    auto* m = cmd->add_option("--model", model_path, "path to a .dsmodel file");
    auto* h = cmd->add_option("--remote-host", remote_host, "remote oracle TCP host");
    auto* p = cmd->add_option("--remote-port", remote_port, "remote oracle TCP port");
    auto* c = cmd->add_option("--remote-cmd", remote_command,
                              "remote oracle subprocess command line");
    cmd->add_option("--timeout-ms", timeout_ms, "remote request timeout")
        ->default_val(timeout_ms);
    m->excludes(p)->excludes(c);
    h->needs(p);
    if (required) {
      // one of --model / --remote-port / --remote-cmd must be given
      cmd->callback([this] {
        if (model_path.empty() && remote_port == 0 && remote_command.empty())
          throw CLI::ValidationError("one of --model, --remote-port, --remote-cmd is required");
      });
    }
  }

  std::string id() const {
    if (!model_path.empty()) return model_path;
    if (remote_port != 0)
      return "tcp://" + (remote_host.empty() ? "127.0.0.1" : remote_host) + ":" +
             std::to_string(remote_port);
    return "cmd:" + remote_command;
  }

  std::function<ScoreOracle::Backend()> backend_factory() const {
    if (!model_path.empty()) {
      auto model = std::make_shared<const FeedForwardModel>(load_model(model_path));
      return [model] { return model_backend(model); };
    }
    RemoteOracleConfig rc;
    rc.timeout_ms = timeout_ms;
    if (remote_port != 0) {
      rc.transport = RemoteOracleConfig::Transport::Tcp;
      if (!remote_host.empty()) rc.host = remote_host;
      rc.port = remote_port;
    } else {
      rc.transport = RemoteOracleConfig::Transport::Subprocess;
      rc.command = remote_command;
    }
    return [rc] { return remote_backend(std::make_shared<RemoteOracleClient>(rc)); };
  }
};

struct AttackFlags {
  AttackConfig cfg;
  std::size_t group_side_flag = 0;  // 0 = keyed on image size
  bool no_refine = false;

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--d", cfg.d, "L-inf radius on the 0-255 scale")->default_val(cfg.d);
    cmd->add_option("--budget", cfg.budget, "query budget")->default_val(cfg.budget);
    cmd->add_option("--max-num", cfg.max_num, "iteration cap (0 = budget-limited)")
        ->default_val(cfg.max_num);
    cmd->add_option_function<std::string>(
           "--variant",
           [this](const std::string& v) {
             if (v == "pairwise")
               cfg.variant = AttackVariant::PairwiseMargin;
             else if (v == "class-score")
               cfg.variant = AttackVariant::ClassScore;
             else
               throw CLI::ValidationError("--variant must be pairwise or class-score");
           },
           "objective variant: pairwise | class-score")
        ->default_str("pairwise");
    cmd->add_option("--k", group_side_flag,
                    "initial group side (default: 4 for images up to 64x64, else 32)")
        ->default_val(group_side_flag);
    cmd->add_option("--m", cfg.split_factor, "group split factor")->default_val(cfg.split_factor);
    cmd->add_option("--batch", cfg.batch_size, "candidate batch size")
        ->default_val(cfg.batch_size);
    cmd->add_option("--seed", cfg.seed, "PRNG seed")
        ->envname("CUBEFUZZ_SEED")
        ->default_val(cfg.seed);
    cmd->add_flag("--no-refine", no_refine, "skip distortion refinement after success");
    cmd->add_option("--refine-tolerance", cfg.refine_tolerance,
                    "bisect bracket width on the 0-255 scale")
        ->default_val(cfg.refine_tolerance);
  }

  AttackConfig resolve(const Shape& shape) {
    AttackConfig out = cfg;
    out.refine = !no_refine;
    if (group_side_flag != 0)
      out.group_side = group_side_flag;
    else
      out.group_side = (shape.height <= 64 && shape.width <= 64) ? 4 : 32;
    return out;
  }
};

json outcome_json(const AttackOutcome& o, const AttackConfig& cfg, const std::string& model_id,
                  std::size_t index, Label original) {
  json j;
  j["model"] = model_id;
  j["index"] = index;
  j["original_label"] = original.index;
  j["config"] = {{"d", cfg.d},
                 {"budget", cfg.budget},
                 {"max_num", cfg.max_num},
                 {"variant", cfg.variant == AttackVariant::PairwiseMargin ? "pairwise"
                                                                          : "class-score"},
                 {"group_side", cfg.group_side},
                 {"split_factor", cfg.split_factor},
                 {"batch_size", cfg.batch_size},
                 {"seed", cfg.seed},
                 {"refine", cfg.refine},
                 {"refine_tolerance", cfg.refine_tolerance}};
  j["status"] = to_string(o.status);
  j["final_label"] = o.final_label.index;
  j["attack_queries"] = o.attack_queries;
  j["refinement_queries"] = o.refinement_queries;
  j["linf"] = o.linf;
  j["l2"] = o.l2;
  j["iterations"] = o.iterations;
  j["trace"] = o.trace;
  j["selected_objectives"] = o.selected_objectives;
  json passes = json::array();
  for (const PassStats& p : o.passes)
    passes.push_back({{"groups", p.groups}, {"queries", p.queries}, {"objective", p.objective}});
  j["passes"] = std::move(passes);
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

int cmd_attack(const ModelSource& src, AttackFlags& flags, const std::string& input_path,
               std::size_t index, const std::string& out_path, const std::string& adv_path) {
  Dataset ds = load_dataset(input_path);
  if (index >= ds.size())
    throw std::runtime_error("--index " + std::to_string(index) + " out of range (dataset has " +
                             std::to_string(ds.size()) + " images)");
  AttackConfig cfg = flags.resolve(ds.shape);
  cfg.validate();

  ScoreOracle::Backend backend = src.backend_factory()();
  const Image& x = ds.images[index];
  Label original = ds.labels[index];

  AttackOutcome outcome;
  ScoreVector screen = backend({x})[0];
  if (argmax_label(screen) != original) {
    outcome.status = AttackStatus::Skipped;
    outcome.final_input = x;
    outcome.final_label = argmax_label(screen);
  } else {
    QueryLedger ledger(cfg.budget);
    ScoreOracle oracle(std::move(backend), ledger);
    outcome = run_attack(x, original, oracle, cfg);
  }

  std::printf("status=%s attack_queries=%llu refinement_queries=%llu linf=%.6g l2=%.6g\n",
              to_string(outcome.status).c_str(),
              static_cast<unsigned long long>(outcome.attack_queries),
              static_cast<unsigned long long>(outcome.refinement_queries), outcome.linf,
              outcome.l2);

  if (!out_path.empty())
    write_text(out_path, outcome_json(outcome, cfg, src.id(), index, original).dump(2) + "\n");
  if (!adv_path.empty() && outcome.status == AttackStatus::AdversarialFound) {
    Dataset adv;
    adv.shape = ds.shape;
    adv.images.push_back(outcome.final_input);
    adv.labels.push_back(outcome.final_label);
    save_dataset(adv, adv_path);
  }
  return 0;
}

int cmd_campaign(const ModelSource& src, AttackFlags& flags, const std::string& dataset_path,
                 std::size_t parallelism, const std::string& json_path,
                 const std::string& csv_path) {
  Dataset ds = load_dataset(dataset_path);
  AttackConfig cfg = flags.resolve(ds.shape);
  cfg.validate();
  CampaignReport report = run_campaign(ds, src.backend_factory(), cfg, parallelism, src.id());
  std::printf(
      "attempted=%zu succeeded=%zu skipped=%zu errors=%zu asr=%.4f\n", report.attempted,
      report.succeeded, report.skipped, report.errors, report.asr);
  if (!json_path.empty()) write_text(json_path, report.to_json());
  if (!csv_path.empty()) write_text(csv_path, report.to_csv());
  return 0;
}

int cmd_serve(const std::string& model_path, bool stdio, std::uint16_t port) {
  FeedForwardModel model = load_model(model_path);
  if (stdio) {
    serve_oracle_stream(model, std::cin, std::cout);
    return 0;
  }
  std::atomic<bool> stop{false};
  std::atomic<std::uint16_t> ready{0};
  std::thread server([&] { serve_oracle_tcp(model, port, stop, &ready); });
  while (ready.load() == 0) std::this_thread::sleep_for(std::chrono::milliseconds(1));
  std::printf("listening on 127.0.0.1:%u\n", static_cast<unsigned>(ready.load()));
  std::fflush(stdout);
  server.join();  // runs until killed
  return 0;
}

int cmd_gen_fixtures(const FixtureSpec& spec, const std::string& dir,
                     const std::string& check_path) {
  std::string manifest = write_fixtures(dir, spec);
  std::printf("%s", manifest.c_str());
  if (!check_path.empty()) {
    std::ifstream in(check_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open manifest: " + check_path);
    std::string pinned((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (pinned != manifest) {
      std::fprintf(stderr, "fixture checksums do not match pinned manifest %s\n",
                   check_path.c_str());
      return 3;
    }
    std::printf("checksums match %s\n", check_path.c_str());
  }
  return 0;
}

// random two-class linear models checked against exhaustive vertex enumeration
int cmd_verify_core(std::size_t trials, std::uint64_t seed, bool corrupt) {
  SplitMix64 rng(seed);
  std::size_t extrema_pass = 0;
  std::size_t projection_pass = 0;

  for (std::size_t t = 0; t < trials; ++t) {
    std::size_t n = 1 + rng.below(12);
    LinearModel lm;
    lm.classes = 2;
    lm.dims = n;
    for (std::size_t i = 0; i < 2 * n; ++i)
      lm.weights.push_back(rng.uniform() * 2.0 - 1.0);
    lm.bias = {rng.uniform(), rng.uniform()};
    auto model =
        std::make_shared<const FeedForwardModel>(lm.to_feedforward(PostProcess::Logits));

    Image x;
    x.shape = Shape{1, n, 1};
    for (std::size_t i = 0; i < n; ++i) x.data.push_back(20.0 + 215.0 * rng.uniform());
    double d_outer = 2.0 + 14.0 * rng.uniform();
    SearchRegion outer = make_region(x, d_outer);
    Objective obj = Objective::binary_margin();

    QueryLedger search_ledger(1u << 20);
    ScoreOracle search_oracle(model_backend(model), search_ledger);
    QueryLedger verify_ledger(1u << 22);
    ScoreOracle verify_oracle(model_backend(model), verify_ledger);

    SweepResult mn = approx_min(outer.lower_vertex(), obj, search_oracle, outer);
    SweepResult mx = approx_max(outer.lower_vertex(), obj, search_oracle, outer);
    VertexExtrema exact = brute_force_extremum(obj, verify_oracle, outer);
    double got_min = mn.objective_value + (corrupt ? 1.0 : 0.0);
    if (got_min == exact.min_value && mx.objective_value == exact.max_value) ++extrema_pass;

    if (n <= 10) {
      double d_inner = d_outer * (0.2 + 0.6 * rng.uniform());
      SearchRegion inner = make_region(x, d_inner);
      Image projected = project(inner, exact.min_vertex);
      QueryLedger inner_ledger(1u << 22);
      ScoreOracle inner_oracle(model_backend(model), inner_ledger);
      VertexExtrema inner_exact = brute_force_extremum(obj, inner_oracle, inner);
      double got = obj.value(model->evaluate(projected));
      if (got == inner_exact.min_value) ++projection_pass;
    } else {
      ++projection_pass;
    }
  }

  std::printf("extrema: %zu/%zu exact\n", extrema_pass, trials);
  std::printf("projection: %zu/%zu exact\n", projection_pass, trials);
  bool ok = extrema_pass == trials && projection_pass == trials;
  if (!ok) std::fprintf(stderr, "verification failed\n");
  return ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"query-efficient blackbox adversarial attack engine"};
  app.require_subcommand(1);

  // attack
  auto* attack = app.add_subcommand("attack", "attack a single image");
  ModelSource attack_src;
  attack_src.add_flags(attack, true);
  AttackFlags attack_flags;
  attack_flags.add_flags(attack);
  std::string attack_input, attack_out, attack_adv;
  std::size_t attack_index = 0;
  attack->add_option("--input", attack_input, "dsimg file holding the input image")->required();
  attack->add_option("--index", attack_index, "image index within the dsimg file")
      ->default_val(attack_index);
  attack->add_option("--out", attack_out, "write the outcome as JSON");
  attack->add_option("--adv-out", attack_adv, "write the adversarial image as dsimg on success");

  // campaign
  auto* campaign = app.add_subcommand("campaign", "attack every image in a dataset");
  ModelSource campaign_src;
  campaign_src.add_flags(campaign, true);
  AttackFlags campaign_flags;
  campaign_flags.add_flags(campaign);
  std::string campaign_dataset, campaign_json, campaign_csv;
  std::size_t campaign_parallelism = 1;
  campaign->add_option("--dataset", campaign_dataset, "dsimg dataset to attack")->required();
  campaign->add_option("--parallelism", campaign_parallelism, "worker threads")
      ->default_val(campaign_parallelism);
  campaign->add_option("--json", campaign_json, "write the report as JSON");
  campaign->add_option("--csv", campaign_csv, "write the per-image table as CSV");

  // serve-oracle
  auto* serve = app.add_subcommand("serve-oracle", "serve a model over the line protocol");
  std::string serve_model;
  bool serve_stdio = false;
  std::uint16_t serve_port = 0;
  serve->add_option("--model", serve_model, "path to a .dsmodel file")->required();
  serve->add_flag("--stdio", serve_stdio, "serve over stdin/stdout instead of TCP");
  serve->add_option("--port", serve_port, "TCP port (0 = pick a free port)")
      ->default_val(serve_port);

  // gen-fixtures
  auto* gen = app.add_subcommand("gen-fixtures", "generate the seeded fixture model and dataset");
  FixtureSpec spec;
  std::string gen_dir = ".";
  std::string gen_check;
  gen->add_option("--dir", gen_dir, "output directory")->default_val(gen_dir);
  gen->add_option("--seed", spec.seed, "fixture seed")
      ->envname("CUBEFUZZ_SEED")
      ->default_val(spec.seed);
  gen->add_option("--count", spec.count, "number of images")->default_val(spec.count);
  gen->add_option("--height", spec.shape.height, "image height")->default_val(spec.shape.height);
  gen->add_option("--width", spec.shape.width, "image width")->default_val(spec.shape.width);
  gen->add_option("--channels", spec.shape.channels, "image channels")
      ->default_val(spec.shape.channels);
  gen->add_option("--hidden", spec.hidden, "hidden layer width")->default_val(spec.hidden);
  gen->add_option("--classes", spec.classes, "number of classes")->default_val(spec.classes);
  gen->add_option("--hidden-scale", spec.hidden_weight_scale, "hidden weight range half-width")
      ->default_val(spec.hidden_weight_scale);
  gen->add_option("--output-scale", spec.output_weight_scale, "output weight range half-width")
      ->default_val(spec.output_weight_scale);
  gen->add_option("--check", gen_check, "compare against a pinned manifest file");

  // verify-core
  auto* verify = app.add_subcommand("verify-core", "exhaustive-oracle verification suites");
  std::size_t verify_trials = 100;
  std::uint64_t verify_seed = 0;
  bool verify_corrupt = false;
  verify->add_option("--trials", verify_trials, "number of random models")
      ->default_val(verify_trials);
  verify->add_option("--seed", verify_seed, "PRNG seed")
      ->envname("CUBEFUZZ_SEED")
      ->default_val(verify_seed);
  verify->add_flag("--corrupt", verify_corrupt)->group("");  // test hook, hidden from help

  CLI11_PARSE(app, argc, argv);

  try {
    if (*attack)
      return cmd_attack(attack_src, attack_flags, attack_input, attack_index, attack_out,
                        attack_adv);
    if (*campaign)
      return cmd_campaign(campaign_src, campaign_flags, campaign_dataset, campaign_parallelism,
                          campaign_json, campaign_csv);
    if (*serve) return cmd_serve(serve_model, serve_stdio, serve_port);
    if (*gen) return cmd_gen_fixtures(spec, gen_dir, gen_check);
    if (*verify) return cmd_verify_core(verify_trials, verify_seed, verify_corrupt);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
