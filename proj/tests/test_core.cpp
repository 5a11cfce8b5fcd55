#include <doctest.h>

#include <cmath>

#include "cubefuzz/ledger.hpp"
#include "cubefuzz/oracle.hpp"
#include "cubefuzz/region.hpp"
#include "cubefuzz/rng.hpp"
#include "cubefuzz/types.hpp"

using namespace cubefuzz;

namespace {

Image img(std::vector<double> data) {
  Image x;
  x.shape = Shape{1, data.size(), 1};
  x.data = std::move(data);
  return x;
}

Image random_image(SplitMix64& rng, std::size_t n) {
  std::vector<double> d;
  for (std::size_t i = 0; i < n; ++i) d.push_back(255.0 * rng.uniform());
  return img(std::move(d));
}

}  // namespace

TEST_CASE("linf distance") {
  CHECK(linf_distance(img({0, 0}), img({0, 0})) == 0.0);
  CHECK(linf_distance(img({10, 20, 30}), img({12, 20, 25})) == 5.0);
  CHECK_THROWS_AS(linf_distance(img({1}), img({1, 2})), std::invalid_argument);

  // symmetric, and equal to an independent scalar loop
  SplitMix64 rng(42);
  for (int t = 0; t < 20; ++t) {
    Image a = random_image(rng, 64);
    Image b = random_image(rng, 64);
    double expect = 0.0;
    for (std::size_t i = 0; i < 64; ++i) {
      double diff = a.data[i] - b.data[i];
      if (diff < 0) diff = -diff;
      if (diff > expect) expect = diff;
    }
    CHECK(linf_distance(a, b) == expect);
    CHECK(linf_distance(b, a) == expect);
  }
}

TEST_CASE("linf triangle inequality") {
  SplitMix64 rng(7);
  for (int t = 0; t < 50; ++t) {
    Image a = random_image(rng, 16);
    Image b = random_image(rng, 16);
    Image c = random_image(rng, 16);
    CHECK(linf_distance(a, b) <= linf_distance(a, c) + linf_distance(c, b) + 1e-12);
  }
}

TEST_CASE("l2 distance") {
  CHECK(l2_distance(img({5, 6}), img({5, 6})) == 0.0);
  CHECK(l2_distance(img({3, 0}), img({0, 4})) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK_THROWS_AS(l2_distance(img({1}), img({1, 2})), std::invalid_argument);

  SplitMix64 rng(43);
  for (int t = 0; t < 20; ++t) {
    Image a = random_image(rng, 32);
    Image b = random_image(rng, 32);
    double sum = 0.0;
    for (std::size_t i = 0; i < 32; ++i)
      sum += (a.data[i] - b.data[i]) * (a.data[i] - b.data[i]);
    CHECK(l2_distance(a, b) == doctest::Approx(std::sqrt(sum)).epsilon(1e-12));
  }
}

TEST_CASE("make_region clamps to the pixel range") {
  SearchRegion r = make_region(img({128}), 8);
  CHECK(r.intervals[0] == Interval{120, 136});
  CHECK(make_region(img({3}), 8).intervals[0] == Interval{0, 11});
  CHECK(make_region(img({252}), 8).intervals[0] == Interval{244, 255});
  CHECK_THROWS_AS(make_region(img({128}), -1), std::invalid_argument);
}

TEST_CASE("region contains its center and bounds every vertex by d") {
  SplitMix64 rng(5);
  for (int t = 0; t < 20; ++t) {
    Image x = random_image(rng, 8);
    double d = 16.0 * rng.uniform();
    SearchRegion r = make_region(x, d);
    CHECK(r.contains(x));
    CHECK(linf_distance(x, r.lower_vertex()) <= d + 1e-9);
    CHECK(linf_distance(x, r.upper_vertex()) <= d + 1e-9);
    r.validate();
  }
}

TEST_CASE("image validation") {
  Image x = img({1, 2, 3});
  x.validate();
  x.data[1] = 256.0;
  CHECK_THROWS_AS(x.validate(), std::invalid_argument);
  x.data[1] = -0.5;
  CHECK_THROWS_AS(x.validate(), std::invalid_argument);
  x.data[1] = 2.0;
  x.shape = Shape{2, 2, 1};
  CHECK_THROWS_AS(x.validate(), std::invalid_argument);
}

TEST_CASE("argmax breaks ties toward the lowest index") {
  CHECK(argmax_label({0.9, 0.1}) == Label{0});
  CHECK(argmax_label({0.1, 0.9}) == Label{1});
  CHECK(argmax_label({0.5, 0.5}) == Label{0});
  CHECK(argmax_label({1.0, 3.0, 3.0, 2.0}) == Label{1});
  CHECK_THROWS_AS(argmax_label({1.0}), std::invalid_argument);
}

TEST_CASE("ledger counts and budget enforcement") {
  QueryLedger ledger(10);
  CHECK(ledger.budget() == 10);
  CHECK(ledger.remaining(QueryPhase::Attack) == 10);

  ledger.charge(QueryPhase::Attack, 3);
  CHECK(ledger.attack_queries() == 3);
  CHECK(ledger.remaining(QueryPhase::Attack) == 7);

  ledger.charge(QueryPhase::Attack, 7);
  CHECK(ledger.remaining(QueryPhase::Attack) == 0);
  CHECK_THROWS_AS(ledger.charge(QueryPhase::Attack, 1), budget_exhausted_error);
  CHECK(ledger.attack_queries() == 10);  // failed charge rolled back

  // refinement counter is separate and not capped by charge()
  ledger.charge(QueryPhase::Refinement, 25);
  CHECK(ledger.refinement_queries() == 25);
  CHECK(ledger.attack_queries() == 10);
}

TEST_CASE("oracle charges one query per input") {
  QueryLedger ledger(100);
  std::size_t backend_calls = 0;
  ScoreOracle oracle(
      [&](const std::vector<Image>& xs) {
        ++backend_calls;
        return std::vector<ScoreVector>(xs.size(), ScoreVector{0.9, 0.1});
      },
      ledger);

  Image x = img({1, 2});
  oracle.evaluate(x);
  oracle.evaluate(x);
  oracle.evaluate_batch({x, x, x});
  // K single evaluations plus batches totaling B inputs charge exactly K + B
  CHECK(ledger.attack_queries() == 5);
  CHECK(backend_calls == 3);

  oracle.set_phase(QueryPhase::Refinement);
  oracle.evaluate(x);
  CHECK(ledger.attack_queries() == 5);
  CHECK(ledger.refinement_queries() == 1);
}

TEST_CASE("is_adversarial follows the argmax rule") {
  QueryLedger ledger(10);
  ScoreVector scores{0.9, 0.1};
  ScoreOracle oracle(
      [&](const std::vector<Image>& xs) {
        return std::vector<ScoreVector>(xs.size(), scores);
      },
      ledger);

  Image x = img({5});
  CHECK_FALSE(oracle.is_adversarial(x, Label{0}));
  scores = {0.1, 0.9};
  CHECK(oracle.is_adversarial(x, Label{0}));
  scores = {0.5, 0.5};  // tie resolves to class 0
  CHECK_FALSE(oracle.is_adversarial(x, Label{0}));
  CHECK(ledger.attack_queries() == 3);
}

TEST_CASE("evaluation refuses to exceed the budget") {
  QueryLedger ledger(2);
  ScoreOracle oracle(
      [](const std::vector<Image>& xs) {
        return std::vector<ScoreVector>(xs.size(), ScoreVector{0.0, 1.0});
      },
      ledger);
  Image x = img({5});
  oracle.evaluate(x);
  CHECK_THROWS_AS(oracle.evaluate_batch({x, x}), budget_exhausted_error);
  oracle.evaluate(x);
  CHECK_THROWS_AS(oracle.evaluate(x), budget_exhausted_error);
  CHECK(ledger.attack_queries() == 2);
}
