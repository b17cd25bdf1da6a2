#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "l1sgd/engine.hpp"
#include "l1sgd/objective.hpp"
#include "l1sgd/reference.hpp"
#include "support.hpp"

using namespace l1sgd;
using Catch::Matchers::WithinRel;

static hyperparams params_for(const dataset& ds, double C, variant v) {
  hyperparams hp = hyperparams::from_cost(C, ds.size());
  hp.schedule = v;
  return hp;
}

TEST_CASE("random-draw training with a zero step budget returns the zero model") {
  const dataset ds = testsupport::random_dataset(10, 6, 3, 1);
  hyperparams hp = params_for(ds, 2.0, variant::random);
  hp.max_steps = 0;
  const train_result res = train(ds, hp);
  CHECK(res.state.steps == 0);
  CHECK(res.report.rows.empty());
  CHECK(res.report.reason == stop_reason::step_limit);
  CHECK(res.report.final_objective == 2.0 * 10);  // all hinge losses are 1 at w = 0
  CHECK(res.report.box_excess == 0.0);
}

TEST_CASE("random-draw training is deterministic per seed") {
  const dataset ds = testsupport::random_dataset(25, 10, 5, 2);
  hyperparams hp = params_for(ds, 1.0, variant::random);
  hp.max_steps = 500;
  hp.seed = 99;
  const train_result a = train(ds, hp);
  const train_result b = train(ds, hp);
  CHECK(a.state.acc == b.state.acc);
  CHECK(a.state.hits == b.state.hits);
  CHECK(a.state.margin_errors == b.state.margin_errors);
  hp.seed = 100;
  const train_result c = train(ds, hp);
  CHECK(a.state.acc != c.state.acc);
}

TEST_CASE("random-draw training runs exactly the budgeted steps and logs blocks of m") {
  const dataset ds = testsupport::random_dataset(10, 6, 3, 3);
  hyperparams hp = params_for(ds, 1.0, variant::random);
  hp.max_steps = 23;  // 10 + 10 + 3
  std::int64_t observed = 0;
  const train_result res = train(ds, hp, [&](const model_state&) { ++observed; });
  CHECK(observed == 23);
  CHECK(res.state.steps == 23);
  CHECK(res.state.epochs == 0);  // no epoch structure
  REQUIRE(res.report.rows.size() == 3);
  CHECK(res.report.rows[0].steps == 10);
  CHECK(res.report.rows[1].steps == 20);
  CHECK(res.report.rows[2].steps == 23);
  CHECK(std::isnan(res.report.rows[0].exact_obj));
  CHECK(std::isnan(res.report.rows[0].lower_bound));  // no dual tracking
  CHECK(std::isfinite(res.report.rows[2].exact_obj));  // final objective, logged once
  CHECK(res.report.box_excess >= 0.0);
}

TEST_CASE("random-draw step budget of m matches one epoch's step count") {
  const dataset ds = testsupport::random_dataset(12, 6, 3, 4);
  hyperparams hp = params_for(ds, 1.0, variant::random);
  hp.max_steps = 12;
  const train_result r = train(ds, hp);

  hyperparams hs = params_for(ds, 1.0, variant::single);
  hs.max_epochs = 1;
  hs.epsilon = 1e-12;
  const train_result s = train(ds, hs);
  CHECK(r.state.steps == s.state.steps);
}

TEST_CASE("epoch training stops at the first boundary under a huge epsilon") {
  const dataset ds = testsupport::random_dataset(30, 8, 4, 5);
  hyperparams hp = params_for(ds, 1.0, variant::single);
  hp.epsilon = 1e6;
  hp.max_epochs = 100;
  const train_result res = train(ds, hp);
  REQUIRE(res.report.reason == stop_reason::criterion);
  REQUIRE(!res.report.rows.empty());
  // stopped at the first epoch whose lower bound was positive
  for (std::size_t i = 0; i + 1 < res.report.rows.size(); ++i)
    CHECK(!(res.report.rows[i].lower_bound > 0.0));
  CHECK(res.report.rows.back().lower_bound > 0.0);
  CHECK(res.report.rows.back().decision == epoch_decision::stopped);
}

TEST_CASE("epoch training on identical patterns converges to the closed form") {
  // m copies of y = (1): for C m >= 1 the optimum is w = 1 with J = 1/2
  std::vector<labeled_example> ex(20);
  for (auto& e : ex) {
    e.label = +1;
    e.features.entries = {{0, 1.0}};
  }
  const dataset ds = augment_reflect(ex, 0.0);
  hyperparams hp = params_for(ds, 5.0, variant::single);
  hp.epsilon = 1e-3;
  hp.max_epochs = 100000;
  const train_result res = train(ds, hp);
  REQUIRE(res.report.reason == stop_reason::criterion);
  CHECK(res.report.final_gap <= 1e-3);
  CHECK(res.report.final_objective >= 0.5 - 1e-12);  // J_opt from the 1-D closed form
  CHECK(res.report.final_objective <= 0.5 * (1 + 1e-3));
}

TEST_CASE("epoch training reports budget exhaustion distinctly") {
  const dataset ds = testsupport::random_dataset(40, 10, 5, 6);
  hyperparams hp = params_for(ds, 1.0, variant::single);
  hp.epsilon = 1e-12;  // unreachable
  hp.max_epochs = 5;
  const train_result res = train(ds, hp);
  CHECK(res.report.reason == stop_reason::budget);
  REQUIRE(res.report.rows.size() == 5);
  CHECK(res.report.rows.back().decision == epoch_decision::budget);
  // the last budgeted epoch always gets an exact objective evaluation
  CHECK(std::isfinite(res.report.rows.back().exact_obj));
  CHECK(std::isfinite(res.report.final_objective));
}

TEST_CASE("epoch training is deterministic and permutation policy changes the path") {
  const dataset ds = testsupport::random_dataset(30, 10, 5, 7);
  hyperparams hp = params_for(ds, 1.0, variant::single);
  hp.epsilon = 1e-12;
  hp.max_epochs = 6;
  hp.seed = 3;
  const train_result a = train(ds, hp);
  const train_result b = train(ds, hp);
  CHECK(a.state.acc == b.state.acc);
  CHECK(a.state.hits == b.state.hits);
  REQUIRE(a.report.rows.size() == b.report.rows.size());
  for (std::size_t i = 0; i < a.report.rows.size(); ++i) {
    CHECK(a.report.rows[i].steps == b.report.rows[i].steps);
    CHECK(a.report.rows[i].margin_errors == b.report.rows[i].margin_errors);
  }

  hyperparams hp_perm = hp;
  hp_perm.permute_each_epoch = true;
  const train_result c = train(ds, hp_perm);
  CHECK(a.state.acc != c.state.acc);  // different presentation orders after epoch 1
  CHECK(c.state.steps == a.state.steps);
}

TEST_CASE("weak duality and the box constraints hold along an epoch run") {
  const dataset ds = testsupport::random_dataset(60, 15, 6, 8);
  hyperparams hp = params_for(ds, 10.0, variant::multiple);
  hp.epsilon = 1e-9;
  hp.max_epochs = 120;
  const train_result res = train(ds, hp);
  for (const epoch_metrics& row : res.report.rows) {
    if (std::isfinite(row.exact_obj))
      CHECK(row.lower_bound <= row.exact_obj + 1e-9 * (1.0 + std::abs(row.exact_obj)));
    CHECK(row.margin_errors <= row.epoch_eff * static_cast<std::int64_t>(ds.size()));
  }
  for (std::int64_t h : res.state.hits) CHECK(h <= res.state.epochs_eff);
}

TEST_CASE("the weight vector reconstructs from the per-pattern error counts") {
  const dataset ds = testsupport::random_dataset(50, 12, 6, 9);
  hyperparams hp = params_for(ds, 1.0, variant::multiple);
  hp.epsilon = 1e-12;
  hp.max_epochs = 40;
  const train_result res = train(ds, hp);
  std::vector<double> rebuilt(static_cast<std::size_t>(ds.dim), 0.0);
  for (std::size_t k = 0; k < ds.size(); ++k)
    add_scaled(rebuilt, ds.patterns[k].y, static_cast<double>(res.state.hits[k]));
  CHECK(testsupport::max_abs_diff(rebuilt, res.state.acc) <=
        1e-8 * (1.0 + testsupport::norm(res.state.acc)));
}

TEST_CASE("rescaled and plain-coordinate recursions trace the same weights") {
  const dataset ds = testsupport::random_dataset(15, 8, 4, 10);
  const double lambda = 1.0 / (1.0 * 15);
  model_state st = make_state(ds);
  testsupport::weight_space_oracle oracle(static_cast<std::size_t>(ds.dim), lambda);
  splitmix64 rng(55);
  for (int i = 0; i < 500; ++i) {
    const std::size_t k = static_cast<std::size_t>(rng.below(ds.size()));
    single_update(st, ds.patterns[k], k, lambda);
    oracle.present(ds.patterns[k]);
    const std::vector<double> w = weight_vector(st, lambda);
    REQUIRE(testsupport::max_abs_diff(w, oracle.w) <=
            1e-6 * (1.0 + testsupport::norm(oracle.w)));
  }
}

TEST_CASE("multiple-variant scheduling accumulates effective epochs") {
  const dataset ds = testsupport::random_dataset(20, 8, 4, 11);
  hyperparams hp = params_for(ds, 1.0, variant::multiple);
  hp.epsilon = 1e-15;
  hp.max_epochs = 9;  // one macrocycle
  const train_result res = train(ds, hp);
  CHECK(res.state.epochs == 9);
  CHECK(res.state.epochs_eff == 25);
  const std::vector<std::int64_t> expect_eff{1, 6, 11, 16, 21, 22, 23, 24, 25};
  REQUIRE(res.report.rows.size() == 9);
  for (std::size_t i = 0; i < 9; ++i) {
    CHECK(res.report.rows[i].epoch == static_cast<std::int64_t>(i + 1));
    CHECK(res.report.rows[i].epoch_eff == expect_eff[i]);
    CHECK(res.report.rows[i].steps == expect_eff[i] * 20);
  }
}

TEST_CASE("multiple variant with block length 1 walks the single variant's path") {
  const dataset ds = testsupport::random_dataset(35, 12, 5, 12);
  hyperparams hm = params_for(ds, 2.0, variant::multiple);
  hm.multiplicity = 1;
  hm.epsilon = 1e-12;
  hm.max_epochs = 15;
  hm.seed = 4;
  hyperparams hs = hm;
  hs.schedule = variant::single;
  hs.multiplicity = 5;  // irrelevant for the single variant
  const train_result m = train(ds, hm);
  const train_result s = train(ds, hs);
  CHECK(m.state.acc == s.state.acc);
  CHECK(m.state.hits == s.state.hits);
  CHECK(m.state.steps == s.state.steps);
  CHECK(m.state.epochs_eff == s.state.epochs_eff);
}

TEST_CASE("a macrocycle equals its expansion into grouped single presentations") {
  const dataset ds = testsupport::random_dataset(25, 10, 5, 13);
  const double lambda = 1.0 / (1.0 * 25);
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  splitmix64 rng(17);
  shuffle(std::span<std::size_t>(order), rng);

  model_state blocked = make_state(ds);
  model_state expanded = make_state(ds);
  for (std::int64_t pos = 0; pos < 9; ++pos) {
    const int ell = epoch_multiplicity(variant::multiple, pos, 5);
    run_epoch(blocked, ds, order, ell, lambda);
    for (std::size_t k : order)
      for (int i = 0; i < ell; ++i) single_update(expanded, ds.patterns[k], k, lambda);
  }
  CHECK(blocked.steps == expanded.steps);
  CHECK(blocked.hits == expanded.hits);
  CHECK(blocked.margin_errors == expanded.margin_errors);
  CHECK(testsupport::max_abs_diff(blocked.acc, expanded.acc) <=
        1e-8 * (1.0 + testsupport::norm(expanded.acc)));
}

TEST_CASE("approximate objective tracks the exact one loosely on small runs") {
  // diagnostic from live runs: the cached-margin estimate is within 50%
  for (std::uint64_t seed : {21, 22, 23}) {
    const dataset ds = testsupport::random_dataset(80, 15, 6, seed);
    hyperparams hp = params_for(ds, 1.0, variant::single);
    hp.epsilon = 1e-12;
    hp.max_epochs = 30;
    const train_result res = train(ds, hp);
    const double exact = res.report.final_objective;
    const double approx = approximate_objective(res.state, ds, hp.cost, hp.lambda);
    REQUIRE(std::isfinite(exact));
    CHECK(std::abs(approx - exact) / exact < 0.5);
  }
}

TEST_CASE("train dispatches on the variant") {
  const dataset ds = testsupport::random_dataset(10, 5, 3, 30);
  hyperparams hr = params_for(ds, 1.0, variant::random);
  hr.max_steps = 7;
  CHECK(train(ds, hr).state.steps == 7);
  hyperparams hs = params_for(ds, 1.0, variant::single);
  hs.max_epochs = 2;
  hs.epsilon = 1e-12;
  CHECK(train(ds, hs).state.epochs == 2);
  CHECK_THROWS_AS(train_random(ds, hs), std::invalid_argument);
  CHECK_THROWS_AS(train_epochs(ds, hr), std::invalid_argument);
}
