#include <catch2/catch_amalgamated.hpp>

#include <sstream>
#include <string>

#include "l1sgd/engine.hpp"
#include "l1sgd/model_io.hpp"
#include "support.hpp"

using namespace l1sgd;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinRel;

static model_file trained_model(std::uint64_t seed) {
  const dataset ds = testsupport::random_dataset(30, 12, 5, seed);
  hyperparams hp = hyperparams::from_cost(1.0, ds.size());
  hp.schedule = variant::multiple;
  hp.epsilon = 0.05;
  hp.max_epochs = 500;
  hp.seed = seed;
  const train_result res = train(ds, hp);
  return make_model_file(ds, hp, res.state);
}

TEST_CASE("save, load, save is byte-identical") {
  const model_file mf = trained_model(7);
  std::ostringstream first;
  save_model(first, mf);
  std::istringstream in(first.str());
  const model_file back = load_model(in);
  std::ostringstream second;
  save_model(second, back);
  CHECK(first.str() == second.str());

  CHECK(back.dim == mf.dim);
  CHECK(back.rho == mf.rho);
  CHECK(back.cost == mf.cost);
  CHECK(back.lambda == mf.lambda);
  CHECK(back.schedule == mf.schedule);
  CHECK(back.seed == mf.seed);
  CHECK(back.epochs_eff == mf.epochs_eff);
  CHECK(back.margin_errors == mf.margin_errors);
  CHECK(back.steps == mf.steps);
  CHECK(back.weights == mf.weights);  // bitwise, via shortest round-trip decimals
}

TEST_CASE("model files tolerate windows line endings") {
  const model_file mf = trained_model(8);
  std::ostringstream out;
  save_model(out, mf);
  std::string text = out.str();
  std::string crlf;
  for (char c : text) {
    if (c == '\n') crlf += '\r';
    crlf += c;
  }
  std::istringstream in(crlf);
  const model_file back = load_model(in);
  CHECK(back.weights == mf.weights);
}

TEST_CASE("load rejects malformed model files") {
  const model_file mf = trained_model(9);
  std::ostringstream out;
  save_model(out, mf);
  const std::string good = out.str();

  SECTION("wrong magic") {
    std::istringstream in("l1sgd-model 2\n" + good.substr(good.find('\n') + 1));
    CHECK_THROWS_WITH(load_model(in), ContainsSubstring("unrecognized format"));
  }
  SECTION("empty stream") {
    std::istringstream in("");
    CHECK_THROWS_WITH(load_model(in), ContainsSubstring("missing magic line"));
  }
  SECTION("truncated weights") {
    const std::string cut = good.substr(0, good.rfind('\n', good.size() - 2) + 1);
    std::istringstream in(cut);
    CHECK_THROWS_WITH(load_model(in), ContainsSubstring("missing weight coordinate"));
  }
  SECTION("non-numeric weight") {
    std::string bad = good;
    bad.replace(bad.rfind('\n', bad.size() - 2) + 1, std::string::npos, "x\n");
    std::istringstream in(bad);
    CHECK_THROWS_WITH(load_model(in),
                      ContainsSubstring("bad weight on coordinate " +
                                        std::to_string(mf.dim - 1)));
  }
  SECTION("bad variant") {
    std::string bad = good;
    bad.replace(bad.find("variant m"), 9, "variant q");
    std::istringstream in(bad);
    CHECK_THROWS(load_model(in));
  }
  SECTION("dim under 1") {
    std::string bad = good;
    bad.replace(bad.find("dim "), bad.find('\n', bad.find("dim ")) - bad.find("dim "), "dim 0");
    std::istringstream in(bad);
    CHECK_THROWS_WITH(load_model(in), ContainsSubstring("dim must be >= 1"));
  }
  SECTION("header line with the wrong key") {
    std::string bad = good;
    bad.replace(bad.find("seed "), 5, "sead ");
    std::istringstream in(bad);
    CHECK_THROWS_WITH(load_model(in), ContainsSubstring("expected 'seed <value>'"));
  }
}

TEST_CASE("decision values include the augmentation coordinate") {
  model_file mf;
  mf.dim = 3;
  mf.rho = 2.0;
  mf.weights = {0.5, -1.0, 0.25};

  sparse_vector x;
  x.entries = {{0, 1.0}};
  // 0.5 * 1 + rho * w_last = 0.5 + 2 * 0.25
  CHECK_THAT(decision_value(mf, x), WithinRel(1.0, 1e-15));
  CHECK(predict_label(mf, x) == +1);

  sparse_vector y;
  y.entries = {{1, 1.0}};
  CHECK_THAT(decision_value(mf, y), WithinRel(-0.5, 1e-15));
  CHECK(predict_label(mf, y) == -1);

  sparse_vector z;  // empty: only the augmentation term
  CHECK_THAT(decision_value(mf, z), WithinRel(0.5, 1e-15));
}

TEST_CASE("without augmentation the last weight is an ordinary feature") {
  model_file mf;
  mf.dim = 2;
  mf.rho = 0.0;
  mf.weights = {0.0, -0.75};
  sparse_vector x;
  x.entries = {{1, 2.0}};
  CHECK_THAT(decision_value(mf, x), WithinRel(-1.5, 1e-15));
  sparse_vector empty;
  CHECK(decision_value(mf, empty) == 0.0);
  CHECK(predict_label(mf, empty) == +1);  // ties go to +1
}

TEST_CASE("prediction refuses examples wider than the training space") {
  model_file mf;
  mf.dim = 4;
  mf.rho = 1.0;  // feature_dim = 3
  mf.weights = {1.0, 1.0, 1.0, 1.0};
  sparse_vector x;
  x.entries = {{3, 1.0}};  // needs 4 features
  CHECK_THROWS_AS(decision_value(mf, x), std::invalid_argument);
  CHECK_THROWS_WITH(decision_value(mf, x),
                    ContainsSubstring("example has 4 features") &&
                        ContainsSubstring("trained on 3"));
  x.entries = {{2, 1.0}};  // exactly at the boundary is fine
  CHECK(decision_value(mf, x) == 2.0);
}

TEST_CASE("save refuses inconsistent weight counts") {
  model_file mf;
  mf.dim = 3;
  mf.weights = {1.0, 2.0};
  std::ostringstream out;
  CHECK_THROWS_AS(save_model(out, mf), std::invalid_argument);
}
