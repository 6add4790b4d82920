#include <cmath>
#include <limits>

#include "doctest.h"
#include "dufs/error.hpp"
#include "dufs/synth.hpp"
#include "dufs/trainer.hpp"

using namespace dufs;

namespace {

DataMatrix moons(std::size_t nuisance, std::uint64_t seed, std::size_t n = 60) {
  TwoMoonsConfig mc;
  mc.n = n;
  mc.d_nuisance = nuisance;
  mc.seed = seed;
  return preprocess(gen_two_moons(mc).x);
}

TrainConfig short_run(int epochs, std::uint64_t seed = 0) {
  TrainConfig c;
  c.epochs = epochs;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_SUITE("trainer") {
  TEST_CASE("zero learning rate leaves mu unchanged") {
    TrainConfig c = short_run(25);
    c.learning_rate = 0.0;
    const auto res = train(moons(3, 1), c);
    CHECK(res.params.mu.isConstant(0.5, 0.0));
  }

  TEST_CASE("without a penalty and without nuisance both gates stay open") {
    TrainConfig c = short_run(200);
    c.loss = LambdaRegularized{0.0};
    const auto res = train(moons(0, 2), c);
    CHECK((open_probability(res.params).array() > 0.5).all());
    CHECK((res.params.mu.array() >= 0.5).all());
  }

  TEST_CASE("selection from the sign of mu with probability ranking") {
    GateParams p;
    p.mu = Eigen::Vector2d(0.9, -0.5);
    const auto s = select_features(p);
    CHECK(s.retained == std::vector<std::size_t>{0});
    CHECK(s.ranking == std::vector<std::size_t>{0, 1});
    CHECK(s.open_probabilities[0] > s.open_probabilities[1]);
  }

  TEST_CASE("probability ties rank by index and top_k picks the head") {
    GateParams p;
    p.mu = Eigen::Vector4d(0.2, 0.7, 0.2, 0.7);
    const auto s = select_features(p, 3);
    CHECK(s.ranking == std::vector<std::size_t>{1, 3, 0, 2});
    CHECK(s.retained == std::vector<std::size_t>{0, 1, 3});
    CHECK_THROWS_AS(select_features(p, 5), InvalidInput);
    CHECK(select_features(p, 0).retained.empty());
  }

  TEST_CASE("identical seed and config give a bit-identical trace") {
    TrainConfig c = short_run(60, 9);
    const auto x = moons(4, 3);
    const auto a = train(x, c, std::vector<std::size_t>{0, 1});
    const auto b = train(x, c, std::vector<std::size_t>{0, 1});
    REQUIRE(a.trace.records.size() == b.trace.records.size());
    for (std::size_t i = 0; i < a.trace.records.size(); ++i) {
      CHECK(a.trace.records[i].loss == b.trace.records[i].loss);
      CHECK(a.trace.records[i].sum_open_prob == b.trace.records[i].sum_open_prob);
      CHECK(*a.trace.records[i].precision == *b.trace.records[i].precision);
    }
    CHECK(a.params.mu == b.params.mu);
    c.seed = 10;
    CHECK(train(x, c).params.mu != a.params.mu);
  }

  TEST_CASE("trace length follows the logging stride") {
    TrainConfig c = short_run(23);
    CHECK(train(moons(1, 0), c).trace.records.size() == 23);
    c.log_every = 5;
    const auto res = train(moons(1, 0), c);
    REQUIRE(res.trace.records.size() == 5);  // 5, 10, 15, 20 and the final epoch
    CHECK(res.trace.records.back().epoch == 23);
    CHECK_FALSE(res.trace.records[0].precision.has_value());
  }

  TEST_CASE("minibatch training runs and respects the neighbor bound") {
    TrainConfig c = short_run(10);
    c.batch_size = 20;
    const auto res = train(moons(3, 4), c);
    CHECK(res.params.mu.allFinite());
    c.batch_size = 2;
    CHECK_THROWS_AS(train(moons(3, 4), c), InvalidInput);
  }

  TEST_CASE("non-finite data aborts with the epoch in the message") {
    DataMatrix x = moons(2, 5);
    x.values(3, 1) = std::numeric_limits<double>::quiet_NaN();
    try {
      train(x, short_run(5));
      FAIL("expected a numerical failure");
    } catch (const NumericalFailure& e) {
      CHECK(std::string(e.what()).find("epoch 1") != std::string::npos);
      CHECK(std::string(e.what()).find("mu = [") != std::string::npos);
    }
  }

  TEST_CASE("invalid configurations are rejected before training") {
    TrainConfig c = short_run(0);
    CHECK_THROWS_AS(train(moons(1, 0), c), InvalidInput);
  }

  TEST_CASE("larger lambda does not retain more features") {
    int monotone = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto x = moons(4, 100 + seed, 40);
      std::size_t prev = std::numeric_limits<std::size_t>::max();
      bool ok = true;
      for (double lambda : {0.01, 0.1, 1.0, 10.0}) {
        TrainConfig c = short_run(150, seed);
        c.loss = LambdaRegularized{lambda};
        const auto kept = train(x, c).selection.retained.size();
        ok = ok && kept <= prev;
        prev = kept;
      }
      monotone += ok;
    }
    CHECK(monotone >= 8);
  }
}
