#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cmath>
#include <span>

#include "sgood/adam.hpp"
#include "sgood/tape.hpp"
#include "sgood/training.hpp"
#include "test_util.hpp"

using namespace sgood;

namespace {

Tensor random_tensor(int rows, int cols, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(rows, cols);
  for (double& v : t.data) v = rng.uniform_real(lo, hi);
  return t;
}

// Keeps relu inputs away from the kink so central differences stay clean.
Tensor random_tensor_off_zero(int rows, int cols, Rng& rng) {
  Tensor t(rows, cols);
  for (double& v : t.data) {
    const double sign = rng.uniform(2) == 0 ? -1.0 : 1.0;
    v = sign * rng.uniform_real(0.05, 1.0);
  }
  return t;
}

// Reduces any op output to a scalar with fixed random weights so every output
// entry contributes a distinct gradient path.
NodeId weighted_sum(Tape& tape, NodeId x, Rng& rng) {
  Tensor w(tape.value(x).rows, tape.value(x).cols);
  for (double& v : w.data) v = rng.uniform_real(0.5, 1.5);
  return tape.sum_all(tape.mul(x, tape.input(std::move(w))));
}

}  // namespace

TEST_CASE("op examples") {
  Tape tape;

  SUBCASE("relu forward and mask") {
    const NodeId x = tape.input(Tensor::row({-1.0, 2.0}));
    const NodeId y = tape.relu(x);
    CHECK(tape.value(y).data == std::vector<double>{0.0, 2.0});
    tape.backward(tape.sum_all(y));
    CHECK(tape.grad(x).data == std::vector<double>{0.0, 1.0});
  }

  SUBCASE("l2 normalize the 3-4-5 row") {
    const NodeId x = tape.input(Tensor::row({3.0, 4.0}));
    const NodeId y = tape.l2_normalize_rows(x);
    CHECK(tape.value(y).data[0] == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(tape.value(y).data[1] == doctest::Approx(0.8).epsilon(1e-12));
  }

  SUBCASE("zero row cannot be normalized") {
    const NodeId x = tape.input(Tensor::row({0.0, 0.0}));
    CHECK_THROWS(tape.l2_normalize_rows(x));
  }

  SUBCASE("segment sum groups rows by owner") {
    const NodeId x = tape.input(Tensor::from_rows(3, 2, {1, 2, 3, 4, 5, 6}));
    const NodeId y = tape.segment_sum(x, {0, 0, 1}, 2);
    CHECK(tape.value(y).data == std::vector<double>{4, 6, 5, 6});
  }

  SUBCASE("shape mismatches are rejected") {
    const NodeId a = tape.input(Tensor(2, 3));
    const NodeId b = tape.input(Tensor(3, 2));
    CHECK_THROWS(tape.mul(a, b));
    CHECK_THROWS(tape.add(a, b));
  }

  SUBCASE("non-finite outputs are rejected") {
    const NodeId x = tape.input(Tensor::row({1000.0}));
    CHECK_THROWS(tape.exp(x));
  }
}

TEST_CASE("per-op gradient checks stay under 1e-7") {
  Rng rng(31337);

  const auto check1 = [&](const char* name, auto op, Tensor input) {
    const std::vector<Tensor> params{std::move(input)};
    const double err = grad_check(
        [&](Tape& t, std::span<const NodeId> ids) {
          Rng wrng(777);
          return weighted_sum(t, op(t, ids[0]), wrng);
        },
        params);
    INFO(name);
    CHECK(err < 1e-7);
  };

  check1("relu", [](Tape& t, NodeId x) { return t.relu(x); },
         random_tensor_off_zero(3, 4, rng));
  check1("exp", [](Tape& t, NodeId x) { return t.exp(x); }, random_tensor(3, 4, rng));
  check1("log", [](Tape& t, NodeId x) { return t.log(x); }, random_tensor(3, 4, rng, 0.2, 2.0));
  check1("scale", [](Tape& t, NodeId x) { return t.scale(x, -1.7); }, random_tensor(3, 4, rng));
  check1("transpose", [](Tape& t, NodeId x) { return t.transpose(x); },
         random_tensor(3, 4, rng));
  check1("sum_rows", [](Tape& t, NodeId x) { return t.sum_rows(x); }, random_tensor(3, 4, rng));
  check1("sum_cols", [](Tape& t, NodeId x) { return t.sum_cols(x); }, random_tensor(3, 4, rng));
  check1("sum_all", [](Tape& t, NodeId x) { return t.sum_all(x); }, random_tensor(3, 4, rng));
  check1("l2_normalize", [](Tape& t, NodeId x) { return t.l2_normalize_rows(x); },
         random_tensor_off_zero(3, 4, rng));
  check1("segment_sum",
         [](Tape& t, NodeId x) { return t.segment_sum(x, {1, 0, 1, 2}, 3); },
         random_tensor(4, 3, rng));
  check1("neighbor_sum",
         [](Tape& t, NodeId x) {
           return t.neighbor_sum(x, {{0, 1}, {1, 0}, {1, 2}, {2, 1}, {3, 3}});
         },
         random_tensor(4, 3, rng));

  const auto check2 = [&](const char* name, auto op, Tensor a, Tensor b) {
    const std::vector<Tensor> params{std::move(a), std::move(b)};
    const double err = grad_check(
        [&](Tape& t, std::span<const NodeId> ids) {
          Rng wrng(778);
          return weighted_sum(t, op(t, ids[0], ids[1]), wrng);
        },
        params);
    INFO(name);
    CHECK(err < 1e-7);
  };

  check2("matmul", [](Tape& t, NodeId a, NodeId b) { return t.matmul(a, b); },
         random_tensor(3, 4, rng), random_tensor(4, 2, rng));
  check2("add", [](Tape& t, NodeId a, NodeId b) { return t.add(a, b); },
         random_tensor(3, 4, rng), random_tensor(3, 4, rng));
  check2("add row broadcast", [](Tape& t, NodeId a, NodeId b) { return t.add(a, b); },
         random_tensor(3, 4, rng), random_tensor(1, 4, rng));
  check2("mul", [](Tape& t, NodeId a, NodeId b) { return t.mul(a, b); },
         random_tensor(3, 4, rng), random_tensor(3, 4, rng));
  check2("scale_by", [](Tape& t, NodeId a, NodeId s) { return t.scale_by(a, s); },
         random_tensor(3, 4, rng), random_tensor(1, 1, rng));
  check2("concat_cols",
         [](Tape& t, NodeId a, NodeId b) {
           const std::array<NodeId, 2> parts{a, b};
           return t.concat_cols(parts);
         },
         random_tensor(3, 2, rng), random_tensor(3, 4, rng));
  check2("concat_rows",
         [](Tape& t, NodeId a, NodeId b) {
           const std::array<NodeId, 2> parts{a, b};
           return t.concat_rows(parts);
         },
         random_tensor(2, 3, rng), random_tensor(4, 3, rng));

  SUBCASE("softmax cross entropy") {
    const std::vector<Tensor> params{random_tensor(4, 3, rng)};
    const double err = grad_check(
        [](Tape& t, std::span<const NodeId> ids) {
          return t.softmax_cross_entropy(ids[0], {0, 2, 1, 2});
        },
        params);
    CHECK(err < 1e-7);
  }
}

TEST_CASE("grad_check on a quadratic is nearly exact") {
  Rng rng(5);
  const std::vector<Tensor> params{random_tensor(2, 3, rng)};
  const double err = grad_check(
      [](Tape& t, std::span<const NodeId> ids) { return t.sum_all(t.mul(ids[0], ids[0])); },
      params);
  CHECK(err < 1e-8);
}

TEST_CASE("backward visits each node once: diamond reuse") {
  // y = x*x + x*x reuses the same node twice
  Tape tape;
  const NodeId x = tape.input(Tensor::scalar(3.0));
  const NodeId sq = tape.mul(x, x);
  const NodeId y = tape.add(sq, sq);
  tape.backward(y);
  CHECK(tape.grad(x).data[0] == doctest::Approx(12.0).epsilon(1e-12));
}

TEST_CASE("ntxent gradient on a 2-graph batch") {
  Rng rng(606);
  const std::vector<Tensor> params{random_tensor(2, 5, rng), random_tensor(2, 5, rng)};
  const double err = grad_check(
      [](Tape& t, std::span<const NodeId> ids) {
        const NodeId u0 = t.l2_normalize_rows(ids[0]);
        const NodeId u1 = t.l2_normalize_rows(ids[1]);
        return ntxent_loss(t, u0, u1, 0.5);
      },
      params);
  CHECK(err < 1e-5);
}

TEST_CASE("adam_step") {
  SUBCASE("zero gradient leaves parameters unchanged") {
    ParamSet params{{"w", Tensor::row({1.0, -2.0})}};
    const ParamSet before = params;
    AdamState state;
    adam_step(params, {{"w", Tensor(1, 2)}}, state, AdamConfig{});
    CHECK(params == before);
  }

  SUBCASE("first step matches the closed form") {
    const AdamConfig cfg{.lr = 0.01};
    ParamSet params{{"w", Tensor::row({1.0, -2.0, 0.5})}};
    const Tensor grad = Tensor::row({0.3, -0.7, 0.001});
    AdamState state;
    adam_step(params, {{"w", grad}}, state, cfg);
    for (int i = 0; i < 3; ++i) {
      const double g = grad.data[i];
      const double expected = (i == 0 ? 1.0 : i == 1 ? -2.0 : 0.5) -
                              cfg.lr * g / (std::abs(g) + cfg.eps);
      CHECK(params["w"].data[i] == doctest::Approx(expected).epsilon(1e-12));
    }
  }

  SUBCASE("identical call sequences give identical trajectories") {
    const auto run = [] {
      ParamSet params{{"w", Tensor::row({0.5, 0.25})}};
      AdamState state;
      Rng rng(17);
      for (int step = 0; step < 25; ++step) {
        Tensor g(1, 2);
        for (double& v : g.data) v = rng.uniform_real(-1.0, 1.0);
        adam_step(params, {{"w", g}}, state, AdamConfig{});
      }
      return params;
    };
    CHECK(run() == run());
  }

  SUBCASE("missing or misshaped gradients are rejected") {
    ParamSet params{{"w", Tensor::row({1.0})}};
    AdamState state;
    CHECK_THROWS(adam_step(params, {}, state, AdamConfig{}));
    CHECK_THROWS(adam_step(params, {{"w", Tensor(2, 2)}}, state, AdamConfig{}));
  }
}
