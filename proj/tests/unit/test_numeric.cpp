// Copyright 2026 The mapcast Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <sstream>

#include "common/error.hpp"
#include "doctest.h"
#include "numeric/checkpoint.hpp"
#include "numeric/linalg.hpp"
#include "numeric/optim.hpp"
#include "support/gradient_suites.hpp"
#include "support/oracles.hpp"

using namespace mapcast;
using namespace mapcast::nc;

namespace {

std::string error_text(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("matmul by identity") {
  Tape tape;
  const auto a = Tensor::matrix(3, 3, {1, 2, 3, 4, 5, 6, 7, 8, 9.5});
  const auto out = matmul(tape.constant(a), tape.constant(Tensor::identity(3)));
  CHECK(out.value() == a);
}

TEST_CASE("softmax of zeros is uniform") {
  Tape tape;
  const auto out = softmax(tape.constant(Tensor({4}, 0.0)), 0);
  for (std::size_t i = 0; i < 4; ++i) CHECK(out.value()[i] == doctest::Approx(0.25));
}

TEST_CASE("conv1d with kernel [1] is the identity") {
  Rng rng(1);
  Tape tape;
  const auto x = testing::random_tensor({2, 1, 7}, rng);
  const auto out = conv1d(tape.constant(x), tape.constant(Tensor({1, 1, 1}, 1.0)), Var{}, 3);
  CHECK(out.value() == x);
}

TEST_CASE("conv1d is causal with left zero padding") {
  Tape tape;
  // kernel [a, b] with dilation 2: out[t] = a*x[t-2] + b*x[t]
  const auto x = Tensor({1, 1, 5}, std::vector<double>{1, 2, 3, 4, 5});
  const auto w = Tensor({1, 1, 2}, std::vector<double>{10, 1});
  const auto out = conv1d(tape.constant(x), tape.constant(w), Var{}, 2);
  CHECK(out.value().storage() == std::vector<double>{1, 2, 13, 24, 35});
}

TEST_CASE("shape errors name the primitive and both shapes") {
  Tape tape;
  const auto a = tape.constant(Tensor({2, 3}));
  const auto b = tape.constant(Tensor({2, 3}));
  const auto msg = error_text([&] { matmul(a, b); });
  CHECK(msg.find("matmul") != std::string::npos);
  CHECK(msg.find("[2,3]") != std::string::npos);
  CHECK_FALSE(error_text([&] { add(a, tape.constant(Tensor({4}))); }).empty());
  CHECK_FALSE(error_text([&] { concat({a, tape.constant(Tensor({3, 2}))}, 0); }).empty());
}

TEST_CASE("backward examples") {
  {
    Tape tape;
    const auto x = tape.leaf(Tensor::scalar(3.0));
    tape.backward(mul(x, x));
    CHECK(tape.grad(x)[0] == doctest::Approx(6.0));
  }
  {
    Tape tape;
    const auto x = tape.leaf(Tensor({5}, 0.0));
    tape.backward(sum(sigmoid(x)));
    const auto grad = tape.grad(x);
    for (double g : grad.storage()) CHECK(g == doctest::Approx(0.25));
  }
}

TEST_CASE("backward contract errors") {
  Tape tape;
  const auto x = tape.leaf(Tensor({3}, 1.0));
  CHECK_THROWS_AS(tape.backward(x), Error);  // non-scalar
  const auto c = tape.constant(Tensor::scalar(1.0));
  CHECK_THROWS_AS(tape.backward(c), Error);  // nothing tracked
  CHECK_THROWS_AS(tape.backward(Var{}), Error);
  Tape other;
  const auto y = other.leaf(Tensor::scalar(2.0));
  CHECK_THROWS_AS(add(x, y), Error);
  const auto loss = sum(x);
  tape.backward(loss);
  CHECK_THROWS_AS(tape.backward(loss), Error);  // consumed
}

TEST_CASE("random two-layer composition matches finite differences") {
  Rng rng(10);
  for (int trial = 0; trial < 5; ++trial) {
    const auto r = testing::grad_check(
        [](Tape&, const std::vector<Var>& v) {
          const auto h = tanh(add(matmul(v[0], v[1]), v[2]));
          return mse_loss(matmul(h, v[3]), v[4]);
        },
        {testing::random_tensor({3, 4}, rng), testing::random_tensor({4, 5}, rng),
         testing::random_tensor({5}, rng), testing::random_tensor({5, 2}, rng),
         testing::random_tensor({3, 2}, rng)});
    CHECK(r.rel_error < 1e-4);
  }
}

TEST_CASE("every primitive passes seeded finite-difference checks") {
  Rng rng(2024);
  for (const auto& c : testing::primitive_cases()) {
    double worst = 0.0;
    for (int i = 0; i < 25; ++i) worst = std::max(worst, c.run(rng).rel_error);
    INFO(c.name << " worst relative error " << worst);
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("mse_loss gradient is 2(pred - target)/n") {
  Rng rng(6);
  Tape tape;
  const auto p = testing::random_tensor({3, 4}, rng), t = testing::random_tensor({3, 4}, rng);
  const auto pv = tape.leaf(p);
  tape.backward(mse_loss(pv, tape.constant(t)));
  const auto g = tape.grad(pv);
  for (std::size_t i = 0; i < 12; ++i) CHECK(std::abs(g[i] - 2.0 * (p[i] - t[i]) / 12.0) < 1e-15);
}

TEST_CASE("parameters accumulate gradients across passes") {
  ParameterSet ps;
  auto& w = ps.add("w", Tensor::scalar(2.0));
  for (int i = 0; i < 2; ++i) {
    Tape tape;
    const auto x = tape.param(w);
    tape.backward(mul(x, x));
  }
  CHECK(w.grad[0] == doctest::Approx(8.0));
  ps.zero_grad();
  CHECK(w.grad[0] == 0.0);
  CHECK_THROWS_AS(ps.add("w", Tensor::scalar(1.0)), Error);
}

TEST_CASE("rmsprop hand-evaluated recurrences") {
  {
    Tensor p({3}, 1.5), g({3}, 0.0), acc({3}, 0.0);
    rmsprop_update(p, g, acc, 0.01, 0.9, 1e-8);
    CHECK(p.storage() == std::vector<double>(3, 1.5));
  }
  {
    Tensor p = Tensor::scalar(1.0), g = Tensor::scalar(1.0), acc = Tensor::scalar(0.0);
    rmsprop_update(p, g, acc, 0.01, 0.9, 1e-8);
    CHECK(std::abs(acc[0] - 0.1) < 1e-12);
    CHECK(std::abs(p[0] - (1.0 - 0.01 / std::sqrt(0.1 + 1e-8))) < 1e-12);
    rmsprop_update(p, g, acc, 0.01, 0.9, 1e-8);
    const double acc2 = 0.9 * 0.1 + 0.1;
    CHECK(std::abs(acc[0] - acc2) < 1e-12);
    CHECK(std::abs(p[0] - (1.0 - 0.01 / std::sqrt(0.1 + 1e-8) - 0.01 / std::sqrt(acc2 + 1e-8))) <
          1e-12);
  }
}

TEST_CASE("rmsprop step over a parameter set") {
  ParameterSet ps;
  ps.add("a", Tensor({2}, 1.0)).grad = Tensor({2}, std::vector<double>{1e300, -1e-300});
  auto state = RmspropState::for_params(ps, 0.1);
  rmsprop_step(ps, state);
  for (double v : ps[0].value.storage()) CHECK(std::isfinite(v));
  CHECK(state.accumulators[0][0] >= 0.0);
  RmspropState wrong;
  wrong.accumulators.push_back(Tensor({5}));
  CHECK_THROWS_AS(rmsprop_step(ps, wrong), Error);
}

TEST_CASE("expm examples") {
  CHECK(max_abs_diff(expm(Tensor({3, 3}, 0.0)), Tensor::identity(3)) == 0.0);
  const auto d = expm(Tensor::matrix(2, 2, {0.5, 0, 0, -2}));
  CHECK(std::abs(d.at(0, 0) - std::exp(0.5)) < 1e-14);
  CHECK(std::abs(d.at(1, 1) - std::exp(-2.0)) < 1e-14);
  CHECK(d.at(0, 1) == 0.0);
  CHECK_THROWS_AS(expm(Tensor({2, 3})), Error);
}

TEST_CASE("expm matches the Taylor oracle and its inverse identity") {
  Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    auto a = testing::random_tensor({4, 4}, rng);
    double norm = 0.0;  // infinity norm
    for (std::size_t i = 0; i < 4; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < 4; ++j) row += std::abs(a.at(i, j));
      norm = std::max(norm, row);
    }
    for (auto& v : a.storage()) v /= norm;
    CHECK(max_abs_diff(expm(a), testing::taylor_expm(a)) < 1e-10);

    auto b = a;
    for (auto& v : b.storage()) v *= 2.0;
    auto neg = b;
    for (auto& v : neg.storage()) v = -v;
    CHECK(max_abs_diff(matmul_plain(expm(b), expm(neg)), Tensor::identity(4)) < 1e-8);
  }
  // larger norms exercise the squaring stage
  auto big = testing::random_tensor({5, 5}, rng, -2.0, 2.0);
  CHECK(max_abs_diff(expm(big), testing::taylor_expm(big, 80)) /
            std::max(1.0, std::abs(testing::taylor_expm(big, 80)[0])) <
        1e-10);
}

TEST_CASE("seeded_init schemes") {
  const auto z = seeded_init({3, 4}, InitScheme::Zeros, 1);
  for (double v : z.storage()) CHECK(v == 0.0);
  CHECK(seeded_init({5, 6}, InitScheme::UniformFanIn, 9) ==
        seeded_init({5, 6}, InitScheme::UniformFanIn, 9));
  CHECK_FALSE(seeded_init({5, 6}, InitScheme::UniformFanIn, 9) ==
              seeded_init({5, 6}, InitScheme::UniformFanIn, 10));

  const auto u = seeded_init({100000}, InitScheme::UniformFanIn, 3, 100);
  double mx = 0.0, mean = 0.0;
  for (double v : u.storage()) {
    mx = std::max(mx, std::abs(v));
    mean += v;
  }
  mean /= 1e5;
  CHECK(mx <= 0.1);
  const double sigma = 0.1 / std::sqrt(3.0) / std::sqrt(1e5);
  CHECK(std::abs(mean) < 3.0 * sigma);

  const auto q = seeded_init({6, 4}, InitScheme::Orthogonal, 5);
  const auto qtq = matmul_plain(transpose_plain(q), q);
  CHECK(max_abs_diff(qtq, Tensor::identity(4)) < 1e-12);
}

TEST_CASE("checkpoint round trip and corruption") {
  Rng rng(12);
  ParameterSet ps;
  ps.add("layer.w", testing::random_tensor({3, 2}, rng));
  ps.add("layer.b", testing::random_tensor({2}, rng));
  ps.add("conv", testing::random_tensor({2, 1, 3}, rng));
  std::stringstream io;
  write_checkpoint(io, ps);
  const std::string bytes = io.str();
  CHECK(bytes.substr(0, 4) == "HFCK");
  const auto back = read_checkpoint(io);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back[i].name == ps[i].name);
    CHECK(back[i].value == ps[i].value);
  }
  std::stringstream bad("HFCX" + bytes.substr(4));
  CHECK_THROWS_AS(read_checkpoint(bad), Error);
  std::stringstream cut(bytes.substr(0, bytes.size() - 1));
  CHECK_THROWS_AS(read_checkpoint(cut), Error);
}
