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

#include <algorithm>
#include <cmath>

#include "common/error.hpp"
#include "doctest.h"
#include "models/architectures.hpp"
#include "numeric/linalg.hpp"
#include "support/gradient_suites.hpp"
#include "support/oracles.hpp"

using namespace mapcast;
using namespace mapcast::models;
using nc::Tape;
using nc::Tensor;

namespace {

LmuVars constant_lmu(Tape& tape, const StateSpace& disc, std::size_t f, std::size_t n,
                     double ex = 0.0) {
  const std::size_t d = disc.b.size();
  LmuVars v;
  v.e_x = tape.constant(Tensor({f, 1}, ex));
  v.e_h = tape.constant(Tensor({n, 1}, 0.0));
  v.e_m = tape.constant(Tensor({d, 1}, 0.0));
  v.w_x = tape.constant(Tensor({f, n}, 0.0));
  v.w_h = tape.constant(Tensor({n, n}, 0.0));
  v.w_m = tape.constant(Tensor({d, n}, 0.0));
  v.abar_t = tape.constant(nc::transpose_plain(disc.a));
  v.bbar_t = tape.constant(disc.b.reshaped({1, d}));
  return v;
}

double nrmse(const std::vector<double>& est, const std::vector<double>& truth) {
  double se = 0.0, ss = 0.0, mean = 0.0;
  for (double t : truth) mean += t;
  mean /= static_cast<double>(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    se += (est[i] - truth[i]) * (est[i] - truth[i]);
    ss += (truth[i] - mean) * (truth[i] - mean);
  }
  return std::sqrt(se / ss);
}

/// Reconstruction at r=1 against a literal delay buffer. states[t] has
/// consumed u[0..t], i.e. it is the memory at time t+1.
double delay_nrmse(const StateSpace& disc, const std::vector<double>& u, std::size_t delay,
                   std::size_t burn_in) {
  const auto states = testing::simulate_memory(disc.a, disc.b, u);
  std::vector<double> est, truth;
  for (std::size_t t = burn_in; t < u.size(); ++t) {
    est.push_back(delay_reconstruct(states[t], 1.0));
    truth.push_back(u[t + 1 - delay]);
  }
  return nrmse(est, truth);
}

void zero_params(Model& m) {
  for (std::size_t i = 0; i < m.params().size(); ++i)
    for (auto& v : m.params()[i].value.storage()) v = 0.0;
}

}  // namespace

TEST_CASE("lmu_matrices closed form") {
  const auto one = lmu_matrices(1, 1.0);
  CHECK(one.a[0] == -1.0);
  CHECK(one.b[0] == 1.0);
  CHECK(lmu_matrices(3, 1.0).b.storage() == std::vector<double>{1, -3, 5});
  for (std::size_t d = 1; d <= 16; ++d) {
    const double theta = 7.0;
    const auto ss = lmu_matrices(d, theta);
    for (std::size_t i = 0; i < d; ++i) {
      REQUIRE(ss.b[i] == static_cast<double>(testing::lmu_b_scaled(i)) / theta);
      for (std::size_t j = 0; j < d; ++j)
        REQUIRE(ss.a.at(i, j) == static_cast<double>(testing::lmu_a_scaled(i, j)) / theta);
    }
  }
}

TEST_CASE("lmu_matrices scale as 1/theta") {
  for (std::size_t d = 1; d <= 8; ++d)
    for (double theta : {2.0, 5.0, 30.0}) {
      const auto unit = lmu_matrices(d, 1.0), scaled = lmu_matrices(d, theta);
      for (std::size_t i = 0; i < d * d; ++i) CHECK(scaled.a[i] == doctest::Approx(unit.a[i] / theta));
      for (std::size_t i = 0; i < d; ++i) CHECK(scaled.b[i] == doctest::Approx(unit.b[i] / theta));
    }
}

TEST_CASE("one-dimensional system behaves like a unit delay low-pass") {
  // d=1, theta=1: impulse response of the reconstruction decays as e^{-t}
  const auto disc = discretize(lmu_matrices(1, 1.0), Discretization::Zoh);
  CHECK(disc.a[0] == doctest::Approx(std::exp(-1.0)));
  CHECK(disc.b[0] == doctest::Approx(1.0 - std::exp(-1.0)));
}

TEST_CASE("discretize examples") {
  StateSpace zero{Tensor({3, 3}, 0.0), Tensor::vector({1, 2, 3})};
  for (auto method : {Discretization::Zoh, Discretization::Euler}) {
    const auto d = discretize(zero, method);
    CHECK(nc::max_abs_diff(d.a, Tensor::identity(3)) < 1e-15);
    CHECK(nc::max_abs_diff(d.b, zero.b) < 1e-15);
  }
  StateSpace scalar{Tensor::matrix(1, 1, {-1.0}), Tensor::vector({1.0})};
  const auto z = discretize(scalar, Discretization::Zoh);
  CHECK(std::abs(z.a[0] - std::exp(-1.0)) < 1e-14);
  CHECK(std::abs(z.b[0] - (1.0 - std::exp(-1.0))) < 1e-14);

  Rng rng(3);
  StateSpace any{testing::random_tensor({4, 4}, rng), testing::random_tensor({4}, rng)};
  const auto e = discretize(any, Discretization::Euler);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      CHECK(e.a.at(i, j) == any.a.at(i, j) + (i == j ? 1.0 : 0.0));
  CHECK(e.b == any.b);
}

TEST_CASE("zoh falls back for singular A") {
  // A = [[0,1],[0,0]]: expm = [[1,1],[0,1]], integral of expm(As) B with B=[0,1] is [0.5, 1]
  StateSpace s{Tensor::matrix(2, 2, {0, 1, 0, 0}), Tensor::vector({0, 1})};
  const auto d = discretize(s, Discretization::Zoh);
  CHECK(d.a.at(0, 1) == doctest::Approx(1.0));
  CHECK(d.b[0] == doctest::Approx(0.5));
  CHECK(d.b[1] == doctest::Approx(1.0));
}

TEST_CASE("shifted Legendre values") {
  for (double x : {0.0, 0.3, 1.0}) CHECK(shifted_legendre(0, x) == 1.0);
  CHECK(shifted_legendre(1, 0.5) == 0.0);
  CHECK(shifted_legendre(1, 0.8) == doctest::Approx(0.6));
  // P2(y) = (3y^2 - 1)/2 with y = 2x - 1
  CHECK(shifted_legendre(2, 0.25) == doctest::Approx((3 * 0.25 - 1) / 2));
  for (std::size_t n = 0; n < 12; ++n) {
    CHECK(shifted_legendre(n, 1.0) == doctest::Approx(1.0));
    CHECK(shifted_legendre(n, 0.0) == doctest::Approx(n % 2 ? -1.0 : 1.0));
  }
  const std::vector<double> m{1, 2};
  CHECK_THROWS_AS(delay_reconstruct(m, 1.5), Error);
  CHECK_THROWS_AS(delay_reconstruct(m, -0.1), Error);
}

TEST_CASE("delay fidelity on band-limited noise") {
  const auto disc = discretize(lmu_matrices(16, 30.0), Discretization::Zoh);
  Rng rng(31);
  const auto u = testing::band_limited_noise(3000, 1.0 / 30.0, rng);
  const double e = delay_nrmse(disc, u, 30, 100);
  INFO("nrmse " << e);
  CHECK(e < 0.1);
}

TEST_CASE("impulse reappears theta steps later") {
  const auto disc = discretize(lmu_matrices(16, 30.0), Discretization::Zoh);
  std::vector<double> u(120, 0.0);
  u[0] = 1.0;
  const auto states = testing::simulate_memory(disc.a, disc.b, u);
  std::size_t peak = 0;
  double best = -1e300;
  for (std::size_t t = 0; t < states.size(); ++t) {
    const double r = delay_reconstruct(states[t], 1.0);
    if (r > best) best = r, peak = t;
  }
  // states[29] is the memory at time 30
  CHECK(peak + 1 == 30);
}

TEST_CASE("lmu_step propagates zeros and converges on constant input") {
  const auto disc = discretize(lmu_matrices(16, 30.0), Discretization::Zoh);
  {
    Tape tape;
    const auto cell = constant_lmu(tape, disc, 1, 3);
    LmuState s{tape.constant(Tensor({1, 3})), tape.constant(Tensor({1, 16}))};
    s = lmu_step(cell, tape.constant(Tensor({1, 1}, 2.0)), s);
    for (double v : s.m.value().storage()) CHECK(v == 0.0);
    for (double v : s.h.value().storage()) CHECK(v == 0.0);
  }
  Tape tape;
  const auto cell = constant_lmu(tape, disc, 1, 3, 1.0);
  LmuState s{tape.constant(Tensor({1, 3})), tape.constant(Tensor({1, 16}))};
  const auto one = tape.constant(Tensor({1, 1}, 1.0));
  for (int t = 0; t < 300; ++t) s = lmu_step(cell, one, s);
  const auto m = s.m.value();
  for (int k = 0; k <= 10; ++k) CHECK(std::abs(delay_reconstruct(m.storage(), k / 10.0) - 1.0) < 0.05);
}

TEST_CASE("lmu_step gradient through 30 steps") {
  Rng rng(41);
  const auto disc = discretize(lmu_matrices(4, 6.0), Discretization::Zoh);
  const std::size_t n = 3, d = 4;
  std::vector<Tensor> in{testing::random_tensor({1, 1}, rng), testing::random_tensor({n, 1}, rng),
                         testing::random_tensor({d, 1}, rng), testing::random_tensor({1, n}, rng),
                         testing::random_tensor({n, n}, rng), testing::random_tensor({d, n}, rng),
                         testing::random_tensor({2, 30}, rng)};
  const auto r = testing::grad_check(
      [&](Tape& tape, const std::vector<nc::Var>& v) {
        LmuVars cell{v[0], v[1], v[2], v[3], v[4], v[5],
                     tape.constant(nc::transpose_plain(disc.a)),
                     tape.constant(disc.b.reshaped({1, d}))};
        LmuState s{tape.constant(Tensor({2, n})), tape.constant(Tensor({2, d}))};
        for (std::size_t t = 0; t < 30; ++t) s = lmu_step(cell, nc::slice(v[6], 1, t, t + 1), s);
        return nc::sum(nc::mul(s.h, s.h));
      },
      in);
  CHECK(r.rel_error < 1e-4);
}

TEST_CASE("lstm_step examples") {
  const std::size_t n = 3;
  Tape tape;
  LstmVars cell{tape.constant(Tensor({1 + n, 4 * n})), tape.constant(Tensor({4 * n})), n};
  LstmState zero{tape.constant(Tensor({1, n})), tape.constant(Tensor({1, n}))};
  const auto s = lstm_step(cell, tape.constant(Tensor({1, 1}, 5.0)), zero);
  for (double v : s.c.value().storage()) CHECK(v == 0.0);
  for (double v : s.h.value().storage()) CHECK(v == 0.0);

  Tensor bias({4 * n}, 0.0);
  for (std::size_t i = n; i < 2 * n; ++i) bias[i] = 50.0;
  LstmVars sat{tape.constant(Tensor({1 + n, 4 * n})), tape.constant(bias), n};
  const auto c_prev = Tensor::matrix(1, 3, {0.7, -1.2, 3.0});
  const auto out = lstm_step(sat, tape.constant(Tensor({1, 1}, 2.0)),
                             {tape.constant(Tensor({1, n})), tape.constant(c_prev)});
  CHECK(nc::max_abs_diff(out.c.value(), c_prev) < 1e-9);
}

TEST_CASE("lstm gradient through 30 steps") {
  Rng rng(43);
  const std::size_t n = 3;
  const auto r = testing::grad_check(
      [&](Tape& tape, const std::vector<nc::Var>& v) {
        LstmVars cell{v[0], v[1], n};
        LstmState s{tape.constant(Tensor({2, n})), tape.constant(Tensor({2, n}))};
        for (std::size_t t = 0; t < 30; ++t) s = lstm_step(cell, nc::slice(v[2], 1, t, t + 1), s);
        return nc::sum(nc::mul(s.h, s.c));
      },
      {testing::random_tensor({1 + n, 4 * n}, rng, -0.5, 0.5), testing::random_tensor({4 * n}, rng),
       testing::random_tensor({2, 30}, rng)});
  CHECK(r.rel_error < 1e-4);
}

TEST_CASE("bidirectional encoder symmetry and shape") {
  Rng rng(5);
  const std::size_t n = 32;
  Tape tape;
  const auto w = testing::random_tensor({1 + n, 4 * n}, rng, -0.2, 0.2);
  const auto b = testing::random_tensor({4 * n}, rng, -0.2, 0.2);
  LstmVars cell{tape.constant(w), tape.constant(b), n};
  std::vector<double> half(15);
  for (auto& v : half) v = rng.uniform(-1, 1);
  std::vector<nc::Var> inputs;
  for (std::size_t t = 0; t < 30; ++t) {
    const double v = t < 15 ? half[t] : half[29 - t];
    inputs.push_back(tape.constant(Tensor({1, 1}, v)));
  }
  const auto enc = encode_bidirectional(cell, cell, inputs);
  REQUIRE(enc.states.size() == 30);
  CHECK(enc.states[0].shape() == nc::Shape{1, 64});
  CHECK(stack_steps(enc.states).shape() == nc::Shape{1, 30, 64});
  for (std::size_t t = 0; t < 30; ++t)
    for (std::size_t i = 0; i < n; ++i)
      CHECK(enc.states[t].value()[i] == doctest::Approx(enc.states[29 - t].value()[n + i]).epsilon(1e-12));

  LstmVars zero{tape.constant(Tensor({1 + n, 4 * n})), tape.constant(Tensor({4 * n})), n};
  const auto z = encode_bidirectional(zero, zero, inputs);
  for (const auto& s : z.states)
    for (double v : s.value().storage()) CHECK(v == 0.0);
}

TEST_CASE("attention with identical states is uniform") {
  Rng rng(9);
  Tape tape;
  const std::size_t n = 4, D = 6, T = 30;
  const auto state = testing::random_tensor({1, D}, rng);
  Tensor enc({1, T, D});
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t j = 0; j < D; ++j) enc[t * D + j] = state[j];
  const auto r = attention_context(tape.constant(testing::random_tensor({n, D}, rng)),
                                   tape.constant(testing::random_tensor({1, n}, rng)),
                                   tape.constant(enc));
  for (double w : r.weights.value().storage()) CHECK(w == doctest::Approx(1.0 / 30.0));
  for (std::size_t j = 0; j < D; ++j) CHECK(r.context.value()[j] == doctest::Approx(state[j]));
}

TEST_CASE("attention saturates on a dominant score") {
  Tape tape;
  const std::size_t D = 2, T = 5;
  Tensor enc({1, T, D}, 0.0);
  enc[3 * D + 0] = 100.0;  // only step 3 aligns with the query
  const auto r = attention_context(tape.constant(Tensor::identity(2)),
                                   tape.constant(Tensor::matrix(1, 2, {10.0, 0.0})),
                                   tape.constant(enc));
  CHECK(r.weights.value()[3] > 1.0 - 1e-9);
}

TEST_CASE("attention weights are a permutation-equivariant distribution") {
  Rng rng(13);
  for (int draw = 0; draw < 1000; ++draw) {
    const std::size_t B = 1 + rng.below(2), n = 1 + rng.below(4), D = 1 + rng.below(5),
                      T = 2 + rng.below(6);
    const auto q = testing::random_tensor({n, D}, rng, -3, 3);
    const auto s = testing::random_tensor({B, n}, rng, -3, 3);
    const auto enc = testing::random_tensor({B, T, D}, rng, -3, 3);
    std::vector<std::size_t> perm(T);
    for (std::size_t i = 0; i < T; ++i) perm[i] = i;
    rng.shuffle(perm.begin(), perm.end());
    Tensor penc({B, T, D});
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t t = 0; t < T; ++t)
        for (std::size_t j = 0; j < D; ++j)
          penc[(b * T + t) * D + j] = enc[(b * T + perm[t]) * D + j];
    Tape tape;
    const auto r = attention_context(tape.constant(q), tape.constant(s), tape.constant(enc));
    const auto p = attention_context(tape.constant(q), tape.constant(s), tape.constant(penc));
    for (std::size_t b = 0; b < B; ++b) {
      double total = 0.0;
      for (std::size_t t = 0; t < T; ++t) {
        const double w = r.weights.value()[b * T + t];
        REQUIRE(w >= 0.0);
        total += w;
        REQUIRE(std::abs(p.weights.value()[b * T + t] - r.weights.value()[b * T + perm[t]]) < 1e-12);
      }
      REQUIRE(std::abs(total - 1.0) < 1e-9);
    }
    REQUIRE(nc::max_abs_diff(r.context.value(), p.context.value()) < 1e-12);
  }
}

TEST_CASE("every architecture emits out_len values and zero parameters give zeros") {
  Rng rng(1);
  for (auto arch : testing::trainable_architectures()) {
    ModelConfig c;
    c.architecture = arch;
    c.seed = 5;
    auto model = make_model(c);
    auto batch = testing::random_batch(c, 3, rng);
    const auto out = model->predict(batch);
    INFO(architecture_name(arch));
    CHECK(out.shape() == nc::Shape{3, 30});
    zero_params(*model);
    const auto zeros = model->predict(batch);
    for (double v : zeros.storage()) CHECK(v == 0.0);
  }
}

TEST_CASE("dnn forward equals an explicit recursive loop") {
  Rng rng(21);
  ModelConfig c;
  c.architecture = Architecture::Dnn;
  c.seed = 8;
  DnnModel model(c);
  const auto batch = testing::random_batch(c, 2, rng);
  const auto out = model.predict(batch);

  Tape tape;
  const auto net = model.bind(tape);
  std::vector<std::vector<double>> buf(2);
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t t = 0; t < 30; ++t) buf[b].push_back(batch.inputs.at(b, t));
  for (std::size_t step = 0; step < 30; ++step) {
    Tensor feats({2, 30});
    for (std::size_t b = 0; b < 2; ++b)
      for (std::size_t t = 0; t < 30; ++t) feats.at(b, t) = buf[b][t];
    const auto y = model.single_step(net, tape.constant(feats)).value();
    for (std::size_t b = 0; b < 2; ++b) {
      CHECK(out.at(b, step) == y[b]);
      buf[b].erase(buf[b].begin());
      buf[b].push_back(y[b]);
    }
  }
}

TEST_CASE("seq2seq is fully autoregressive at inference") {
  Rng rng(2);
  ModelConfig c;
  c.architecture = Architecture::Seq2SeqAttn;
  c.rnn_hidden = 8;
  auto model = make_model(c);
  auto batch = testing::random_batch(c, 2, rng);
  const auto with_targets = model->predict(batch);
  batch.targets.reset();
  CHECK(model->predict(batch) == with_targets);
}

TEST_CASE("architectures pass end-to-end finite-difference checks") {
  Rng rng(99);
  for (auto arch : testing::trainable_architectures()) {
    double worst = 0.0;
    for (int i = 0; i < 4; ++i) worst = std::max(worst, testing::architecture_case(arch, rng).rel_error);
    INFO(architecture_name(arch) << " worst relative error " << worst);
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("step representations are causal") {
  Rng rng(17);
  for (auto arch : {Architecture::Seq2Seq, Architecture::Seq2SeqAttn, Architecture::LmuRnn,
                    Architecture::Tcn}) {
    auto c = testing::reduced_config(arch, 3, true);
    c.in_len = 10;
    auto model = make_model(c);
    const auto batch = testing::random_batch(c, 2, rng);
    const auto base = model->step_features(batch);
    REQUIRE(base.size() == c.in_len);
    for (std::size_t k = 0; k + 1 < c.in_len; ++k) {
      auto perturbed = batch;
      for (std::size_t t = k + 1; t < c.in_len; ++t) {
        perturbed.inputs.at(0, t) += rng.uniform(-2, 2);
        perturbed.input_rpm->at(1, t) += rng.uniform(-2, 2);
      }
      const auto got = model->step_features(perturbed);
      for (std::size_t t = 0; t <= k; ++t) REQUIRE(got[t] == base[t]);
      CHECK_FALSE(got[c.in_len - 1] == base[c.in_len - 1]);
    }
  }
}

TEST_CASE("non-finite activations report the step") {
  ModelConfig c;
  c.architecture = Architecture::Dnn;
  c.dnn_hidden = {4};
  auto model = make_model(c);
  for (std::size_t i = 0; i < model->params().size(); ++i)
    for (auto& v : model->params()[i].value.storage()) v = 1e200;
  models::Batch b;
  b.inputs = Tensor({1, 30}, 1e200);
  try {
    model->predict(b);
    FAIL("expected numeric error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Numeric);
    CHECK(std::string(e.what()).find("step 0") != std::string::npos);
  }
}

TEST_CASE("geometry and registry errors") {
  ModelConfig c;
  auto model = make_model(c);
  models::Batch b;
  b.inputs = Tensor({1, 20});
  CHECK_THROWS_AS(model->predict(b), Error);
  c.architecture = Architecture::Transformer;
  CHECK_THROWS_AS(make_model(c), Error);
  CHECK(parse_architecture("pyramid") == Architecture::Pyramid);
  CHECK_FALSE(is_implemented(Architecture::Pyramid));
  CHECK_THROWS_AS(parse_architecture("gru"), Error);
  ModelConfig oc;
  oc.architecture = Architecture::Oracle;
  models::Batch nb;
  nb.inputs = Tensor({1, 30});
  CHECK_THROWS_AS(make_model(oc)->predict(nb), Error);
}

TEST_CASE("model config key-value round trip") {
  ModelConfig c;
  c.architecture = Architecture::Tcn;
  c.use_rpm = true;
  c.tcn_dilations = {1, 3, 9};
  c.dnn_hidden = {16, 4};
  c.lmu_discretization = Discretization::Euler;
  c.teacher_forcing = 0.25;
  c.seed = 12345678901234ULL;
  KvDocument doc;
  c.write(doc);
  const auto back = ModelConfig::read(KvDocument::parse(doc.to_string(), "test"));
  KvDocument again;
  back.write(again);
  CHECK(again.to_string() == doc.to_string());
  CHECK(back.tcn_dilations == c.tcn_dilations);
  CHECK(back.seed == c.seed);
}

TEST_CASE("parameter initialization is seeded") {
  ModelConfig c;
  c.seed = 4;
  auto a = make_model(c), b = make_model(c);
  c.seed = 5;
  auto d = make_model(c);
  CHECK(a->params()[0].value == b->params()[0].value);
  CHECK_FALSE(a->params()[0].value == d->params()[0].value);
}
