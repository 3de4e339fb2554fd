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

#include "models/model.hpp"

#include <cmath>

#include "common/error.hpp"
#include "models/architectures.hpp"

namespace mapcast::models {

using nc::Tensor;

namespace {

struct ArchName {
  Architecture arch;
  const char* name;
};

constexpr ArchName kArchNames[] = {
    {Architecture::Dnn, "dnn"},
    {Architecture::Seq2Seq, "seq2seq"},
    {Architecture::Seq2SeqAttn, "seq2seq-attn"},
    {Architecture::LmuRnn, "lmu"},
    {Architecture::Tcn, "tcn"},
    {Architecture::Persistence, "persistence"},
    {Architecture::Oracle, "oracle"},
    {Architecture::Transformer, "transformer"},
    {Architecture::Pyramid, "pyramid"},
};

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (auto x : v) {
    if (!s.empty()) s += ',';
    s += std::to_string(x);
  }
  return s;
}

std::vector<std::size_t> parse_sizes(std::string_view text, std::string_view what) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(text)) {
    const auto v = parse_int(item, what);
    if (v <= 0) throw_usage(std::string(what) + ": entries must be positive");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::size_t parse_count(std::string_view text, std::string_view what) {
  const auto v = parse_int(text, what);
  if (v < 0) throw_usage(std::string(what) + ": must be >= 0");
  return static_cast<std::size_t>(v);
}

}  // namespace

std::string architecture_name(Architecture a) {
  for (const auto& n : kArchNames) {
    if (n.arch == a) return n.name;
  }
  return "unknown";
}

Architecture parse_architecture(std::string_view name) {
  for (const auto& n : kArchNames) {
    if (name == n.name) return n.arch;
  }
  throw_usage("unknown architecture '" + std::string(name) +
              "' (expected dnn, seq2seq, seq2seq-attn, lmu, tcn, persistence, oracle)");
}

bool is_implemented(Architecture a) {
  return a != Architecture::Transformer && a != Architecture::Pyramid;
}

void ModelConfig::validate() const {
  if (in_len == 0 || out_len == 0) throw_usage("model: in_len and out_len must be >= 1");
  switch (architecture) {
    case Architecture::Dnn:
      if (dnn_hidden.empty()) throw_usage("model: dnn_hidden needs at least one layer");
      break;
    case Architecture::Seq2Seq:
    case Architecture::Seq2SeqAttn:
      if (rnn_hidden == 0) throw_usage("model: rnn_hidden must be >= 1");
      break;
    case Architecture::LmuRnn:
      if (lmu_order == 0 || lmu_hidden == 0) throw_usage("model: lmu_order and lmu_hidden must be >= 1");
      if (!(lmu_theta > 0.0)) throw_usage("model: lmu_theta must be > 0");
      break;
    case Architecture::Tcn:
      if (tcn_channels == 0 || tcn_kernel == 0 || tcn_dense == 0 || tcn_dilations.empty()) {
        throw_usage("model: tcn_channels, tcn_kernel, tcn_dense and tcn_dilations must be set");
      }
      break;
    default:
      break;
  }
  if (!(teacher_forcing >= 0.0 && teacher_forcing <= 1.0)) {
    throw_usage("model: teacher_forcing must lie in [0, 1]");
  }
}

const std::vector<std::string>& ModelConfig::keys() {
  static const std::vector<std::string> k = {
      "architecture", "features",     "in_len",         "out_len",      "dnn_hidden",
      "rnn_hidden",   "lmu_order",    "lmu_theta",      "lmu_hidden",   "lmu_discretization",
      "tcn_channels", "tcn_kernel",   "tcn_dilations",  "tcn_dense",    "teacher_forcing",
      "seed"};
  return k;
}

void ModelConfig::write(KvDocument& doc, const std::string& p) const {
  doc.add(p + "architecture", architecture_name(architecture));
  doc.add(p + "features", use_rpm ? "pressure+rpm" : "pressure");
  doc.add(p + "in_len", std::to_string(in_len));
  doc.add(p + "out_len", std::to_string(out_len));
  doc.add(p + "dnn_hidden", join(dnn_hidden));
  doc.add(p + "rnn_hidden", std::to_string(rnn_hidden));
  doc.add(p + "lmu_order", std::to_string(lmu_order));
  doc.add(p + "lmu_theta", format_double(lmu_theta));
  doc.add(p + "lmu_hidden", std::to_string(lmu_hidden));
  doc.add(p + "lmu_discretization", lmu_discretization == Discretization::Zoh ? "zoh" : "euler");
  doc.add(p + "tcn_channels", std::to_string(tcn_channels));
  doc.add(p + "tcn_kernel", std::to_string(tcn_kernel));
  doc.add(p + "tcn_dilations", join(tcn_dilations));
  doc.add(p + "tcn_dense", std::to_string(tcn_dense));
  doc.add(p + "teacher_forcing", format_double(teacher_forcing));
  doc.add(p + "seed", std::to_string(seed));
}

ModelConfig ModelConfig::read(const KvDocument& doc, const std::string& p) {
  ModelConfig c;
  auto get = [&](const char* key) { return doc.get(p + key); };
  if (auto v = get("architecture")) c.architecture = parse_architecture(*v);
  if (auto v = get("features")) {
    if (*v == "pressure") {
      c.use_rpm = false;
    } else if (*v == "pressure+rpm") {
      c.use_rpm = true;
    } else {
      throw_usage(p + "features: expected 'pressure' or 'pressure+rpm'");
    }
  }
  if (auto v = get("in_len")) c.in_len = parse_count(*v, p + "in_len");
  if (auto v = get("out_len")) c.out_len = parse_count(*v, p + "out_len");
  if (auto v = get("dnn_hidden")) c.dnn_hidden = parse_sizes(*v, p + "dnn_hidden");
  if (auto v = get("rnn_hidden")) c.rnn_hidden = parse_count(*v, p + "rnn_hidden");
  if (auto v = get("lmu_order")) c.lmu_order = parse_count(*v, p + "lmu_order");
  if (auto v = get("lmu_theta")) c.lmu_theta = parse_double(*v, p + "lmu_theta");
  if (auto v = get("lmu_hidden")) c.lmu_hidden = parse_count(*v, p + "lmu_hidden");
  if (auto v = get("lmu_discretization")) {
    if (*v == "zoh") {
      c.lmu_discretization = Discretization::Zoh;
    } else if (*v == "euler") {
      c.lmu_discretization = Discretization::Euler;
    } else {
      throw_usage(p + "lmu_discretization: expected 'zoh' or 'euler'");
    }
  }
  if (auto v = get("tcn_channels")) c.tcn_channels = parse_count(*v, p + "tcn_channels");
  if (auto v = get("tcn_kernel")) c.tcn_kernel = parse_count(*v, p + "tcn_kernel");
  if (auto v = get("tcn_dilations")) c.tcn_dilations = parse_sizes(*v, p + "tcn_dilations");
  if (auto v = get("tcn_dense")) c.tcn_dense = parse_count(*v, p + "tcn_dense");
  if (auto v = get("teacher_forcing")) c.teacher_forcing = parse_double(*v, p + "teacher_forcing");
  if (auto v = get("seed")) c.seed = parse_u64(*v, p + "seed");
  c.validate();
  return c;
}

std::vector<Tensor> Model::step_features(const Batch&) { return {}; }

Tensor Model::predict(const Batch& batch) {
  nc::Tape tape;
  return forward(tape, batch).value();
}

void Model::check_batch(const Batch& batch) const {
  if (batch.inputs.rank() != 2 || batch.inputs.dim(1) != config_.in_len) {
    throw_data("model input geometry " + nc::shape_string(batch.inputs.shape()) +
               " does not match in_len " + std::to_string(config_.in_len));
  }
  if (config_.use_rpm && (!batch.input_rpm || batch.input_rpm->shape() != batch.inputs.shape())) {
    throw_data("model expects motor-speed inputs alongside pressure");
  }
  if (batch.targets && (batch.targets->rank() != 2 || batch.targets->dim(0) != batch.size() ||
                        batch.targets->dim(1) != config_.out_len)) {
    throw_data("target geometry " + nc::shape_string(batch.targets->shape()) +
               " does not match out_len " + std::to_string(config_.out_len));
  }
}

nc::Var Model::step_input(nc::Tape& tape, const Batch& batch, std::size_t t) const {
  const std::size_t b = batch.size();
  const std::size_t f = config_.features();
  Tensor x({b, f});
  for (std::size_t i = 0; i < b; ++i) {
    x.at(i, 0) = batch.inputs.at(i, t);
    if (f == 2) x.at(i, 1) = batch.input_rpm->at(i, t);
  }
  return tape.constant(std::move(x));
}

Tensor Model::init(const std::string& name, const nc::Shape& shape, nc::InitScheme scheme,
                   std::size_t fan_in, double gain) const {
  return nc::seeded_init(shape, scheme, derive_seed(config_.seed, name), fan_in, gain);
}

std::unique_ptr<Model> make_model(const ModelConfig& config) {
  config.validate();
  switch (config.architecture) {
    case Architecture::Dnn:
      return std::make_unique<DnnModel>(config);
    case Architecture::Seq2Seq:
      return std::make_unique<Seq2SeqModel>(config, false);
    case Architecture::Seq2SeqAttn:
      return std::make_unique<Seq2SeqModel>(config, true);
    case Architecture::LmuRnn:
      return std::make_unique<LmuModel>(config);
    case Architecture::Tcn:
      return std::make_unique<TcnModel>(config);
    case Architecture::Persistence:
      return std::make_unique<PersistenceModel>(config);
    case Architecture::Oracle:
      return std::make_unique<OracleModel>(config);
    case Architecture::Transformer:
    case Architecture::Pyramid:
      break;
  }
  throw_usage("architecture '" + architecture_name(config.architecture) +
              "' is registered but not implemented");
}

void check_finite(const Tensor& t, const char* where, std::size_t step) {
  for (double v : t.data()) {
    if (!std::isfinite(v)) {
      throw_numeric(std::string("non-finite activation in ") + where + " at step " +
                    std::to_string(step));
    }
  }
}

}  // namespace mapcast::models
