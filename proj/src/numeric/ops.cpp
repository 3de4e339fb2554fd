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

#include "numeric/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "common/error.hpp"

namespace mapcast::nc {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CMap = Eigen::Map<const RowMat>;
using MMap = Eigen::Map<RowMat>;

[[noreturn]] void shape_error(const char* op, const Shape& a, const Shape& b) {
  throw_data(std::string(op) + ": incompatible shapes " + shape_string(a) + " and " +
             shape_string(b));
}

Tape& owner(Var a, const char* op) {
  if (!a.valid()) throw_usage(std::string(op) + ": invalid variable");
  return a.tape();
}

Tape& owner(Var a, Var b, const char* op) {
  Tape& t = owner(a, op);
  t.check_owner(b, op);
  return t;
}

bool is_row_broadcast(const Shape& a, const Shape& b) {
  if (a == b || a.empty()) return false;
  const std::size_t n = a.back();
  if (b.size() == 1) return b[0] == n;
  if (b.size() == 2) return b[0] == 1 && b[1] == n;
  return false;
}

enum class BinOp { Add, Sub, Mul };

Var binary(Var a, Var b, BinOp op, const char* name) {
  Tape& t = owner(a, b, name);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.shape() != bv.shape() && !is_row_broadcast(av.shape(), bv.shape())) {
    shape_error(name, av.shape(), bv.shape());
  }
  const std::size_t n = bv.size();
  Tensor out(av.shape());
  auto y = out.data();
  auto x = av.data();
  auto z = bv.data();
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double bi = z[i % n];
    switch (op) {
      case BinOp::Add: y[i] = x[i] + bi; break;
      case BinOp::Sub: y[i] = x[i] - bi; break;
      case BinOp::Mul: y[i] = x[i] * bi; break;
    }
  }
  const auto ia = a.id();
  const auto ib = b.id();
  const bool req = t.requires_grad(a) || t.requires_grad(b);
  return t.record(std::move(out), req, [ia, ib, op, n](Tape& tp, std::uint32_t self) {
    auto gy = tp.grad_of(self);
    if (tp.requires_grad(ia)) {
      auto ga = tp.grad_acc(ia);
      if (op == BinOp::Mul) {
        auto z = tp.value(ib).data();
        for (std::size_t i = 0; i < gy.size(); ++i) ga[i] += gy[i] * z[i % n];
      } else {
        for (std::size_t i = 0; i < gy.size(); ++i) ga[i] += gy[i];
      }
    }
    if (tp.requires_grad(ib)) {
      auto gb = tp.grad_acc(ib);
      switch (op) {
        case BinOp::Add:
          for (std::size_t i = 0; i < gy.size(); ++i) gb[i % n] += gy[i];
          break;
        case BinOp::Sub:
          for (std::size_t i = 0; i < gy.size(); ++i) gb[i % n] -= gy[i];
          break;
        case BinOp::Mul: {
          auto x = tp.value(ia).data();
          for (std::size_t i = 0; i < gy.size(); ++i) gb[i % n] += gy[i] * x[i];
          break;
        }
      }
    }
  });
}

// Splits a shape around `axis` into (outer, extent, inner) strides.
struct AxisView {
  std::size_t outer = 1, extent = 1, inner = 1;
};

AxisView axis_view(const Shape& s, std::size_t axis) {
  AxisView v;
  for (std::size_t i = 0; i < axis; ++i) v.outer *= s[i];
  v.extent = s[axis];
  for (std::size_t i = axis + 1; i < s.size(); ++i) v.inner *= s[i];
  return v;
}

}  // namespace

Var add(Var a, Var b) { return binary(a, b, BinOp::Add, "add"); }
Var sub(Var a, Var b) { return binary(a, b, BinOp::Sub, "sub"); }
Var mul(Var a, Var b) { return binary(a, b, BinOp::Mul, "mul"); }

Var scale(Var a, double factor) {
  Tape& t = owner(a, "scale");
  Tensor out = a.value();
  for (auto& v : out.storage()) v *= factor;
  const auto ia = a.id();
  return t.record(std::move(out), t.requires_grad(a), [ia, factor](Tape& tp, std::uint32_t self) {
    auto gy = tp.grad_of(self);
    auto ga = tp.grad_acc(ia);
    for (std::size_t i = 0; i < gy.size(); ++i) ga[i] += factor * gy[i];
  });
}

Var matmul(Var a, Var b) {
  Tape& t = owner(a, b, "matmul");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() != 2 || bv.rank() != 2 || av.dim(1) != bv.dim(0)) {
    shape_error("matmul", av.shape(), bv.shape());
  }
  Tensor out = matmul_plain(av, bv);
  const auto ia = a.id();
  const auto ib = b.id();
  const bool req = t.requires_grad(a) || t.requires_grad(b);
  return t.record(std::move(out), req, [ia, ib](Tape& tp, std::uint32_t self) {
    const Tensor& av = tp.value(ia);
    const Tensor& bv = tp.value(ib);
    const auto m = av.dim(0), k = av.dim(1), n = bv.dim(1);
    CMap gy(tp.grad_of(self).data(), m, n);
    if (tp.requires_grad(ia)) {
      MMap ga(tp.grad_acc(ia).data(), m, k);
      ga.noalias() += gy * CMap(bv.data().data(), k, n).transpose();
    }
    if (tp.requires_grad(ib)) {
      MMap gb(tp.grad_acc(ib).data(), k, n);
      gb.noalias() += CMap(av.data().data(), m, k).transpose() * gy;
    }
  });
}

Var bmm(Var a, Var b) {
  Tape& t = owner(a, b, "bmm");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() != 3 || bv.rank() != 3 || av.dim(0) != bv.dim(0) ||
      av.dim(2) != bv.dim(1)) {
    shape_error("bmm", av.shape(), bv.shape());
  }
  const auto batch = av.dim(0), m = av.dim(1), k = av.dim(2), n = bv.dim(2);
  Tensor out({batch, m, n});
  for (std::size_t s = 0; s < batch; ++s) {
    MMap(out.data().data() + s * m * n, m, n).noalias() =
        CMap(av.data().data() + s * m * k, m, k) * CMap(bv.data().data() + s * k * n, k, n);
  }
  const auto ia = a.id();
  const auto ib = b.id();
  const bool req = t.requires_grad(a) || t.requires_grad(b);
  return t.record(std::move(out), req, [ia, ib, batch, m, k, n](Tape& tp, std::uint32_t self) {
    const double* ad = tp.value(ia).data().data();
    const double* bd = tp.value(ib).data().data();
    const double* gd = tp.grad_of(self).data();
    const bool ga_req = tp.requires_grad(ia);
    const bool gb_req = tp.requires_grad(ib);
    double* ga = ga_req ? tp.grad_acc(ia).data() : nullptr;
    double* gb = gb_req ? tp.grad_acc(ib).data() : nullptr;
    for (std::size_t s = 0; s < batch; ++s) {
      CMap gy(gd + s * m * n, m, n);
      if (ga_req) {
        MMap(ga + s * m * k, m, k).noalias() += gy * CMap(bd + s * k * n, k, n).transpose();
      }
      if (gb_req) {
        MMap(gb + s * k * n, k, n).noalias() += CMap(ad + s * m * k, m, k).transpose() * gy;
      }
    }
  });
}

Var sigmoid(Var a) {
  Tape& t = owner(a, "sigmoid");
  Tensor out(a.shape());
  auto x = a.value().data();
  for (std::size_t i = 0; i < x.size(); ++i) {
    // split by sign to avoid overflow in exp
    out[i] = x[i] >= 0.0 ? 1.0 / (1.0 + std::exp(-x[i]))
                         : std::exp(x[i]) / (1.0 + std::exp(x[i]));
  }
  const auto ia = a.id();
  return t.record(std::move(out), t.requires_grad(a), [ia](Tape& tp, std::uint32_t self) {
    auto gy = tp.grad_of(self);
    auto y = tp.value(self).data();
    auto ga = tp.grad_acc(ia);
    for (std::size_t i = 0; i < gy.size(); ++i) ga[i] += gy[i] * y[i] * (1.0 - y[i]);
  });
}

Var tanh(Var a) {
  Tape& t = owner(a, "tanh");
  Tensor out(a.shape());
  auto x = a.value().data();
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::tanh(x[i]);
  const auto ia = a.id();
  return t.record(std::move(out), t.requires_grad(a), [ia](Tape& tp, std::uint32_t self) {
    auto gy = tp.grad_of(self);
    auto y = tp.value(self).data();
    auto ga = tp.grad_acc(ia);
    for (std::size_t i = 0; i < gy.size(); ++i) ga[i] += gy[i] * (1.0 - y[i] * y[i]);
  });
}

Var relu(Var a) {
  Tape& t = owner(a, "relu");
  Tensor out(a.shape());
  auto x = a.value().data();
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
  const auto ia = a.id();
  return t.record(std::move(out), t.requires_grad(a), [ia](Tape& tp, std::uint32_t self) {
    auto gy = tp.grad_of(self);
    auto x = tp.value(ia).data();
    auto ga = tp.grad_acc(ia);
    for (std::size_t i = 0; i < gy.size(); ++i) {
      if (x[i] > 0.0) ga[i] += gy[i];
    }
  });
}

Var softmax(Var a, std::size_t axis) {
  Tape& t = owner(a, "softmax");
  const Shape& s = a.shape();
  if (axis >= s.size()) {
    throw_data("softmax: axis " + std::to_string(axis) + " out of range for shape " +
               shape_string(s));
  }
  const auto v = axis_view(s, axis);
  Tensor out(s);
  auto x = a.value().data();
  for (std::size_t o = 0; o < v.outer; ++o) {
    for (std::size_t in = 0; in < v.inner; ++in) {
      const std::size_t base = o * v.extent * v.inner + in;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < v.extent; ++j) mx = std::max(mx, x[base + j * v.inner]);
      double z = 0.0;
      for (std::size_t j = 0; j < v.extent; ++j) {
        const double e = std::exp(x[base + j * v.inner] - mx);
        out[base + j * v.inner] = e;
        z += e;
      }
      for (std::size_t j = 0; j < v.extent; ++j) out[base + j * v.inner] /= z;
    }
  }
  const auto ia = a.id();
  return t.record(std::move(out), t.requires_grad(a), [ia, v](Tape& tp, std::uint32_t self) {
    auto gy = tp.grad_of(self);
    auto y = tp.value(self).data();
    auto ga = tp.grad_acc(ia);
    for (std::size_t o = 0; o < v.outer; ++o) {
      for (std::size_t in = 0; in < v.inner; ++in) {
        const std::size_t base = o * v.extent * v.inner + in;
        double dot = 0.0;
        for (std::size_t j = 0; j < v.extent; ++j) {
          dot += gy[base + j * v.inner] * y[base + j * v.inner];
        }
        for (std::size_t j = 0; j < v.extent; ++j) {
          const auto idx = base + j * v.inner;
          ga[idx] += y[idx] * (gy[idx] - dot);
        }
      }
    }
  });
}

Var concat(std::initializer_list<Var> parts, std::size_t axis) {
  return concat(std::span<const Var>(parts.begin(), parts.size()), axis);
}

Var concat(std::span<const Var> parts, std::size_t axis) {
  if (parts.empty()) throw_usage("concat: no inputs");
  Tape& t = owner(parts[0], "concat");
  const Shape& first = parts[0].shape();
  if (axis >= first.size()) {
    throw_data("concat: axis " + std::to_string(axis) + " out of range for shape " +
               shape_string(first));
  }
  Shape out_shape = first;
  out_shape[axis] = 0;
  bool req = false;
  for (const Var& p : parts) {
    t.check_owner(p, "concat");
    const Shape& s = p.shape();
    bool ok = s.size() == first.size();
    for (std::size_t i = 0; ok && i < s.size(); ++i) {
      if (i != axis && s[i] != first[i]) ok = false;
    }
    if (!ok) shape_error("concat", first, s);
    out_shape[axis] += s[axis];
    req = req || t.requires_grad(p);
  }
  const auto ov = axis_view(out_shape, axis);
  Tensor out(out_shape);
  std::vector<std::uint32_t> ids;
  std::vector<std::size_t> extents;
  std::size_t at = 0;
  for (const Var& p : parts) {
    const std::size_t e = p.shape()[axis];
    auto x = p.value().data();
    for (std::size_t o = 0; o < ov.outer; ++o) {
      std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(o * e * ov.inner), e * ov.inner,
                  out.data().begin() +
                      static_cast<std::ptrdiff_t>(o * ov.extent * ov.inner + at * ov.inner));
    }
    ids.push_back(p.id());
    extents.push_back(e);
    at += e;
  }
  return t.record(std::move(out), req,
                  [ids = std::move(ids), extents = std::move(extents), ov](Tape& tp,
                                                                          std::uint32_t self) {
                    auto gy = tp.grad_of(self);
                    std::size_t at = 0;
                    for (std::size_t p = 0; p < ids.size(); ++p) {
                      const std::size_t e = extents[p];
                      if (tp.requires_grad(ids[p])) {
                        auto ga = tp.grad_acc(ids[p]);
                        for (std::size_t o = 0; o < ov.outer; ++o) {
                          const double* src = gy.data() + o * ov.extent * ov.inner + at * ov.inner;
                          double* dst = ga.data() + o * e * ov.inner;
                          for (std::size_t i = 0; i < e * ov.inner; ++i) dst[i] += src[i];
                        }
                      }
                      at += e;
                    }
                  });
}

Var slice(Var a, std::size_t axis, std::size_t begin, std::size_t end) {
  Tape& t = owner(a, "slice");
  const Shape& s = a.shape();
  if (axis >= s.size() || begin > end || end > s[axis]) {
    throw_data("slice: range [" + std::to_string(begin) + "," + std::to_string(end) +
               ") on axis " + std::to_string(axis) + " invalid for shape " + shape_string(s));
  }
  const auto v = axis_view(s, axis);
  const std::size_t e = end - begin;
  Shape out_shape = s;
  out_shape[axis] = e;
  Tensor out(out_shape);
  auto x = a.value().data();
  for (std::size_t o = 0; o < v.outer; ++o) {
    std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(o * v.extent * v.inner + begin * v.inner),
                e * v.inner, out.data().begin() + static_cast<std::ptrdiff_t>(o * e * v.inner));
  }
  const auto ia = a.id();
  return t.record(std::move(out), t.requires_grad(a), [ia, v, begin, e](Tape& tp, std::uint32_t self) {
    auto gy = tp.grad_of(self);
    auto ga = tp.grad_acc(ia);
    for (std::size_t o = 0; o < v.outer; ++o) {
      const double* src = gy.data() + o * e * v.inner;
      double* dst = ga.data() + o * v.extent * v.inner + begin * v.inner;
      for (std::size_t i = 0; i < e * v.inner; ++i) dst[i] += src[i];
    }
  });
}

Var transpose(Var a) {
  Tape& t = owner(a, "transpose");
  if (a.value().rank() != 2) {
    throw_data("transpose: expected rank 2, got " + shape_string(a.shape()));
  }
  const auto m = a.dim(0), n = a.dim(1);
  Tensor out = transpose_plain(a.value());
  const auto ia = a.id();
  return t.record(std::move(out), t.requires_grad(a), [ia, m, n](Tape& tp, std::uint32_t self) {
    auto gy = tp.grad_of(self);
    auto ga = tp.grad_acc(ia);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += gy[j * m + i];
    }
  });
}

Var reshape(Var a, Shape shape) {
  Tape& t = owner(a, "reshape");
  Tensor out = a.value().reshaped(std::move(shape));
  const auto ia = a.id();
  return t.record(std::move(out), t.requires_grad(a), [ia](Tape& tp, std::uint32_t self) {
    auto gy = tp.grad_of(self);
    auto ga = tp.grad_acc(ia);
    for (std::size_t i = 0; i < gy.size(); ++i) ga[i] += gy[i];
  });
}

Var conv1d(Var x, Var w, Var bias, std::size_t dilation) {
  Tape& t = owner(x, w, "conv1d");
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  if (xv.rank() != 3 || wv.rank() != 3 || xv.dim(1) != wv.dim(1) || wv.dim(2) == 0) {
    shape_error("conv1d", xv.shape(), wv.shape());
  }
  if (dilation == 0) throw_usage("conv1d: dilation must be >= 1");
  const auto batch = xv.dim(0), cin = xv.dim(1), len = xv.dim(2);
  const auto cout = wv.dim(0), k = wv.dim(2);
  const bool has_bias = bias.valid();
  if (has_bias) {
    t.check_owner(bias, "conv1d");
    if (bias.shape() != Shape{cout}) shape_error("conv1d", wv.shape(), bias.shape());
  }
  Tensor out({batch, cout, len});
  const double* xd = xv.data().data();
  const double* wd = wv.data().data();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < cout; ++o) {
      double* y = out.data().data() + (b * cout + o) * len;
      if (has_bias) std::fill_n(y, len, bias.value()[o]);
      for (std::size_t c = 0; c < cin; ++c) {
        const double* xr = xd + (b * cin + c) * len;
        for (std::size_t j = 0; j < k; ++j) {
          const double wt = wd[(o * cin + c) * k + j];
          const std::size_t shift = (k - 1 - j) * dilation;
          for (std::size_t tt = shift; tt < len; ++tt) y[tt] += wt * xr[tt - shift];
        }
      }
    }
  }
  const auto ix = x.id();
  const auto iw = w.id();
  const auto ib = has_bias ? bias.id() : 0u;
  const bool req = t.requires_grad(x) || t.requires_grad(w) || (has_bias && t.requires_grad(bias));
  return t.record(std::move(out), req,
                  [=](Tape& tp, std::uint32_t self) {
                    const double* gy = tp.grad_of(self).data();
                    const double* xd = tp.value(ix).data().data();
                    const double* wd = tp.value(iw).data().data();
                    double* gx = tp.requires_grad(ix) ? tp.grad_acc(ix).data() : nullptr;
                    double* gw = tp.requires_grad(iw) ? tp.grad_acc(iw).data() : nullptr;
                    double* gb = has_bias && tp.requires_grad(ib) ? tp.grad_acc(ib).data() : nullptr;
                    for (std::size_t b = 0; b < batch; ++b) {
                      for (std::size_t o = 0; o < cout; ++o) {
                        const double* g = gy + (b * cout + o) * len;
                        if (gb) {
                          for (std::size_t tt = 0; tt < len; ++tt) gb[o] += g[tt];
                        }
                        for (std::size_t c = 0; c < cin; ++c) {
                          const double* xr = xd + (b * cin + c) * len;
                          for (std::size_t j = 0; j < k; ++j) {
                            const std::size_t wi = (o * cin + c) * k + j;
                            const std::size_t shift = (k - 1 - j) * dilation;
                            if (gw) {
                              double acc = 0.0;
                              for (std::size_t tt = shift; tt < len; ++tt) acc += g[tt] * xr[tt - shift];
                              gw[wi] += acc;
                            }
                            if (gx) {
                              double* gxr = gx + (b * cin + c) * len;
                              const double wt = wd[wi];
                              for (std::size_t tt = shift; tt < len; ++tt) gxr[tt - shift] += wt * g[tt];
                            }
                          }
                        }
                      }
                    }
                  });
}

Var sum(Var a) {
  Tape& t = owner(a, "sum");
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  const auto ia = a.id();
  return t.record(Tensor::scalar(s), t.requires_grad(a), [ia](Tape& tp, std::uint32_t self) {
    const double g = tp.grad_of(self)[0];
    auto ga = tp.grad_acc(ia);
    for (auto& v : ga) v += g;
  });
}

Var mse_loss(Var pred, Var target) {
  Tape& t = owner(pred, target, "mse_loss");
  if (pred.shape() != target.shape()) shape_error("mse_loss", pred.shape(), target.shape());
  auto p = pred.value().data();
  auto q = target.value().data();
  const double n = static_cast<double>(p.size());
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - q[i]) * (p[i] - q[i]);
  const auto ip = pred.id();
  const auto iq = target.id();
  const bool req = t.requires_grad(pred) || t.requires_grad(target);
  return t.record(Tensor::scalar(s / n), req, [ip, iq, n](Tape& tp, std::uint32_t self) {
    const double g = tp.grad_of(self)[0];
    auto p = tp.value(ip).data();
    auto q = tp.value(iq).data();
    if (tp.requires_grad(ip)) {
      auto gp = tp.grad_acc(ip);
      for (std::size_t i = 0; i < p.size(); ++i) gp[i] += g * 2.0 * (p[i] - q[i]) / n;
    }
    if (tp.requires_grad(iq)) {
      auto gq = tp.grad_acc(iq);
      for (std::size_t i = 0; i < p.size(); ++i) gq[i] -= g * 2.0 * (p[i] - q[i]) / n;
    }
  });
}

}  // namespace mapcast::nc
