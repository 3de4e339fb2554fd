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

#include "numeric/linalg.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace mapcast::nc {

namespace {

using Mat = Eigen::MatrixXd;

Mat to_eigen(const Tensor& t) {
  Mat m(t.dim(0), t.dim(1));
  for (std::size_t i = 0; i < t.dim(0); ++i) {
    for (std::size_t j = 0; j < t.dim(1); ++j) m(i, j) = t.at(i, j);
  }
  return m;
}

Tensor from_eigen(const Mat& m) {
  Tensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      t.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = m(i, j);
    }
  }
  return t;
}

}  // namespace

Tensor expm(const Tensor& a) {
  if (a.rank() != 2 || a.dim(0) != a.dim(1)) {
    throw_data("expm: expected a square matrix, got " + shape_string(a.shape()));
  }
  for (double v : a.data()) {
    if (!std::isfinite(v)) throw_data("expm: non-finite entry");
  }
  const auto n = static_cast<Eigen::Index>(a.dim(0));
  if (n == 0) return a;
  Mat m = to_eigen(a);

  // Higham (2005) degree-13 coefficients and the matching norm bound.
  static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                 1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,       1323241920.0,
                                 40840800.0,          960960.0,            16380.0,
                                 182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;

  const double norm1 = m.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
    m /= std::ldexp(1.0, squarings);
  }
  // normalized by b[0] so that the constant term is exactly I
  double c[14];
  for (int k = 0; k < 14; ++k) c[k] = b[k] / b[0];
  const Mat id = Mat::Identity(n, n);
  const Mat a2 = m * m;
  const Mat a4 = a2 * a2;
  const Mat a6 = a4 * a2;
  const Mat u_inner = a6 * (c[13] * a6 + c[11] * a4 + c[9] * a2) + c[7] * a6 + c[5] * a4 +
                      c[3] * a2 + c[1] * id;
  const Mat u = m * u_inner;
  const Mat v = a6 * (c[12] * a6 + c[10] * a4 + c[8] * a2) + c[6] * a6 + c[4] * a4 +
                c[2] * a2 + c[0] * id;
  Mat r = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) r = r * r;
  return from_eigen(r);
}

bool try_solve(const Tensor& a, const Tensor& b, Tensor& x) {
  if (a.rank() != 2 || a.dim(0) != a.dim(1) || b.rank() != 2 || b.dim(0) != a.dim(0)) {
    throw_data("solve: incompatible shapes " + shape_string(a.shape()) + " and " +
               shape_string(b.shape()));
  }
  const Mat m = to_eigen(a);
  Eigen::FullPivLU<Mat> lu(m);
  if (!lu.isInvertible()) return false;
  // reject badly conditioned systems as singular
  const double rcond = lu.rcond();
  if (!(rcond > 1e-12)) return false;
  x = from_eigen(lu.solve(to_eigen(b)));
  return true;
}

Tensor seeded_init(const Shape& shape, InitScheme scheme, std::uint64_t seed,
                   std::size_t fan_in, double gain) {
  Tensor t(shape);
  if (scheme == InitScheme::Zeros || t.size() == 0) return t;
  Rng rng(seed);
  if (scheme == InitScheme::UniformFanIn) {
    if (fan_in == 0) {
      fan_in = shape.size() == 3 ? shape[1] * shape[2] : (shape.empty() ? 1 : shape[0]);
    }
    const double bound =
        gain * std::sqrt(1.0 / static_cast<double>(std::max<std::size_t>(fan_in, 1)));
    for (auto& v : t.storage()) v = rng.uniform(-bound, bound);
    return t;
  }
  // Orthogonal: orthonormalize the shorter side of a Gaussian matrix.
  if (shape.size() != 2) throw_usage("orthogonal init needs a rank-2 shape");
  const std::size_t rows = shape[0], cols = shape[1];
  Mat g(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) g(i, j) = rng.normal();
  }
  const bool by_rows = rows <= cols;
  Mat work = by_rows ? Mat(g.transpose()) : g;  // columns to orthonormalize
  for (Eigen::Index c = 0; c < work.cols(); ++c) {
    for (Eigen::Index p = 0; p < c; ++p) {
      work.col(c) -= work.col(p).dot(work.col(c)) * work.col(p);
    }
    work.col(c).normalize();
  }
  return from_eigen(by_rows ? Mat(work.transpose()) : work);
}

}  // namespace mapcast::nc
