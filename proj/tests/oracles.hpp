// Copyright 2026 The lindbladfit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Independent reference constructions used by the tests. Nothing here calls
// into the library's operator or superoperator code.

#pragma once

#include <complex>
#include <random>
#include <string>

#include <Eigen/Dense>

namespace oracle {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;

inline Mat pauli(char c) {
  Mat m(2, 2);
  const cplx i(0, 1);
  switch (c) {
    case 'I': m << 1, 0, 0, 1; break;
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, -i, i, 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: throw std::invalid_argument("pauli");
  }
  return m;
}

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      for (Eigen::Index s = 0; s < b.rows(); ++s)
        for (Eigen::Index d = 0; d < b.cols(); ++d) out(r * b.rows() + s, c * b.cols() + d) = a(r, c) * b(s, d);
  return out;
}

/// "XIZ" -> X (x) I (x) Z, leftmost factor is site 0.
inline Mat pauli_string(const std::string& s) {
  Mat m = Mat::Identity(1, 1);
  for (char c : s) m = kron(m, pauli(c));
  return m;
}

inline Mat single(const Mat& op, int site, int n) {
  Mat m = Mat::Identity(1, 1);
  for (int i = 0; i < n; ++i) m = kron(m, i == site ? op : Mat::Identity(2, 2));
  return m;
}

inline Mat lowering() {  // |0><1|
  Mat m = Mat::Zero(2, 2);
  m(0, 1) = 1;
  return m;
}

inline Mat raising() {  // |1><0|
  Mat m = Mat::Zero(2, 2);
  m(1, 0) = 1;
  return m;
}

/// Column-stacking vectorization: vec(A X B) = (B^T (x) A) vec(X).
inline Mat vec_left(const Mat& a) { return kron(Mat::Identity(a.rows(), a.rows()), a); }
inline Mat vec_right(const Mat& b) { return kron(b.transpose(), Mat::Identity(b.rows(), b.rows())); }

inline Mat vectorized_lindbladian(const Mat& h, const std::vector<Mat>& jumps, const std::vector<double>& rates) {
  const cplx i(0, 1);
  Mat l = -i * (vec_left(h) - vec_right(h));
  for (std::size_t a = 0; a < jumps.size(); ++a) {
    const Mat& j = jumps[a];
    const Mat jd = j.adjoint();
    const Mat jdj = jd * j;
    l += rates[a] * (kron(jd.transpose(), j) - 0.5 * vec_left(jdj) - 0.5 * vec_right(jdj));
  }
  return l;
}

inline Eigen::VectorXcd vec(const Mat& m) { return Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size()); }

inline Mat unvec(const Eigen::VectorXcd& v, Eigen::Index d) { return Eigen::Map<const Mat>(v.data(), d, d); }

/// Random full-rank density matrix G G^+ / Tr.
template <class Rng>
Mat random_density(Eigen::Index d, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat a(d, d);
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < d; ++c) a(r, c) = cplx(g(rng), g(rng));
  Mat rho = a * a.adjoint();
  return rho / rho.trace();
}

template <class Rng>
Mat random_unitary(Eigen::Index d, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat a(d, d);
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < d; ++c) a(r, c) = cplx(g(rng), g(rng));
  Eigen::HouseholderQR<Mat> qr(a);
  return qr.householderQ();
}

inline double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace oracle
