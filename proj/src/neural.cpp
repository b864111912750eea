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

#include "lindbladfit/neural.hpp"

#include <cmath>

namespace lindbladfit {

std::vector<Eigen::Index> MlpParams::widths() const {
  std::vector<Eigen::Index> w;
  if (layers.empty()) return w;
  w.push_back(layers.front().w.cols());
  for (const auto& l : layers) w.push_back(l.w.rows());
  return w;
}

Eigen::Index MlpParams::num_params() const {
  Eigen::Index count = 0;
  for (const auto& l : layers) count += l.w.size() + l.b.size();
  return count;
}

void MlpParams::validate() const {
  if (layers.size() != 2) throw InvalidArgument("the neural field has exactly one hidden layer");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].b.size() != layers[i].w.rows()) throw InvalidArgument("bias length does not match layer width");
    if (i > 0 && layers[i].w.cols() != layers[i - 1].w.rows()) throw InvalidArgument("layer shapes do not chain");
    if (!layers[i].w.allFinite() || !layers[i].b.allFinite()) throw InvalidArgument("non-finite network weights");
  }
  if (layers.front().w.cols() != layers.back().w.rows()) {
    throw InvalidArgument("network input and output widths must both be 4^N");
  }
}

RVector MlpParams::flatten() const {
  RVector flat(num_params());
  Eigen::Index pos = 0;
  for (const auto& l : layers) {
    for (Eigen::Index r = 0; r < l.w.rows(); ++r) {
      flat.segment(pos, l.w.cols()) = l.w.row(r).transpose();
      pos += l.w.cols();
    }
    flat.segment(pos, l.b.size()) = l.b;
    pos += l.b.size();
  }
  return flat;
}

void MlpParams::assign(const RVector& flat) {
  if (flat.size() != num_params()) throw InvalidArgument("flattened network has the wrong length");
  Eigen::Index pos = 0;
  for (auto& l : layers) {
    for (Eigen::Index r = 0; r < l.w.rows(); ++r) {
      l.w.row(r) = flat.segment(pos, l.w.cols()).transpose();
      pos += l.w.cols();
    }
    l.b = flat.segment(pos, l.b.size());
    pos += l.b.size();
  }
}

double MlpParams::squared_norm() const {
  double s = 0.0;
  for (const auto& l : layers) s += l.w.squaredNorm() + l.b.squaredNorm();
  return s;
}

double scaled_softplus(double x) {
  const double u = 5.0 * x;
  if (u > 0.0) return (u + std::log1p(std::exp(-u))) / 5.0;
  return std::log1p(std::exp(u)) / 5.0;
}

double scaled_softplus_grad(double x) {
  const double u = 5.0 * x;
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

MlpParams init_mlp(int n, Eigen::Index hidden_width, Rng& rng) {
  const auto d = static_cast<Eigen::Index>(num_pauli_coords(n));
  const Eigen::Index width = hidden_width > 0 ? hidden_width : d;
  const double bound = 1.0 / std::sqrt(static_cast<double>(d));
  std::uniform_real_distribution<double> u(-bound, bound);
  MlpParams p;
  DenseLayer hidden{RMatrix(width, d), RVector(width)};
  for (Eigen::Index r = 0; r < width; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) hidden.w(r, c) = u(rng);
  }
  for (Eigen::Index r = 0; r < width; ++r) hidden.b[r] = u(rng);
  p.layers.push_back(std::move(hidden));
  p.layers.push_back({RMatrix::Zero(d, width), RVector::Zero(d)});
  return p;
}

RVector neural_field_coords(const MlpParams& phi, const PauliCoordinates& x) {
  const auto& l1 = phi.layers[0];
  const auto& l2 = phi.layers[1];
  if (x.size() != l1.w.cols()) throw InvalidArgument("state does not match the network input width");
  const RVector hidden = (l1.w * x + l1.b).unaryExpr([](double v) { return scaled_softplus(v); });
  RVector out = l2.w * hidden + l2.b;
  out[0] = 0.0;
  return out;
}

void neural_field_vjp(const MlpParams& phi, const PauliCoordinates& x, const RVector& w, RVector& x_bar,
                      Eigen::Ref<RVector> phi_bar) {
  const auto& l1 = phi.layers[0];
  const auto& l2 = phi.layers[1];
  const Eigen::Index d = l1.w.cols();
  const Eigen::Index width = l1.w.rows();
  const RVector pre = l1.w * x + l1.b;
  const RVector hidden = pre.unaryExpr([](double v) { return scaled_softplus(v); });
  RVector out_bar = w;
  out_bar[0] = 0.0;

  // Flattened offsets: [W1 (width x d), b1, W2 (d x width), b2].
  const Eigen::Index off_w1 = 0;
  const Eigen::Index off_b1 = off_w1 + width * d;
  const Eigen::Index off_w2 = off_b1 + width;
  const Eigen::Index off_b2 = off_w2 + d * width;

  for (Eigen::Index r = 1; r < d; ++r) {
    const double g = out_bar[r];
    if (g == 0.0) continue;
    phi_bar.segment(off_w2 + r * width, width) += g * hidden;
  }
  phi_bar.segment(off_b2, d) += out_bar;

  const RVector hidden_bar = l2.w.transpose() * out_bar;
  RVector pre_bar(width);
  for (Eigen::Index r = 0; r < width; ++r) pre_bar[r] = hidden_bar[r] * scaled_softplus_grad(pre[r]);
  for (Eigen::Index r = 0; r < width; ++r) {
    const double g = pre_bar[r];
    if (g == 0.0) continue;
    phi_bar.segment(off_w1 + r * d, d) += g * x;
  }
  phi_bar.segment(off_b1, width) += pre_bar;
  x_bar.noalias() += l1.w.transpose() * pre_bar;
}

CMatrix neural_field(const MlpParams& phi, const CMatrix& rho) {
  phi.validate();
  return from_pauli_coords(neural_field_coords(phi, to_pauli_coords(rho)));
}

double l2_penalty(const MlpParams& phi, double lambda) {
  if (!(lambda >= 0.0)) throw InvalidArgument("L2 weight must be non-negative");
  if (lambda == 0.0) return 0.0;
  return lambda * phi.squared_norm();
}

}  // namespace lindbladfit
