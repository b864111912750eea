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

// Neural correction to the generator: a one-hidden-layer MLP acting on the
// Pauli coordinates of rho, whose output is read back as a traceless
// Hermitian matrix.

#pragma once

#include <vector>

#include "lindbladfit/pauli_coords.hpp"
#include "lindbladfit/rng.hpp"

namespace lindbladfit {

struct DenseLayer {
  RMatrix w;  // out x in
  RVector b;
};

struct MlpParams {
  std::vector<DenseLayer> layers;

  std::vector<Eigen::Index> widths() const;
  Eigen::Index num_params() const;
  void validate() const;

  /// Layer by layer: weights row-major, then biases.
  RVector flatten() const;
  void assign(const RVector& flat);
  double squared_norm() const;
};

/// (1/5) log(1 + e^{5x}), stabilized for large |5x|.
double scaled_softplus(double x);
/// Its derivative, the logistic function of 5x.
double scaled_softplus_grad(double x);

/// One hidden layer of `hidden_width` units (4^N when zero). Hidden layer
/// weights and biases ~ U(-1/sqrt(d_in), 1/sqrt(d_in)); output layer zero.
MlpParams init_mlp(int n, Eigen::Index hidden_width, Rng& rng);

/// MLP output in coordinates with the identity component zeroed.
RVector neural_field_coords(const MlpParams& phi, const PauliCoordinates& x);

/// Accumulates the vector-Jacobian product of neural_field_coords:
/// x_bar += J_x^T w, phi_bar (flattened layout) += J_phi^T w.
void neural_field_vjp(const MlpParams& phi, const PauliCoordinates& x, const RVector& w, RVector& x_bar,
                      Eigen::Ref<RVector> phi_bar);

/// from_pauli_coords(MLP(to_pauli_coords(rho))) with the identity component
/// removed: Hermitian and traceless for every phi.
CMatrix neural_field(const MlpParams& phi, const CMatrix& rho);

/// lambda * sum of squares of every weight and bias.
double l2_penalty(const MlpParams& phi, double lambda);

}  // namespace lindbladfit
