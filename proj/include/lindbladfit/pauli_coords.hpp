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

// Real Pauli-basis coordinates of Hermitian operators:
//   rho = sum_j coeffs[j] P_j,   coeffs[j] = Tr(P_j rho) / 2^N,
// with P_j enumerated by PauliString::index() (P_0 = I...I). These are the
// solver's state variables and the input/output space of the neural field.

#pragma once

#include <cstdint>

#include "lindbladfit/spinops.hpp"

namespace lindbladfit {

using PauliCoordinates = RVector;

/// Bit masks describing P_j as a signed permutation:
///   P_j |c> = i^{n_y} (-1)^{popcount(c & z_mask)} |c ^ x_mask>.
struct PauliMasks {
  std::uint32_t x_mask = 0;
  std::uint32_t z_mask = 0;
  int n_y = 0;
};

PauliMasks pauli_masks(std::size_t index, int n);

std::size_t num_pauli_coords(int n);

PauliCoordinates to_pauli_coords(const CMatrix& rho);
inline PauliCoordinates to_pauli_coords(const DensityMatrix& rho) { return to_pauli_coords(rho.matrix()); }

/// sum_j coeffs[j] P_j. Exactly Hermitian for real coefficients.
CMatrix from_pauli_coords(const PauliCoordinates& coeffs);

/// Qubit count for a coordinate vector of length 4^N; throws otherwise.
int qubits_from_coord_count(Eigen::Index len);

}  // namespace lindbladfit
