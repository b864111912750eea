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

// The physical generator as real sparse matrices acting on Pauli
// coordinates. Since L_phys is linear in every coefficient,
//   A(theta, gamma) = sum_k theta_H[k] A_k + sum_a gamma_a D_a,
// and both the solver and its adjoint only need these per-coefficient
// superoperators.

#pragma once

#include "lindbladfit/generators.hpp"
#include "lindbladfit/pauli_coords.hpp"

namespace lindbladfit {

struct LiouvillianBasis {
  int n = 0;
  std::vector<SparseR> hamiltonian;  // one per theta_H entry
  std::vector<SparseR> dissipators;  // one per jump operator (unit rate)

  Eigen::Index dim() const { return static_cast<Eigen::Index>(num_pauli_coords(n)); }
  SparseR assemble(const RVector& theta_h, const RVector& gamma) const;
};

/// Builds each local term's superoperator on its support and embeds it over
/// all 4^N coordinates; columns are filled in parallel.
LiouvillianBasis build_liouvillian_basis(const ModelSpec& spec);

/// Serial reference: applies the matrix-form generator to every Pauli
/// string and reads the result back in coordinates. O(4^N 8^N) per term.
LiouvillianBasis build_liouvillian_basis_serial(const ModelSpec& spec);

/// Model structure shared by every evaluation: the ModelSpec, its matrix-form
/// generator and the coordinate-space superoperators.
class LindbladModel {
 public:
  explicit LindbladModel(ModelSpec spec);

  const ModelSpec& spec() const { return spec_; }
  int num_qubits() const { return spec_.num_qubits(); }
  std::size_t num_hamiltonian_params() const { return spec_.hamiltonian.num_params(); }
  std::size_t num_jumps() const { return spec_.dissipator.num_jumps(); }
  const PhysicalGenerator& generator() const { return generator_; }
  const LiouvillianBasis& basis() const { return basis_; }

 private:
  ModelSpec spec_;
  PhysicalGenerator generator_;
  LiouvillianBasis basis_;
};

}  // namespace lindbladfit
