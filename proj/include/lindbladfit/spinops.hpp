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

// Pauli algebra, many-body operators and density matrices.
//
// Conventions used everywhere in the library:
//  * site 0 is the leftmost Kronecker factor, i.e. the most significant bit
//    of a computational-basis index;
//  * Z|0> = +|0>, so bit value 0 is the +1 eigenvalue of every measured Pauli.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lindbladfit/common.hpp"

namespace lindbladfit {

enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

char to_char(Pauli p);
Pauli pauli_from_char(char c);

class PauliString {
 public:
  PauliString() = default;
  explicit PauliString(std::vector<Pauli> labels);

  /// Parses "XZY"-style text, site 0 first.
  static PauliString parse(std::string_view text);

  std::string str() const;
  int size() const { return static_cast<int>(labels_.size()); }
  Pauli operator[](int site) const { return labels_[static_cast<std::size_t>(site)]; }
  const std::vector<Pauli>& labels() const { return labels_; }

  /// True when no label is the identity.
  bool is_measurement_basis() const;

  /// Base-4 index, site 0 most significant, digit = enum value. "I..I" -> 0.
  std::size_t index() const;
  static PauliString from_index(std::size_t index, int n);

  bool operator==(const PauliString&) const = default;

 private:
  std::vector<Pauli> labels_;
};

CMatrix pauli_matrix(Pauli label);

/// Kronecker product of the per-site Pauli matrices.
CMatrix string_operator(const PauliString& ps, int max_qubits = kDefaultMaxQubits);

CMatrix kron(const CMatrix& a, const CMatrix& b);

/// I (x) ... (x) op (x) ... (x) I with `op` at `site`.
CMatrix embed_single_site(const CMatrix& op, int site, int n);

/// Embeds an operator acting on `sites` (strictly increasing, first listed
/// site is the most significant local bit) into the n-qubit space.
CMatrix embed_operator(const CMatrix& op, std::span<const int> sites, int n);

struct SiteState {
  Pauli axis = Pauli::Z;
  int sign = +1;
  bool operator==(const SiteState&) const = default;
};

/// Product of single-qubit Pauli eigenstates, text form "x+,y-,z+".
class InitialStateSpec {
 public:
  InitialStateSpec() = default;
  explicit InitialStateSpec(std::vector<SiteState> sites);

  static InitialStateSpec parse(std::string_view text);
  std::string str() const;

  int size() const { return static_cast<int>(sites_.size()); }
  const std::vector<SiteState>& sites() const { return sites_; }
  bool operator==(const InitialStateSpec&) const = default;

 private:
  std::vector<SiteState> sites_;
};

/// Hermitian, unit-trace complex matrix of dimension 2^N. Positivity is not
/// enforced.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  /// Validates Hermiticity and unit trace to `tol`.
  explicit DensityMatrix(CMatrix m, double tol = 1e-10);

  const CMatrix& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }
  int num_qubits() const;
  cplx operator()(Eigen::Index r, Eigen::Index c) const { return m_(r, c); }

  double hermiticity_error() const;
  double trace_error() const;
  double min_eigenvalue() const;

 private:
  struct Unchecked {};
  DensityMatrix(CMatrix m, Unchecked) : m_(std::move(m)) {}
  friend DensityMatrix project_physical(const CMatrix& m);

  CMatrix m_;
};

/// Rank-one projector onto the product state; each site factor is
/// (I + sign * sigma_axis) / 2.
DensityMatrix product_eigenstate(const InitialStateSpec& spec);

/// ((M / Tr M) + (M / Tr M)^dagger) / 2. Throws IntegrationError when
/// |Tr M| <= 1e-12 (a diverged trajectory).
DensityMatrix project_physical(const CMatrix& m);

/// Unitary U such that measuring `basis` on rho is a computational-basis
/// measurement of U rho U^dagger. Per site: Z -> I, X -> H, Y -> H S^dagger.
CMatrix basis_rotation(const PauliString& basis);

double max_abs(const CMatrix& m);

}  // namespace lindbladfit
