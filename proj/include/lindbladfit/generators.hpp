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

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lindbladfit/common.hpp"
#include "lindbladfit/rng.hpp"
#include "lindbladfit/spinops.hpp"

namespace lindbladfit {

enum class HamiltonianFamily { Rydberg, Superconducting, XYZ, PXP };
enum class DissipatorFamily { Phase, Thermal, Combined };

std::string to_string(HamiltonianFamily f);
std::string to_string(DissipatorFamily f);
HamiltonianFamily parse_hamiltonian_family(std::string_view s);
DissipatorFamily parse_dissipator_family(std::string_view s);

/// Hamiltonian family plus realized geometry.
///
/// Parameter order (theta_H):
///   Rydberg         [Omega, delta, c_p for p in pairs]      H = Omega/2 sum X - delta sum Z + sum c_p Z_i Z_j
///   Superconducting [h_0..h_{N-1}, zeta_e for e in edges]   H = sum h_i (I - Z_i)/2 + sum zeta_e Z_i Z_j / 2
///   XYZ             [Jx_0, Jy_0, Jz_0, Jx_1, ..., h_0..h_{N-1}]
///   PXP             [J_1 .. J_{N-2}]  (0-based centre site), H = sum J_i P_{i-1} X_i P_{i+1}
struct HamiltonianSpec {
  HamiltonianFamily family = HamiltonianFamily::XYZ;
  int n = 0;
  /// Rydberg atom positions in micrometres.
  std::vector<std::array<double, 2>> positions;
  /// Rydberg interacting pairs, or the chain edge list for Superconducting/XYZ.
  std::vector<std::pair<int, int>> pairs;

  std::size_t num_params() const;
  std::vector<std::string> param_names() const;
  void validate() const;

  /// Chain geometry (edges (i, i+1)) for Superconducting, XYZ and PXP.
  static HamiltonianSpec chain(HamiltonianFamily family, int n);
};

/// Jump-operator order (theta_L):
///   Phase     [Z_0..Z_{N-1}]
///   Thermal   [L-_0..L-_{N-1}, L+_0..L+_{N-1}]
///   Combined  phase list followed by thermal list
/// with L- = |0><1| (decays |1> to |0>) and L+ = |1><0|.
struct DissipatorSpec {
  DissipatorFamily family = DissipatorFamily::Thermal;
  int n = 0;

  std::size_t num_jumps() const;
  std::vector<std::string> jump_names() const;
};

struct ModelSpec {
  HamiltonianSpec hamiltonian;
  DissipatorSpec dissipator;

  int num_qubits() const { return hamiltonian.n; }
  void validate() const;
};

/// Operator acting on a strictly increasing list of sites.
struct LocalOp {
  std::vector<int> sites;
  CMatrix op;
};

/// Sum of local pieces multiplying one learnable coefficient.
using OperatorTerm = std::vector<LocalOp>;

std::vector<OperatorTerm> hamiltonian_terms(const HamiltonianSpec& spec);
std::vector<LocalOp> local_jump_operators(const DissipatorSpec& spec);

CMatrix build_hamiltonian(const HamiltonianSpec& spec, const RVector& theta_h);
std::vector<CMatrix> build_jump_operators(const DissipatorSpec& spec);

double softplus(double x);
double inverse_softplus(double y);
/// Elementwise log(1 + e^theta).
RVector rates_from_raw(const RVector& theta_l);
/// Elementwise log(e^gamma - 1); throws on non-positive rates.
RVector raw_from_rates(const RVector& gamma);

/// Matrix-form GKSL generator with cached operators:
///   -i[H, rho] + sum_a gamma_a (L_a rho L_a^+ - {L_a^+ L_a, rho} / 2).
class PhysicalGenerator {
 public:
  explicit PhysicalGenerator(ModelSpec spec);

  const ModelSpec& spec() const { return spec_; }
  CMatrix hamiltonian(const RVector& theta_h) const;
  const std::vector<CMatrix>& jumps() const { return jumps_; }

  CMatrix apply(const RVector& theta_h, const RVector& gamma, const CMatrix& rho) const;

 private:
  ModelSpec spec_;
  std::vector<CMatrix> term_matrices_;
  std::vector<CMatrix> jumps_;
  std::vector<CMatrix> jump_products_;  // L^+ L
};

/// Convenience wrapper taking raw (pre-softplus) rates.
CMatrix apply_physical_generator(const ModelSpec& spec, const RVector& theta_h,
                                 const RVector& theta_l, const CMatrix& rho);

struct ExperimentConfig {
  HamiltonianFamily family = HamiltonianFamily::XYZ;
  DissipatorFamily dissipator = DissipatorFamily::Thermal;
  int n = 3;
  double R = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrueParams {
  ModelSpec model;  // geometry realized
  RVector theta_h;
  RVector gamma;
};

/// gamma * R * |theta_h|_1 / |gamma|_1, so that |gamma|_1 / |theta_h|_1 = R.
RVector rescale_noise_to_ratio(const RVector& theta_h, const RVector& gamma, double R);

/// Rydberg patch on a triangular lattice (sites filled in a fixed compact
/// order), spacing a, per-coordinate jitter U(-0.05a, 0.05a); pairs are all
/// ideal-lattice pairs within sqrt(3) a (+10% slack).
HamiltonianSpec rydberg_geometry(int n, double spacing, Rng& rng);

inline constexpr double kRydbergC6 = 1e6;  // um^6

/// Ground-truth draw for one experiment. Draw order: Hamiltonian
/// coefficients (and geometry), then rates; finally the rates are rescaled
/// to the requested noise-to-unitary ratio.
TrueParams sample_true_params(const ExperimentConfig& config, Rng& rng);

}  // namespace lindbladfit
