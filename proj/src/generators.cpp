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

#include "lindbladfit/generators.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

namespace lindbladfit {

namespace {

constexpr cplx kI{0.0, 1.0};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

CMatrix projector0() {
  CMatrix p = CMatrix::Zero(2, 2);
  p(0, 0) = 1.0;
  return p;
}

CMatrix lowering() {
  CMatrix l = CMatrix::Zero(2, 2);
  l(0, 1) = 1.0;
  return l;
}

CMatrix raising() {
  CMatrix l = CMatrix::Zero(2, 2);
  l(1, 0) = 1.0;
  return l;
}

CMatrix embed(const LocalOp& piece, int n) { return embed_operator(piece.op, piece.sites, n); }

}  // namespace

std::string to_string(HamiltonianFamily f) {
  switch (f) {
    case HamiltonianFamily::Rydberg: return "rydberg";
    case HamiltonianFamily::Superconducting: return "superconducting";
    case HamiltonianFamily::XYZ: return "xyz";
    case HamiltonianFamily::PXP: return "pxp";
  }
  return "?";
}

std::string to_string(DissipatorFamily f) {
  switch (f) {
    case DissipatorFamily::Phase: return "phase";
    case DissipatorFamily::Thermal: return "thermal";
    case DissipatorFamily::Combined: return "combined";
  }
  return "?";
}

HamiltonianFamily parse_hamiltonian_family(std::string_view s) {
  const auto v = lower(s);
  if (v == "rydberg" || v == "neutral-atom" || v == "tfim") return HamiltonianFamily::Rydberg;
  if (v == "superconducting" || v == "sc") return HamiltonianFamily::Superconducting;
  if (v == "xyz" || v == "heisenberg") return HamiltonianFamily::XYZ;
  if (v == "pxp") return HamiltonianFamily::PXP;
  throw InvalidArgument("unknown Hamiltonian family '" + std::string(s) + "'");
}

DissipatorFamily parse_dissipator_family(std::string_view s) {
  const auto v = lower(s);
  if (v == "phase" || v == "dephasing") return DissipatorFamily::Phase;
  if (v == "thermal") return DissipatorFamily::Thermal;
  if (v == "combined" || v == "both") return DissipatorFamily::Combined;
  throw InvalidArgument("unknown dissipator family '" + std::string(s) + "'");
}

std::size_t HamiltonianSpec::num_params() const {
  const auto un = static_cast<std::size_t>(n);
  switch (family) {
    case HamiltonianFamily::Rydberg: return 2 + pairs.size();
    case HamiltonianFamily::Superconducting: return un + pairs.size();
    case HamiltonianFamily::XYZ: return 3 * (un - 1) + un;
    case HamiltonianFamily::PXP: return n >= 3 ? un - 2 : 0;
  }
  return 0;
}

std::vector<std::string> HamiltonianSpec::param_names() const {
  std::vector<std::string> names;
  const auto pair_name = [](const char* tag, const std::pair<int, int>& p) {
    return std::string(tag) + "_" + std::to_string(p.first) + "_" + std::to_string(p.second);
  };
  switch (family) {
    case HamiltonianFamily::Rydberg:
      names = {"Omega", "delta"};
      for (const auto& p : pairs) names.push_back(pair_name("c", p));
      break;
    case HamiltonianFamily::Superconducting:
      for (int i = 0; i < n; ++i) names.push_back("h_" + std::to_string(i));
      for (const auto& p : pairs) names.push_back(pair_name("zeta", p));
      break;
    case HamiltonianFamily::XYZ:
      for (int i = 0; i + 1 < n; ++i) {
        for (const char* a : {"Jx_", "Jy_", "Jz_"}) names.push_back(a + std::to_string(i));
      }
      for (int i = 0; i < n; ++i) names.push_back("h_" + std::to_string(i));
      break;
    case HamiltonianFamily::PXP:
      for (int i = 1; i + 1 < n; ++i) names.push_back("J_" + std::to_string(i));
      break;
  }
  return names;
}

void HamiltonianSpec::validate() const {
  if (n < 1 || n > kDefaultMaxQubits) {
    throw InvalidArgument("qubit count must lie in [1, " + std::to_string(kDefaultMaxQubits) + "]");
  }
  if (family == HamiltonianFamily::PXP && n < 3) throw InvalidArgument("PXP needs N >= 3");
  for (const auto& [i, j] : pairs) {
    if (i < 0 || j < 0 || i >= n || j >= n || i >= j) {
      throw InvalidArgument("pair/edge (" + std::to_string(i) + "," + std::to_string(j) +
                            ") is invalid; require 0 <= i < j < N");
    }
  }
  if (family == HamiltonianFamily::Rydberg) {
    if (positions.size() != static_cast<std::size_t>(n)) {
      throw InvalidArgument("Rydberg geometry needs one position per atom");
    }
    for (const auto& [i, j] : pairs) {
      const double dx = positions[i][0] - positions[j][0];
      const double dy = positions[i][1] - positions[j][1];
      if (!(std::hypot(dx, dy) > 0.0)) throw InvalidArgument("Rydberg pair distance must be positive");
    }
  }
}

HamiltonianSpec HamiltonianSpec::chain(HamiltonianFamily family, int n) {
  if (family == HamiltonianFamily::Rydberg) {
    throw InvalidArgument("Rydberg geometry is sampled, not a chain; use rydberg_geometry()");
  }
  HamiltonianSpec spec;
  spec.family = family;
  spec.n = n;
  for (int i = 0; i + 1 < n; ++i) spec.pairs.emplace_back(i, i + 1);
  return spec;
}

std::size_t DissipatorSpec::num_jumps() const {
  const auto un = static_cast<std::size_t>(n);
  switch (family) {
    case DissipatorFamily::Phase: return un;
    case DissipatorFamily::Thermal: return 2 * un;
    case DissipatorFamily::Combined: return 3 * un;
  }
  return 0;
}

std::vector<std::string> DissipatorSpec::jump_names() const {
  std::vector<std::string> names;
  if (family != DissipatorFamily::Thermal) {
    for (int i = 0; i < n; ++i) names.push_back("Z_" + std::to_string(i));
  }
  if (family != DissipatorFamily::Phase) {
    for (int i = 0; i < n; ++i) names.push_back("Lminus_" + std::to_string(i));
    for (int i = 0; i < n; ++i) names.push_back("Lplus_" + std::to_string(i));
  }
  return names;
}

void ModelSpec::validate() const {
  hamiltonian.validate();
  if (dissipator.n != hamiltonian.n) {
    throw InvalidArgument("dissipator and Hamiltonian disagree on the qubit count");
  }
}

std::vector<OperatorTerm> hamiltonian_terms(const HamiltonianSpec& spec) {
  spec.validate();
  const CMatrix x = pauli_matrix(Pauli::X);
  const CMatrix y = pauli_matrix(Pauli::Y);
  const CMatrix z = pauli_matrix(Pauli::Z);
  const CMatrix id = pauli_matrix(Pauli::I);
  const CMatrix zz = kron(z, z);
  std::vector<OperatorTerm> terms;
  switch (spec.family) {
    case HamiltonianFamily::Rydberg: {
      OperatorTerm omega, delta;
      for (int j = 0; j < spec.n; ++j) {
        omega.push_back({{j}, 0.5 * x});
        delta.push_back({{j}, -z});
      }
      terms.push_back(std::move(omega));
      terms.push_back(std::move(delta));
      for (const auto& [i, j] : spec.pairs) terms.push_back({{{i, j}, zz}});
      break;
    }
    case HamiltonianFamily::Superconducting:
      for (int i = 0; i < spec.n; ++i) terms.push_back({{{i}, 0.5 * (id - z)}});
      for (const auto& [i, j] : spec.pairs) terms.push_back({{{i, j}, 0.5 * zz}});
      break;
    case HamiltonianFamily::XYZ:
      for (int i = 0; i + 1 < spec.n; ++i) {
        terms.push_back({{{i, i + 1}, kron(x, x)}});
        terms.push_back({{{i, i + 1}, kron(y, y)}});
        terms.push_back({{{i, i + 1}, zz}});
      }
      for (int i = 0; i < spec.n; ++i) terms.push_back({{{i}, x}});
      break;
    case HamiltonianFamily::PXP: {
      const CMatrix pxp = kron(kron(projector0(), x), projector0());
      for (int i = 1; i + 1 < spec.n; ++i) terms.push_back({{{i - 1, i, i + 1}, pxp}});
      break;
    }
  }
  return terms;
}

std::vector<LocalOp> local_jump_operators(const DissipatorSpec& spec) {
  if (spec.n < 1) throw InvalidArgument("dissipator needs at least one qubit");
  std::vector<LocalOp> ops;
  if (spec.family != DissipatorFamily::Thermal) {
    for (int i = 0; i < spec.n; ++i) ops.push_back({{i}, pauli_matrix(Pauli::Z)});
  }
  if (spec.family != DissipatorFamily::Phase) {
    for (int i = 0; i < spec.n; ++i) ops.push_back({{i}, lowering()});
    for (int i = 0; i < spec.n; ++i) ops.push_back({{i}, raising()});
  }
  return ops;
}

CMatrix build_hamiltonian(const HamiltonianSpec& spec, const RVector& theta_h) {
  if (static_cast<std::size_t>(theta_h.size()) != spec.num_params()) {
    throw InvalidArgument("theta_H has length " + std::to_string(theta_h.size()) + ", expected " +
                          std::to_string(spec.num_params()));
  }
  const auto terms = hamiltonian_terms(spec);
  const Eigen::Index dim = Eigen::Index{1} << spec.n;
  CMatrix h = CMatrix::Zero(dim, dim);
  for (std::size_t k = 0; k < terms.size(); ++k) {
    for (const auto& piece : terms[k]) h += theta_h[static_cast<Eigen::Index>(k)] * embed(piece, spec.n);
  }
  return h;
}

std::vector<CMatrix> build_jump_operators(const DissipatorSpec& spec) {
  std::vector<CMatrix> out;
  for (const auto& op : local_jump_operators(spec)) out.push_back(embed(op, spec.n));
  return out;
}

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double inverse_softplus(double y) {
  if (!(y > 0.0)) throw InvalidArgument("rates must be strictly positive");
  // log(e^y - 1) = y + log(1 - e^{-y})
  return y + std::log(-std::expm1(-y));
}

RVector rates_from_raw(const RVector& theta_l) { return theta_l.unaryExpr([](double v) { return softplus(v); }); }

RVector raw_from_rates(const RVector& gamma) {
  return gamma.unaryExpr([](double v) { return inverse_softplus(v); });
}

PhysicalGenerator::PhysicalGenerator(ModelSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  for (const auto& term : hamiltonian_terms(spec_.hamiltonian)) {
    const Eigen::Index dim = Eigen::Index{1} << spec_.num_qubits();
    CMatrix m = CMatrix::Zero(dim, dim);
    for (const auto& piece : term) m += embed(piece, spec_.num_qubits());
    term_matrices_.push_back(std::move(m));
  }
  jumps_ = build_jump_operators(spec_.dissipator);
  for (const auto& l : jumps_) jump_products_.push_back(l.adjoint() * l);
}

CMatrix PhysicalGenerator::hamiltonian(const RVector& theta_h) const {
  if (static_cast<std::size_t>(theta_h.size()) != term_matrices_.size()) {
    throw InvalidArgument("theta_H length does not match the model");
  }
  const Eigen::Index dim = Eigen::Index{1} << spec_.num_qubits();
  CMatrix h = CMatrix::Zero(dim, dim);
  for (std::size_t k = 0; k < term_matrices_.size(); ++k) h += theta_h[static_cast<Eigen::Index>(k)] * term_matrices_[k];
  return h;
}

CMatrix PhysicalGenerator::apply(const RVector& theta_h, const RVector& gamma, const CMatrix& rho) const {
  const Eigen::Index dim = Eigen::Index{1} << spec_.num_qubits();
  if (rho.rows() != dim || rho.cols() != dim) throw InvalidArgument("state dimension does not match the model");
  if (static_cast<std::size_t>(gamma.size()) != jumps_.size()) {
    throw InvalidArgument("rate vector length does not match the jump operators");
  }
  const CMatrix h = hamiltonian(theta_h);
  CMatrix out = -kI * (h * rho - rho * h);
  for (std::size_t a = 0; a < jumps_.size(); ++a) {
    const double g = gamma[static_cast<Eigen::Index>(a)];
    if (g == 0.0) continue;
    const CMatrix& l = jumps_[a];
    const CMatrix& ll = jump_products_[a];
    out += g * (l * rho * l.adjoint() - 0.5 * (ll * rho + rho * ll));
  }
  return out;
}

CMatrix apply_physical_generator(const ModelSpec& spec, const RVector& theta_h, const RVector& theta_l,
                                 const CMatrix& rho) {
  return PhysicalGenerator(spec).apply(theta_h, rates_from_raw(theta_l), rho);
}

void ExperimentConfig::validate() const {
  if (!(R > 0.0)) throw InvalidArgument("noise-to-unitary ratio R must be positive");
  if (n < 1 || n > kDefaultMaxQubits) throw InvalidArgument("qubit count out of range");
  if (family == HamiltonianFamily::PXP && n < 3) throw InvalidArgument("PXP needs at least 3 qubits");
}

RVector rescale_noise_to_ratio(const RVector& theta_h, const RVector& gamma, double R) {
  if (!(R > 0.0)) throw InvalidArgument("noise-to-unitary ratio R must be positive");
  const double h_norm = theta_h.lpNorm<1>();
  if (!(h_norm > 0.0)) throw InvalidArgument("cannot rescale rates against a zero Hamiltonian");
  const double g_norm = gamma.lpNorm<1>();
  if (!(g_norm > 0.0)) throw InvalidArgument("cannot rescale an all-zero rate vector");
  return gamma * (R * h_norm / g_norm);
}

HamiltonianSpec rydberg_geometry(int n, double spacing, Rng& rng) {
  // Compact triangular patch; rows of 2 / 3 / 1 atoms. Units of the spacing.
  static constexpr double kH = 0.86602540378443864676;  // sqrt(3) / 2
  static constexpr std::array<std::array<double, 2>, 6> kIdeal = {{
      {0.0, 0.0}, {1.0, 0.0}, {0.5, kH}, {1.5, kH}, {-0.5, kH}, {0.0, 2.0 * kH}}};
  if (n < 1 || n > static_cast<int>(kIdeal.size())) {
    throw InvalidArgument("Rydberg patch supports 1..6 atoms");
  }
  HamiltonianSpec spec;
  spec.family = HamiltonianFamily::Rydberg;
  spec.n = n;
  std::uniform_real_distribution<double> jitter(-0.05 * spacing, 0.05 * spacing);
  for (int i = 0; i < n; ++i) {
    const double x = kIdeal[i][0] * spacing + jitter(rng);
    const double y = kIdeal[i][1] * spacing + jitter(rng);
    spec.positions.push_back({x, y});
  }
  const double cutoff = std::sqrt(3.0) * 1.1;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d = std::hypot(kIdeal[i][0] - kIdeal[j][0], kIdeal[i][1] - kIdeal[j][1]);
      if (d <= cutoff) spec.pairs.emplace_back(i, j);
    }
  }
  return spec;
}

TrueParams sample_true_params(const ExperimentConfig& config, Rng& rng) {
  config.validate();
  TrueParams out;
  out.model.dissipator = {config.dissipator, config.n};
  std::vector<double> theta;
  switch (config.family) {
    case HamiltonianFamily::Rydberg: {
      std::uniform_real_distribution<double> omega(0.0, 1.0), delta(-4.0, 4.0), spacing(9.0, 11.0);
      theta.push_back(omega(rng));
      theta.push_back(delta(rng));
      out.model.hamiltonian = rydberg_geometry(config.n, spacing(rng), rng);
      const auto& pos = out.model.hamiltonian.positions;
      for (const auto& [i, j] : out.model.hamiltonian.pairs) {
        const double r = std::hypot(pos[i][0] - pos[j][0], pos[i][1] - pos[j][1]);
        theta.push_back(kRydbergC6 / std::pow(r, 6));
      }
      break;
    }
    case HamiltonianFamily::Superconducting: {
      out.model.hamiltonian = HamiltonianSpec::chain(config.family, config.n);
      // h/2pi ~ N(0, 10) kHz and zeta/2pi ~ N(-30, 10) kHz, scaled by 1/100.
      constexpr double kScale = 2.0 * std::numbers::pi / 100.0;
      std::normal_distribution<double> h(0.0, 10.0), zeta(-30.0, 10.0);
      for (int i = 0; i < config.n; ++i) theta.push_back(kScale * h(rng));
      for (std::size_t e = 0; e < out.model.hamiltonian.pairs.size(); ++e) theta.push_back(kScale * zeta(rng));
      break;
    }
    case HamiltonianFamily::XYZ:
    case HamiltonianFamily::PXP: {
      out.model.hamiltonian = HamiltonianSpec::chain(config.family, config.n);
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      for (std::size_t k = 0; k < out.model.hamiltonian.num_params(); ++k) theta.push_back(u(rng));
      break;
    }
  }
  out.theta_h = Eigen::Map<RVector>(theta.data(), static_cast<Eigen::Index>(theta.size()));
  std::uniform_real_distribution<double> rate(0.2, 1.0);
  out.gamma.resize(static_cast<Eigen::Index>(out.model.dissipator.num_jumps()));
  for (Eigen::Index a = 0; a < out.gamma.size(); ++a) out.gamma[a] = rate(rng);
  out.gamma = rescale_noise_to_ratio(out.theta_h, out.gamma, config.R);
  out.model.validate();
  return out;
}

}  // namespace lindbladfit
