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

#include "lindbladfit/spinops.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace lindbladfit {

namespace {

constexpr cplx kI{0.0, 1.0};

void check_qubits(int n, int max_qubits) {
  if (n < 1) throw InvalidArgument("qubit count must be at least 1");
  if (n > max_qubits) {
    throw InvalidArgument("qubit count " + std::to_string(n) + " exceeds the configured maximum " +
                          std::to_string(max_qubits));
  }
}

}  // namespace

char to_char(Pauli p) {
  switch (p) {
    case Pauli::I: return 'I';
    case Pauli::X: return 'X';
    case Pauli::Y: return 'Y';
    case Pauli::Z: return 'Z';
  }
  return '?';
}

Pauli pauli_from_char(char c) {
  switch (c) {
    case 'I': case 'i': return Pauli::I;
    case 'X': case 'x': return Pauli::X;
    case 'Y': case 'y': return Pauli::Y;
    case 'Z': case 'z': return Pauli::Z;
    default: break;
  }
  throw InvalidArgument(std::string("invalid Pauli label '") + c + "'");
}

PauliString::PauliString(std::vector<Pauli> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw InvalidArgument("Pauli string must have at least one site");
}

PauliString PauliString::parse(std::string_view text) {
  std::vector<Pauli> labels;
  labels.reserve(text.size());
  for (char c : text) labels.push_back(pauli_from_char(c));
  return PauliString(std::move(labels));
}

std::string PauliString::str() const {
  std::string s;
  s.reserve(labels_.size());
  for (Pauli p : labels_) s.push_back(to_char(p));
  return s;
}

bool PauliString::is_measurement_basis() const {
  return std::none_of(labels_.begin(), labels_.end(), [](Pauli p) { return p == Pauli::I; });
}

std::size_t PauliString::index() const {
  std::size_t idx = 0;
  for (Pauli p : labels_) idx = idx * 4 + static_cast<std::size_t>(p);
  return idx;
}

PauliString PauliString::from_index(std::size_t index, int n) {
  std::vector<Pauli> labels(static_cast<std::size_t>(n));
  for (int site = n - 1; site >= 0; --site) {
    labels[static_cast<std::size_t>(site)] = static_cast<Pauli>(index % 4);
    index /= 4;
  }
  return PauliString(std::move(labels));
}

CMatrix pauli_matrix(Pauli label) {
  CMatrix m = CMatrix::Zero(2, 2);
  switch (label) {
    case Pauli::I: m(0, 0) = 1.0; m(1, 1) = 1.0; break;
    case Pauli::X: m(0, 1) = 1.0; m(1, 0) = 1.0; break;
    case Pauli::Y: m(0, 1) = -kI; m(1, 0) = kI; break;
    case Pauli::Z: m(0, 0) = 1.0; m(1, 1) = -1.0; break;
  }
  return m;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

CMatrix string_operator(const PauliString& ps, int max_qubits) {
  check_qubits(ps.size(), max_qubits);
  CMatrix out = pauli_matrix(ps[0]);
  for (int site = 1; site < ps.size(); ++site) out = kron(out, pauli_matrix(ps[site]));
  return out;
}

CMatrix embed_single_site(const CMatrix& op, int site, int n) {
  if (site < 0 || site >= n) {
    throw InvalidArgument("site " + std::to_string(site) + " out of range for " +
                          std::to_string(n) + " qubits");
  }
  const int sites[1] = {site};
  return embed_operator(op, sites, n);
}

CMatrix embed_operator(const CMatrix& op, std::span<const int> sites, int n) {
  check_qubits(n, kDefaultMaxQubits + 4);
  const auto k = static_cast<int>(sites.size());
  if (op.rows() != (Eigen::Index{1} << k) || op.cols() != op.rows()) {
    throw InvalidArgument("local operator dimension does not match its support");
  }
  std::size_t support_mask = 0;
  for (int i = 0; i < k; ++i) {
    if (sites[i] < 0 || sites[i] >= n) throw InvalidArgument("support site out of range");
    if (i > 0 && sites[i] <= sites[i - 1]) throw InvalidArgument("support sites must increase");
    support_mask |= std::size_t{1} << (n - 1 - sites[i]);
  }
  const auto local_index = [&](std::size_t global) {
    std::size_t loc = 0;
    for (int i = 0; i < k; ++i) loc = (loc << 1) | ((global >> (n - 1 - sites[i])) & 1U);
    return static_cast<Eigen::Index>(loc);
  };
  const std::size_t dim = std::size_t{1} << n;
  CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::size_t c = 0; c < dim; ++c) {
      if ((r & ~support_mask) != (c & ~support_mask)) continue;
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          op(local_index(r), local_index(c));
    }
  }
  return out;
}

InitialStateSpec::InitialStateSpec(std::vector<SiteState> sites) : sites_(std::move(sites)) {
  if (sites_.empty()) throw InvalidArgument("initial state needs at least one site");
  for (const auto& s : sites_) {
    if (s.axis == Pauli::I) throw InvalidArgument("initial state axis must be X, Y or Z");
    if (s.sign != 1 && s.sign != -1) throw InvalidArgument("initial state sign must be +1 or -1");
  }
}

InitialStateSpec InitialStateSpec::parse(std::string_view text) {
  std::vector<SiteState> sites;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    auto token = text.substr(pos, comma == std::string_view::npos ? text.size() - pos : comma - pos);
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
    if (token.size() != 2 || (token[1] != '+' && token[1] != '-')) {
      throw InvalidArgument("malformed initial-state token '" + std::string(token) + "'");
    }
    sites.push_back({pauli_from_char(token[0]), token[1] == '+' ? 1 : -1});
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return InitialStateSpec(std::move(sites));
}

std::string InitialStateSpec::str() const {
  std::string s;
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    if (i > 0) s.push_back(',');
    s.push_back(static_cast<char>(std::tolower(to_char(sites_[i].axis))));
    s.push_back(sites_[i].sign > 0 ? '+' : '-');
  }
  return s;
}

DensityMatrix::DensityMatrix(CMatrix m, double tol) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() < 2) throw InvalidArgument("density matrix must be square");
  if (hermiticity_error() > tol) throw InvalidArgument("density matrix is not Hermitian");
  if (trace_error() > tol) throw InvalidArgument("density matrix does not have unit trace");
}

int DensityMatrix::num_qubits() const {
  int n = 0;
  while ((Eigen::Index{1} << n) < m_.rows()) ++n;
  return n;
}

double DensityMatrix::hermiticity_error() const { return max_abs(m_ - m_.adjoint()); }

double DensityMatrix::trace_error() const { return std::abs(m_.trace() - cplx{1.0, 0.0}); }

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

DensityMatrix product_eigenstate(const InitialStateSpec& spec) {
  const CMatrix id = pauli_matrix(Pauli::I);
  CMatrix out;
  for (int site = 0; site < spec.size(); ++site) {
    const auto& s = spec.sites()[static_cast<std::size_t>(site)];
    CMatrix factor = 0.5 * (id + static_cast<double>(s.sign) * pauli_matrix(s.axis));
    out = site == 0 ? factor : kron(out, factor);
  }
  return DensityMatrix(std::move(out), 1e-12);
}

DensityMatrix project_physical(const CMatrix& m) {
  if (m.rows() != m.cols()) throw InvalidArgument("project_physical needs a square matrix");
  const cplx tr = m.trace();
  if (!(std::abs(tr) > 1e-12)) {
    throw IntegrationError("trajectory diverged: state trace " + std::to_string(std::abs(tr)) +
                           " is numerically zero");
  }
  const CMatrix a = m / tr;
  return DensityMatrix(0.5 * (a + a.adjoint()), DensityMatrix::Unchecked{});
}

CMatrix basis_rotation(const PauliString& basis) {
  if (!basis.is_measurement_basis()) {
    throw InvalidArgument("measurement basis '" + basis.str() + "' contains an identity label");
  }
  const double s = 1.0 / std::sqrt(2.0);
  CMatrix hadamard(2, 2);
  hadamard << s, s, s, -s;
  CMatrix s_dag = CMatrix::Zero(2, 2);
  s_dag(0, 0) = 1.0;
  s_dag(1, 1) = -kI;
  const CMatrix y_rot = hadamard * s_dag;
  CMatrix out;
  for (int site = 0; site < basis.size(); ++site) {
    CMatrix f;
    switch (basis[site]) {
      case Pauli::X: f = hadamard; break;
      case Pauli::Y: f = y_rot; break;
      default: f = pauli_matrix(Pauli::I); break;
    }
    out = site == 0 ? f : kron(out, f);
  }
  return out;
}

double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace lindbladfit
