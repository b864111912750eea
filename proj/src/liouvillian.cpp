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

#include "lindbladfit/liouvillian.hpp"

#include <cmath>

namespace lindbladfit {

namespace {

constexpr cplx kI{0.0, 1.0};
constexpr double kDropTol = 1e-14;

using Triplet = Eigen::Triplet<double>;

struct LocalSuperop {
  std::vector<int> sites;
  RMatrix matrix;  // 4^s x 4^s in local Pauli coordinates
};

CMatrix local_pauli(std::size_t index, int s) { return from_pauli_coords(RVector::Unit(static_cast<Eigen::Index>(ipow(4, s)), static_cast<Eigen::Index>(index))); }

RMatrix local_commutator_superop(const CMatrix& op, int s) {
  const auto count = static_cast<Eigen::Index>(ipow(4, s));
  RMatrix out(count, count);
  for (Eigen::Index l = 0; l < count; ++l) {
    const CMatrix p = local_pauli(static_cast<std::size_t>(l), s);
    out.col(l) = to_pauli_coords(CMatrix(-kI * (op * p - p * op)));
  }
  return out;
}

RMatrix local_dissipator_superop(const CMatrix& op, int s) {
  const auto count = static_cast<Eigen::Index>(ipow(4, s));
  const CMatrix ll = op.adjoint() * op;
  RMatrix out(count, count);
  for (Eigen::Index l = 0; l < count; ++l) {
    const CMatrix p = local_pauli(static_cast<std::size_t>(l), s);
    out.col(l) = to_pauli_coords(CMatrix(op * p * op.adjoint() - 0.5 * (ll * p + p * ll)));
  }
  return out;
}

// Embeds a sum of local superoperators over N qubits. Column-parallel; the
// per-column triplet lists are concatenated in column order so the result
// does not depend on the thread count.
SparseR embed_superops(const std::vector<LocalSuperop>& pieces, int n) {
  const auto count = static_cast<std::int64_t>(num_pauli_coords(n));
  std::vector<std::vector<Triplet>> columns(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(static)
  for (std::int64_t col = 0; col < count; ++col) {
    auto& out = columns[static_cast<std::size_t>(col)];
    for (const auto& piece : pieces) {
      const auto s = static_cast<int>(piece.sites.size());
      std::size_t local_col = 0;
      std::size_t rest = static_cast<std::size_t>(col);
      std::vector<std::size_t> place(static_cast<std::size_t>(s));
      for (int i = 0; i < s; ++i) {
        place[static_cast<std::size_t>(i)] = ipow(4, n - 1 - piece.sites[static_cast<std::size_t>(i)]);
        const std::size_t digit = (static_cast<std::size_t>(col) / place[static_cast<std::size_t>(i)]) % 4;
        local_col = local_col * 4 + digit;
        rest -= digit * place[static_cast<std::size_t>(i)];
      }
      const auto& m = piece.matrix;
      for (Eigen::Index local_row = 0; local_row < m.rows(); ++local_row) {
        const double v = m(local_row, static_cast<Eigen::Index>(local_col));
        if (std::abs(v) < kDropTol) continue;
        std::size_t row = rest;
        std::size_t rem = static_cast<std::size_t>(local_row);
        for (int i = s - 1; i >= 0; --i) {
          row += (rem % 4) * place[static_cast<std::size_t>(i)];
          rem /= 4;
        }
        out.emplace_back(static_cast<int>(row), static_cast<int>(col), v);
      }
    }
  }
  std::vector<Triplet> all;
  for (auto& c : columns) all.insert(all.end(), c.begin(), c.end());
  SparseR a(count, count);
  a.setFromTriplets(all.begin(), all.end());
  a.prune(kDropTol, 1.0);
  return a;
}

SparseR dense_to_sparse(const RMatrix& m) {
  SparseR s = m.sparseView(1.0, kDropTol);
  s.makeCompressed();
  return s;
}

SparseR column_superop_serial(const CMatrix& op, bool dissipator, int n) {
  const auto count = static_cast<Eigen::Index>(num_pauli_coords(n));
  const CMatrix ll = op.adjoint() * op;
  RMatrix out(count, count);
  for (Eigen::Index l = 0; l < count; ++l) {
    const CMatrix p = string_operator(PauliString::from_index(static_cast<std::size_t>(l), n));
    const CMatrix image = dissipator ? CMatrix(op * p * op.adjoint() - 0.5 * (ll * p + p * ll))
                                     : CMatrix(-kI * (op * p - p * op));
    out.col(l) = to_pauli_coords(image);
  }
  return dense_to_sparse(out);
}

}  // namespace

SparseR LiouvillianBasis::assemble(const RVector& theta_h, const RVector& gamma) const {
  if (static_cast<std::size_t>(theta_h.size()) != hamiltonian.size() ||
      static_cast<std::size_t>(gamma.size()) != dissipators.size()) {
    throw InvalidArgument("parameter lengths do not match the Liouvillian basis");
  }
  SparseR a(dim(), dim());
  for (std::size_t k = 0; k < hamiltonian.size(); ++k) a += theta_h[static_cast<Eigen::Index>(k)] * hamiltonian[k];
  for (std::size_t k = 0; k < dissipators.size(); ++k) a += gamma[static_cast<Eigen::Index>(k)] * dissipators[k];
  a.makeCompressed();
  return a;
}

LiouvillianBasis build_liouvillian_basis(const ModelSpec& spec) {
  spec.validate();
  LiouvillianBasis basis;
  basis.n = spec.num_qubits();
  for (const auto& term : hamiltonian_terms(spec.hamiltonian)) {
    std::vector<LocalSuperop> pieces;
    for (const auto& piece : term) {
      pieces.push_back({piece.sites, local_commutator_superop(piece.op, static_cast<int>(piece.sites.size()))});
    }
    basis.hamiltonian.push_back(embed_superops(pieces, basis.n));
  }
  for (const auto& jump : local_jump_operators(spec.dissipator)) {
    std::vector<LocalSuperop> pieces{{jump.sites, local_dissipator_superop(jump.op, static_cast<int>(jump.sites.size()))}};
    basis.dissipators.push_back(embed_superops(pieces, basis.n));
  }
  return basis;
}

LiouvillianBasis build_liouvillian_basis_serial(const ModelSpec& spec) {
  spec.validate();
  LiouvillianBasis basis;
  basis.n = spec.num_qubits();
  const PhysicalGenerator gen(spec);
  const auto n_params = static_cast<Eigen::Index>(spec.hamiltonian.num_params());
  for (Eigen::Index k = 0; k < n_params; ++k) {
    basis.hamiltonian.push_back(column_superop_serial(gen.hamiltonian(RVector::Unit(n_params, k)), false, basis.n));
  }
  for (const auto& l : gen.jumps()) basis.dissipators.push_back(column_superop_serial(l, true, basis.n));
  return basis;
}

LindbladModel::LindbladModel(ModelSpec spec)
    : spec_(std::move(spec)), generator_(spec_), basis_(build_liouvillian_basis(spec_)) {}

}  // namespace lindbladfit
