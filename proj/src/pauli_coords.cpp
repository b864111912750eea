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

#include "lindbladfit/pauli_coords.hpp"

#include <bit>

namespace lindbladfit {

namespace {

cplx i_power(int k) {
  switch (k & 3) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

}  // namespace

PauliMasks pauli_masks(std::size_t index, int n) {
  PauliMasks m;
  for (int site = n - 1; site >= 0; --site) {
    const auto label = static_cast<Pauli>(index % 4);
    index /= 4;
    const std::uint32_t bit = 1U << (n - 1 - site);
    if (label == Pauli::X || label == Pauli::Y) m.x_mask |= bit;
    if (label == Pauli::Z || label == Pauli::Y) m.z_mask |= bit;
    if (label == Pauli::Y) ++m.n_y;
  }
  return m;
}

std::size_t num_pauli_coords(int n) { return ipow(4, n); }

int qubits_from_coord_count(Eigen::Index len) {
  int n = 0;
  Eigen::Index v = 1;
  while (v < len) {
    v *= 4;
    ++n;
  }
  if (v != len || n < 1) throw InvalidArgument("coordinate vector length is not 4^N");
  return n;
}

PauliCoordinates to_pauli_coords(const CMatrix& rho) {
  if (rho.rows() != rho.cols()) throw InvalidArgument("to_pauli_coords needs a square matrix");
  int n = 0;
  while ((Eigen::Index{1} << n) < rho.rows()) ++n;
  if ((Eigen::Index{1} << n) != rho.rows() || n < 1) {
    throw InvalidArgument("matrix dimension is not a power of two");
  }
  const std::size_t count = num_pauli_coords(n);
  const std::uint32_t dim = 1U << n;
  const double norm = 1.0 / static_cast<double>(dim);
  PauliCoordinates out(static_cast<Eigen::Index>(count));
  for (std::size_t j = 0; j < count; ++j) {
    const PauliMasks pm = pauli_masks(j, n);
    // Tr(P rho) = i^{n_y} sum_c (-1)^{|c & z|} rho(c, c ^ x)
    cplx acc{0.0, 0.0};
    for (std::uint32_t c = 0; c < dim; ++c) {
      const cplx v = rho(c, c ^ pm.x_mask);
      acc += (std::popcount(c & pm.z_mask) & 1) ? -v : v;
    }
    out[static_cast<Eigen::Index>(j)] = (i_power(pm.n_y) * acc).real() * norm;
  }
  return out;
}

CMatrix from_pauli_coords(const PauliCoordinates& coeffs) {
  const int n = qubits_from_coord_count(coeffs.size());
  const std::uint32_t dim = 1U << n;
  CMatrix out = CMatrix::Zero(dim, dim);
  for (Eigen::Index j = 0; j < coeffs.size(); ++j) {
    const double a = coeffs[j];
    if (a == 0.0) continue;
    const PauliMasks pm = pauli_masks(static_cast<std::size_t>(j), n);
    const cplx phase = i_power(pm.n_y) * a;
    for (std::uint32_t c = 0; c < dim; ++c) {
      out(c ^ pm.x_mask, c) += (std::popcount(c & pm.z_mask) & 1) ? -phase : phase;
    }
  }
  return out;
}

}  // namespace lindbladfit
