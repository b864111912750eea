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

#include "lindbladfit/likelihood.hpp"

#include <bit>
#include <cmath>

namespace lindbladfit {

namespace {

// Pauli index and sign for every site subset of one record. Subset bit
// (N-1-i) selects site i, matching the bitstring convention.
int subset_terms(const PauliString& basis, std::uint32_t bits, std::size_t* index, double* sign) {
  const int n = basis.size();
  const int count = 1 << n;
  std::size_t weight[32];
  for (int i = 0; i < n; ++i) {
    weight[n - 1 - i] = static_cast<std::size_t>(basis[i]) * ipow(4, n - 1 - i);
  }
  index[0] = 0;
  sign[0] = 1.0;
  for (int s = 1; s < count; ++s) {
    const int low = std::countr_zero(static_cast<unsigned>(s));
    index[s] = index[s & (s - 1)] + weight[low];
    sign[s] = (std::popcount(static_cast<unsigned>(s) & bits) & 1) ? -1.0 : 1.0;
  }
  return count;
}

constexpr int kMaxSubsets = 1 << 10;

}  // namespace

double born_probability(const PauliCoordinates& x, const PauliString& basis, std::uint32_t bits) {
  if (basis.size() > 10) throw InvalidArgument("too many qubits for born_probability");
  std::size_t index[kMaxSubsets];
  double sign[kMaxSubsets];
  const int count = subset_terms(basis, bits, index, sign);
  double p = 0.0;
  for (int s = 0; s < count; ++s) p += sign[s] * x[static_cast<Eigen::Index>(index[s])];
  return p;
}

double batch_nll(std::span<const PauliCoordinates> states, std::span<const LikelihoodTerm> terms,
                 std::span<RVector> grads, Execution exec, double floor) {
  const auto n_terms = static_cast<std::ptrdiff_t>(terms.size());
  std::vector<double> probs(terms.size());
  auto prob_of = [&](std::ptrdiff_t r) {
    const auto& t = terms[static_cast<std::size_t>(r)];
    probs[static_cast<std::size_t>(r)] =
        born_probability(states[static_cast<std::size_t>(t.time_index)], t.record->basis, t.record->bits);
  };
  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < n_terms; ++r) prob_of(r);
  } else {
    for (std::ptrdiff_t r = 0; r < n_terms; ++r) prob_of(r);
  }

  double loss = 0.0;
  std::size_t index[kMaxSubsets];
  double sign[kMaxSubsets];
  for (std::size_t r = 0; r < terms.size(); ++r) {
    const double p = probs[r];
    if (!(p > floor)) {
      loss -= std::log(floor);
      continue;
    }
    loss -= std::log(p);
    if (grads.empty()) continue;
    const auto& t = terms[r];
    RVector& g = grads[static_cast<std::size_t>(t.time_index)];
    const int count = subset_terms(t.record->basis, t.record->bits, index, sign);
    const double d = -1.0 / p;
    for (int s = 0; s < count; ++s) g[static_cast<Eigen::Index>(index[s])] += d * sign[s];
  }
  return loss;
}

double batch_nll_reference(std::span<const DensityMatrix> states, std::span<const LikelihoodTerm> terms,
                           double floor) {
  double loss = 0.0;
  for (const auto& t : terms) {
    const RVector p = outcome_distribution(states[static_cast<std::size_t>(t.time_index)], t.record->basis);
    loss -= std::log(std::max(p[static_cast<Eigen::Index>(t.record->bits)], floor));
  }
  return loss;
}

}  // namespace lindbladfit
