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

// Born probabilities straight from Pauli coordinates and the batched
// negative log-likelihood kernel.

#pragma once

#include <span>

#include "lindbladfit/measurement.hpp"
#include "lindbladfit/pauli_coords.hpp"

namespace lindbladfit {

inline constexpr double kProbabilityFloor = 1e-12;

enum class Execution { Serial, Parallel };

/// p(b) = sum over site subsets S of x_{P_S} prod_{i in S} (-1)^{b_i}, where
/// P_S carries the basis label on S and I elsewhere.
double born_probability(const PauliCoordinates& x, const PauliString& basis, std::uint32_t bits);

/// One observed outcome evaluated against the state at times[time_index].
struct LikelihoodTerm {
  int time_index = 0;
  const MeasurementRecord* record = nullptr;
};

/// Sum of -log max(p, floor). When grads is non-empty it receives
/// d(loss)/dx per time index (accumulated, not overwritten). Floored terms
/// contribute no gradient. The reduction order is fixed, so both execution
/// modes give bitwise identical results.
double batch_nll(std::span<const PauliCoordinates> states, std::span<const LikelihoodTerm> terms,
                 std::span<RVector> grads, Execution exec = Execution::Parallel, double floor = kProbabilityFloor);

/// Reference through the rotated density matrix (outcome_distribution).
double batch_nll_reference(std::span<const DensityMatrix> states, std::span<const LikelihoodTerm> terms,
                           double floor = kProbabilityFloor);

}  // namespace lindbladfit
