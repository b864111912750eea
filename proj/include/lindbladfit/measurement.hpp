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

// Random-Pauli transient measurement protocol and the shot dataset.
//
// Record order in a complete dataset is fixed: initial state, then time,
// then basis slot k, then shot m, so record ((s*J + j)*K + k)*M + m is shot
// m of basis slot k for state s at time times[j].

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lindbladfit/field.hpp"
#include "lindbladfit/rng.hpp"

namespace lindbladfit {

struct ProtocolConfig {
  int L = 5;
  std::vector<double> times = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  int K = 200;
  int M = 100;
  std::uint64_t seed = 0;

  int J() const { return static_cast<int>(times.size()); }
  std::size_t num_records() const;
  void validate() const;
};

struct MeasurementRecord {
  int state_id = 0;
  double t = 0.0;
  PauliString basis;
  std::uint32_t bits = 0;  // site 0 is the most significant bit
};

std::string bits_to_string(std::uint32_t bits, int n);
std::uint32_t parse_bits(std::string_view text, int n);

struct GroundTruth {
  RVector theta_h;
  RVector gamma;
};

struct ShotDataset {
  static constexpr int kVersion = 1;

  ModelSpec model;
  std::optional<double> R;
  std::uint64_t model_seed = 0;
  ProtocolConfig protocol;
  std::optional<GroundTruth> truth;
  std::vector<InitialStateSpec> initial_states;
  std::vector<MeasurementRecord> records;

  int num_qubits() const { return model.num_qubits(); }
  bool complete() const { return !records.empty() && records.size() == protocol.num_records(); }
  std::size_t record_index(int state, int time, int slot, int shot) const;
  /// Verifies that the records follow the documented order; throws DataError.
  void check_complete() const;
};

std::vector<InitialStateSpec> sample_initial_states(int L, int n, Rng& rng);
std::vector<PauliString> sample_bases(int K, int n, Rng& rng);

/// Born distribution over the 2^N outcomes, p(b) = <b| U rho U^+ |b>.
/// Throws DataError when the raw diagonal sum is off by more than 1e-9;
/// small negative entries are clamped and the vector renormalized.
RVector outcome_distribution(const DensityMatrix& rho, const PauliString& basis);

/// M categorical draws (inverse CDF on uniform variates).
std::vector<std::uint32_t> sample_shots(const RVector& probs, int M, Rng& rng);

/// Evolves each initial state once under the true generator and samples
/// K fresh bases per (state, time) and M shots per basis. Deterministic in
/// (model, truth, protocol); parallel over initial states.
ShotDataset generate_dataset(const ModelSpec& model, const GroundTruth& truth, const ProtocolConfig& protocol,
                             const IntegratorConfig& cfg = {});

/// Line 1: JSON meta. Then one `state_id,t,basis,bits` line per record.
void write_dataset(const ShotDataset& ds, const std::filesystem::path& path);
ShotDataset read_dataset(const std::filesystem::path& path);

}  // namespace lindbladfit
