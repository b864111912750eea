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

// Run configuration: TOML or JSON in, fully resolved JSON out.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lindbladfit/evaluation.hpp"
#include "lindbladfit/io.hpp"
#include "lindbladfit/training.hpp"

namespace lindbladfit {

enum class TrainerKind { Vanilla, Nde };

std::string to_string(TrainerKind k);
TrainerKind parse_trainer_kind(std::string_view s);

struct EvaluationOptions {
  int horizon_factor = 1000;
  double landscape_radius = 1.0;
  int landscape_grid = 41;
  std::string landscape_subspace = "H";
  std::string landscape_epoch = "init";  // "init", "final" or an epoch number
  bool landscape_full_data = false;
};

/// Cartesian grid of a success-rate sweep; each cell runs n_seeds seeds.
struct SweepGrid {
  std::vector<HamiltonianFamily> families;
  std::vector<DissipatorFamily> dissipators;
  std::vector<double> ratios;
  std::vector<int> sizes;

  std::size_t num_cells() const { return families.size() * dissipators.size() * ratios.size() * sizes.size(); }
};

struct RunConfig {
  ExperimentConfig experiment;  // experiment.seed is the master seed
  ProtocolConfig protocol;      // protocol.seed is derived, never read from input
  TrainerKind trainer = TrainerKind::Vanilla;
  TrainingConfig training;      // training.integrator is the integrator; training.seed is derived
  EvaluationOptions evaluation;
  int n_seeds = 1;
  std::string output_dir = "out";
  std::optional<SweepGrid> sweep;

  void validate() const;
};

/// Substream seeds of run `index` under the master seed.
struct SeedPlan {
  std::uint64_t truth;
  std::uint64_t protocol;
  std::uint64_t init;
  std::uint64_t directions;
};
SeedPlan seed_plan(std::uint64_t master, int index);

json config_to_json(const RunConfig& cfg);
/// Missing keys take defaults; unknown keys are rejected.
RunConfig config_from_json(const json& j);

/// Converts a parsed TOML document to JSON (tables, arrays, scalars).
json toml_file_to_json(const std::filesystem::path& path);

/// .json files are read as JSON, anything else as TOML.
RunConfig load_config(const std::filesystem::path& path);

/// Starting point of a run: theta from the init seed, plus a freshly
/// initialized network for the NDE trainer (drawn from the same stream).
GeneratorParams initial_params(const RunConfig& cfg, const ModelSpec& spec, std::uint64_t init_seed);

/// Runs the configured curriculum; batch shuffling is seeded by init_seed.
TrainingRun train(const RunConfig& cfg, const ShotDataset& ds, const ModelSpec& spec, std::uint64_t init_seed);

/// The configured trainer in the form used by success_rate / run_seed.
SeedTrainer trainer_for(const RunConfig& cfg);

}  // namespace lindbladfit
