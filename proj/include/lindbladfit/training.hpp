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

// NLL objective, Adam, batching and the vanilla / neural curricula.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lindbladfit/field.hpp"
#include "lindbladfit/likelihood.hpp"
#include "lindbladfit/measurement.hpp"

namespace lindbladfit {

/// All J*K records of one (initial state, shot index) pair.
struct Batch {
  int state_id = 0;
  int shot_index = 0;
  std::vector<LikelihoodTerm> terms;
};

Batch make_batch(const ShotDataset& ds, int state_id, int shot_index);

/// The L*M (state, shot) pairs in shuffled order, one Batch each.
std::vector<Batch> make_epoch_batches(const ShotDataset& ds, Rng& rng);

/// Learning rate per parameter block.
struct BlockRates {
  double h = 0.0;
  double l = 0.0;
  double nde = 0.0;
};

RVector expand_rates(const ParamLayout& layout, const BlockRates& rates);

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  RVector m;
  RVector v;
  long step = 0;

  explicit AdamState(Eigen::Index dim = 0) : m(RVector::Zero(dim)), v(RVector::Zero(dim)) {}
  void reset();
};

/// Bias-corrected Adam update in place. Throws TrainingError on a
/// non-finite gradient, naming the offending block and coordinate.
void adam_step(AdamState& state, RVector& params, const RVector& grad, const RVector& lrs,
               const ParamLayout* layout = nullptr);

struct NllOptions {
  bool nde_enabled = false;
  double l2_lambda = 0.0;
  bool mean = false;  // divide by the number of records
  IntegratorConfig integrator;
};

/// One evolution of the batch's initial state to all protocol times.
double nll_loss(const GeneratorParams& params, const LindbladModel& model, const ShotDataset& ds, const Batch& batch,
                const NllOptions& opt);

struct BatchEvaluation {
  double loss = 0.0;
  RVector grad;  // aligned with flatten(params)
  double min_eigenvalue = 0.0;
};

BatchEvaluation nll_loss_and_grad(const GeneratorParams& params, const LindbladModel& model, const ShotDataset& ds,
                                  const Batch& batch, const NllOptions& opt);

/// Total NLL of every record in the dataset (one evolution per state).
double dataset_nll(const GeneratorParams& params, const LindbladModel& model, const ShotDataset& ds, bool nde_enabled,
                   const IntegratorConfig& cfg = {});

/// theta_H ~ U(-1, 1), gamma ~ U(0.2, 1) stored as raw_from_rates(gamma).
GeneratorParams init_variational_params(const ModelSpec& spec, Rng& rng);

struct CurriculumPhase {
  std::string name;
  int epochs = 0;
  double lr_h = 0.0;
  double lr_l = 0.0;
  double lr_nde = 0.0;
  bool nde_enabled = false;
  double l2_lambda = 0.0;
  bool reset_optimizer_on_entry = true;
};

enum class FineTune { Auto, Always, Never };

struct TrainingConfig {
  IntegratorConfig integrator;
  std::uint64_t seed = 0;  // batch shuffling

  int main_epochs = 20;
  double lr = 1e-3;

  FineTune fine_tune = FineTune::Auto;
  int fine_tune_window = 5;
  double fine_tune_threshold = 1e-3;
  int fine_tune_epochs = 5;
  double fine_tune_lr_slow = 1e-4;
  double fine_tune_lr_fast = 1e-3;

  int nde_epochs = 20;
  double lr_nde = 2e-3;
  double l2_lambda = 0.1;
  int nde_off_epochs = 10;
  Eigen::Index hidden_width = 0;  // 0 selects 4^N

  bool residual_phi = false;
  int residual_epochs = 5;
  double residual_lr = 1e-3;

  bool mean_loss = false;
  bool evaluate_init_loss = true;

  void validate() const;
};

struct PhaseRecord {
  CurriculumPhase phase;
  int first_epoch = 0;          // 1-based global epoch index
  bool swapped = false;         // H/L fine-tune rates exchanged
  double moment_norm_before_reset = 0.0;
  double moment_norm_on_entry = 0.0;
  double trigger_improvement = 0.0;
};

struct EpochRecord {
  int epoch = 0;
  std::string phase;
  double mean_loss = 0.0;
  double grad_norm = 0.0;  // mean over steps of |grad|_2
  double min_eigenvalue = 0.0;
};

struct TrainingRun {
  std::vector<PhaseRecord> phases;
  std::vector<EpochRecord> epochs;
  double init_loss = 0.0;
  std::vector<GeneratorParams> snapshots;  // initialization then one per epoch
  GeneratorParams final_params;
  bool final_nde_enabled = false;
  double wall_seconds = 0.0;
  bool fine_tuned = false;

  int total_epochs() const { return static_cast<int>(epochs.size()); }
  /// loss.csv: epoch,phase,mean_loss,grad_norm,min_eigenvalue_seen
  void write_loss_csv(const std::filesystem::path& path) const;
  /// params_epoch_{k}.json, loss.csv, final_params.json.
  void write(const std::filesystem::path& dir) const;
};

TrainingRun run_vanilla_curriculum(const ShotDataset& ds, const ModelSpec& spec, const GeneratorParams& init,
                                   const TrainingConfig& cfg);

TrainingRun run_nde_curriculum(const ShotDataset& ds, const ModelSpec& spec, const GeneratorParams& init,
                               const MlpParams& init_phi, const TrainingConfig& cfg);

}  // namespace lindbladfit
