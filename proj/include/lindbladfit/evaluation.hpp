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

// Recovery metrics, success rates, fidelity curves and loss landscapes.

#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lindbladfit/field.hpp"
#include "lindbladfit/measurement.hpp"
#include "lindbladfit/training.hpp"

namespace lindbladfit {

inline constexpr double kSuccessThreshold = 0.1;

/// |true - est|_1 / |true|_1
double relative_error(const RVector& truth, const RVector& est);
bool is_success(double eps);

/// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2. Negative eigenvalues of
/// either input are clamped to zero (renormalizing the trace); the total
/// clamped magnitude is added to *clamped when given.
double fidelity(const CMatrix& a, const CMatrix& b, double* clamped = nullptr);

struct InfidelityRow {
  double t = 0.0;
  double t_scaled = 0.0;  // t * R
  double mean_infidelity = 0.0;
};

/// Both generators evolved from every rho0 on the grid t_k = k * t_max / J,
/// k = 1 .. J * horizon_factor, where t_max and J describe the training
/// window. Infidelity averaged over the initial states.
std::vector<InfidelityRow> infidelity_curve(const ModelSpec& spec, const GroundTruth& truth,
                                            const GeneratorParams& est, bool est_nde,
                                            const std::vector<DensityMatrix>& rho0s, std::span<const double> window,
                                            int horizon_factor, double R, const IntegratorConfig& cfg = {});

void write_infidelity_csv(const std::filesystem::path& path, const std::vector<InfidelityRow>& rows, int n, double R);

GroundTruth truth_of(const TrueParams& t);
GeneratorParams params_of(const GroundTruth& t);

/// (eps_H, eps_L), with eps_L on the physical rates.
std::pair<double, double> recovery_errors(const GroundTruth& truth, const GeneratorParams& est);

/// Produces final parameters from one seed's data. The seed is the
/// per-seed "init" substream.
using SeedTrainer = std::function<GeneratorParams(const ShotDataset&, const TrueParams&, std::uint64_t seed)>;

struct SeedOutcome {
  int index = 0;
  double eps_h = 0.0;
  double eps_l = 0.0;
  bool success_h = false;
  bool success_l = false;
  bool failed = false;
  std::string error;
};

/// Truth from substream ("truth", index); dataset seed from ("protocol", index);
/// trainer seed from ("init", index); all under experiment.seed.
SeedOutcome run_seed(const ExperimentConfig& experiment, ProtocolConfig protocol, int index,
                     const SeedTrainer& trainer, const IntegratorConfig& cfg = {});

struct SuccessRate {
  double rate_h = 0.0;
  double rate_l = 0.0;
  std::vector<SeedOutcome> seeds;
};

/// Seeds run concurrently; a failing seed counts as unsuccessful.
SuccessRate success_rate(const ExperimentConfig& experiment, const ProtocolConfig& protocol, int n_seeds,
                         const SeedTrainer& trainer, const IntegratorConfig& cfg = {});

struct SubspaceSelector {
  bool h = false;
  bool l = false;
  bool nde = false;

  /// "H", "L", "NDE", "HL", "H+NDE", ...
  static SubspaceSelector parse(std::string_view text);
  std::string str() const;
  Eigen::Index dimension(const ParamLayout& layout) const;
  bool selects(const ParamLayout& layout, Eigen::Index i) const;
};

/// Gram-Schmidt orthonormalized standard normal directions supported on
/// the selected blocks.
std::pair<RVector, RVector> random_orthogonal_plane(const SubspaceSelector& sel, const ParamLayout& layout, Rng& rng);

struct LandscapeScan {
  RVector center;
  RVector v1;
  RVector v2;
  std::vector<double> offsets;  // shared by alpha and beta
  RMatrix loss;                 // loss(i, k) at center + offsets[i] v1 + offsets[k] v2; NaN on failure
  std::string tag;

  void write_csv(const std::filesystem::path& path) const;
};

/// Offsets radius * (2i - (n-1)) / (n-1), i = 0 .. n-1; cells evaluated concurrently.
LandscapeScan landscape_scan(const RVector& center, const RVector& v1, const RVector& v2, double radius, int grid_n,
                             const std::function<double(const RVector&)>& loss);

/// ((theta - truth) . v1, (theta - truth) . v2) per snapshot.
std::vector<std::pair<double, double>> trajectory_projection(const std::vector<RVector>& snapshots,
                                                             const RVector& truth, const RVector& v1,
                                                             const RVector& v2);

void write_trajectory_csv(const std::filesystem::path& path, const std::vector<std::pair<double, double>>& points);

}  // namespace lindbladfit
