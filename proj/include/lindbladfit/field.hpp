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

#pragma once

#include <optional>
#include <span>

#include "lindbladfit/liouvillian.hpp"
#include "lindbladfit/neural.hpp"
#include "lindbladfit/propagator.hpp"

namespace lindbladfit {

/// Full variational point: Hamiltonian coefficients, pre-softplus rates and
/// (for the neural model) network weights.
struct GeneratorParams {
  RVector theta_h;
  RVector theta_l;
  std::optional<MlpParams> phi;

  RVector gamma() const { return rates_from_raw(theta_l); }
};

/// Offsets of the H, L and NDE blocks in the flattened parameter vector.
struct ParamLayout {
  Eigen::Index n_h = 0;
  Eigen::Index n_l = 0;
  Eigen::Index n_phi = 0;

  Eigen::Index total() const { return n_h + n_l + n_phi; }
  Eigen::Index l_offset() const { return n_h; }
  Eigen::Index phi_offset() const { return n_h + n_l; }
};

ParamLayout layout_of(const GeneratorParams& p);
RVector flatten(const GeneratorParams& p);
/// Inverse of flatten; `like` provides the block sizes and network shapes.
GeneratorParams unflatten(const RVector& flat, const GeneratorParams& like);

/// Physical generator (+ optional neural correction) on Pauli coordinates.
/// Parameters are the flattened GeneratorParams; with the neural term
/// disabled the NDE block receives exactly zero gradient.
class LindbladField final : public VectorField {
 public:
  LindbladField(const LindbladModel& model, const GeneratorParams& params, bool nde_enabled);

  Eigen::Index state_dim() const override { return model_->basis().dim(); }
  Eigen::Index param_dim() const override { return layout_.total(); }
  void eval(const RVector& y, RVector& dy) const override;
  void vjp(const RVector& y, const RVector& w, RVector& y_bar, RVector& p_bar) const override;

  const SparseR& liouvillian() const { return a_; }

 private:
  const LindbladModel* model_;
  const GeneratorParams* params_;
  bool nde_;
  ParamLayout layout_;
  SparseR a_;
  RVector rate_grad_;  // d softplus / d theta_L
};

/// Matrix-form combined generator: L_phys[rho] + (nde ? L_NN[rho] : 0).
CMatrix combined_field(const LindbladModel& model, const GeneratorParams& params, bool nde_enabled,
                       const CMatrix& rho);

Trajectory evolve_model(const LindbladModel& model, const GeneratorParams& params, bool nde_enabled,
                        const DensityMatrix& rho0, std::span<const double> times, const IntegratorConfig& cfg = {});

/// Loss and gradient aligned with flatten(params).
LossAndGradient evolve_with_gradient(const LindbladModel& model, const GeneratorParams& params, bool nde_enabled,
                                     const DensityMatrix& rho0, std::span<const double> times,
                                     const CoordLoss& loss, const IntegratorConfig& cfg = {});

/// Central differences of the same loss, one fresh solve per evaluation.
RVector finite_diff_gradient(const LindbladModel& model, const GeneratorParams& params, bool nde_enabled,
                             const DensityMatrix& rho0, std::span<const double> times, const CoordLoss& loss,
                             const IntegratorConfig& cfg, double h);

}  // namespace lindbladfit
