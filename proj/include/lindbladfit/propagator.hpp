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

// Adaptive explicit Runge-Kutta 5(4) integration (Dormand-Prince pair with
// its 4th-order continuous extension and a PI step controller) and the
// discrete adjoint of the accepted-step sequence.

#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lindbladfit/pauli_coords.hpp"

namespace lindbladfit {

struct IntegratorConfig {
  double rtol = 1e-6;
  double atol = 1e-8;
  double dt0 = 1e-3;
  long max_steps = 100000;

  static constexpr const char* kMethod = "explicit RK5(4) Dormand-Prince, dense output, PI step control";
  void validate() const;
};

/// Autonomous vector field dy/dt = f(y; p) on a real state vector.
class VectorField {
 public:
  virtual ~VectorField() = default;
  virtual Eigen::Index state_dim() const = 0;
  virtual Eigen::Index param_dim() const { return 0; }
  virtual void eval(const RVector& y, RVector& dy) const = 0;
  /// y_bar += (df/dy)^T w and p_bar += (df/dp)^T w, evaluated at y.
  virtual void vjp(const RVector& y, const RVector& w, RVector& y_bar, RVector& p_bar) const;
};

/// Field given as a closure over density matrices; forward evaluation only.
class MatrixClosureField final : public VectorField {
 public:
  MatrixClosureField(int n, std::function<CMatrix(const CMatrix&)> f);
  Eigen::Index state_dim() const override { return dim_; }
  void eval(const RVector& y, RVector& dy) const override;

 private:
  Eigen::Index dim_;
  std::function<CMatrix(const CMatrix&)> f_;
};

namespace rk {
inline constexpr int kStages = 7;
double c(int i);
double a(int i, int j);
double b(int i);
double b_hat(int i);
/// Error weights b_i - b_hat_i.
double e(int i);
/// Continuous-extension weights: y(t + theta h) = y + h sum_i w_i(theta) k_i.
std::array<double, kStages> dense_weights(double theta);
}  // namespace rk

struct StepRecord {
  double t = 0.0;
  double h = 0.0;
  RVector y;                              // state at step start
  std::array<RVector, rk::kStages> k;     // stage derivatives (k[6] = f(y_next))
};

struct OutputLocation {
  static constexpr std::size_t kInitial = static_cast<std::size_t>(-1);
  std::size_t step = kInitial;  // accepted step containing the output, or kInitial for t == 0
  double theta = 0.0;
};

struct RawSolution {
  std::vector<double> times;
  std::vector<RVector> outputs;           // raw solver state at each requested time
  std::vector<OutputLocation> located;
  std::vector<StepRecord> steps;          // accepted steps (stages kept when recorded)
  long rejected_steps = 0;
  RVector y0;
};

/// Integrates from t = 0 through the ascending `times` (times[0] >= 0).
/// Throws IntegrationError on step underflow (dt < 1e-12), an exhausted
/// step budget, or a non-finite state.
RawSolution integrate(const VectorField& field, const RVector& y0, std::span<const double> times,
                      const IntegratorConfig& cfg);

/// Reverse pass through the accepted steps. `output_bars[o]` is dLoss/dy at
/// output o. Accumulates into y0_bar and p_bar (resized and zeroed here).
void integrate_adjoint(const VectorField& field, const RawSolution& sol, std::span<const RVector> output_bars,
                       RVector& y0_bar, RVector& p_bar);

struct Trajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> states;          // projected, one per time
  std::vector<PauliCoordinates> raw_coords;   // unprojected solver state
  std::vector<StepRecord> accepted_steps;
  long rejected_steps = 0;

  /// CSV: time followed by the Pauli coordinates of each projected state.
  std::string to_csv() const;
};

/// Evolves a density matrix under a field on Pauli coordinates; the
/// physicality projection is applied once per reported state.
Trajectory evolve(const VectorField& field, const DensityMatrix& rho0, std::span<const double> times,
                  const IntegratorConfig& cfg = {});

/// Loss over the projected Pauli coordinates of every reported state.
/// Must fill grads[o] = dLoss / d coords_o (pre-sized, zeroed).
using CoordLoss = std::function<double(std::span<const PauliCoordinates> states, std::span<RVector> grads)>;

struct LossAndGradient {
  double loss = 0.0;
  RVector grad;
  std::vector<PauliCoordinates> states;  // projected coordinates seen by the loss
};

/// Forward solve, loss, and reverse-mode gradient w.r.t. the field's
/// parameters through the recorded steps. Step sizes are held constant.
LossAndGradient evolve_with_gradient(const VectorField& field, const DensityMatrix& rho0,
                                     std::span<const double> times, const CoordLoss& loss,
                                     const IntegratorConfig& cfg = {});

/// Projected coordinates rho / Tr rho, in coordinate form y / (2^N y_0).
PauliCoordinates project_coords(const PauliCoordinates& raw);
/// Pulls a gradient w.r.t. projected coordinates back to the raw state.
RVector project_coords_vjp(const PauliCoordinates& raw, const RVector& grad_projected);

/// Central differences (f(x + h e_k) - f(x - h e_k)) / 2h per component.
RVector finite_diff_gradient(const std::function<double(const RVector&)>& f, const RVector& x, double h);

}  // namespace lindbladfit
