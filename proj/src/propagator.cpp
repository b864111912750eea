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

#include "lindbladfit/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace lindbladfit {

namespace rk {

namespace {

constexpr double kC[kStages] = {0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0};

constexpr double kA[kStages][kStages] = {
    {0, 0, 0, 0, 0, 0, 0},
    {1.0 / 5.0, 0, 0, 0, 0, 0, 0},
    {3.0 / 40.0, 9.0 / 40.0, 0, 0, 0, 0, 0},
    {44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0, 0, 0, 0},
    {19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0, 0, 0},
    {9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0, 0},
    {35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0}};

constexpr double kB[kStages] = {35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0};

constexpr double kE[kStages] = {71.0 / 57600.0,      0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0,
                                22.0 / 525.0, -1.0 / 40.0};

constexpr double kD[kStages] = {-12715105075.0 / 11282082432.0, 0.0,
                                87487479700.0 / 32700410799.0,  -10690763975.0 / 1880347072.0,
                                701980252875.0 / 199316789632.0, -1453857185.0 / 822651844.0,
                                69997945.0 / 29380423.0};

}  // namespace

double c(int i) { return kC[i]; }
double a(int i, int j) { return kA[i][j]; }
double b(int i) { return kB[i]; }
double b_hat(int i) { return kB[i] - kE[i]; }
double e(int i) { return kE[i]; }

std::array<double, kStages> dense_weights(double theta) {
  const double t1 = 1.0 - theta;
  const double coef_diff = theta - theta * t1 + 2.0 * theta * theta * t1;
  const double coef_d = theta * theta * t1 * t1;
  std::array<double, kStages> w{};
  for (int i = 0; i < kStages; ++i) w[static_cast<std::size_t>(i)] = coef_diff * kB[i] + coef_d * kD[i];
  w[0] += theta * t1 - theta * theta * t1;
  w[6] += -theta * theta * t1;
  return w;
}

}  // namespace rk

namespace {

constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 5.0;
constexpr double kBeta = 0.04;
constexpr double kExpo = 0.2 - 0.75 * kBeta;
constexpr double kMinStep = 1e-12;

RVector stage_input(const StepRecord& s, int i) {
  RVector z = s.y;
  for (int j = 0; j < i; ++j) {
    const double aij = rk::a(i, j);
    if (aij != 0.0) z.noalias() += (s.h * aij) * s.k[static_cast<std::size_t>(j)];
  }
  return z;
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(rtol > 0.0) || !(atol > 0.0)) throw InvalidArgument("integrator tolerances must be positive");
  if (!(dt0 > 0.0)) throw InvalidArgument("initial step must be positive");
  if (max_steps < 1) throw InvalidArgument("max_steps must be at least 1");
}

void VectorField::vjp(const RVector&, const RVector&, RVector&, RVector&) const {
  throw InvalidArgument("this vector field does not provide a vector-Jacobian product");
}

MatrixClosureField::MatrixClosureField(int n, std::function<CMatrix(const CMatrix&)> f)
    : dim_(static_cast<Eigen::Index>(num_pauli_coords(n))), f_(std::move(f)) {}

void MatrixClosureField::eval(const RVector& y, RVector& dy) const {
  dy = to_pauli_coords(f_(from_pauli_coords(y)));
}

RawSolution integrate(const VectorField& field, const RVector& y0, std::span<const double> times,
                      const IntegratorConfig& cfg) {
  cfg.validate();
  if (y0.size() != field.state_dim()) throw InvalidArgument("initial state does not match the field dimension");
  if (times.empty()) throw InvalidArgument("at least one output time is required");
  if (!(times[0] >= 0.0)) throw InvalidArgument("output times must be non-negative");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw InvalidArgument("output times must be strictly increasing");
  }

  RawSolution sol;
  sol.times.assign(times.begin(), times.end());
  sol.outputs.resize(times.size());
  sol.located.resize(times.size());
  sol.y0 = y0;

  std::size_t next = 0;
  while (next < times.size() && times[next] == 0.0) {
    sol.outputs[next] = y0;
    ++next;
  }
  if (next == times.size()) return sol;

  const double t_end = times.back();
  const Eigen::Index dim = y0.size();
  double t = 0.0;
  RVector y = y0;
  RVector k1(dim);
  field.eval(y, k1);
  double h = std::min(cfg.dt0, t_end);
  double err_old = 1e-4;
  bool last_rejected = false;
  bool last_nonfinite = false;
  long attempts = 0;

  StepRecord step;
  for (auto& k : step.k) k.resize(dim);
  RVector z(dim), y_new(dim), err_vec(dim);

  while (next < times.size()) {
    if (attempts++ >= cfg.max_steps) {
      throw IntegrationError("step budget exhausted (" + std::to_string(cfg.max_steps) + " steps) at t = " +
                             std::to_string(t));
    }
    bool lands_on_end = false;
    if (t + h >= t_end - 1e-14 * std::max(1.0, std::abs(t_end))) {
      h = t_end - t;
      lands_on_end = true;
    }
    if (h < kMinStep) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "step size underflow (dt = %.3g) at t = %.6g, |y| = %.3g%s", h, t, y.norm(),
                    last_nonfinite ? ", field not finite" : "");
      throw IntegrationError(buf);
    }

    step.t = t;
    step.h = h;
    step.y = y;
    step.k[0] = k1;
    for (int i = 1; i < rk::kStages; ++i) {
      z = y;
      for (int j = 0; j < i; ++j) {
        const double aij = rk::a(i, j);
        if (aij != 0.0) z.noalias() += (h * aij) * step.k[static_cast<std::size_t>(j)];
      }
      if (i == rk::kStages - 1) y_new = z;
      field.eval(z, step.k[static_cast<std::size_t>(i)]);
    }

    err_vec.setZero();
    for (int i = 0; i < rk::kStages; ++i) {
      if (rk::e(i) != 0.0) err_vec.noalias() += (h * rk::e(i)) * step.k[static_cast<std::size_t>(i)];
    }
    double acc = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double scale = cfg.atol + cfg.rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
      const double r = err_vec[i] / scale;
      acc += r * r;
    }
    double err = std::sqrt(acc / static_cast<double>(dim));
    last_nonfinite = !std::isfinite(err) || !y_new.allFinite();
    if (last_nonfinite) err = std::numeric_limits<double>::infinity();

    if (err <= 1.0) {
      const double t_new = lands_on_end ? t_end : t + h;
      const std::size_t step_index = sol.steps.size();
      while (next < times.size() && (times[next] <= t_new || (lands_on_end && next + 1 == times.size()))) {
        const double theta = std::clamp((times[next] - t) / h, 0.0, 1.0);
        const auto w = rk::dense_weights(theta);
        RVector out = y;
        for (int i = 0; i < rk::kStages; ++i) {
          if (w[static_cast<std::size_t>(i)] != 0.0) out.noalias() += (h * w[static_cast<std::size_t>(i)]) * step.k[static_cast<std::size_t>(i)];
        }
        sol.outputs[next] = std::move(out);
        sol.located[next] = {step_index, theta};
        ++next;
      }
      sol.steps.push_back(step);
      t = t_new;
      y = y_new;
      k1 = step.k[6];

      double factor = err == 0.0 ? kMaxFactor
                                 : kSafety * std::pow(err, -kExpo) * std::pow(err_old, kBeta);
      factor = std::clamp(factor, kMinFactor, kMaxFactor);
      if (last_rejected) factor = std::min(factor, 1.0);
      err_old = std::max(err, 1e-4);
      last_rejected = false;
      h *= factor;
    } else {
      ++sol.rejected_steps;
      const double factor = std::isfinite(err) ? std::max(kMinFactor, kSafety * std::pow(err, -0.2)) : kMinFactor;
      h *= std::min(factor, 1.0);
      last_rejected = true;
    }
  }
  return sol;
}

void integrate_adjoint(const VectorField& field, const RawSolution& sol, std::span<const RVector> output_bars,
                       RVector& y0_bar, RVector& p_bar) {
  if (output_bars.size() != sol.outputs.size()) throw InvalidArgument("one adjoint per output is required");
  const Eigen::Index dim = sol.y0.size();
  p_bar = RVector::Zero(field.param_dim());
  RVector y_bar = RVector::Zero(dim);

  // Outputs grouped by the step that produced them.
  std::vector<std::vector<std::size_t>> per_step(sol.steps.size());
  for (std::size_t o = 0; o < sol.located.size(); ++o) {
    if (sol.located[o].step == OutputLocation::kInitial) {
      y_bar += output_bars[o];
    } else {
      per_step[sol.located[o].step].push_back(o);
    }
  }

  std::array<RVector, rk::kStages> k_bar;
  RVector z_bar(dim);
  for (std::size_t n = sol.steps.size(); n-- > 0;) {
    const StepRecord& s = sol.steps[n];
    for (int i = 0; i < rk::kStages; ++i) k_bar[static_cast<std::size_t>(i)] = (s.h * rk::b(i)) * y_bar;
    for (std::size_t o : per_step[n]) {
      const auto w = rk::dense_weights(sol.located[o].theta);
      for (int i = 0; i < rk::kStages; ++i) k_bar[static_cast<std::size_t>(i)].noalias() += (s.h * w[static_cast<std::size_t>(i)]) * output_bars[o];
      y_bar += output_bars[o];
    }
    for (int i = rk::kStages - 1; i >= 0; --i) {
      const RVector& kb = k_bar[static_cast<std::size_t>(i)];
      if (kb.isZero(0.0)) continue;
      z_bar.setZero();
      field.vjp(stage_input(s, i), kb, z_bar, p_bar);
      y_bar += z_bar;
      for (int j = 0; j < i; ++j) {
        const double aij = rk::a(i, j);
        if (aij != 0.0) k_bar[static_cast<std::size_t>(j)].noalias() += (s.h * aij) * z_bar;
      }
    }
  }
  y0_bar = std::move(y_bar);
}

PauliCoordinates project_coords(const PauliCoordinates& raw) {
  const int n = qubits_from_coord_count(raw.size());
  const double trace = static_cast<double>(Eigen::Index{1} << n) * raw[0];
  if (!(std::abs(trace) > 1e-12)) throw IntegrationError("trajectory diverged: state trace is numerically zero");
  return raw / trace;
}

RVector project_coords_vjp(const PauliCoordinates& raw, const RVector& grad_projected) {
  const int n = qubits_from_coord_count(raw.size());
  const double trace = static_cast<double>(Eigen::Index{1} << n) * raw[0];
  RVector out = grad_projected / trace;
  out[0] -= grad_projected.dot(raw) / (trace * raw[0]);
  return out;
}

Trajectory evolve(const VectorField& field, const DensityMatrix& rho0, std::span<const double> times,
                  const IntegratorConfig& cfg) {
  RawSolution sol = integrate(field, to_pauli_coords(rho0), times, cfg);
  Trajectory traj;
  traj.times = std::move(sol.times);
  traj.rejected_steps = sol.rejected_steps;
  for (auto& raw : sol.outputs) {
    traj.states.push_back(project_physical(from_pauli_coords(raw)));
    traj.raw_coords.push_back(std::move(raw));
  }
  traj.accepted_steps = std::move(sol.steps);
  return traj;
}

std::string Trajectory::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < times.size(); ++i) {
    os << times[i];
    const PauliCoordinates c = to_pauli_coords(states[i]);
    for (Eigen::Index j = 0; j < c.size(); ++j) os << ',' << c[j];
    os << '\n';
  }
  return os.str();
}

LossAndGradient evolve_with_gradient(const VectorField& field, const DensityMatrix& rho0,
                                     std::span<const double> times, const CoordLoss& loss,
                                     const IntegratorConfig& cfg) {
  const RawSolution sol = integrate(field, to_pauli_coords(rho0), times, cfg);
  LossAndGradient out;
  out.states.reserve(sol.outputs.size());
  for (const auto& raw : sol.outputs) out.states.push_back(project_coords(raw));
  std::vector<RVector> grads(sol.outputs.size(), RVector::Zero(field.state_dim()));
  out.loss = loss(out.states, grads);
  std::vector<RVector> bars;
  bars.reserve(grads.size());
  for (std::size_t o = 0; o < grads.size(); ++o) bars.push_back(project_coords_vjp(sol.outputs[o], grads[o]));
  RVector y0_bar;
  integrate_adjoint(field, sol, bars, y0_bar, out.grad);
  return out;
}

RVector finite_diff_gradient(const std::function<double(const RVector&)>& f, const RVector& x, double h) {
  if (!(h > 0.0)) throw InvalidArgument("finite-difference step must be positive");
  RVector g(x.size());
  RVector xp = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    xp[k] = x[k] + h;
    const double fp = f(xp);
    xp[k] = x[k] - h;
    const double fm = f(xp);
    xp[k] = x[k];
    g[k] = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace lindbladfit
