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

#include "lindbladfit/field.hpp"

#include <cmath>

namespace lindbladfit {

namespace {

// w^T A y
double bilinear(const SparseR& a, const RVector& w, const RVector& y) {
  double acc = 0.0;
  for (Eigen::Index r = 0; r < a.outerSize(); ++r) {
    const double wr = w[r];
    if (wr == 0.0) continue;
    double row = 0.0;
    for (SparseR::InnerIterator it(a, r); it; ++it) row += it.value() * y[it.col()];
    acc += wr * row;
  }
  return acc;
}

}  // namespace

ParamLayout layout_of(const GeneratorParams& p) {
  return {p.theta_h.size(), p.theta_l.size(), p.phi ? p.phi->num_params() : 0};
}

RVector flatten(const GeneratorParams& p) {
  const ParamLayout lay = layout_of(p);
  RVector flat(lay.total());
  flat.head(lay.n_h) = p.theta_h;
  flat.segment(lay.l_offset(), lay.n_l) = p.theta_l;
  if (p.phi) flat.tail(lay.n_phi) = p.phi->flatten();
  return flat;
}

GeneratorParams unflatten(const RVector& flat, const GeneratorParams& like) {
  const ParamLayout lay = layout_of(like);
  if (flat.size() != lay.total()) throw InvalidArgument("flattened parameter vector has the wrong length");
  GeneratorParams p = like;
  p.theta_h = flat.head(lay.n_h);
  p.theta_l = flat.segment(lay.l_offset(), lay.n_l);
  if (p.phi) p.phi->assign(flat.tail(lay.n_phi));
  return p;
}

LindbladField::LindbladField(const LindbladModel& model, const GeneratorParams& params, bool nde_enabled)
    : model_(&model), params_(&params), nde_(nde_enabled), layout_(layout_of(params)) {
  if (static_cast<std::size_t>(params.theta_h.size()) != model.num_hamiltonian_params() ||
      static_cast<std::size_t>(params.theta_l.size()) != model.num_jumps()) {
    throw InvalidArgument("parameter block sizes do not match the model");
  }
  if (nde_ && !params.phi) throw InvalidArgument("neural term enabled but no network parameters given");
  if (params.phi) {
    params.phi->validate();
    if (params.phi->layers.front().w.cols() != model.basis().dim()) {
      throw InvalidArgument("network width does not match 4^N");
    }
  }
  a_ = model.basis().assemble(params.theta_h, params.gamma());
  rate_grad_ = params.theta_l.unaryExpr([](double t) {
    return t >= 0.0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
  });
}

void LindbladField::eval(const RVector& y, RVector& dy) const {
  dy.noalias() = a_ * y;
  if (nde_) dy += neural_field_coords(*params_->phi, y);
}

void LindbladField::vjp(const RVector& y, const RVector& w, RVector& y_bar, RVector& p_bar) const {
  y_bar.noalias() += a_.transpose() * w;
  const auto& basis = model_->basis();
  for (Eigen::Index k = 0; k < layout_.n_h; ++k) p_bar[k] += bilinear(basis.hamiltonian[static_cast<std::size_t>(k)], w, y);
  for (Eigen::Index a = 0; a < layout_.n_l; ++a) {
    p_bar[layout_.l_offset() + a] += rate_grad_[a] * bilinear(basis.dissipators[static_cast<std::size_t>(a)], w, y);
  }
  if (nde_) {
    neural_field_vjp(*params_->phi, y, w, y_bar, p_bar.segment(layout_.phi_offset(), layout_.n_phi));
  }
}

CMatrix combined_field(const LindbladModel& model, const GeneratorParams& params, bool nde_enabled,
                       const CMatrix& rho) {
  CMatrix out = model.generator().apply(params.theta_h, params.gamma(), rho);
  if (nde_enabled) {
    if (!params.phi) throw InvalidArgument("neural term enabled but no network parameters given");
    out += neural_field(*params.phi, rho);
  }
  return out;
}

Trajectory evolve_model(const LindbladModel& model, const GeneratorParams& params, bool nde_enabled,
                        const DensityMatrix& rho0, std::span<const double> times, const IntegratorConfig& cfg) {
  const LindbladField field(model, params, nde_enabled);
  return evolve(field, rho0, times, cfg);
}

LossAndGradient evolve_with_gradient(const LindbladModel& model, const GeneratorParams& params, bool nde_enabled,
                                     const DensityMatrix& rho0, std::span<const double> times,
                                     const CoordLoss& loss, const IntegratorConfig& cfg) {
  const LindbladField field(model, params, nde_enabled);
  return evolve_with_gradient(field, rho0, times, loss, cfg);
}

RVector finite_diff_gradient(const LindbladModel& model, const GeneratorParams& params, bool nde_enabled,
                             const DensityMatrix& rho0, std::span<const double> times, const CoordLoss& loss,
                             const IntegratorConfig& cfg, double h) {
  const auto f = [&](const RVector& flat) {
    const GeneratorParams p = unflatten(flat, params);
    const LindbladField field(model, p, nde_enabled);
    const RawSolution sol = integrate(field, to_pauli_coords(rho0), times, cfg);
    std::vector<PauliCoordinates> states;
    for (const auto& raw : sol.outputs) states.push_back(project_coords(raw));
    std::vector<RVector> grads(states.size(), RVector::Zero(field.state_dim()));
    return loss(states, grads);
  };
  return finite_diff_gradient(f, flatten(params), h);
}

}  // namespace lindbladfit
