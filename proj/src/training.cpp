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

#include "lindbladfit/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include "lindbladfit/io.hpp"

namespace lindbladfit {

Batch make_batch(const ShotDataset& ds, int state_id, int shot_index) {
  const auto& p = ds.protocol;
  if (state_id < 0 || state_id >= p.L || shot_index < 0 || shot_index >= p.M) {
    throw InvalidArgument("batch (state, shot) out of range");
  }
  Batch b{state_id, shot_index, {}};
  b.terms.reserve(static_cast<std::size_t>(p.J() * p.K));
  for (int j = 0; j < p.J(); ++j) {
    for (int k = 0; k < p.K; ++k) b.terms.push_back({j, &ds.records[ds.record_index(state_id, j, k, shot_index)]});
  }
  return b;
}

std::vector<Batch> make_epoch_batches(const ShotDataset& ds, Rng& rng) {
  ds.check_complete();
  std::vector<std::pair<int, int>> pairs;
  for (int s = 0; s < ds.protocol.L; ++s) {
    for (int m = 0; m < ds.protocol.M; ++m) pairs.emplace_back(s, m);
  }
  std::shuffle(pairs.begin(), pairs.end(), rng);
  std::vector<Batch> out;
  out.reserve(pairs.size());
  for (const auto& [s, m] : pairs) out.push_back(make_batch(ds, s, m));
  return out;
}

RVector expand_rates(const ParamLayout& layout, const BlockRates& rates) {
  RVector lrs(layout.total());
  lrs.head(layout.n_h).setConstant(rates.h);
  lrs.segment(layout.l_offset(), layout.n_l).setConstant(rates.l);
  lrs.tail(layout.n_phi).setConstant(rates.nde);
  return lrs;
}

void AdamState::reset() {
  m.setZero();
  v.setZero();
  step = 0;
}

void adam_step(AdamState& state, RVector& params, const RVector& grad, const RVector& lrs, const ParamLayout* layout) {
  if (grad.size() != params.size() || lrs.size() != params.size() || state.m.size() != params.size()) {
    throw InvalidArgument("adam_step: misaligned vectors");
  }
  for (Eigen::Index i = 0; i < grad.size(); ++i) {
    if (!std::isfinite(grad[i])) {
      std::string block = "?";
      if (layout) block = i < layout->n_h ? "H" : (i < layout->phi_offset() ? "L" : "NDE");
      throw TrainingError("non-finite gradient at coordinate " + std::to_string(i) + " (block " + block +
                          ") on optimizer step " + std::to_string(state.step + 1));
    }
  }
  ++state.step;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
  state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    if (lrs[i] == 0.0) continue;
    const double mh = state.m[i] / c1;
    const double vh = state.v[i] / c2;
    params[i] -= lrs[i] * mh / (std::sqrt(vh) + state.eps);
  }
}

namespace {

double batch_scale(const Batch& batch, const NllOptions& opt) {
  return opt.mean ? 1.0 / static_cast<double>(batch.terms.size()) : 1.0;
}

const std::vector<double>& times_of(const ShotDataset& ds) { return ds.protocol.times; }

double min_eigenvalue_of(std::span<const PauliCoordinates> states) {
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& x : states) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(from_pauli_coords(x), Eigen::EigenvaluesOnly);
    lo = std::min(lo, es.eigenvalues().minCoeff());
  }
  return lo;
}

}  // namespace

double nll_loss(const GeneratorParams& params, const LindbladModel& model, const ShotDataset& ds, const Batch& batch,
                const NllOptions& opt) {
  if (batch.terms.empty()) throw InvalidArgument("empty batch");
  const Trajectory traj = evolve_model(model, params, opt.nde_enabled,
                                       product_eigenstate(ds.initial_states[static_cast<std::size_t>(batch.state_id)]),
                                       times_of(ds), opt.integrator);
  std::vector<PauliCoordinates> coords;
  for (const auto& s : traj.states) coords.push_back(to_pauli_coords(s));
  double loss = batch_nll(coords, batch.terms, {}) * batch_scale(batch, opt);
  if (opt.nde_enabled && params.phi) loss += l2_penalty(*params.phi, opt.l2_lambda);
  return loss;
}

BatchEvaluation nll_loss_and_grad(const GeneratorParams& params, const LindbladModel& model, const ShotDataset& ds,
                                  const Batch& batch, const NllOptions& opt) {
  if (batch.terms.empty()) throw InvalidArgument("empty batch");
  const double scale = batch_scale(batch, opt);
  const CoordLoss loss = [&](std::span<const PauliCoordinates> states, std::span<RVector> grads) {
    const double l = batch_nll(states, batch.terms, grads);
    if (scale != 1.0) {
      for (auto& g : grads) g *= scale;
    }
    return l * scale;
  };
  LossAndGradient lg =
      evolve_with_gradient(model, params, opt.nde_enabled,
                           product_eigenstate(ds.initial_states[static_cast<std::size_t>(batch.state_id)]),
                           times_of(ds), loss, opt.integrator);
  BatchEvaluation out{lg.loss, std::move(lg.grad), min_eigenvalue_of(lg.states)};
  if (opt.nde_enabled && params.phi && opt.l2_lambda > 0.0) {
    out.loss += l2_penalty(*params.phi, opt.l2_lambda);
    const ParamLayout layout = layout_of(params);
    out.grad.tail(layout.n_phi) += 2.0 * opt.l2_lambda * params.phi->flatten();
  }
  return out;
}

double dataset_nll(const GeneratorParams& params, const LindbladModel& model, const ShotDataset& ds, bool nde_enabled,
                   const IntegratorConfig& cfg) {
  double total = 0.0;
  const auto& p = ds.protocol;
  const std::size_t per_state = static_cast<std::size_t>(p.J() * p.K * p.M);
  if (ds.records.size() != per_state * static_cast<std::size_t>(p.L)) throw DataError("dataset incomplete");
  for (int s = 0; s < p.L; ++s) {
    const Trajectory traj =
        evolve_model(model, params, nde_enabled, product_eigenstate(ds.initial_states[static_cast<std::size_t>(s)]),
                     p.times, cfg);
    std::vector<PauliCoordinates> coords;
    for (const auto& st : traj.states) coords.push_back(to_pauli_coords(st));
    std::vector<LikelihoodTerm> terms;
    terms.reserve(per_state);
    for (int j = 0; j < p.J(); ++j) {
      const std::size_t base = ds.record_index(s, j, 0, 0);
      for (std::size_t r = base; r < base + static_cast<std::size_t>(p.K * p.M); ++r) terms.push_back({j, &ds.records[r]});
    }
    total += batch_nll(coords, terms, {});
  }
  return total;
}

GeneratorParams init_variational_params(const ModelSpec& spec, Rng& rng) {
  spec.validate();
  std::uniform_real_distribution<double> coupling(-1.0, 1.0);
  std::uniform_real_distribution<double> rate(0.2, 1.0);
  GeneratorParams p;
  p.theta_h.resize(static_cast<Eigen::Index>(spec.hamiltonian.num_params()));
  for (auto& v : p.theta_h) v = coupling(rng);
  RVector gamma(static_cast<Eigen::Index>(spec.dissipator.num_jumps()));
  for (auto& v : gamma) v = rate(rng);
  p.theta_l = raw_from_rates(gamma);
  return p;
}

void TrainingConfig::validate() const {
  integrator.validate();
  for (int e : {main_epochs, fine_tune_epochs, nde_epochs, nde_off_epochs, residual_epochs}) {
    if (e < 0) throw InvalidArgument("epoch counts must be non-negative");
  }
  for (double r : {lr, fine_tune_lr_slow, fine_tune_lr_fast, lr_nde, residual_lr, l2_lambda}) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw InvalidArgument("learning rates and L2 weight must be non-negative");
  }
  if (fine_tune_window < 1) throw InvalidArgument("fine_tune_window must be >= 1");
}

void TrainingRun::write_loss_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << "epoch,phase,mean_loss,grad_norm,min_eigenvalue_seen\n";
  char buf[256];
  for (const auto& e : epochs) {
    std::snprintf(buf, sizeof buf, "%d,%s,%.17g,%.17g,%.17g\n", e.epoch, e.phase.c_str(), e.mean_loss, e.grad_norm,
                  e.min_eigenvalue);
    out << buf;
  }
}

void TrainingRun::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  write_loss_csv(dir / "loss.csv");
  for (std::size_t k = 0; k < snapshots.size(); ++k) {
    write_json_file(dir / ("params_epoch_" + std::to_string(k) + ".json"), params_to_json(snapshots[k]));
  }
  json fin = params_to_json(final_params);
  fin["nde_enabled"] = final_nde_enabled;
  write_json_file(dir / "final_params.json", fin);
  json phases_j = json::array();
  for (const auto& p : phases) {
    phases_j.push_back({{"name", p.phase.name},
                        {"first_epoch", p.first_epoch},
                        {"epochs", p.phase.epochs},
                        {"lr_H", p.phase.lr_h},
                        {"lr_L", p.phase.lr_l},
                        {"lr_NDE", p.phase.lr_nde},
                        {"nde_enabled", p.phase.nde_enabled},
                        {"l2_lambda", p.phase.l2_lambda},
                        {"reset_optimizer", p.phase.reset_optimizer_on_entry},
                        {"moment_norm_before_reset", p.moment_norm_before_reset},
                        {"moment_norm_on_entry", p.moment_norm_on_entry},
                        {"swapped", p.swapped},
                        {"trigger_improvement", p.trigger_improvement}});
  }
  write_json_file(dir / "phases.json", json{{"init_loss", init_loss},
                                            {"fine_tuned", fine_tuned},
                                            {"final_nde_enabled", final_nde_enabled},
                                            {"phases", phases_j}});
  std::ofstream(dir / "run.log") << "wall_seconds " << wall_seconds << '\n';
}

namespace {

class Trainer {
 public:
  Trainer(const ShotDataset& ds, const ModelSpec& spec, GeneratorParams init, const TrainingConfig& cfg)
      : ds_(ds), model_(spec), cfg_(cfg), shuffle_(make_rng(cfg.seed, "shuffle", 0)), params_(std::move(init)) {
    cfg.validate();
    ds.check_complete();
    if (ds.num_qubits() != spec.num_qubits()) throw InvalidArgument("dataset and model disagree on N");
    if (params_.theta_h.size() != static_cast<Eigen::Index>(spec.hamiltonian.num_params()) ||
        params_.theta_l.size() != static_cast<Eigen::Index>(spec.dissipator.num_jumps())) {
      throw InvalidArgument("initial parameters do not match the model");
    }
    adam_ = AdamState(layout_of(params_).total());
    start_ = std::chrono::steady_clock::now();
  }

  void initialize(bool nde_enabled, double l2) {
    check_rates();
    run_.snapshots.push_back(params_);
    if (cfg_.evaluate_init_loss) {
      const NllOptions opt{nde_enabled, l2, cfg_.mean_loss, cfg_.integrator};
      double sum = 0.0;
      int count = 0;
      for (int s = 0; s < ds_.protocol.L; ++s) {
        for (int m = 0; m < ds_.protocol.M; ++m) {
          sum += nll_loss(params_, model_, ds_, make_batch(ds_, s, m), opt);
          ++count;
        }
      }
      run_.init_loss = sum / count;
    }
  }

  void phase(const CurriculumPhase& ph, bool swapped = false, double trigger = 0.0) {
    const double before = moment_norm();
    if (ph.reset_optimizer_on_entry) adam_.reset();
    PhaseRecord rec{ph, static_cast<int>(run_.epochs.size()) + 1, swapped, before, moment_norm(), trigger};
    run_.phases.push_back(rec);
    const ParamLayout layout = layout_of(params_);
    const RVector lrs = expand_rates(layout, {ph.lr_h, ph.lr_l, ph.nde_enabled ? ph.lr_nde : 0.0});
    const NllOptions opt{ph.nde_enabled, ph.nde_enabled ? ph.l2_lambda : 0.0, cfg_.mean_loss, cfg_.integrator};
    for (int e = 0; e < ph.epochs; ++e) {
      const auto batches = make_epoch_batches(ds_, shuffle_);
      double loss_sum = 0.0;
      double grad_sum = 0.0;
      double min_eig = std::numeric_limits<double>::infinity();
      for (const auto& b : batches) {
        const BatchEvaluation ev = nll_loss_and_grad(params_, model_, ds_, b, opt);
        if (!std::isfinite(ev.loss)) throw TrainingError("non-finite loss in phase " + ph.name);
        loss_sum += ev.loss;
        grad_sum += ev.grad.norm();
        min_eig = std::min(min_eig, ev.min_eigenvalue);
        RVector flat = flatten(params_);
        adam_step(adam_, flat, ev.grad, lrs, &layout);
        params_ = unflatten(flat, params_);
      }
      const double nb = static_cast<double>(batches.size());
      run_.epochs.push_back({static_cast<int>(run_.epochs.size()) + 1, ph.name, loss_sum / nb, grad_sum / nb, min_eig});
      check_rates();
      run_.snapshots.push_back(params_);
    }
  }

  /// Relative loss improvement over the last fine_tune_window epochs.
  double recent_improvement(std::size_t phase_first_epoch) const {
    std::vector<double> hist;
    if (phase_first_epoch >= 2) {
      hist.push_back(run_.epochs[phase_first_epoch - 2].mean_loss);
    } else if (cfg_.evaluate_init_loss) {
      hist.push_back(run_.init_loss);
    }
    for (std::size_t i = phase_first_epoch - 1; i < run_.epochs.size(); ++i) hist.push_back(run_.epochs[i].mean_loss);
    if (hist.size() < 2) return 0.0;
    const std::size_t w = static_cast<std::size_t>(cfg_.fine_tune_window);
    const double ref = hist[hist.size() - 1 >= w ? hist.size() - 1 - w : 0];
    return (ref - hist.back()) / std::abs(ref);
  }

  void fine_tune(const std::string& label1, const std::string& label2) {
    const double improvement = recent_improvement(static_cast<std::size_t>(run_.phases.back().first_epoch));
    const bool go = cfg_.fine_tune == FineTune::Always ||
                    (cfg_.fine_tune == FineTune::Auto && improvement > cfg_.fine_tune_threshold);
    if (!go) return;
    run_.fine_tuned = true;
    const bool swap = params_.gamma().lpNorm<1>() > params_.theta_h.lpNorm<1>();
    CurriculumPhase ft1{label1, cfg_.fine_tune_epochs, cfg_.fine_tune_lr_slow, cfg_.fine_tune_lr_fast, 0.0, false, 0.0, true};
    if (swap) std::swap(ft1.lr_h, ft1.lr_l);
    phase(ft1, swap, improvement);
    phase({label2, cfg_.fine_tune_epochs, cfg_.fine_tune_lr_slow, cfg_.fine_tune_lr_slow, 0.0, false, 0.0, true});
  }

  TrainingRun finish(bool nde_enabled) {
    run_.final_params = params_;
    run_.final_nde_enabled = nde_enabled;
    run_.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    return std::move(run_);
  }

  GeneratorParams& params() { return params_; }
  void resize_optimizer() { adam_ = AdamState(layout_of(params_).total()); }

 private:
  double moment_norm() const { return std::sqrt(adam_.m.squaredNorm() + adam_.v.squaredNorm()); }

  void check_rates() const {
    const RVector g = params_.gamma();
    if (!(g.array() > 0.0).all()) throw TrainingError("a dissipative rate left the positive domain");
  }

  const ShotDataset& ds_;
  LindbladModel model_;
  const TrainingConfig& cfg_;
  Rng shuffle_;
  GeneratorParams params_;
  AdamState adam_;
  TrainingRun run_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

TrainingRun run_vanilla_curriculum(const ShotDataset& ds, const ModelSpec& spec, const GeneratorParams& init,
                                   const TrainingConfig& cfg) {
  if (init.phi) throw InvalidArgument("vanilla curriculum takes no network parameters");
  Trainer t(ds, spec, init, cfg);
  t.initialize(false, 0.0);
  t.phase({"1", cfg.main_epochs, cfg.lr, cfg.lr, 0.0, false, 0.0, true});
  t.fine_tune("FT1", "FT2");
  return t.finish(false);
}

TrainingRun run_nde_curriculum(const ShotDataset& ds, const ModelSpec& spec, const GeneratorParams& init,
                               const MlpParams& init_phi, const TrainingConfig& cfg) {
  init_phi.validate();
  const auto widths = init_phi.widths();
  if (widths.front() != static_cast<Eigen::Index>(num_pauli_coords(spec.num_qubits()))) {
    throw InvalidArgument("network width does not match the model's 4^N coordinates");
  }
  GeneratorParams start = init;
  start.phi = init_phi;
  Trainer t(ds, spec, start, cfg);
  t.initialize(true, cfg.l2_lambda);
  t.phase({"A", cfg.nde_epochs, cfg.lr, cfg.lr, cfg.lr_nde, true, cfg.l2_lambda, true});
  t.phase({"B", cfg.nde_off_epochs, cfg.lr, cfg.lr, 0.0, false, 0.0, true});
  t.fine_tune("C", "C");
  if (cfg.residual_phi) {
    t.phase({"R", cfg.residual_epochs, 0.0, 0.0, cfg.residual_lr, true, cfg.l2_lambda, true});
    return t.finish(true);
  }
  return t.finish(false);
}

}  // namespace lindbladfit
