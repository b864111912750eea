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

#include "lindbladfit/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <random>
#include <tuple>

namespace lindbladfit {

double relative_error(const RVector& truth, const RVector& est) {
  if (truth.size() != est.size()) throw InvalidArgument("relative_error: length mismatch");
  const double norm = truth.lpNorm<1>();
  if (!(norm > 0.0)) throw InvalidArgument("relative_error: reference has zero norm");
  return (truth - est).lpNorm<1>() / norm;
}

bool is_success(double eps) { return eps < kSuccessThreshold; }

namespace {

// Clamped, renormalized square root of a Hermitian positive matrix.
CMatrix clamped_sqrt(const CMatrix& m, double& clamped) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
  RVector ev = es.eigenvalues();
  for (auto& e : ev) {
    if (e < 0.0) {
      clamped += -e;
      e = 0.0;
    }
  }
  const double total = ev.sum();
  if (!(total > 0.0)) throw InvalidArgument("fidelity: state has no positive weight");
  ev /= total;
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

double fidelity(const CMatrix& a, const CMatrix& b, double* clamped) {
  if (a.rows() != b.rows() || a.rows() != a.cols() || b.rows() != b.cols()) throw InvalidArgument("fidelity: shape");
  if (max_abs(a - a.adjoint()) > 1e-8 || max_abs(b - b.adjoint()) > 1e-8) {
    throw InvalidArgument("fidelity: non-Hermitian input");
  }
  double c = 0.0;
  const CMatrix sa = clamped_sqrt(a, c);
  const CMatrix sb = clamped_sqrt(b, c);
  const CMatrix bb = sb * sb;
  const CMatrix inner = sa * bb * sa;
  Eigen::SelfAdjointEigenSolver<CMatrix> es((inner + inner.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
  double root = 0.0;
  for (double e : es.eigenvalues()) root += std::sqrt(std::max(e, 0.0));
  if (clamped) *clamped += c;
  return std::clamp(root * root, 0.0, 1.0);
}

GroundTruth truth_of(const TrueParams& t) { return {t.theta_h, t.gamma}; }

GeneratorParams params_of(const GroundTruth& t) { return {t.theta_h, raw_from_rates(t.gamma), std::nullopt}; }

std::vector<InfidelityRow> infidelity_curve(const ModelSpec& spec, const GroundTruth& truth,
                                            const GeneratorParams& est, bool est_nde,
                                            const std::vector<DensityMatrix>& rho0s, std::span<const double> window,
                                            int horizon_factor, double R, const IntegratorConfig& cfg) {
  if (horizon_factor < 1) throw InvalidArgument("horizon_factor must be >= 1");
  if (window.empty() || rho0s.empty()) throw InvalidArgument("infidelity_curve needs a window and initial states");
  const std::size_t J = window.size();
  const double t_max = window.back();
  const std::size_t rows = J * static_cast<std::size_t>(horizon_factor);
  std::vector<double> grid(rows);
  for (std::size_t k = 0; k < rows; ++k) grid[k] = static_cast<double>(k + 1) * t_max / static_cast<double>(J);

  const LindbladModel model(spec);
  const GeneratorParams true_params = params_of(truth);
  std::vector<std::vector<double>> per_state(rho0s.size());
  std::vector<std::exception_ptr> errors(rho0s.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t s = 0; s < static_cast<std::ptrdiff_t>(rho0s.size()); ++s) {
    try {
      const auto& rho0 = rho0s[static_cast<std::size_t>(s)];
      const Trajectory a = evolve_model(model, true_params, false, rho0, grid, cfg);
      const Trajectory b = evolve_model(model, est, est_nde, rho0, grid, cfg);
      auto& out = per_state[static_cast<std::size_t>(s)];
      out.resize(rows);
      for (std::size_t k = 0; k < rows; ++k) out[k] = 1.0 - fidelity(a.states[k].matrix(), b.states[k].matrix());
    } catch (...) {
      errors[static_cast<std::size_t>(s)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<InfidelityRow> table(rows);
  for (std::size_t k = 0; k < rows; ++k) {
    double sum = 0.0;
    for (const auto& ps : per_state) sum += ps[k];
    table[k] = {grid[k], grid[k] * R, sum / static_cast<double>(rho0s.size())};
  }
  return table;
}

void write_infidelity_csv(const std::filesystem::path& path, const std::vector<InfidelityRow>& rows, int n, double R) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << "t,t_R,mean_infidelity,N,R\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%d,%.17g\n", r.t, r.t_scaled, r.mean_infidelity, n, R);
    out << buf;
  }
}

std::pair<double, double> recovery_errors(const GroundTruth& truth, const GeneratorParams& est) {
  return {relative_error(truth.theta_h, est.theta_h), relative_error(truth.gamma, est.gamma())};
}

SeedOutcome run_seed(const ExperimentConfig& experiment, ProtocolConfig protocol, int index,
                     const SeedTrainer& trainer, const IntegratorConfig& cfg) {
  SeedOutcome o;
  o.index = index;
  try {
    Rng truth_rng = make_rng(experiment.seed, "truth", static_cast<std::uint64_t>(index));
    const TrueParams truth = sample_true_params(experiment, truth_rng);
    protocol.seed = substream_seed(experiment.seed, "protocol", static_cast<std::uint64_t>(index));
    ShotDataset ds = generate_dataset(truth.model, truth_of(truth), protocol, cfg);
    ds.R = experiment.R;
    ds.model_seed = experiment.seed;
    const GeneratorParams est = trainer(ds, truth, substream_seed(experiment.seed, "init", static_cast<std::uint64_t>(index)));
    std::tie(o.eps_h, o.eps_l) = recovery_errors(truth_of(truth), est);
    o.success_h = is_success(o.eps_h);
    o.success_l = is_success(o.eps_l);
  } catch (const std::exception& e) {
    o.failed = true;
    o.error = e.what();
    o.eps_h = o.eps_l = std::numeric_limits<double>::quiet_NaN();
  }
  return o;
}

SuccessRate success_rate(const ExperimentConfig& experiment, const ProtocolConfig& protocol, int n_seeds,
                         const SeedTrainer& trainer, const IntegratorConfig& cfg) {
  if (n_seeds < 1) throw InvalidArgument("n_seeds must be >= 1");
  experiment.validate();
  SuccessRate out;
  out.seeds.resize(static_cast<std::size_t>(n_seeds));
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n_seeds; ++i) out.seeds[static_cast<std::size_t>(i)] = run_seed(experiment, protocol, i, trainer, cfg);
  int sh = 0;
  int sl = 0;
  for (const auto& s : out.seeds) {
    sh += s.success_h;
    sl += s.success_l;
  }
  out.rate_h = static_cast<double>(sh) / n_seeds;
  out.rate_l = static_cast<double>(sl) / n_seeds;
  return out;
}

SubspaceSelector SubspaceSelector::parse(std::string_view text) {
  SubspaceSelector s;
  std::string t;
  for (char c : text) {
    if (c != '+' && c != ',' && c != ' ') t.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  std::size_t i = 0;
  while (i < t.size()) {
    if (t.compare(i, 3, "NDE") == 0) {
      s.nde = true;
      i += 3;
    } else if (t[i] == 'H') {
      s.h = true;
      ++i;
    } else if (t[i] == 'L') {
      s.l = true;
      ++i;
    } else {
      throw InvalidArgument("unknown subspace '" + std::string(text) + "'");
    }
  }
  if (!s.h && !s.l && !s.nde) throw InvalidArgument("empty subspace selector");
  return s;
}

std::string SubspaceSelector::str() const {
  std::string s;
  if (h) s += "H";
  if (l) s += "L";
  if (nde) s += s.empty() ? "NDE" : "+NDE";
  return s;
}

Eigen::Index SubspaceSelector::dimension(const ParamLayout& layout) const {
  return (h ? layout.n_h : 0) + (l ? layout.n_l : 0) + (nde ? layout.n_phi : 0);
}

bool SubspaceSelector::selects(const ParamLayout& layout, Eigen::Index i) const {
  if (i < layout.n_h) return h;
  if (i < layout.phi_offset()) return l;
  return nde;
}

std::pair<RVector, RVector> random_orthogonal_plane(const SubspaceSelector& sel, const ParamLayout& layout, Rng& rng) {
  if (sel.dimension(layout) < 2) throw InvalidArgument("selected subspace has fewer than 2 dimensions");
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&] {
    RVector v = RVector::Zero(layout.total());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (sel.selects(layout, i)) v[i] = normal(rng);
    }
    return v;
  };
  for (;;) {
    RVector v1 = draw();
    RVector v2 = draw();
    const double n1 = v1.norm();
    if (n1 < 1e-8) continue;
    v1 /= n1;
    v2 -= v1.dot(v2) * v1;
    const double n2 = v2.norm();
    if (n2 < 1e-8) continue;
    v2 /= n2;
    v2 -= v1.dot(v2) * v1;
    v2 /= v2.norm();
    return {v1, v2};
  }
}

void LandscapeScan::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << "alpha,beta,loss\n";
  char buf[256];
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    for (std::size_t k = 0; k < offsets.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", offsets[i], offsets[k],
                    loss(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)));
      out << buf;
    }
  }
}

LandscapeScan landscape_scan(const RVector& center, const RVector& v1, const RVector& v2, double radius, int grid_n,
                             const std::function<double(const RVector&)>& loss) {
  if (grid_n < 3 || grid_n % 2 == 0) throw InvalidArgument("grid_n must be odd and >= 3");
  if (!(radius >= 0.0)) throw InvalidArgument("radius must be non-negative");
  if (v1.size() != center.size() || v2.size() != center.size()) throw InvalidArgument("direction length mismatch");
  LandscapeScan scan{center, v1, v2, {}, RMatrix(grid_n, grid_n), {}};
  for (int i = 0; i < grid_n; ++i) scan.offsets.push_back(radius * (2.0 * i - (grid_n - 1)) / (grid_n - 1));
  const int cells = grid_n * grid_n;
#pragma omp parallel for schedule(dynamic)
  for (int c = 0; c < cells; ++c) {
    const int i = c / grid_n;
    const int k = c % grid_n;
    double value = std::numeric_limits<double>::quiet_NaN();
    try {
      value = loss(center + scan.offsets[static_cast<std::size_t>(i)] * v1 + scan.offsets[static_cast<std::size_t>(k)] * v2);
    } catch (const std::exception&) {
    }
    scan.loss(i, k) = value;
  }
  return scan;
}

std::vector<std::pair<double, double>> trajectory_projection(const std::vector<RVector>& snapshots,
                                                             const RVector& truth, const RVector& v1,
                                                             const RVector& v2) {
  std::vector<std::pair<double, double>> out;
  for (const auto& s : snapshots) {
    if (s.size() != truth.size() || v1.size() != truth.size() || v2.size() != truth.size()) {
      throw InvalidArgument("trajectory_projection: dimension mismatch");
    }
    const RVector d = s - truth;
    out.emplace_back(d.dot(v1), d.dot(v2));
  }
  return out;
}

void write_trajectory_csv(const std::filesystem::path& path, const std::vector<std::pair<double, double>>& points) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << "epoch,alpha,beta\n";
  char buf[256];
  for (std::size_t e = 0; e < points.size(); ++e) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", e, points[e].first, points[e].second);
    out << buf;
  }
}

}  // namespace lindbladfit
