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

// Command-line front end: gen-data, train, eval, landscape, sweep.

#include <fcntl.h>
#include <sys/file.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>

#include "lindbladfit/config.hpp"

namespace fs = std::filesystem;
using namespace lindbladfit;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kDataError = 3;
constexpr int kTrainingError = 4;

struct ExitError {
  int code;
  std::string message;
};

[[noreturn]] void fail(int code, const std::string& message) { throw ExitError{code, message}; }

struct Flags {
  std::string config;
  std::string dataset;
  std::string out;
  std::optional<std::uint64_t> seed;
  int workers = 0;
  std::string subspace;
  std::string epoch;
  std::optional<double> radius;
  std::optional<int> grid;
};

RunConfig resolve_config(const Flags& f) {
  if (f.config.empty()) fail(kConfigError, "--config is required");
  RunConfig cfg;
  try {
    cfg = load_config(f.config);
    if (f.seed) cfg.experiment.seed = *f.seed;
    if (!f.out.empty()) cfg.output_dir = f.out;
    cfg.validate();
  } catch (const Error& e) {
    fail(kConfigError, std::string("config: ") + e.what());
  }
  return cfg;
}

void write_inputs(const fs::path& dir, const std::string& dataset) {
  write_json_file(dir / "inputs.json", json{{"dataset", fs::absolute(dataset).string()}});
}

std::string dataset_from(const Flags& f, const fs::path& dir) {
  if (!f.dataset.empty()) return f.dataset;
  if (fs::exists(dir / "inputs.json")) return read_json_file(dir / "inputs.json").at("dataset").get<std::string>();
  fail(kConfigError, "--dataset is required");
}

ShotDataset load_dataset(const std::string& path) {
  try {
    return read_dataset(path);
  } catch (const Error& e) {
    fail(kConfigError, std::string("dataset: ") + e.what());
  }
}

void check_compatible(const RunConfig& cfg, const ShotDataset& ds) {
  const auto& h = ds.model.hamiltonian;
  if (h.n != cfg.experiment.n) {
    fail(kConfigError, "dataset has N=" + std::to_string(h.n) + " but the config asks for N=" +
                           std::to_string(cfg.experiment.n));
  }
  if (h.family != cfg.experiment.family || ds.model.dissipator.family != cfg.experiment.dissipator) {
    fail(kConfigError, "dataset model (" + to_string(h.family) + ", " + to_string(ds.model.dissipator.family) +
                           ") does not match the config");
  }
}

void print_errors(const GroundTruth& truth, const GeneratorParams& est) {
  const auto [eh, el] = recovery_errors(truth, est);
  std::printf("eps_H=%.6g eps_L=%.6g success_H=%d success_L=%d\n", eh, el, is_success(eh), is_success(el));
}

int cmd_gen_data(const Flags& f) {
  const RunConfig cfg = resolve_config(f);
  const fs::path out = cfg.output_dir;
  const SeedPlan seeds = seed_plan(cfg.experiment.seed, 0);
  try {
    fs::create_directories(out);
    Rng truth_rng(seeds.truth);
    const TrueParams truth = sample_true_params(cfg.experiment, truth_rng);
    ProtocolConfig protocol = cfg.protocol;
    protocol.seed = seeds.protocol;
    ShotDataset ds = generate_dataset(truth.model, truth_of(truth), protocol, cfg.training.integrator);
    ds.R = cfg.experiment.R;
    ds.model_seed = cfg.experiment.seed;
    write_dataset(ds, out / "dataset.jsonl");
    json t = truth_to_json(truth_of(truth));
    t["model"] = model_to_json(truth.model, cfg.experiment.R, cfg.experiment.seed);
    write_json_file(out / "truth.json", t);
    write_json_file(out / "config.json", config_to_json(cfg));
    std::printf("wrote %zu records to %s\n", ds.records.size(), (out / "dataset.jsonl").c_str());
  } catch (const Error& e) {
    fail(kDataError, std::string("generation failed: ") + e.what());
  } catch (const fs::filesystem_error& e) {
    fail(kDataError, e.what());
  }
  return kOk;
}

int cmd_train(const Flags& f) {
  const RunConfig cfg = resolve_config(f);
  const fs::path out = cfg.output_dir;
  const std::string dataset = dataset_from(f, out);
  const ShotDataset ds = load_dataset(dataset);
  check_compatible(cfg, ds);
  if (!ds.complete()) fail(kConfigError, "dataset is incomplete");
  const SeedPlan seeds = seed_plan(cfg.experiment.seed, 0);
  TrainingRun run;
  try {
    run = train(cfg, ds, ds.model, seeds.init);
  } catch (const InvalidArgument& e) {
    fail(kConfigError, e.what());
  } catch (const DataError& e) {
    fail(kConfigError, e.what());
  } catch (const Error& e) {
    fail(kTrainingError, std::string("training aborted: ") + e.what());
  }
  fs::create_directories(out);
  write_json_file(out / "config.json", config_to_json(cfg));
  write_inputs(out, dataset);
  run.write(out);
  std::printf("trained %d epochs, final mean loss %.6g\n", run.total_epochs(),
              run.epochs.empty() ? run.init_loss : run.epochs.back().mean_loss);
  if (ds.truth) print_errors(*ds.truth, run.final_params);
  return kOk;
}

json final_params_doc(const fs::path& dir) {
  const fs::path p = dir / "final_params.json";
  if (!fs::exists(p)) fail(kConfigError, "no final_params.json in " + dir.string());
  return read_json_file(p);
}

RunConfig run_config(const Flags& f, const fs::path& dir) {
  Flags g = f;
  if (g.config.empty()) g.config = (dir / "config.json").string();
  if (g.out.empty()) g.out = dir.string();
  return resolve_config(g);
}

int cmd_eval(const Flags& f) {
  if (f.out.empty()) fail(kConfigError, "--out (the run directory) is required");
  const fs::path dir = f.out;
  const json fin = final_params_doc(dir);
  const RunConfig cfg = run_config(f, dir);
  const ShotDataset ds = load_dataset(dataset_from(f, dir));
  check_compatible(cfg, ds);
  if (!ds.truth) fail(kConfigError, "dataset carries no ground truth to evaluate against");
  const GeneratorParams est = params_from_json(fin);
  const bool nde = fin.value("nde_enabled", false);
  try {
    const auto [eh, el] = recovery_errors(*ds.truth, est);
    write_json_file(dir / "eps.json", json{{"eps_H", eh},
                                           {"eps_L", el},
                                           {"success_H", is_success(eh)},
                                           {"success_L", is_success(el)},
                                           {"nde_enabled", nde}});
    std::vector<DensityMatrix> rho0;
    for (const auto& s : ds.initial_states) rho0.push_back(product_eigenstate(s));
    const double R = ds.R.value_or(cfg.experiment.R);
    const auto rows = infidelity_curve(ds.model, *ds.truth, est, nde, rho0, ds.protocol.times,
                                       cfg.evaluation.horizon_factor, R, cfg.training.integrator);
    write_infidelity_csv(dir / "infidelity.csv", rows, ds.num_qubits(), R);
    print_errors(*ds.truth, est);
  } catch (const Error& e) {
    fail(kTrainingError, std::string("evaluation failed: ") + e.what());
  }
  return kOk;
}

int cmd_landscape(const Flags& f) {
  if (f.out.empty()) fail(kConfigError, "--out is required");
  const fs::path dir = f.out;
  const RunConfig cfg = run_config(f, dir);
  const ShotDataset ds = load_dataset(dataset_from(f, dir));
  check_compatible(cfg, ds);
  EvaluationOptions ev = cfg.evaluation;
  if (!f.subspace.empty()) ev.landscape_subspace = f.subspace;
  if (!f.epoch.empty()) ev.landscape_epoch = f.epoch;
  if (f.radius) ev.landscape_radius = *f.radius;
  if (f.grid) ev.landscape_grid = *f.grid;
  const SeedPlan seeds = seed_plan(cfg.experiment.seed, 0);

  GeneratorParams center;
  std::vector<RVector> snapshots;
  GeneratorParams like;
  const bool have_run = fs::exists(dir / "params_epoch_0.json");
  if (ev.landscape_epoch == "init" && !have_run) {
    center = initial_params(cfg, ds.model, seeds.init);
  } else {
    fs::path p;
    if (ev.landscape_epoch == "init") {
      p = dir / "params_epoch_0.json";
    } else if (ev.landscape_epoch == "final") {
      p = dir / "final_params.json";
    } else {
      p = dir / ("params_epoch_" + ev.landscape_epoch + ".json");
    }
    if (!fs::exists(p)) fail(kConfigError, "no parameters for epoch '" + ev.landscape_epoch + "'");
    center = params_from_json(read_json_file(p));
  }
  for (int k = 0; have_run && fs::exists(dir / ("params_epoch_" + std::to_string(k) + ".json")); ++k) {
    snapshots.push_back(flatten(params_from_json(read_json_file(dir / ("params_epoch_" + std::to_string(k) + ".json")))));
  }

  SubspaceSelector sel;
  try {
    sel = SubspaceSelector::parse(ev.landscape_subspace);
  } catch (const Error& e) {
    fail(kConfigError, e.what());
  }
  if (sel.nde && !center.phi) fail(kConfigError, "subspace " + sel.str() + " needs a network; this run has none");
  const ParamLayout layout = layout_of(center);
  if (sel.dimension(layout) < 2) fail(kConfigError, "subspace " + sel.str() + " has fewer than 2 dimensions");
  if (ev.landscape_grid < 3 || ev.landscape_grid % 2 == 0) fail(kConfigError, "grid must be odd and >= 3");

  Rng dir_rng(seeds.directions);
  const auto [v1, v2] = random_orthogonal_plane(sel, layout, dir_rng);
  std::uniform_int_distribution<int> pick_state(0, ds.protocol.L - 1), pick_shot(0, ds.protocol.M - 1);
  const int state = pick_state(dir_rng);
  const int shot = pick_shot(dir_rng);
  if (!ds.complete()) fail(kConfigError, "dataset is incomplete");
  const LindbladModel model(ds.model);
  const Batch batch = make_batch(ds, state, shot);
  const bool nde = center.phi.has_value();
  NllOptions opt{nde, nde ? cfg.training.l2_lambda : 0.0, cfg.training.mean_loss, cfg.training.integrator};
  const auto loss = [&](const RVector& x) {
    const GeneratorParams p = unflatten(x, center);
    if (ev.landscape_full_data) return dataset_nll(p, model, ds, nde, cfg.training.integrator);
    return nll_loss(p, model, ds, batch, opt);
  };
  fs::create_directories(dir);
  LandscapeScan scan = landscape_scan(flatten(center), v1, v2, ev.landscape_radius, ev.landscape_grid, loss);
  scan.tag = ev.landscape_epoch;
  scan.write_csv(dir / "landscape.csv");
  write_json_file(dir / "landscape.json", json{{"subspace", sel.str()},
                                               {"epoch", ev.landscape_epoch},
                                               {"radius", ev.landscape_radius},
                                               {"grid", ev.landscape_grid},
                                               {"batch_state", state},
                                               {"batch_shot", shot},
                                               {"full_data", ev.landscape_full_data},
                                               {"v1", vector_to_json(v1)},
                                               {"v2", vector_to_json(v2)}});
  if (!snapshots.empty() && ds.truth) {
    GeneratorParams truth = params_of(*ds.truth);
    if (center.phi) {
      truth.phi = *center.phi;
      truth.phi->assign(RVector::Zero(center.phi->num_params()));
    }
    write_trajectory_csv(dir / "trajectory.csv", trajectory_projection(snapshots, flatten(truth), v1, v2));
  }
  std::printf("scanned %dx%d grid on subspace %s\n", ev.landscape_grid, ev.landscape_grid, sel.str().c_str());
  return kOk;
}

// ---- sweep ----

struct SweepJob {
  ExperimentConfig experiment;
  int seed_index = 0;
  fs::path dir;
};

std::string format_ratio(double r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", r);
  return buf;
}

std::vector<SweepJob> sweep_jobs(const RunConfig& cfg, const fs::path& out) {
  std::vector<SweepJob> jobs;
  const SweepGrid& g = *cfg.sweep;
  for (auto fam : g.families) {
    for (auto dis : g.dissipators) {
      for (double r : g.ratios) {
        for (int n : g.sizes) {
          ExperimentConfig e{fam, dis, n, r, cfg.experiment.seed};
          const std::string cell = to_string(fam) + "_" + to_string(dis) + "_R" + format_ratio(r) + "_N" + std::to_string(n);
          for (int s = 0; s < cfg.n_seeds; ++s) {
            jobs.push_back({e, s, out / "cells" / cell / ("seed_" + std::to_string(s))});
          }
        }
      }
    }
  }
  return jobs;
}

json outcome_to_json(const SeedOutcome& o) {
  return {{"seed", o.index},       {"eps_H", o.failed ? json(nullptr) : json(o.eps_h)},
          {"eps_L", o.failed ? json(nullptr) : json(o.eps_l)},
          {"success_H", o.success_h}, {"success_L", o.success_l},
          {"failed", o.failed},       {"error", o.error}};
}

// Runs one job in the current process; returns 0 when result.json exists afterwards.
int run_job(const RunConfig& cfg, const SweepJob& job) {
  fs::create_directories(job.dir);
  const int fd = ::open((job.dir / ".lock").c_str(), O_CREAT | O_RDWR, 0644);
  if (fd < 0 || ::flock(fd, LOCK_EX | LOCK_NB) != 0) {
    std::fprintf(stderr, "skipping locked run directory %s\n", job.dir.c_str());
    if (fd >= 0) ::close(fd);
    return 1;
  }
  RunConfig cell = cfg;
  cell.experiment = job.experiment;
  cell.sweep.reset();
  const SeedOutcome o = run_seed(job.experiment, cfg.protocol, job.seed_index, trainer_for(cell), cfg.training.integrator);
  if (o.failed) std::fprintf(stderr, "%s: %s\n", job.dir.c_str(), o.error.c_str());
  const fs::path tmp = job.dir / "result.json.tmp";
  write_json_file(tmp, outcome_to_json(o));
  fs::rename(tmp, job.dir / "result.json");
  ::flock(fd, LOCK_UN);
  ::close(fd);
  return 0;
}

int cmd_sweep(const Flags& f) {
  const RunConfig cfg = resolve_config(f);
  if (!cfg.sweep) fail(kConfigError, "config has no [sweep] table");
  const fs::path out = cfg.output_dir;
  fs::create_directories(out);
  write_json_file(out / "config.json", config_to_json(cfg));
  const auto jobs = sweep_jobs(cfg, out);
  std::vector<const SweepJob*> todo;
  for (const auto& j : jobs) {
    if (!fs::exists(j.dir / "result.json")) todo.push_back(&j);
  }
  std::printf("sweep: %zu runs, %zu to do\n", jobs.size(), todo.size());
  std::fflush(stdout);

  const int workers = std::max(1, f.workers);
  std::map<pid_t, const SweepJob*> running;
  std::size_t next = 0;
  auto reap = [&] {
    int status = 0;
    const pid_t pid = ::wait(&status);
    if (pid <= 0) return;
    const SweepJob* job = running[pid];
    running.erase(pid);
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) std::fprintf(stderr, "run %s failed\n", job->dir.c_str());
  };
  while (next < todo.size() || !running.empty()) {
    if (next < todo.size() && static_cast<int>(running.size()) < workers) {
      const SweepJob* job = todo[next++];
      const pid_t pid = ::fork();
      if (pid < 0) fail(kTrainingError, "fork failed");
      if (pid == 0) {
        int code = 1;
        try {
          omp_set_num_threads(1);
          code = run_job(cfg, *job);
        } catch (const std::exception& e) {
          std::fprintf(stderr, "%s: %s\n", job->dir.c_str(), e.what());
        }
        std::fflush(nullptr);
        ::_exit(code);
      }
      running[pid] = job;
    } else {
      reap();
    }
  }

  std::ofstream csv(out / "success_rates.csv");
  csv << "family,noise,R,N,seed,eps_H,eps_L,success_H,success_L\n";
  std::ofstream cells(out / "cell_success.csv");
  cells << "family,noise,R,N,n_seeds,completed,rate_H,rate_L\n";
  int missing = 0;
  char buf[512];
  for (std::size_t i = 0; i < jobs.size(); i += static_cast<std::size_t>(cfg.n_seeds)) {
    int done = 0, sh = 0, sl = 0;
    const auto& e = jobs[i].experiment;
    for (int s = 0; s < cfg.n_seeds; ++s) {
      const auto& job = jobs[i + static_cast<std::size_t>(s)];
      if (!fs::exists(job.dir / "result.json")) {
        ++missing;
        continue;
      }
      const json r = read_json_file(job.dir / "result.json");
      ++done;
      sh += r["success_H"].get<bool>();
      sl += r["success_L"].get<bool>();
      const double eh = r["eps_H"].is_null() ? std::nan("") : r["eps_H"].get<double>();
      const double el = r["eps_L"].is_null() ? std::nan("") : r["eps_L"].get<double>();
      std::snprintf(buf, sizeof buf, "%s,%s,%s,%d,%d,%.17g,%.17g,%d,%d\n", to_string(e.family).c_str(),
                    to_string(e.dissipator).c_str(), format_ratio(e.R).c_str(), e.n, s, eh, el,
                    r["success_H"].get<bool>() ? 1 : 0, r["success_L"].get<bool>() ? 1 : 0);
      csv << buf;
    }
    std::snprintf(buf, sizeof buf, "%s,%s,%s,%d,%d,%d,%.17g,%.17g\n", to_string(e.family).c_str(),
                  to_string(e.dissipator).c_str(), format_ratio(e.R).c_str(), e.n, cfg.n_seeds, done,
                  static_cast<double>(sh) / cfg.n_seeds, static_cast<double>(sl) / cfg.n_seeds);
    cells << buf;
  }
  if (missing > 0) std::fprintf(stderr, "sweep: %d runs have no result\n", missing);
  std::printf("wrote %s\n", (out / "success_rates.csv").c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn Lindbladian couplings and rates from random-Pauli shot data"};
  app.require_subcommand(1);
  Flags flags;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "TOML or JSON run configuration")->envname("LINDBLADFIT_CONFIG");
    sub->add_option("--dataset", flags.dataset, "dataset file")->envname("LINDBLADFIT_DATASET");
    sub->add_option("--out", flags.out, "output / run directory")->envname("LINDBLADFIT_OUT");
    sub->add_option("--seed", flags.seed, "master seed override")->envname("LINDBLADFIT_SEED");
    sub->add_option("--workers", flags.workers, "parallel workers (threads, or processes for sweep)")
        ->envname("LINDBLADFIT_WORKERS");
  };
  CLI::App* gen = app.add_subcommand("gen-data", "sample a ground truth and generate a shot dataset");
  CLI::App* tr = app.add_subcommand("train", "train on a dataset");
  CLI::App* ev = app.add_subcommand("eval", "recovery errors and infidelity curve of a run");
  CLI::App* ls = app.add_subcommand("landscape", "loss landscape on a random plane");
  CLI::App* sw = app.add_subcommand("sweep", "success rates over a grid of experiments");
  for (auto* s : {gen, tr, ev, ls, sw}) common(s);
  ls->add_option("--subspace", flags.subspace, "H, L, NDE or a combination such as HL");
  ls->add_option("--epoch", flags.epoch, "init, final or an epoch number");
  ls->add_option("--radius", flags.radius, "scan radius");
  ls->add_option("--grid", flags.grid, "grid points per axis (odd)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (flags.workers > 0 && !sw->parsed()) omp_set_num_threads(flags.workers);
    if (gen->parsed()) return cmd_gen_data(flags);
    if (tr->parsed()) return cmd_train(flags);
    if (ev->parsed()) return cmd_eval(flags);
    if (ls->parsed()) return cmd_landscape(flags);
    if (sw->parsed()) return cmd_sweep(flags);
  } catch (const ExitError& e) {
    std::fprintf(stderr, "error: %s\n", e.message.c_str());
    return e.code;
  } catch (const InvalidArgument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kTrainingError;
  }
  return kOk;
}
