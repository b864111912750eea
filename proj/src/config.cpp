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

#include "lindbladfit/config.hpp"

#include <set>

#include <toml.hpp>

namespace lindbladfit {

std::string to_string(TrainerKind k) { return k == TrainerKind::Vanilla ? "vanilla" : "nde"; }

TrainerKind parse_trainer_kind(std::string_view s) {
  if (s == "vanilla") return TrainerKind::Vanilla;
  if (s == "nde") return TrainerKind::Nde;
  throw InvalidArgument("unknown trainer '" + std::string(s) + "' (expected vanilla or nde)");
}

namespace {

std::string fine_tune_name(FineTune f) {
  switch (f) {
    case FineTune::Auto: return "auto";
    case FineTune::Always: return "always";
    case FineTune::Never: return "never";
  }
  return "auto";
}

FineTune parse_fine_tune(const std::string& s) {
  if (s == "auto") return FineTune::Auto;
  if (s == "always") return FineTune::Always;
  if (s == "never") return FineTune::Never;
  throw InvalidArgument("fine_tune must be auto, always or never");
}

void reject_unknown(const json& j, const std::string& section, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw InvalidArgument("[" + section + "] must be a table");
  const std::set<std::string> known(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw InvalidArgument("unknown key '" + k + "' in [" + section + "]");
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) {
    try {
      out = j.at(key).get<T>();
    } catch (const json::exception&) {
      throw InvalidArgument(std::string("config key '") + key + "' has the wrong type");
    }
  }
}

}  // namespace

void RunConfig::validate() const {
  experiment.validate();
  protocol.validate();
  training.validate();
  if (n_seeds < 1) throw InvalidArgument("n_seeds must be >= 1");
  if (evaluation.horizon_factor < 1) throw InvalidArgument("horizon_factor must be >= 1");
  if (evaluation.landscape_grid < 3 || evaluation.landscape_grid % 2 == 0) {
    throw InvalidArgument("landscape_grid must be odd and >= 3");
  }
  if (!(evaluation.landscape_radius >= 0.0)) throw InvalidArgument("landscape_radius must be non-negative");
  SubspaceSelector::parse(evaluation.landscape_subspace);
  if (output_dir.empty()) throw InvalidArgument("output_dir must not be empty");
  if (sweep && sweep->num_cells() == 0) throw InvalidArgument("sweep grid is empty");
  if (sweep) {
    for (auto f : sweep->families) {
      for (int n : sweep->sizes) {
        ExperimentConfig e = experiment;
        e.family = f;
        e.n = n;
        e.validate();
      }
    }
    for (double r : sweep->ratios) {
      if (!(r > 0.0)) throw InvalidArgument("sweep ratios must be positive");
    }
  }
}

SeedPlan seed_plan(std::uint64_t master, int index) {
  const auto i = static_cast<std::uint64_t>(index);
  return {substream_seed(master, "truth", i), substream_seed(master, "protocol", i), substream_seed(master, "init", i),
          substream_seed(master, "directions", i)};
}

json config_to_json(const RunConfig& c) {
  const auto& t = c.training;
  json j;
  j["experiment"] = {{"family", to_string(c.experiment.family)},
                     {"dissipator", to_string(c.experiment.dissipator)},
                     {"N", c.experiment.n},
                     {"R", c.experiment.R}};
  j["protocol"] = {{"L", c.protocol.L}, {"times", c.protocol.times}, {"K", c.protocol.K}, {"M", c.protocol.M}};
  j["trainer"] = {{"kind", to_string(c.trainer)},
                  {"main_epochs", t.main_epochs},
                  {"lr", t.lr},
                  {"fine_tune", fine_tune_name(t.fine_tune)},
                  {"fine_tune_window", t.fine_tune_window},
                  {"fine_tune_threshold", t.fine_tune_threshold},
                  {"fine_tune_epochs", t.fine_tune_epochs},
                  {"fine_tune_lr_slow", t.fine_tune_lr_slow},
                  {"fine_tune_lr_fast", t.fine_tune_lr_fast},
                  {"nde_epochs", t.nde_epochs},
                  {"lr_nde", t.lr_nde},
                  {"l2_lambda", t.l2_lambda},
                  {"nde_off_epochs", t.nde_off_epochs},
                  {"hidden_width", t.hidden_width},
                  {"residual_phi", t.residual_phi},
                  {"residual_epochs", t.residual_epochs},
                  {"residual_lr", t.residual_lr},
                  {"mean_loss", t.mean_loss},
                  {"evaluate_init_loss", t.evaluate_init_loss}};
  j["integrator"] = integrator_to_json(t.integrator);
  const auto& e = c.evaluation;
  j["evaluation"] = {{"horizon_factor", e.horizon_factor},
                     {"landscape_radius", e.landscape_radius},
                     {"landscape_grid", e.landscape_grid},
                     {"landscape_subspace", e.landscape_subspace},
                     {"landscape_epoch", e.landscape_epoch},
                     {"landscape_full_data", e.landscape_full_data}};
  j["seeds"] = {{"master", c.experiment.seed}, {"n_seeds", c.n_seeds}};
  j["output_dir"] = c.output_dir;
  if (c.sweep) {
    json fam = json::array(), dis = json::array();
    for (auto f : c.sweep->families) fam.push_back(to_string(f));
    for (auto d : c.sweep->dissipators) dis.push_back(to_string(d));
    j["sweep"] = {{"families", fam}, {"dissipators", dis}, {"R", c.sweep->ratios}, {"N", c.sweep->sizes}};
  }
  return j;
}

RunConfig config_from_json(const json& j) {
  reject_unknown(j, "root", {"experiment", "protocol", "trainer", "integrator", "evaluation", "seeds", "output_dir", "sweep"});
  RunConfig c;
  if (j.contains("experiment")) {
    const json& e = j["experiment"];
    reject_unknown(e, "experiment", {"family", "dissipator", "N", "R"});
    if (e.contains("family")) c.experiment.family = parse_hamiltonian_family(e["family"].get<std::string>());
    if (e.contains("dissipator")) c.experiment.dissipator = parse_dissipator_family(e["dissipator"].get<std::string>());
    read(e, "N", c.experiment.n);
    read(e, "R", c.experiment.R);
  }
  if (j.contains("protocol")) {
    const json& p = j["protocol"];
    reject_unknown(p, "protocol", {"L", "times", "K", "M"});
    read(p, "L", c.protocol.L);
    read(p, "times", c.protocol.times);
    read(p, "K", c.protocol.K);
    read(p, "M", c.protocol.M);
  }
  if (j.contains("trainer")) {
    const json& t = j["trainer"];
    reject_unknown(t, "trainer",
                   {"kind", "main_epochs", "lr", "fine_tune", "fine_tune_window", "fine_tune_threshold",
                    "fine_tune_epochs", "fine_tune_lr_slow", "fine_tune_lr_fast", "nde_epochs", "lr_nde", "l2_lambda",
                    "nde_off_epochs", "hidden_width", "residual_phi", "residual_epochs", "residual_lr", "mean_loss",
                    "evaluate_init_loss"});
    auto& tc = c.training;
    if (t.contains("kind")) c.trainer = parse_trainer_kind(t["kind"].get<std::string>());
    read(t, "main_epochs", tc.main_epochs);
    read(t, "lr", tc.lr);
    if (t.contains("fine_tune")) tc.fine_tune = parse_fine_tune(t["fine_tune"].get<std::string>());
    read(t, "fine_tune_window", tc.fine_tune_window);
    read(t, "fine_tune_threshold", tc.fine_tune_threshold);
    read(t, "fine_tune_epochs", tc.fine_tune_epochs);
    read(t, "fine_tune_lr_slow", tc.fine_tune_lr_slow);
    read(t, "fine_tune_lr_fast", tc.fine_tune_lr_fast);
    read(t, "nde_epochs", tc.nde_epochs);
    read(t, "lr_nde", tc.lr_nde);
    read(t, "l2_lambda", tc.l2_lambda);
    read(t, "nde_off_epochs", tc.nde_off_epochs);
    read(t, "hidden_width", tc.hidden_width);
    read(t, "residual_phi", tc.residual_phi);
    read(t, "residual_epochs", tc.residual_epochs);
    read(t, "residual_lr", tc.residual_lr);
    read(t, "mean_loss", tc.mean_loss);
    read(t, "evaluate_init_loss", tc.evaluate_init_loss);
  }
  if (j.contains("integrator")) {
    reject_unknown(j["integrator"], "integrator", {"method", "rtol", "atol", "dt0", "max_steps"});
    c.training.integrator = integrator_from_json(j["integrator"]);
  }
  if (j.contains("evaluation")) {
    const json& e = j["evaluation"];
    reject_unknown(e, "evaluation",
                   {"horizon_factor", "landscape_radius", "landscape_grid", "landscape_subspace", "landscape_epoch",
                    "landscape_full_data"});
    auto& ev = c.evaluation;
    read(e, "horizon_factor", ev.horizon_factor);
    read(e, "landscape_radius", ev.landscape_radius);
    read(e, "landscape_grid", ev.landscape_grid);
    read(e, "landscape_subspace", ev.landscape_subspace);
    if (e.contains("landscape_epoch")) {
      const json& v = e["landscape_epoch"];
      ev.landscape_epoch = v.is_number_integer() ? std::to_string(v.get<long>()) : v.get<std::string>();
    }
    read(e, "landscape_full_data", ev.landscape_full_data);
  }
  if (j.contains("seeds")) {
    reject_unknown(j["seeds"], "seeds", {"master", "n_seeds"});
    read(j["seeds"], "master", c.experiment.seed);
    read(j["seeds"], "n_seeds", c.n_seeds);
  }
  read(j, "output_dir", c.output_dir);
  if (j.contains("sweep")) {
    const json& s = j["sweep"];
    reject_unknown(s, "sweep", {"families", "dissipators", "R", "N"});
    SweepGrid g;
    for (const auto& f : s.value("families", json::array({to_string(c.experiment.family)}))) {
      g.families.push_back(parse_hamiltonian_family(f.get<std::string>()));
    }
    for (const auto& d : s.value("dissipators", json::array({to_string(c.experiment.dissipator)}))) {
      g.dissipators.push_back(parse_dissipator_family(d.get<std::string>()));
    }
    g.ratios = s.value("R", std::vector<double>{c.experiment.R});
    g.sizes = s.value("N", std::vector<int>{c.experiment.n});
    c.sweep = g;
  }
  c.validate();
  return c;
}

namespace {

json toml_node_to_json(const toml::node& node) {
  if (const auto* t = node.as_table()) {
    json out = json::object();
    for (const auto& [k, v] : *t) out[std::string(k.str())] = toml_node_to_json(v);
    return out;
  }
  if (const auto* a = node.as_array()) {
    json out = json::array();
    for (const auto& v : *a) out.push_back(toml_node_to_json(v));
    return out;
  }
  if (const auto* v = node.as_string()) return v->get();
  if (const auto* v = node.as_integer()) return v->get();
  if (const auto* v = node.as_floating_point()) return v->get();
  if (const auto* v = node.as_boolean()) return v->get();
  throw InvalidArgument("unsupported TOML value (dates and times are not accepted)");
}

}  // namespace

json toml_file_to_json(const std::filesystem::path& path) {
  try {
    const toml::table tbl = toml::parse_file(path.string());
    return toml_node_to_json(tbl);
  } catch (const toml::parse_error& e) {
    throw InvalidArgument(path.string() + ": " + std::string(e.description()));
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw InvalidArgument("config file " + path.string() + " does not exist");
  const json j = path.extension() == ".json" ? read_json_file(path) : toml_file_to_json(path);
  return config_from_json(j);
}

GeneratorParams initial_params(const RunConfig& cfg, const ModelSpec& spec, std::uint64_t init_seed) {
  Rng rng(init_seed);
  GeneratorParams p = init_variational_params(spec, rng);
  if (cfg.trainer == TrainerKind::Nde) p.phi = init_mlp(spec.num_qubits(), cfg.training.hidden_width, rng);
  return p;
}

TrainingRun train(const RunConfig& cfg, const ShotDataset& ds, const ModelSpec& spec, std::uint64_t init_seed) {
  TrainingConfig tc = cfg.training;
  tc.seed = init_seed;
  GeneratorParams init = initial_params(cfg, spec, init_seed);
  if (cfg.trainer == TrainerKind::Vanilla) return run_vanilla_curriculum(ds, spec, init, tc);
  MlpParams phi = *init.phi;
  init.phi.reset();
  return run_nde_curriculum(ds, spec, init, phi, tc);
}

SeedTrainer trainer_for(const RunConfig& cfg) {
  return [cfg](const ShotDataset& ds, const TrueParams& truth, std::uint64_t seed) {
    GeneratorParams out = train(cfg, ds, truth.model, seed).final_params;
    out.phi.reset();
    return out;
  };
}

}  // namespace lindbladfit
