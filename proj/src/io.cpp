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

#include "lindbladfit/io.hpp"

#include <fstream>
#include <sstream>

namespace lindbladfit {

json vector_to_json(const RVector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

RVector vector_from_json(const json& j) {
  if (!j.is_array()) throw InvalidArgument("expected a numeric array");
  RVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

namespace {

json pairs_to_json(const std::vector<std::pair<int, int>>& pairs) {
  json a = json::array();
  for (const auto& [i, k] : pairs) a.push_back({i, k});
  return a;
}

std::vector<std::pair<int, int>> pairs_from_json(const json& j) {
  std::vector<std::pair<int, int>> out;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2) throw InvalidArgument("edges must be [i, j] pairs");
    out.emplace_back(e[0].get<int>(), e[1].get<int>());
  }
  return out;
}

}  // namespace

json model_to_json(const ModelSpec& spec, std::optional<double> R, std::uint64_t seed) {
  json j;
  const auto& h = spec.hamiltonian;
  j["family"] = to_string(h.family);
  j["N"] = h.n;
  if (h.family == HamiltonianFamily::Rydberg) {
    json pos = json::array();
    for (const auto& p : h.positions) pos.push_back({p[0], p[1]});
    j["geometry"] = {{"positions", pos}, {"pairs", pairs_to_json(h.pairs)}};
  } else if (h.family != HamiltonianFamily::PXP) {
    j["edges"] = pairs_to_json(h.pairs);
  }
  j["dissipator"] = to_string(spec.dissipator.family);
  j["R"] = R ? json(*R) : json(nullptr);
  j["seed"] = seed;
  return j;
}

ModelSpec model_from_json(const json& j) {
  const auto family = parse_hamiltonian_family(j.at("family").get<std::string>());
  const int n = j.at("N").get<int>();
  ModelSpec spec;
  if (family == HamiltonianFamily::Rydberg) {
    if (!j.contains("geometry")) throw InvalidArgument("Rydberg model requires a geometry");
    spec.hamiltonian.family = family;
    spec.hamiltonian.n = n;
    for (const auto& p : j["geometry"].at("positions")) {
      spec.hamiltonian.positions.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    }
    spec.hamiltonian.pairs = pairs_from_json(j["geometry"].at("pairs"));
  } else {
    spec.hamiltonian = HamiltonianSpec::chain(family, n);
    if (j.contains("edges") && family != HamiltonianFamily::PXP) spec.hamiltonian.pairs = pairs_from_json(j["edges"]);
  }
  spec.dissipator.family = parse_dissipator_family(j.at("dissipator").get<std::string>());
  spec.dissipator.n = n;
  spec.validate();
  return spec;
}

json truth_to_json(const GroundTruth& truth) {
  return {{"theta_H", vector_to_json(truth.theta_h)}, {"gamma", vector_to_json(truth.gamma)}};
}

GroundTruth truth_from_json(const json& j) {
  return {vector_from_json(j.at("theta_H")), vector_from_json(j.at("gamma"))};
}

json mlp_to_json(const MlpParams& phi) {
  json layers = json::array();
  for (const auto& l : phi.layers) {
    json w = json::array();
    for (Eigen::Index r = 0; r < l.w.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.w.cols(); ++c) w.push_back(l.w(r, c));
    }
    layers.push_back({{"w", w}, {"b", vector_to_json(l.b)}});
  }
  json widths = json::array();
  for (auto w : phi.widths()) widths.push_back(w);
  return {{"widths", widths}, {"layers", layers}};
}

MlpParams mlp_from_json(const json& j) {
  const auto widths = j.at("widths").get<std::vector<Eigen::Index>>();
  const json& layers = j.at("layers");
  if (widths.size() != layers.size() + 1) throw InvalidArgument("network widths do not match layer count");
  MlpParams phi;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Eigen::Index in = widths[l];
    const Eigen::Index out = widths[l + 1];
    const json& w = layers[l].at("w");
    if (static_cast<Eigen::Index>(w.size()) != in * out) throw InvalidArgument("weight matrix has wrong size");
    DenseLayer layer;
    layer.w.resize(out, in);
    for (Eigen::Index r = 0; r < out; ++r) {
      for (Eigen::Index c = 0; c < in; ++c) layer.w(r, c) = w[static_cast<std::size_t>(r * in + c)].get<double>();
    }
    layer.b = vector_from_json(layers[l].at("b"));
    if (layer.b.size() != out) throw InvalidArgument("bias has wrong size");
    phi.layers.push_back(std::move(layer));
  }
  phi.validate();
  return phi;
}

json params_to_json(const GeneratorParams& p) {
  json j{{"theta_H", vector_to_json(p.theta_h)},
         {"theta_L", vector_to_json(p.theta_l)},
         {"gamma", vector_to_json(p.gamma())}};
  if (p.phi) j["phi"] = mlp_to_json(*p.phi);
  return j;
}

GeneratorParams params_from_json(const json& j) {
  GeneratorParams p;
  p.theta_h = vector_from_json(j.at("theta_H"));
  if (j.contains("theta_L")) {
    p.theta_l = vector_from_json(j["theta_L"]);
  } else {
    p.theta_l = raw_from_rates(vector_from_json(j.at("gamma")));
  }
  if (j.contains("phi") && !j["phi"].is_null()) p.phi = mlp_from_json(j["phi"]);
  return p;
}

json protocol_to_json(const ProtocolConfig& p) {
  return {{"L", p.L}, {"times", p.times}, {"K", p.K}, {"M", p.M}, {"seed", p.seed}};
}

ProtocolConfig protocol_from_json(const json& j) {
  ProtocolConfig p;
  p.L = j.value("L", p.L);
  if (j.contains("times")) p.times = j["times"].get<std::vector<double>>();
  p.K = j.value("K", p.K);
  p.M = j.value("M", p.M);
  p.seed = j.value("seed", p.seed);
  p.validate();
  return p;
}

json integrator_to_json(const IntegratorConfig& c) {
  return {{"method", "dopri5"}, {"rtol", c.rtol}, {"atol", c.atol}, {"dt0", c.dt0},
          {"max_steps", c.max_steps}};
}

IntegratorConfig integrator_from_json(const json& j) {
  IntegratorConfig c;
  if (j.contains("method") && j["method"].get<std::string>() != "dopri5") {
    throw InvalidArgument("unsupported integrator method " + j["method"].get<std::string>());
  }
  c.rtol = j.value("rtol", c.rtol);
  c.atol = j.value("atol", c.atol);
  c.dt0 = j.value("dt0", c.dt0);
  c.max_steps = j.value("max_steps", c.max_steps);
  c.validate();
  return c;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

}  // namespace lindbladfit
