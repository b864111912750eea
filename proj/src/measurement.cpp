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

#include "lindbladfit/measurement.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <random>

#include "lindbladfit/io.hpp"

namespace lindbladfit {

std::size_t ProtocolConfig::num_records() const {
  return static_cast<std::size_t>(L) * times.size() * static_cast<std::size_t>(K) * static_cast<std::size_t>(M);
}

void ProtocolConfig::validate() const {
  if (L < 1 || K < 1 || M < 1) throw InvalidArgument("protocol counts L, K, M must be >= 1");
  if (times.empty()) throw InvalidArgument("protocol needs at least one timestamp");
  for (std::size_t j = 0; j < times.size(); ++j) {
    if (!(times[j] > 0.0) || !std::isfinite(times[j])) throw InvalidArgument("protocol timestamps must be positive");
    if (j > 0 && !(times[j] > times[j - 1])) throw InvalidArgument("protocol timestamps must be ascending");
  }
}

std::string bits_to_string(std::uint32_t bits, int n) {
  std::string s(static_cast<std::size_t>(n), '0');
  for (int i = 0; i < n; ++i) {
    if ((bits >> (n - 1 - i)) & 1u) s[static_cast<std::size_t>(i)] = '1';
  }
  return s;
}

std::uint32_t parse_bits(std::string_view text, int n) {
  if (static_cast<int>(text.size()) != n) throw DataError("bitstring '" + std::string(text) + "' has wrong length");
  std::uint32_t bits = 0;
  for (char c : text) {
    if (c != '0' && c != '1') throw DataError("bitstring '" + std::string(text) + "' has invalid character");
    bits = (bits << 1) | static_cast<std::uint32_t>(c == '1');
  }
  return bits;
}

std::size_t ShotDataset::record_index(int state, int time, int slot, int shot) const {
  const auto J = static_cast<std::size_t>(protocol.J());
  const auto K = static_cast<std::size_t>(protocol.K);
  const auto M = static_cast<std::size_t>(protocol.M);
  return ((static_cast<std::size_t>(state) * J + static_cast<std::size_t>(time)) * K + static_cast<std::size_t>(slot)) * M +
         static_cast<std::size_t>(shot);
}

void ShotDataset::check_complete() const {
  if (!complete()) {
    throw DataError("dataset incomplete: " + std::to_string(records.size()) + " records, expected " +
                    std::to_string(protocol.num_records()));
  }
  const std::size_t K = static_cast<std::size_t>(protocol.K);
  const std::size_t M = static_cast<std::size_t>(protocol.M);
  for (int s = 0; s < protocol.L; ++s) {
    for (int j = 0; j < protocol.J(); ++j) {
      const std::size_t base = record_index(s, j, 0, 0);
      for (std::size_t r = base; r < base + K * M; ++r) {
        const auto& rec = records[r];
        if (rec.state_id != s || rec.t != protocol.times[static_cast<std::size_t>(j)]) {
          throw DataError("dataset record " + std::to_string(r) + " is out of order");
        }
        if (r % M != 0 && !(rec.basis == records[r - 1].basis)) {
          throw DataError("dataset record " + std::to_string(r) + " changes basis within a slot");
        }
      }
    }
  }
}

std::vector<InitialStateSpec> sample_initial_states(int L, int n, Rng& rng) {
  if (L < 1) throw InvalidArgument("L must be >= 1");
  std::uniform_int_distribution<int> pick(0, 5);
  std::vector<InitialStateSpec> out;
  out.reserve(static_cast<std::size_t>(L));
  for (int l = 0; l < L; ++l) {
    std::vector<SiteState> sites;
    for (int i = 0; i < n; ++i) {
      const int o = pick(rng);
      sites.push_back({static_cast<Pauli>(1 + o / 2), o % 2 == 0 ? +1 : -1});
    }
    out.emplace_back(std::move(sites));
  }
  return out;
}

std::vector<PauliString> sample_bases(int K, int n, Rng& rng) {
  if (K < 1) throw InvalidArgument("K must be >= 1");
  std::uniform_int_distribution<int> pick(1, 3);
  std::vector<PauliString> out;
  out.reserve(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    std::vector<Pauli> labels;
    for (int i = 0; i < n; ++i) labels.push_back(static_cast<Pauli>(pick(rng)));
    out.emplace_back(std::move(labels));
  }
  return out;
}

RVector outcome_distribution(const DensityMatrix& rho, const PauliString& basis) {
  if (basis.size() != rho.num_qubits()) throw InvalidArgument("basis size does not match state");
  if (!basis.is_measurement_basis()) throw InvalidArgument("measurement basis may not contain I");
  const CMatrix u = basis_rotation(basis);
  const CMatrix rotated = u * rho.matrix() * u.adjoint();
  RVector p = rotated.diagonal().real();
  const double total = p.sum();
  if (!(std::abs(total - 1.0) <= 1e-9)) {
    throw DataError("outcome distribution sums to " + std::to_string(total));
  }
  p = p.cwiseMax(0.0);
  return p / p.sum();
}

std::vector<std::uint32_t> sample_shots(const RVector& probs, int M, Rng& rng) {
  if (probs.size() == 0) throw InvalidArgument("empty distribution");
  std::vector<double> cdf(static_cast<std::size_t>(probs.size()));
  double acc = 0.0;
  Eigen::Index last = 0;
  for (Eigen::Index b = 0; b < probs.size(); ++b) {
    acc += probs[b];
    cdf[static_cast<std::size_t>(b)] = acc;
    if (probs[b] > 0.0) last = b;
  }
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<std::uint32_t> out(static_cast<std::size_t>(M));
  for (auto& o : out) {
    const double u = uni(rng) * acc;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    auto b = static_cast<Eigen::Index>(it - cdf.begin());
    if (b > last) b = last;
    while (probs[b] <= 0.0 && b < last) ++b;
    o = static_cast<std::uint32_t>(b);
  }
  return out;
}

ShotDataset generate_dataset(const ModelSpec& model, const GroundTruth& truth, const ProtocolConfig& protocol,
                             const IntegratorConfig& cfg) {
  model.validate();
  protocol.validate();
  cfg.validate();
  const int n = model.num_qubits();
  ShotDataset ds;
  ds.model = model;
  ds.protocol = protocol;
  ds.truth = truth;
  {
    Rng rng = make_rng(protocol.seed, "initial_states", 0);
    ds.initial_states = sample_initial_states(protocol.L, n, rng);
  }

  const LindbladModel lm(model);
  GeneratorParams params{truth.theta_h, raw_from_rates(truth.gamma), std::nullopt};
  ds.records.resize(protocol.num_records());
  const std::size_t per_state = ds.records.size() / static_cast<std::size_t>(protocol.L);

  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(protocol.L));
#pragma omp parallel for schedule(dynamic)
  for (int s = 0; s < protocol.L; ++s) {
    try {
      const Trajectory traj = evolve_model(lm, params, false, product_eigenstate(ds.initial_states[s]),
                                           protocol.times, cfg);
      Rng rng_bases = make_rng(protocol.seed, "bases", static_cast<std::uint64_t>(s));
      Rng rng_shots = make_rng(protocol.seed, "shots", static_cast<std::uint64_t>(s));
      std::size_t r = static_cast<std::size_t>(s) * per_state;
      for (int j = 0; j < protocol.J(); ++j) {
        const double t = protocol.times[static_cast<std::size_t>(j)];
        for (const auto& basis : sample_bases(protocol.K, n, rng_bases)) {
          const RVector p = outcome_distribution(traj.states[static_cast<std::size_t>(j)], basis);
          for (std::uint32_t bits : sample_shots(p, protocol.M, rng_shots)) {
            ds.records[r++] = MeasurementRecord{s, t, basis, bits};
          }
        }
      }
    } catch (...) {
      errors[static_cast<std::size_t>(s)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return ds;
}

namespace {

json dataset_meta(const ShotDataset& ds) {
  json meta;
  meta["version"] = ShotDataset::kVersion;
  meta["model"] = model_to_json(ds.model, ds.R, ds.model_seed);
  meta["protocol"] = protocol_to_json(ds.protocol);
  json states = json::array();
  for (const auto& s : ds.initial_states) states.push_back(s.str());
  meta["initial_states"] = states;
  if (ds.truth) meta["truth"] = truth_to_json(*ds.truth);
  return meta;
}

[[noreturn]] void line_error(std::size_t line, const std::string& what) {
  throw DataError("dataset line " + std::to_string(line) + ": " + what);
}

}  // namespace

void write_dataset(const ShotDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << dataset_meta(ds).dump() << '\n';
  const int n = ds.num_qubits();
  char tbuf[64];
  for (const auto& rec : ds.records) {
    std::snprintf(tbuf, sizeof tbuf, "%.17g", rec.t);
    out << rec.state_id << ',' << tbuf << ',' << rec.basis.str() << ',' << bits_to_string(rec.bits, n) << '\n';
  }
  if (!out) throw DataError("write to " + path.string() + " failed");
}

ShotDataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) line_error(1, "missing meta header");
  ShotDataset ds;
  try {
    const json meta = json::parse(line);
    const int version = meta.at("version").get<int>();
    if (version != ShotDataset::kVersion) line_error(1, "unsupported format version " + std::to_string(version));
    const json& model = meta.at("model");
    ds.model = model_from_json(model);
    if (model.contains("R") && !model["R"].is_null()) ds.R = model["R"].get<double>();
    ds.model_seed = model.value("seed", std::uint64_t{0});
    ds.protocol = protocol_from_json(meta.at("protocol"));
    for (const auto& s : meta.at("initial_states")) ds.initial_states.push_back(InitialStateSpec::parse(s.get<std::string>()));
    if (meta.contains("truth")) ds.truth = truth_from_json(meta["truth"]);
  } catch (const DataError&) {
    throw;
  } catch (const std::exception& e) {
    line_error(1, std::string("bad meta header: ") + e.what());
  }
  if (static_cast<int>(ds.initial_states.size()) != ds.protocol.L) line_error(1, "initial_states does not match L");

  const int n = ds.num_qubits();
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) line_error(lineno, "empty line");
    std::string_view v(line);
    std::string_view fields[4];
    for (int f = 0; f < 4; ++f) {
      const auto comma = v.find(',');
      if (f < 3 && comma == std::string_view::npos) line_error(lineno, "expected 4 comma-separated fields");
      if (f == 3 && comma != std::string_view::npos) line_error(lineno, "too many fields");
      fields[f] = v.substr(0, comma);
      if (f < 3) v.remove_prefix(comma + 1);
    }
    MeasurementRecord rec;
    auto [p1, e1] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), rec.state_id);
    if (e1 != std::errc{} || p1 != fields[0].data() + fields[0].size()) line_error(lineno, "bad state_id");
    auto [p2, e2] = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), rec.t);
    if (e2 != std::errc{} || p2 != fields[1].data() + fields[1].size()) line_error(lineno, "bad time");
    if (rec.state_id < 0 || rec.state_id >= ds.protocol.L) line_error(lineno, "state_id out of range");
    if (std::find(ds.protocol.times.begin(), ds.protocol.times.end(), rec.t) == ds.protocol.times.end()) {
      line_error(lineno, "time not in protocol");
    }
    try {
      rec.basis = PauliString::parse(fields[2]);
      rec.bits = parse_bits(fields[3], n);
    } catch (const std::exception& e) {
      line_error(lineno, e.what());
    }
    if (rec.basis.size() != n || !rec.basis.is_measurement_basis()) line_error(lineno, "bad basis");
    ds.records.push_back(std::move(rec));
  }
  if (!ds.records.empty() && ds.records.size() != ds.protocol.num_records()) {
    line_error(lineno + 1, "unexpected end of file after " + std::to_string(ds.records.size()) + " records, expected " +
                               std::to_string(ds.protocol.num_records()));
  }
  return ds;
}

}  // namespace lindbladfit
