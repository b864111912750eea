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

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <random>

#include "lindbladfit/likelihood.hpp"
#include "lindbladfit/measurement.hpp"
#include "oracles.hpp"

using namespace lindbladfit;
namespace fs = std::filesystem;

namespace {

ModelSpec xyz(int n, DissipatorFamily d = DissipatorFamily::Thermal) {
  return {HamiltonianSpec::chain(HamiltonianFamily::XYZ, n), {d, n}};
}

GroundTruth truth_for(const ModelSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1), r(0.2, 1);
  GroundTruth t{RVector(static_cast<Eigen::Index>(spec.hamiltonian.num_params())),
                RVector(static_cast<Eigen::Index>(spec.dissipator.num_jumps()))};
  for (auto& v : t.theta_h) v = u(rng);
  for (auto& v : t.gamma) v = r(rng);
  return t;
}

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "lindbladfit_tests";
  fs::create_directories(dir);
  return dir / name;
}

DensityMatrix random_state(int n, std::mt19937_64& rng) { return DensityMatrix(oracle::random_density(1 << n, rng)); }

}  // namespace

TEST_CASE("initial states are uniform over the six eigenstates") {
  Rng rng(1);
  const auto states = sample_initial_states(2000, 3, rng);
  std::map<std::pair<int, int>, int> freq;
  for (const auto& s : states) {
    for (const auto& site : s.sites()) ++freq[{static_cast<int>(site.axis), site.sign}];
  }
  CHECK(freq.size() == 6);
  for (const auto& [k, v] : freq) CHECK(std::abs(v / 6000.0 - 1.0 / 6.0) <= 0.02);
  Rng again(1);
  CHECK(sample_initial_states(2000, 3, again) == states);
  CHECK(ProtocolConfig{}.L == 5);
  CHECK_THROWS_AS(sample_initial_states(0, 3, rng), InvalidArgument);
}

TEST_CASE("bases are uniform over X, Y, Z per site") {
  Rng rng(2);
  const auto bases = sample_bases(2000, 3, rng);
  int counts[4] = {0, 0, 0, 0};
  for (const auto& b : bases) {
    CHECK(b.is_measurement_basis());
    for (auto l : b.labels()) ++counts[static_cast<int>(l)];
  }
  CHECK(counts[0] == 0);
  for (int k = 1; k < 4; ++k) CHECK(std::abs(counts[k] / 6000.0 - 1.0 / 3.0) <= 0.02);
  Rng again(2);
  CHECK(sample_bases(2000, 3, again) == bases);
}

TEST_CASE("outcome distribution examples") {
  const auto z = PauliString::parse("Z");
  const auto x = PauliString::parse("X");
  const DensityMatrix zero = product_eigenstate(InitialStateSpec::parse("z+"));
  const DensityMatrix plus = product_eigenstate(InitialStateSpec::parse("x+"));
  CHECK(outcome_distribution(zero, z)[0] == doctest::Approx(1.0));
  CHECK(outcome_distribution(zero, z)[1] == doctest::Approx(0.0));
  CHECK(outcome_distribution(plus, x)[0] == doctest::Approx(1.0));
  CHECK(outcome_distribution(plus, x)[1] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(outcome_distribution(plus, z)[0] == doctest::Approx(0.5));
  CHECK(outcome_distribution(plus, z)[1] == doctest::Approx(0.5));
  const DensityMatrix yminus = product_eigenstate(InitialStateSpec::parse("y-"));
  CHECK(outcome_distribution(yminus, PauliString::parse("Y"))[1] == doctest::Approx(1.0));
  CHECK_THROWS_AS(outcome_distribution(zero, PauliString::parse("I")), InvalidArgument);
}

TEST_CASE("outcome distributions are normalized and Z...Z reads the diagonal") {
  std::mt19937_64 rng(3);
  Rng brng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const DensityMatrix rho = random_state(3, rng);
    for (const auto& b : sample_bases(5, 3, brng)) CHECK(std::abs(outcome_distribution(rho, b).sum() - 1.0) < 1e-10);
    const RVector pz = outcome_distribution(rho, PauliString::parse("ZZZ"));
    CHECK((pz - RVector(rho.matrix().diagonal().real())).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("Born probabilities from coordinates agree with the rotated state") {
  std::mt19937_64 rng(4);
  Rng brng(4);
  for (int n = 1; n <= 3; ++n) {
    for (int rep = 0; rep < 10; ++rep) {
      const DensityMatrix rho = random_state(n, rng);
      const PauliCoordinates x = to_pauli_coords(rho);
      for (const auto& b : sample_bases(4, n, brng)) {
        const RVector p = outcome_distribution(rho, b);
        for (std::uint32_t bits = 0; bits < (1u << n); ++bits) {
          CHECK(born_probability(x, b, bits) == doctest::Approx(p[bits]).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("shot sampling") {
  Rng rng(5);
  RVector det(2);
  det << 1.0, 0.0;
  for (auto b : sample_shots(det, 50, rng)) CHECK(b == 0u);
  RVector half(2);
  half << 0.5, 0.5;
  const auto shots = sample_shots(half, 10000, rng);
  const double f0 = std::count(shots.begin(), shots.end(), 0u) / 10000.0;
  CHECK(f0 >= 0.48);
  CHECK(f0 <= 0.52);
  Rng a(9), b(9);
  CHECK(sample_shots(half, 100, a) == sample_shots(half, 100, b));
  CHECK(bits_to_string(1, 2) == "01");
  CHECK(parse_bits("10", 2) == 2u);
  CHECK_THROWS_AS(parse_bits("1", 2), DataError);
}

TEST_CASE("empirical frequencies converge to Born probabilities") {
  const ModelSpec spec = xyz(2);
  const GroundTruth truth = truth_for(spec, 6);
  ProtocolConfig p;
  p.L = 4;
  p.times = {0.5, 1.0};
  p.K = 5;
  p.M = 10000;
  p.seed = 17;
  const ShotDataset ds = generate_dataset(spec, truth, p);
  const LindbladModel model(spec);
  const GeneratorParams params{truth.theta_h, raw_from_rates(truth.gamma), std::nullopt};
  int cells = 0, good = 0;
  for (int s = 0; s < p.L; ++s) {
    const Trajectory tr = evolve_model(model, params, false, product_eigenstate(ds.initial_states[s]), p.times);
    for (int j = 0; j < p.J(); ++j) {
      for (int k = 0; k < p.K; ++k) {
        const auto base = ds.record_index(s, j, k, 0);
        const RVector exact = outcome_distribution(tr.states[static_cast<std::size_t>(j)], ds.records[base].basis);
        RVector emp = RVector::Zero(4);
        for (int m = 0; m < p.M; ++m) emp[ds.records[base + static_cast<std::size_t>(m)].bits] += 1.0 / p.M;
        ++cells;
        good += 0.5 * (emp - exact).cwiseAbs().sum() <= 0.05;
      }
    }
  }
  CHECK(good >= 0.95 * cells);
}

TEST_CASE("dataset shape, order and determinism") {
  const ModelSpec spec = xyz(2);
  const GroundTruth truth = truth_for(spec, 7);
  ProtocolConfig p;
  p.L = 2;
  p.times = {0.1, 0.4, 0.9};
  p.K = 3;
  p.M = 4;
  p.seed = 99;
  const ShotDataset ds = generate_dataset(spec, truth, p);
  CHECK(ds.records.size() == 2 * 3 * 3 * 4);
  CHECK(ds.complete());
  ds.check_complete();
  const ShotDataset again = generate_dataset(spec, truth, p);
  for (std::size_t r = 0; r < ds.records.size(); ++r) {
    CHECK(ds.records[r].bits == again.records[r].bits);
    CHECK(ds.records[r].basis == again.records[r].basis);
  }
  ProtocolConfig one;
  one.L = one.K = one.M = 1;
  one.times = {0.5};
  CHECK(generate_dataset(spec, truth, one).records.size() == 1);
  CHECK(ProtocolConfig{}.num_records() == 1000000);
  ProtocolConfig bad = one;
  bad.times = {0.5, 0.2};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("Z eigenstates measured in Z at t ~ 0 return the preparation") {
  const ModelSpec spec = xyz(1);
  const GroundTruth truth = truth_for(spec, 8);
  ProtocolConfig p;
  p.L = 60;
  p.times = {1e-6};
  p.K = 12;
  p.M = 5;
  p.seed = 3;
  const ShotDataset ds = generate_dataset(spec, truth, p);
  int seen = 0;
  for (const auto& r : ds.records) {
    const auto& site = ds.initial_states[static_cast<std::size_t>(r.state_id)].sites()[0];
    if (site.axis != Pauli::Z || r.basis[0] != Pauli::Z) continue;
    ++seen;
    CHECK(r.bits == (site.sign > 0 ? 0u : 1u));
  }
  CHECK(seen > 0);
}

TEST_CASE("dataset file roundtrip and error reporting") {
  const ModelSpec spec = xyz(2, DissipatorFamily::Combined);
  ProtocolConfig p;
  p.L = 2;
  p.times = {0.1, 0.30000000000000004};
  p.K = 2;
  p.M = 3;
  p.seed = 4;
  ShotDataset ds = generate_dataset(spec, truth_for(spec, 9), p);
  ds.R = 0.5;
  ds.model_seed = 12;
  const fs::path path = temp_file("roundtrip.jsonl");
  write_dataset(ds, path);
  const ShotDataset back = read_dataset(path);
  CHECK(back.protocol.times == p.times);
  CHECK(back.initial_states == ds.initial_states);
  CHECK(back.R == ds.R);
  CHECK(back.model_seed == 12);
  REQUIRE(back.truth);
  CHECK(back.truth->gamma == ds.truth->gamma);
  REQUIRE(back.records.size() == ds.records.size());
  for (std::size_t r = 0; r < ds.records.size(); ++r) {
    CHECK(back.records[r].t == ds.records[r].t);
    CHECK(back.records[r].state_id == ds.records[r].state_id);
    CHECK(back.records[r].basis == ds.records[r].basis);
    CHECK(back.records[r].bits == ds.records[r].bits);
  }
  const fs::path again = temp_file("roundtrip2.jsonl");
  write_dataset(back, again);
  std::ifstream a(path), b(again);
  CHECK(std::string(std::istreambuf_iterator<char>(a), {}) == std::string(std::istreambuf_iterator<char>(b), {}));

  // truncated mid-line
  std::string text;
  {
    std::ifstream in(path);
    text.assign(std::istreambuf_iterator<char>(in), {});
  }
  const fs::path cut = temp_file("cut.jsonl");
  std::ofstream(cut) << text.substr(0, text.size() - 3);
  try {
    read_dataset(cut);
    FAIL("expected a parse error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 25") != std::string::npos);
  }
  // truncated at a line boundary
  const fs::path short_file = temp_file("short.jsonl");
  std::ofstream(short_file) << text.substr(0, text.find('\n', text.find('\n') + 1) + 1);
  CHECK_THROWS_AS(read_dataset(short_file), DataError);

  // meta only
  ShotDataset empty = ds;
  empty.records.clear();
  const fs::path meta = temp_file("meta.jsonl");
  write_dataset(empty, meta);
  const ShotDataset m = read_dataset(meta);
  CHECK(m.records.empty());
  CHECK(m.initial_states.size() == 2);

  // version mismatch
  std::string bumped = text;
  bumped.replace(bumped.find("\"version\":1"), 11, "\"version\":2");
  const fs::path ver = temp_file("version.jsonl");
  std::ofstream(ver) << bumped;
  CHECK_THROWS_AS(read_dataset(ver), DataError);
}
