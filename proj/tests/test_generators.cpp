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

#include <random>

#include "lindbladfit/generators.hpp"
#include "oracles.hpp"

using namespace lindbladfit;
using oracle::pauli_string;

namespace {

RVector vec(std::initializer_list<double> v) {
  RVector r(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) r[i++] = x;
  return r;
}

ModelSpec chain_model(HamiltonianFamily f, DissipatorFamily d, int n) {
  return {HamiltonianSpec::chain(f, n), DissipatorSpec{d, n}};
}

}  // namespace

TEST_CASE("parameter counts per family") {
  CHECK(HamiltonianSpec::chain(HamiltonianFamily::Superconducting, 3).num_params() == 5);
  CHECK(HamiltonianSpec::chain(HamiltonianFamily::XYZ, 3).num_params() == 9);
  CHECK(HamiltonianSpec::chain(HamiltonianFamily::PXP, 4).num_params() == 2);
  CHECK(DissipatorSpec{DissipatorFamily::Phase, 3}.num_jumps() == 3);
  CHECK(DissipatorSpec{DissipatorFamily::Thermal, 3}.num_jumps() == 6);
  CHECK(DissipatorSpec{DissipatorFamily::Combined, 3}.num_jumps() == 9);
  CHECK_THROWS_AS(chain_model(HamiltonianFamily::PXP, DissipatorFamily::Phase, 2).validate(), InvalidArgument);
}

TEST_CASE("XYZ Hamiltonian matches the explicit sum") {
  const ModelSpec spec = chain_model(HamiltonianFamily::XYZ, DissipatorFamily::Phase, 2);
  const RVector th = vec({0.3, -0.7, 1.1, 0.4, -0.2});
  const CMatrix expect = 0.3 * pauli_string("XX") - 0.7 * pauli_string("YY") + 1.1 * pauli_string("ZZ") +
                         0.4 * pauli_string("XI") - 0.2 * pauli_string("IX");
  CHECK(max_abs(build_hamiltonian(spec.hamiltonian, th) - expect) < 1e-14);
}

TEST_CASE("Rydberg Hamiltonian matches the explicit sum") {
  HamiltonianSpec h{HamiltonianFamily::Rydberg, 2, {{0.0, 0.0}, {10.0, 0.0}}, {{0, 1}}};
  const RVector th = vec({0.8, -1.5, 2.0});
  const CMatrix expect = 0.4 * (pauli_string("XI") + pauli_string("IX")) + 1.5 * (pauli_string("ZI") + pauli_string("IZ")) +
                         2.0 * pauli_string("ZZ");
  CHECK(max_abs(build_hamiltonian(h, th) - expect) < 1e-14);
}

TEST_CASE("superconducting Hamiltonian matches the explicit sum") {
  const auto h = HamiltonianSpec::chain(HamiltonianFamily::Superconducting, 2);
  const RVector th = vec({0.5, -0.25, 3.0});
  const CMatrix i4 = CMatrix::Identity(4, 4);
  const CMatrix expect = 0.5 * (i4 - pauli_string("ZI")) / 2.0 - 0.25 * (i4 - pauli_string("IZ")) / 2.0 +
                         3.0 * pauli_string("ZZ") / 2.0;
  CHECK(max_abs(build_hamiltonian(h, th) - expect) < 1e-14);
}

TEST_CASE("PXP Hamiltonian projects neighbours onto |0>") {
  const auto h = HamiltonianSpec::chain(HamiltonianFamily::PXP, 3);
  oracle::Mat p0 = oracle::Mat::Zero(2, 2);
  p0(0, 0) = 1;
  const CMatrix expect = 0.9 * oracle::kron(oracle::kron(p0, oracle::pauli('X')), p0);
  CHECK(max_abs(build_hamiltonian(h, vec({0.9})) - expect) < 1e-14);
}

TEST_CASE("jump operators and their order") {
  const auto jumps = build_jump_operators(DissipatorSpec{DissipatorFamily::Combined, 2});
  REQUIRE(jumps.size() == 6);
  CHECK(max_abs(jumps[0] - pauli_string("ZI")) == 0.0);
  CHECK(max_abs(jumps[1] - pauli_string("IZ")) == 0.0);
  CHECK(max_abs(jumps[2] - oracle::single(oracle::lowering(), 0, 2)) == 0.0);
  CHECK(max_abs(jumps[5] - oracle::single(oracle::raising(), 1, 2)) == 0.0);
  // L- decays |1> to |0>
  Eigen::VectorXcd one(2);
  one << 0, 1;
  const auto single = build_jump_operators(DissipatorSpec{DissipatorFamily::Thermal, 1});
  CHECK(std::abs((single[0] * one)(0) - 1.0) < 1e-15);
}

TEST_CASE("softplus is stable and inverted by raw_from_rates") {
  CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(softplus(800.0) == 800.0);
  CHECK(softplus(-800.0) >= 0.0);
  CHECK(std::isfinite(inverse_softplus(1e-300)));
  const RVector g = vec({0.2, 1.0, 5.0, 40.0});
  CHECK((rates_from_raw(raw_from_rates(g)) - g).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(raw_from_rates(vec({0.0})), InvalidArgument);
}

TEST_CASE("generator is trace preserving and Hermiticity preserving") {
  std::mt19937_64 rng(3);
  for (auto f : {HamiltonianFamily::XYZ, HamiltonianFamily::Superconducting, HamiltonianFamily::PXP}) {
    for (auto d : {DissipatorFamily::Phase, DissipatorFamily::Thermal, DissipatorFamily::Combined}) {
      const ModelSpec spec = chain_model(f, d, 3);
      std::normal_distribution<double> g;
      RVector th(static_cast<Eigen::Index>(spec.hamiltonian.num_params()));
      for (auto& v : th) v = g(rng);
      RVector tl(static_cast<Eigen::Index>(spec.dissipator.num_jumps()));
      for (auto& v : tl) v = g(rng);
      const CMatrix out = apply_physical_generator(spec, th, tl, oracle::random_density(8, rng));
      CHECK(std::abs(out.trace()) < 1e-13);
      CHECK(max_abs(out - out.adjoint()) < 1e-13);
    }
  }
}

TEST_CASE("noise rescaling hits the requested ratio") {
  const RVector th = vec({1.0, -2.0, 0.5});
  const RVector g = vec({0.3, 0.9});
  for (double R : {0.01, 0.1, 1.0, 10.0}) {
    const RVector s = rescale_noise_to_ratio(th, g, R);
    CHECK(s.lpNorm<1>() / th.lpNorm<1>() == doctest::Approx(R).epsilon(1e-14));
    CHECK(s[0] / s[1] == doctest::Approx(g[0] / g[1]).epsilon(1e-14));
  }
}

TEST_CASE("ground-truth sampling respects the family distributions") {
  for (int seed = 0; seed < 20; ++seed) {
    Rng rng(static_cast<std::uint64_t>(seed));
    ExperimentConfig cfg{HamiltonianFamily::XYZ, DissipatorFamily::Thermal, 3, 1.0, 0};
    const TrueParams t = sample_true_params(cfg, rng);
    CHECK((t.theta_h.array().abs() <= 1.0).all());
    CHECK(t.gamma.lpNorm<1>() / t.theta_h.lpNorm<1>() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((t.gamma.array() > 0.0).all());

    cfg.family = HamiltonianFamily::Rydberg;
    const TrueParams r = sample_true_params(cfg, rng);
    CHECK(r.theta_h[0] >= 0.0);
    CHECK(r.theta_h[0] <= 1.0);
    CHECK(std::abs(r.theta_h[1]) <= 4.0);
    REQUIRE(r.model.hamiltonian.pairs.size() == 3);  // triangle
    for (std::size_t p = 0; p < r.model.hamiltonian.pairs.size(); ++p) {
      const auto [i, j] = r.model.hamiltonian.pairs[p];
      const auto& a = r.model.hamiltonian.positions[static_cast<std::size_t>(i)];
      const auto& b = r.model.hamiltonian.positions[static_cast<std::size_t>(j)];
      const double dist = std::hypot(a[0] - b[0], a[1] - b[1]);
      CHECK(r.theta_h[2 + static_cast<Eigen::Index>(p)] == doctest::Approx(kRydbergC6 / std::pow(dist, 6)).epsilon(1e-12));
      CHECK(dist > 9.0 * 0.85);
      CHECK(dist < 11.0 * 1.15);
    }
  }
  ExperimentConfig bad{HamiltonianFamily::XYZ, DissipatorFamily::Thermal, 3, 0.0, 0};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}
