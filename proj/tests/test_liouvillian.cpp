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

#include "lindbladfit/liouvillian.hpp"
#include "oracles.hpp"

using namespace lindbladfit;

namespace {

struct Draw {
  RVector theta_h;
  RVector theta_l;
};

Draw draw(const ModelSpec& spec, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Draw d{RVector(static_cast<Eigen::Index>(spec.hamiltonian.num_params())),
         RVector(static_cast<Eigen::Index>(spec.dissipator.num_jumps()))};
  for (auto& v : d.theta_h) v = g(rng);
  for (auto& v : d.theta_l) v = g(rng);
  return d;
}

std::vector<ModelSpec> all_models(int n) {
  std::vector<ModelSpec> out;
  for (auto d : {DissipatorFamily::Phase, DissipatorFamily::Thermal, DissipatorFamily::Combined}) {
    out.push_back({HamiltonianSpec{HamiltonianFamily::Rydberg, 2, {{0, 0}, {9.5, 0.3}}, {{0, 1}}}, {d, 2}});
    for (auto f : {HamiltonianFamily::Superconducting, HamiltonianFamily::XYZ}) {
      out.push_back({HamiltonianSpec::chain(f, n), {d, n}});
    }
  }
  return out;
}

}  // namespace

TEST_CASE("generator agrees with the vectorized Liouvillian on N=2") {
  std::mt19937_64 rng(11);
  int checked = 0;
  for (const auto& spec : all_models(2)) {
    const std::vector<oracle::Mat> jumps = build_jump_operators(spec.dissipator);
    for (int rep = 0; rep < 6; ++rep) {
      const Draw d = draw(spec, rng);
      const RVector gamma = rates_from_raw(d.theta_l);
      const oracle::Mat l = oracle::vectorized_lindbladian(build_hamiltonian(spec.hamiltonian, d.theta_h), jumps,
                                                           std::vector<double>(gamma.data(), gamma.data() + gamma.size()));
      REQUIRE(l.rows() == 16);
      const oracle::Mat rho = oracle::random_density(4, rng);
      const oracle::Mat expect = oracle::unvec(l * oracle::vec(rho), 4);
      CHECK(oracle::max_abs(apply_physical_generator(spec, d.theta_h, d.theta_l, rho) - expect) < 1e-10);
      ++checked;
    }
  }
  CHECK(checked >= 50);
}

TEST_CASE("PXP generator agrees with the vectorized Liouvillian on N=3") {
  std::mt19937_64 rng(5);
  const ModelSpec spec{HamiltonianSpec::chain(HamiltonianFamily::PXP, 3), {DissipatorFamily::Combined, 3}};
  const Draw d = draw(spec, rng);
  const RVector gamma = rates_from_raw(d.theta_l);
  const oracle::Mat l = oracle::vectorized_lindbladian(build_hamiltonian(spec.hamiltonian, d.theta_h),
                                                       build_jump_operators(spec.dissipator),
                                                       std::vector<double>(gamma.data(), gamma.data() + gamma.size()));
  const oracle::Mat rho = oracle::random_density(8, rng);
  CHECK(oracle::max_abs(apply_physical_generator(spec, d.theta_h, d.theta_l, rho) -
                        oracle::unvec(l * oracle::vec(rho), 8)) < 1e-10);
}

TEST_CASE("coordinate superoperators reproduce the matrix-form generator") {
  std::mt19937_64 rng(9);
  for (const auto& spec : all_models(3)) {
    const LindbladModel model(spec);
    const Draw d = draw(spec, rng);
    const RVector gamma = rates_from_raw(d.theta_l);
    const SparseR a = model.basis().assemble(d.theta_h, gamma);
    const CMatrix rho = oracle::random_density(spec.num_qubits() == 2 ? 4 : 8, rng);
    const RVector got = a * to_pauli_coords(rho);
    const RVector expect = to_pauli_coords(model.generator().apply(d.theta_h, gamma, rho));
    CHECK((got - expect).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("parallel and serial superoperator builds agree") {
  for (const auto& spec : all_models(3)) {
    const LiouvillianBasis par = build_liouvillian_basis(spec);
    const LiouvillianBasis ser = build_liouvillian_basis_serial(spec);
    REQUIRE(par.hamiltonian.size() == ser.hamiltonian.size());
    REQUIRE(par.dissipators.size() == ser.dissipators.size());
    for (std::size_t k = 0; k < par.hamiltonian.size(); ++k) {
      CHECK(RMatrix(par.hamiltonian[k] - ser.hamiltonian[k]).cwiseAbs().maxCoeff() < 1e-12);
    }
    for (std::size_t k = 0; k < par.dissipators.size(); ++k) {
      CHECK(RMatrix(par.dissipators[k] - ser.dissipators[k]).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("identity coordinate is conserved") {
  const ModelSpec spec{HamiltonianSpec::chain(HamiltonianFamily::XYZ, 3), {DissipatorFamily::Combined, 3}};
  const LiouvillianBasis b = build_liouvillian_basis(spec);
  for (const auto& m : b.hamiltonian) CHECK(RVector(m.row(0).transpose()).cwiseAbs().maxCoeff() == 0.0);
  for (const auto& m : b.dissipators) CHECK(RVector(m.row(0).transpose()).cwiseAbs().maxCoeff() < 1e-15);
}
