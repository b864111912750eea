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

#include <bit>
#include <random>

#include "lindbladfit/pauli_coords.hpp"
#include "lindbladfit/spinops.hpp"
#include "oracles.hpp"

using namespace lindbladfit;

TEST_CASE("pauli matrices match the standard definitions") {
  for (char c : std::string("IXYZ")) {
    CHECK(oracle::max_abs(pauli_matrix(pauli_from_char(c)) - oracle::pauli(c)) == 0.0);
  }
  const CMatrix x = pauli_matrix(Pauli::X), y = pauli_matrix(Pauli::Y), z = pauli_matrix(Pauli::Z);
  CHECK(max_abs(x * y - cplx(0, 1) * z) < 1e-15);
  CHECK(max_abs(y * z - cplx(0, 1) * x) < 1e-15);
}

TEST_CASE("pauli string parse, index and roundtrip") {
  const auto p = PauliString::parse("XZY");
  CHECK(p.str() == "XZY");
  CHECK(p.size() == 3);
  CHECK(p.index() == 1 * 16 + 3 * 4 + 2);
  CHECK(PauliString::from_index(p.index(), 3) == p);
  CHECK(PauliString::parse("II").index() == 0);
  CHECK(p.is_measurement_basis());
  CHECK_FALSE(PauliString::parse("XI").is_measurement_basis());
  CHECK_THROWS_AS(PauliString::parse("XQ"), InvalidArgument);
  for (std::size_t i = 0; i < 64; ++i) CHECK(PauliString::from_index(i, 3).index() == i);
}

TEST_CASE("string operators put site 0 leftmost") {
  for (const std::string s : {"XZ", "YI", "ZZY", "IXI"}) {
    CHECK(max_abs(string_operator(PauliString::parse(s)) - oracle::pauli_string(s)) == 0.0);
  }
  CHECK(max_abs(embed_single_site(pauli_matrix(Pauli::X), 0, 2) - oracle::pauli_string("XI")) == 0.0);
  CHECK(max_abs(embed_single_site(pauli_matrix(Pauli::Z), 2, 3) - oracle::pauli_string("IIZ")) == 0.0);
  const std::vector<int> sites{0, 2};
  const CMatrix xz = oracle::pauli_string("XZ");
  CHECK(max_abs(embed_operator(xz, sites, 3) - oracle::pauli_string("XIZ")) < 1e-15);
  CHECK_THROWS_AS(string_operator(PauliString::parse("XXXXXXX")), InvalidArgument);
}

TEST_CASE("product eigenstates") {
  const CMatrix id = CMatrix::Identity(2, 2);
  CHECK(max_abs(product_eigenstate(InitialStateSpec::parse("x+")).matrix() - (id + oracle::pauli('X')) / 2.0) < 1e-15);
  CHECK(max_abs(product_eigenstate(InitialStateSpec::parse("y-")).matrix() - (id - oracle::pauli('Y')) / 2.0) < 1e-15);
  const auto zz = product_eigenstate(InitialStateSpec::parse("z+,z-")).matrix();
  CHECK(std::abs(zz(1, 1) - 1.0) < 1e-15);  // |01>
  CHECK(std::abs(zz.trace() - 1.0) < 1e-15);
  CHECK(InitialStateSpec::parse("x+,y-,z+").str() == "x+,y-,z+");
}

TEST_CASE("density matrix validation and projection") {
  CHECK_THROWS_AS(DensityMatrix(CMatrix::Identity(2, 2)), InvalidArgument);
  CMatrix nh = CMatrix::Zero(2, 2);
  nh(0, 0) = 1;
  nh(0, 1) = 0.3;
  CHECK_THROWS_AS(DensityMatrix{nh}, InvalidArgument);
  const DensityMatrix p = project_physical(2.0 * nh);
  CHECK(p.trace_error() < 1e-15);
  CHECK(p.hermiticity_error() < 1e-15);
  CHECK(std::abs(p(0, 1) - 0.15) < 1e-15);
  CHECK_THROWS_AS(project_physical(CMatrix::Zero(2, 2)), IntegrationError);
}

TEST_CASE("basis rotation maps the measured Pauli onto Z") {
  for (char c : std::string("XYZ")) {
    const CMatrix u = basis_rotation(PauliString::parse(std::string(1, c)));
    CHECK(max_abs(u * oracle::pauli(c) * u.adjoint() - oracle::pauli('Z')) < 1e-14);
    CHECK(max_abs(u * u.adjoint() - CMatrix::Identity(2, 2)) < 1e-14);
  }
  const CMatrix u = basis_rotation(PauliString::parse("YX"));
  CHECK(max_abs(u * oracle::pauli_string("YX") * u.adjoint() - oracle::pauli_string("ZZ")) < 1e-14);
  CHECK_THROWS_AS(basis_rotation(PauliString::parse("IX")), InvalidArgument);
}

TEST_CASE("pauli coordinates roundtrip and agree with traces") {
  std::mt19937_64 rng(7);
  const CMatrix rho = oracle::random_density(8, rng);
  const PauliCoordinates x = to_pauli_coords(rho);
  CHECK(x.size() == 64);
  CHECK(max_abs(from_pauli_coords(x) - rho) < 1e-14);
  for (std::size_t j = 0; j < 64; ++j) {
    const std::string s = PauliString::from_index(j, 3).str();
    const double expect = (oracle::pauli_string(s) * rho).trace().real() / 8.0;
    CHECK(std::abs(x[static_cast<Eigen::Index>(j)] - expect) < 1e-14);
  }
  CHECK(qubits_from_coord_count(64) == 3);
}

TEST_CASE("pauli masks reproduce matrix elements") {
  for (std::size_t j = 0; j < 16; ++j) {
    const CMatrix p = oracle::pauli_string(PauliString::from_index(j, 2).str());
    const PauliMasks m = pauli_masks(j, 2);
    for (std::uint32_t c = 0; c < 4; ++c) {
      cplx phase = std::pow(cplx(0, 1), m.n_y) * ((std::popcount(c & m.z_mask) & 1) ? -1.0 : 1.0);
      CHECK(std::abs(p(c ^ m.x_mask, c) - phase) < 1e-15);
    }
  }
}
