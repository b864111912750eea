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

#include <cmath>
#include <random>

#include "lindbladfit/field.hpp"
#include "oracles.hpp"

using namespace lindbladfit;

namespace {

MlpParams random_mlp(int n, Eigen::Index width, std::uint64_t seed) {
  Rng rng(seed);
  MlpParams phi = init_mlp(n, width, rng);
  std::normal_distribution<double> g(0.0, 0.5);
  for (auto& v : phi.layers[1].w.reshaped()) v = g(rng);
  for (auto& v : phi.layers[1].b) v = g(rng);
  return phi;
}

GeneratorParams random_params(const ModelSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  GeneratorParams p{RVector(static_cast<Eigen::Index>(spec.hamiltonian.num_params())),
                    RVector(static_cast<Eigen::Index>(spec.dissipator.num_jumps())), std::nullopt};
  for (auto& v : p.theta_h) v = g(rng);
  for (auto& v : p.theta_l) v = g(rng);
  return p;
}

}  // namespace

TEST_CASE("scaled softplus values and slope") {
  CHECK(scaled_softplus(0.0) == doctest::Approx(std::log(2.0) / 5.0).epsilon(1e-15));
  CHECK(scaled_softplus(100.0) == doctest::Approx(100.0));
  CHECK(scaled_softplus(-100.0) >= 0.0);
  CHECK(scaled_softplus(-100.0) < 1e-200);
  for (double x : {-2.0, -0.3, 0.0, 0.4, 3.0}) {
    const double fd = (scaled_softplus(x + 1e-6) - scaled_softplus(x - 1e-6)) / 2e-6;
    CHECK(scaled_softplus_grad(x) == doctest::Approx(fd).epsilon(1e-8));
  }
}

TEST_CASE("initialization shapes and ranges") {
  Rng rng(4);
  const MlpParams phi = init_mlp(2, 0, rng);
  CHECK(phi.widths() == std::vector<Eigen::Index>{16, 16, 16});
  CHECK(phi.num_params() == 16 * 16 + 16 + 16 * 16 + 16);
  CHECK(phi.layers[0].w.cwiseAbs().maxCoeff() <= 0.25);
  CHECK(phi.layers[0].b.cwiseAbs().maxCoeff() <= 0.25);
  CHECK(phi.layers[1].w.isZero(0.0));
  CHECK(phi.layers[1].b.isZero(0.0));
  // zero output layer: no neural contribution at all
  std::mt19937_64 g(1);
  CHECK(max_abs(neural_field(phi, oracle::random_density(4, g))) == 0.0);
  Rng again(4);
  CHECK(init_mlp(2, 0, again).flatten() == phi.flatten());
}

TEST_CASE("flatten and assign roundtrip") {
  MlpParams phi = random_mlp(1, 7, 3);
  const RVector flat = phi.flatten();
  CHECK(flat.size() == phi.num_params());
  CHECK(flat[1] == phi.layers[0].w(0, 1));
  CHECK(flat[7 * 4] == phi.layers[0].b[0]);
  MlpParams other = random_mlp(1, 7, 99);
  other.assign(flat);
  CHECK(other.flatten() == flat);
  CHECK(phi.squared_norm() == doctest::Approx(flat.squaredNorm()));
  CHECK(l2_penalty(phi, 0.1) == doctest::Approx(0.1 * flat.squaredNorm()));
}

TEST_CASE("neural field output is traceless and Hermitian") {
  const MlpParams phi = random_mlp(2, 9, 5);
  std::mt19937_64 g(2);
  const CMatrix out = neural_field(phi, oracle::random_density(4, g));
  CHECK(std::abs(out.trace()) < 1e-15);
  CHECK(max_abs(out - out.adjoint()) < 1e-15);
}

TEST_CASE("neural vjp matches finite differences") {
  const MlpParams phi = random_mlp(1, 6, 8);
  std::mt19937_64 g(3);
  const PauliCoordinates x = to_pauli_coords(oracle::random_density(2, g));
  RVector w(4);
  w << 0.3, -1.2, 0.7, 2.0;
  RVector x_bar = RVector::Zero(4);
  RVector phi_bar = RVector::Zero(phi.num_params());
  neural_field_vjp(phi, x, w, x_bar, phi_bar);

  const RVector flat = phi.flatten();
  const RVector fd_phi = finite_diff_gradient(
      [&](const RVector& q) {
        MlpParams p = phi;
        p.assign(q);
        return w.dot(neural_field_coords(p, x));
      },
      flat, 1e-6);
  CHECK((phi_bar - fd_phi).cwiseAbs().maxCoeff() < 1e-8);
  const RVector fd_x = finite_diff_gradient([&](const RVector& q) { return w.dot(neural_field_coords(phi, q)); }, x, 1e-6);
  CHECK((x_bar - fd_x).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("combined field in coordinates matches the matrix form") {
  const ModelSpec spec{HamiltonianSpec::chain(HamiltonianFamily::XYZ, 2), {DissipatorFamily::Combined, 2}};
  const LindbladModel model(spec);
  GeneratorParams p = random_params(spec, 17);
  p.phi = random_mlp(2, 16, 6);
  std::mt19937_64 g(4);
  const CMatrix rho = oracle::random_density(4, g);
  for (bool nde : {false, true}) {
    const LindbladField f(model, p, nde);
    RVector dy;
    f.eval(to_pauli_coords(rho), dy);
    CHECK((dy - to_pauli_coords(combined_field(model, p, nde, rho))).cwiseAbs().maxCoeff() < 1e-13);
  }
  CHECK(max_abs(combined_field(model, p, false, rho) - apply_physical_generator(spec, p.theta_h, p.theta_l, rho)) < 1e-14);
}

TEST_CASE("flatten and unflatten of generator parameters") {
  const ModelSpec spec{HamiltonianSpec::chain(HamiltonianFamily::XYZ, 2), {DissipatorFamily::Thermal, 2}};
  GeneratorParams p = random_params(spec, 2);
  p.phi = random_mlp(2, 5, 1);
  const ParamLayout lay = layout_of(p);
  CHECK(lay.n_h == 5);
  CHECK(lay.n_l == 4);
  CHECK(lay.n_phi == p.phi->num_params());
  const RVector flat = flatten(p);
  CHECK(flat.segment(lay.l_offset(), lay.n_l) == p.theta_l);
  const GeneratorParams q = unflatten(flat, p);
  CHECK(flatten(q) == flat);
}

TEST_CASE("trajectory gradients match finite differences in every block") {
  const ModelSpec spec{HamiltonianSpec::chain(HamiltonianFamily::XYZ, 2), {DissipatorFamily::Combined, 2}};
  const LindbladModel model(spec);
  GeneratorParams p = random_params(spec, 23);
  p.phi = random_mlp(2, 8, 12);
  const DensityMatrix rho0 = product_eigenstate(InitialStateSpec::parse("x+,y+"));
  const std::vector<double> times{0.2, 0.6, 1.0};
  RVector weights(16);
  for (Eigen::Index i = 0; i < 16; ++i) weights[i] = std::sin(1.0 + i);
  const CoordLoss loss = [&](std::span<const PauliCoordinates> xs, std::span<RVector> grads) {
    double l = 0;
    for (std::size_t o = 0; o < xs.size(); ++o) {
      const double s = weights.dot(xs[o]);
      l += s * s;
      if (!grads.empty()) grads[o] += 2 * s * weights;
    }
    return l;
  };
  IntegratorConfig cfg;
  cfg.rtol = 1e-10;
  cfg.atol = 1e-12;
  for (bool nde : {false, true}) {
    const LossAndGradient lg = evolve_with_gradient(model, p, nde, rho0, times, loss, cfg);
    const RVector fd = finite_diff_gradient(model, p, nde, rho0, times, loss, cfg, 1e-6);
    const double scale = fd.cwiseAbs().maxCoeff();
    CHECK((lg.grad - fd).cwiseAbs().maxCoeff() < 1e-6 * scale);
    if (!nde) CHECK(lg.grad.tail(p.phi->num_params()).isZero(0.0));
  }
}
