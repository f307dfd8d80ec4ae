//
// qfipmp - Copyright 2026 The qfipmp Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include "qfipmp/fisher.hpp"
#include "support/oracles.hpp"

using namespace qfipmp;
using namespace qfipmp::testing;

namespace {

// Hermitian directions spanning all entries: E_aa, E_ab + E_ba, i(E_ab - E_ba).
std::vector<Operator> hermitian_directions(Eigen::Index d) {
  std::vector<Operator> out;
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = a; b < d; ++b) {
      Operator re = Operator::Zero(d, d);
      re(a, b) += 1.0;
      if (a != b) re(b, a) += 1.0;
      out.push_back(re);
      if (a != b) {
        Operator im = Operator::Zero(d, d);
        im(a, b) = kI;
        im(b, a) = -kI;
        out.push_back(im);
      }
    }
  }
  return out;
}

// Tr(rho L^2) with L from the dense linear solve, valid for any full-rank
// (not necessarily Hermitian) rho; complex in general.
Complex reference_qfi(const Operator& rho, const Operator& rho_omega) {
  const Operator l = reference_sld(rho, rho_omega);
  return (rho * l * l).trace();
}

struct BoundaryCheck {
  std::vector<double> analytic;
  std::vector<double> numeric;
};

// Directional derivatives of the cost -F along every Hermitian direction,
// for the rho slot and the rho_omega slot, against Tr(lambda Delta).
template <class Fisher>
BoundaryCheck directional(const Operator& rho, const Operator& rho_omega, const CostatePair& c,
                          Fisher fisher) {
  BoundaryCheck out;
  const double h = 1e-6;
  for (const Operator& dir : hermitian_directions(rho.rows())) {
    out.analytic.push_back(trace_product(c.lambda, dir).real());
    out.numeric.push_back(-(fisher(rho + h * dir, rho_omega) - fisher(rho - h * dir, rho_omega)) /
                          (2 * h));
    out.analytic.push_back(trace_product(c.lambda_omega, dir).real());
    out.numeric.push_back(-(fisher(rho, rho_omega + h * dir) - fisher(rho, rho_omega - h * dir)) /
                          (2 * h));
  }
  return out;
}

}  // namespace

TEST_CASE("sld closed forms") {
  SUBCASE("dephasing asymptote") {
    const double az = 0.0786;
    const double bz = -0.151;
    const Operator bar0z = pauli_string("0z") + pauli_string("z0");
    const Operator rho = 0.25 * (pauli_string("00") + az * pauli_string("zz"));
    const Operator rho_omega = bz * bar0z;
    CHECK((sld(rho, rho_omega).sld - 4.0 * bz / (1.0 + az) * bar0z).norm() < 1e-12);
    CHECK(qfi(rho, rho_omega) == doctest::Approx(32.0 * bz * bz / (1.0 + az)).epsilon(1e-12));
    CHECK(asymptotic_qfi(ChannelKind::Dephasing, {az, bz, 0.0}, 1.5) ==
          doctest::Approx(0.6766).epsilon(1e-3));
  }
  SUBCASE("flipping asymptote") {
    const double gamma = 1.5;
    const AugmentedState x = flipping_asymptotic_state(2, gamma);
    const Operator barxy = pauli_string("xy") + pauli_string("yx");
    CHECK((sld(x.rho, x.rho_omega).sld - (2.0 / gamma) * barxy).norm() < 1e-12);
    CHECK(qfi(x.rho, x.rho_omega) == doctest::Approx(8.0 / (gamma * gamma)).epsilon(1e-12));
    CHECK(asymptotic_qfi(ChannelKind::Flipping, {0.0, 0.0, 1.0}, gamma) ==
          doctest::Approx(3.5556).epsilon(1e-4));
    CHECK(asymptotic_qfi(ChannelKind::Flipping, {0.0, 0.0, 0.0}, gamma) == 0.0);
    CHECK(asymptotic_qfi(ChannelKind::Depolarization, {0.3, 0.2, 0.1}, gamma) == 0.0);
    CHECK_THROWS_AS(asymptotic_qfi(ChannelKind::None, {}, gamma), std::invalid_argument);
  }
  SUBCASE("zero derivative") {
    Rng rng(31);
    const Operator rho = random_density(4, rng);
    const Operator zero = Operator::Zero(4, 4);
    CHECK(sld(rho, zero).sld.norm() == 0.0);
    CHECK(qfi(rho, zero) == 0.0);
    const CostatePair c = qfi_costate_boundary(rho, zero);
    CHECK(c.lambda.norm() == 0.0);
    CHECK(c.lambda_omega.norm() == 0.0);
    for (double phi : {0.0, 0.4, 1.1}) {
      CHECK(cfi(rho, zero, phi) == 0.0);
      const CostatePair cc = cfi_costate_boundary(rho, zero, phi);
      CHECK(cc.lambda.norm() == 0.0);
      CHECK(cc.lambda_omega.norm() == 0.0);
    }
  }
  SUBCASE("pure heisenberg-limit state") {
    for (int n = 1; n <= 4; ++n) {
      const Operator rho = hl_state_density(n);
      const Operator jz = collective_spin(n, Axis::Z);
      const Operator rho_omega = -kI * commutator(jz, rho);
      CHECK(qfi(rho, rho_omega) == doctest::Approx(double(n * n)).epsilon(1e-10));
    }
  }
}

TEST_CASE("sld agrees with the dense linear solve on full-rank states") {
  Rng rng(32);
  for (Eigen::Index d : {2, 4, 8}) {
    for (int trial = 0; trial < 10; ++trial) {
      const Operator rho = random_density(d, rng);
      const Operator rho_omega = random_traceless(d, rng);
      const Operator l = sld(rho, rho_omega).sld;
      CHECK((l - reference_sld(rho, rho_omega)).norm() < 1e-9 * (1.0 + l.norm()));
      CHECK((0.5 * (l * rho + rho * l) - rho_omega).norm() < 1e-10 * (1.0 + rho_omega.norm()));
    }
  }
}

TEST_CASE("sld partials match finite differences entry by entry") {
  Rng rng(33);
  const double h = 1e-6;
  for (Eigen::Index d : {2, 4}) {
    const int trials = d == 2 ? 20 : 20;
    for (int trial = 0; trial < trials; ++trial) {
      const Operator rho = random_density(d, rng);
      const Operator rho_omega = random_traceless(d, rng);
      const SldPartials partials = sld_partials(rho, rho_omega);
      REQUIRE(partials.dim() == d);
      std::vector<double> analytic;
      std::vector<double> numeric;
      for (Eigen::Index a = 0; a < d; ++a) {
        for (Eigen::Index b = 0; b < d; ++b) {
          for (Complex step : {Complex(h, 0.0), Complex(0.0, h)}) {
            const Operator fd =
                (reference_sld(bump(rho, a, b, step), rho_omega) -
                 reference_sld(bump(rho, a, b, -step), rho_omega)) / (2.0 * step);
            const Operator fd_w =
                (reference_sld(rho, bump(rho_omega, a, b, step)) -
                 reference_sld(rho, bump(rho_omega, a, b, -step))) / (2.0 * step);
            for (Eigen::Index i = 0; i < d * d; ++i) {
              analytic.push_back(partials.wrt_rho(a, b)(i).real());
              analytic.push_back(partials.wrt_rho(a, b)(i).imag());
              numeric.push_back(fd(i).real());
              numeric.push_back(fd(i).imag());
              analytic.push_back(partials.wrt_rho_omega(a, b)(i).real());
              analytic.push_back(partials.wrt_rho_omega(a, b)(i).imag());
              numeric.push_back(fd_w(i).real());
              numeric.push_back(fd_w(i).imag());
            }
          }
        }
      }
      CHECK(relative_error(analytic, numeric) < 1e-5);
    }
  }

  SUBCASE("first-order response to a rank-one hermitian perturbation") {
    const Operator rho = random_density(4, rng);
    const Operator rho_omega = random_traceless(4, rng);
    Eigen::VectorXcd v = Eigen::VectorXcd::Random(4);
    v.normalize();
    const Operator delta = 1e-6 * v * v.adjoint();
    const SldPartials partials = sld_partials(rho, rho_omega);
    Operator predicted = Operator::Zero(4, 4);
    for (Eigen::Index a = 0; a < 4; ++a)
      for (Eigen::Index b = 0; b < 4; ++b) predicted += partials.wrt_rho(a, b) * delta(a, b);
    const Operator actual = sld(rho + delta, rho_omega).sld - sld(rho, rho_omega).sld;
    CHECK((actual - predicted).norm() < 1e-3 * actual.norm());
  }
}

TEST_CASE("qfi costate boundary matches finite differences") {
  Rng rng(34);
  SUBCASE("independent complex entries") {
    for (Eigen::Index d : {2, 4}) {
      for (int trial = 0; trial < 20; ++trial) {
        const Operator rho = random_density(d, rng);
        const Operator rho_omega = random_traceless(d, rng);
        const CostatePair c = qfi_costate_boundary(rho, rho_omega);
        std::vector<double> analytic;
        std::vector<double> numeric;
        const double h = 1e-6;
        for (Eigen::Index a = 0; a < d; ++a) {
          for (Eigen::Index b = 0; b < d; ++b) {
            const Complex fd = -(reference_qfi(bump(rho, a, b, h), rho_omega) -
                                 reference_qfi(bump(rho, a, b, -h), rho_omega)) / (2.0 * h);
            const Complex fd_w = -(reference_qfi(rho, bump(rho_omega, a, b, h)) -
                                   reference_qfi(rho, bump(rho_omega, a, b, -h))) / (2.0 * h);
            analytic.insert(analytic.end(), {c.lambda(b, a).real(), c.lambda(b, a).imag(),
                                             c.lambda_omega(b, a).real(),
                                             c.lambda_omega(b, a).imag()});
            numeric.insert(numeric.end(), {fd.real(), fd.imag(), fd_w.real(), fd_w.imag()});
          }
        }
        CHECK(relative_error(analytic, numeric) < 1e-5);
      }
    }
  }
  SUBCASE("hermitian directions through the library qfi") {
    for (Eigen::Index d : {2, 4}) {
      for (int trial = 0; trial < 20; ++trial) {
        const Operator rho = random_density(d, rng);
        const Operator rho_omega = random_traceless(d, rng);
        const BoundaryCheck r = directional(rho, rho_omega, qfi_costate_boundary(rho, rho_omega),
                                            [](const Operator& a, const Operator& b) {
                                              return qfi(a, b);
                                            });
        CHECK(relative_error(r.analytic, r.numeric) < 1e-5);
      }
    }
  }
}

TEST_CASE("cfi costate boundary matches finite differences") {
  Rng rng(35);
  for (Eigen::Index d : {2, 4}) {
    for (double phi : {0.0, 0.37}) {
      for (int trial = 0; trial < 20; ++trial) {
        const Operator rho = random_density(d, rng);
        const Operator rho_omega = random_traceless(d, rng);
        const BoundaryCheck r =
            directional(rho, rho_omega, cfi_costate_boundary(rho, rho_omega, phi),
                        [phi](const Operator& a, const Operator& b) { return cfi(a, b, phi); });
        CHECK(relative_error(r.analytic, r.numeric) < 1e-5);
      }
    }
  }
}

TEST_CASE("measurement basis diagonalizes Jx") {
  for (int n = 1; n <= 4; ++n) {
    const Operator w = measurement_basis(n);
    const Eigen::Index d = w.rows();
    CHECK((w.adjoint() * w - Operator::Identity(d, d)).norm() < 1e-12);
    Operator t = w.adjoint() * collective_spin(n, Axis::X) * w;
    t.diagonal().setZero();
    CHECK(t.norm() < 1e-12);
  }
}

TEST_CASE("cost dispatch") {
  Rng rng(36);
  const AugmentedState x{random_density(4, rng), random_traceless(4, rng)};
  CHECK(fisher_information({CostKind::Qfi, 0.0}, x) == qfi(x.rho, x.rho_omega));
  CHECK(fisher_information({CostKind::Cfi, 0.2}, x) == cfi(x.rho, x.rho_omega, 0.2));
  const CostatePair a = terminal_costate({CostKind::Cfi, 0.2}, x);
  const CostatePair b = cfi_costate_boundary(x.rho, x.rho_omega, 0.2);
  CHECK((a.lambda - b.lambda).norm() == 0.0);
}

TEST_CASE("pure-state qfi equals the wave-function formula") {
  Rng rng(37);
  for (int n = 1; n <= 3; ++n) {
    ModelSpec spec;
    spec.n_spins = n;
    const Model model(spec);
    for (int trial = 0; trial < 3; ++trial) {
      const ControlProtocol p = random_protocol(rng, 0.8, 8, 6.0);
      const AugmentedState x =
          propagate_forward(model, p, coherent_x_state(n), default_substeps(0.8, 8)).terminal();
      const double reference = wavefunction_qfi(spec, p, coherent_x_vector(n));
      CHECK(qfi(x.rho, x.rho_omega) == doctest::Approx(reference).epsilon(1e-6));
    }
  }
}

TEST_CASE("cfi never exceeds qfi on propagated states") {
  Rng rng(38);
  for (ChannelKind kind : kAllChannels) {
    const Model model = make_model(kind);
    for (int trial = 0; trial < 5; ++trial) {
      const ControlProtocol p = random_protocol(rng, 1.0, 10, 10.0);
      const AugmentedState x =
          propagate_forward(model, p, coherent_x_state(2), default_substeps(1.0, 10)).terminal();
      const double q = qfi(x.rho, x.rho_omega);
      for (double phi = 0.0; phi < 3.2; phi += 0.2) CHECK(cfi(x.rho, x.rho_omega, phi) <= q + 1e-9);
    }
  }
}

TEST_CASE("flipping asymptote cfi closed form") {
  const double gamma = 1.5;
  for (int n : {2, 3}) {
    const AugmentedState x = flipping_asymptotic_state(n, gamma);
    for (double phi = 0.05; phi <= 1.0 + 1e-12; phi += 0.05) {
      const double c2n = std::pow(std::cos(phi), 2 * n);
      const double closed =
          4.0 / (gamma * gamma) * n * n * std::pow(std::tan(phi), 2) * c2n / (1.0 - c2n);
      CHECK(flipping_asymptotic_cfi(n, gamma, phi) == doctest::Approx(closed).epsilon(1e-12));
      CHECK(std::abs(cfi(x.rho, x.rho_omega, phi) - closed) < 1e-6);
    }
    CHECK(cfi(x.rho, x.rho_omega, 1e-3) ==
          doctest::Approx(4.0 * n / (gamma * gamma)).epsilon(1e-3));
  }
}

TEST_CASE("asymptotic coefficients") {
  const Operator rho = 0.25 * (pauli_string("00") + 0.2 * pauli_string("zz") +
                               0.5 * pauli_string("xx"));
  const Operator rho_omega = -0.1 * (pauli_string("0z") + pauli_string("z0"));
  const AsymptoticCoeffs c = extract_asymptotic_coeffs(rho, rho_omega);
  CHECK(c.a_z == doctest::Approx(0.2));
  CHECK(c.a_x == doctest::Approx(0.5));
  CHECK(c.b_z == doctest::Approx(-0.1));
  CHECK_THROWS_AS(extract_asymptotic_coeffs(Operator::Identity(2, 2), Operator::Zero(2, 2)),
                  std::invalid_argument);
}

TEST_CASE("uncontrolled dephasing keeps the qfi of a decoherence-free pair") {
  // rho diagonal in the z basis and rho_omega = b (0z + z0): stationary under
  // u = 0, with QFI 32 b^2 / (1 + a).
  const double a = 0.0786;
  const double b = -0.151;
  AugmentedState x;
  x.rho = 0.25 * (pauli_string("00") + a * pauli_string("zz"));
  x.rho_omega = b * (pauli_string("0z") + pauli_string("z0"));
  const double q0 = qfi(x.rho, x.rho_omega);
  CHECK(q0 == doctest::Approx(32.0 * b * b / (1.0 + a)).epsilon(1e-12));

  const Model model = make_model(ChannelKind::Dephasing);
  double previous = q0;
  for (int k = 0; k < 50; ++k) {
    x = evolve_state(model, 0.0, x, 0.1, 0.01);
    const double q = qfi(x.rho, x.rho_omega);
    CHECK(q >= previous - 1e-9);
    previous = q;
  }
}

TEST_CASE("uncontrolled dephasing from the coherent state loses its qfi") {
  const Model model = make_model(ChannelKind::Dephasing);
  const AugmentedTrajectory t =
      propagate_forward(model, ControlProtocol::constant(20.0, 200, 0.0), coherent_x_state(2), 10);
  CHECK(qfi(t.rho.back(), t.rho_omega.back()) < 1e-9);
}
