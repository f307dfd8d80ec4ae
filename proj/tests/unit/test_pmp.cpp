//
// qfipmp - Copyright 2026 The qfipmp Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include "qfipmp/optimize.hpp"
#include "qfipmp/pmp.hpp"
#include "support/oracles.hpp"

using namespace qfipmp;
using namespace qfipmp::testing;

TEST_CASE("switching function and c-hamiltonian on snapshots") {
  Rng rng(41);
  const Model model = make_model(ChannelKind::Dephasing);
  const AugmentedState x{random_density(4, rng), random_traceless(4, rng)};
  const CostatePair zero{Operator::Zero(4, 4), Operator::Zero(4, 4)};
  CHECK(switching_function(model, zero, x) == 0.0);
  CHECK(control_hamiltonian(model, zero, x, 3.0) == 0.0);

  const CostatePair c{random_hermitian(4, rng), random_hermitian(4, rng)};
  const Operator jx = collective(2, 'x');
  const Complex phi = -kI * (c.lambda * (jx * x.rho - x.rho * jx)).trace() -
                      kI * (c.lambda_omega * (jx * x.rho_omega - x.rho_omega * jx)).trace();
  CHECK(switching_function(model, c, x) == doctest::Approx(phi.real()).epsilon(1e-12));

  // H_oc is affine in u with slope Phi.
  const double h0 = control_hamiltonian(model, c, x, 0.0);
  const double h1 = control_hamiltonian(model, c, x, 1.0);
  CHECK(h1 - h0 == doctest::Approx(phi.real()).epsilon(1e-10));

  // Non-Hermitian costates produce complex traces and are rejected.
  CostatePair bad = c;
  bad.lambda(0, 1) += Complex(0.0, 5.0);
  CHECK_THROWS_AS(switching_function(model, bad, x), NumericalError);
}

TEST_CASE("gradient identity over random protocols") {
  Rng rng(42);
  const Operator rho0 = coherent_x_state(2);
  int protocols = 0;
  for (ChannelKind kind : kAllChannels) {
    CAPTURE(to_string(kind));
    const Model model = make_model(kind);
    for (int trial = 0; trial < 5; ++trial, ++protocols) {
      const ControlProtocol p = random_protocol(rng, 1.0, 16, 10.0);
      const int substeps = default_substeps(1.0, 16);
      const SwitchingProfile profile = evaluate_switching(model, p, rho0, {}, substeps);
      std::vector<double> grad;
      for (double v : profile.phi) grad.push_back(v * p.segment_length());
      CHECK(relative_error(grad, fd_cost_gradient(model, p, rho0, {}, substeps)) < 1e-4);
      CHECK(profile.fisher == evaluate_fisher(model, p, rho0, {}, substeps));
    }
  }
  CHECK(protocols == 20);

  SUBCASE("cfi cost and a three-spin register") {
    const Model model = make_model(ChannelKind::Flipping, 0.7, 3, 4.0);
    const ControlProtocol p = random_protocol(rng, 0.6, 8, 5.0);
    const CostSpec cost{CostKind::Cfi, 0.3};
    const SwitchingProfile profile = evaluate_switching(model, p, coherent_x_state(3), cost, 40);
    std::vector<double> grad;
    for (double v : profile.phi) grad.push_back(v * p.segment_length());
    CHECK(relative_error(grad, fd_cost_gradient(model, p, coherent_x_state(3), cost, 40)) < 1e-4);
  }

  SUBCASE("the sign mutation breaks it") {
    const Model model = make_model(ChannelKind::Dephasing);
    const ControlProtocol p = random_protocol(rng, 1.0, 10, 10.0);
    const SwitchingProfile broken =
        evaluate_switching(model.with_costate_channel_sign(1.0), p, rho0, {}, 100);
    std::vector<double> grad;
    for (double v : broken.phi) grad.push_back(v * p.segment_length());
    CHECK(relative_error(grad, fd_cost_gradient(model, p, rho0, {}, 100)) > 1e-2);
  }

  CHECK_THROWS_AS(evaluate_switching(make_model(ChannelKind::None),
                                     ControlProtocol::constant(1.0, 4, 0.0), rho0, {}, 5),
                  std::invalid_argument);
}

TEST_CASE("c-hamiltonian is flat under constant control and equals dC/dT") {
  Rng rng(43);
  const Operator rho0 = coherent_x_state(2);
  for (ChannelKind kind : kAllChannels) {
    CAPTURE(to_string(kind));
    const Model model = make_model(kind);
    for (int trial = 0; trial < 3; ++trial) {
      std::uniform_real_distribution<double> amp(-8.0, 8.0);
      const double u = amp(rng);
      const double duration = 0.6 + 0.2 * trial;
      const int m = 12;
      const int substeps = default_substeps(duration, m);
      const ControlProtocol p = ControlProtocol::constant(duration, m, u);
      const SwitchingProfile profile = evaluate_switching(model, p, rho0, {}, substeps);

      // Along the whole horizon at every stored boundary.
      std::vector<double> hoc;
      for (std::size_t k = 0; k < profile.forward.rho.size(); ++k) {
        hoc.push_back(control_hamiltonian(model, profile.costate.at(k), profile.forward.at(k), u));
      }
      const auto [lo, hi] = std::minmax_element(hoc.begin(), hoc.end());
      CHECK(*hi - *lo < 1e-6 * std::abs(hoc.front()));

      const double d = 1e-3;
      auto cost = [&](double t) {
        return -evaluate_fisher(model, ControlProtocol::constant(t, m, u), rho0, {}, substeps);
      };
      const double dcdt = (cost(duration + d) - cost(duration - d)) / (2 * d);
      CHECK(relative_error(hoc.front(), dcdt) < 1e-3);
    }
  }
}

TEST_CASE("second-order quantities") {
  Rng rng(44);
  SUBCASE("analytic and brute force agree where the closed form applies") {
    for (ChannelKind kind : {ChannelKind::None, ChannelKind::Flipping}) {
      CAPTURE(to_string(kind));
      const Model model = make_model(kind);
      for (int trial = 0; trial < 5; ++trial) {
        const ControlProtocol p = random_protocol(rng, 0.5, 5, 6.0);
        const SwitchingProfile profile =
            evaluate_switching(model, p, coherent_x_state(2), {}, default_substeps(0.5, 5));
        const AugmentedState x = profile.forward.at(2);
        const CostatePair c = profile.costate.at(2);
        const double u = p.values[2];
        const SecondOrder a = second_order_analytic(model, c, x);
        const SecondOrder b = second_order_bruteforce(model, c, x, u, {2e-3, 1e-3 * 6.0});
        const double scale = std::abs(a.gfg * u) + std::abs(a.ffg);
        CHECK(std::abs(a.gfg - b.gfg) * std::abs(u) < 1e-3 * scale);
        CHECK(std::abs(a.ffg - b.ffg) < 1e-3 * scale);
      }
    }
  }

  SUBCASE("phi double-dot is affine in u") {
    // Along constant control u, Phi'' = u gfg + ffg: check against a finite
    // difference of Phi on the propagated state and costate.
    const Model model = make_model(ChannelKind::Depolarization);
    const double u = 2.5;
    const SwitchingProfile profile =
        evaluate_switching(model, ControlProtocol::constant(0.4, 4, u), coherent_x_state(2), {}, 400);
    const AugmentedState x = profile.forward.at(2);
    const CostatePair c = profile.costate.at(2);
    const double h = 2e-3;
    auto phi_at = [&](double t) {
      return switching_function(model, evolve_costate(model, u, c, t, 1e-5),
                                evolve_state(model, u, x, t, 1e-5));
    };
    const double centered = (phi_at(2 * h) - 2 * phi_at(h) + phi_at(0.0)) / (h * h);
    const SecondOrder so = second_order_bruteforce(model, c, evolve_state(model, u, x, h, 1e-5),
                                                   u, {2 * h, 1e-3 * u});
    CHECK(u * so.gfg + so.ffg == doctest::Approx(centered).epsilon(2e-2));
  }

  SUBCASE("method selection and argument checks") {
    CHECK(default_second_order_method(make_model(ChannelKind::Flipping)) ==
          SecondOrderMethod::AnalyticFlipping);
    CHECK(default_second_order_method(make_model(ChannelKind::None)) ==
          SecondOrderMethod::AnalyticFlipping);
    CHECK(default_second_order_method(make_model(ChannelKind::Dephasing)) ==
          SecondOrderMethod::BruteForce);
    CHECK(default_second_order_method(make_model(ChannelKind::Flipping, 1.5, 2, 10.0, 0.2)) ==
          SecondOrderMethod::BruteForce);
    const Model deph = make_model(ChannelKind::Dephasing);
    const AugmentedState x{coherent_x_state(2), Operator::Zero(4, 4)};
    const CostatePair c{Operator::Identity(4, 4), Operator::Zero(4, 4)};
    CHECK_THROWS_AS(second_order_analytic(deph, c, x), std::invalid_argument);
  }
}

TEST_CASE("singular control formula") {
  CHECK(singular_control(-2.0, 4.0).value() == doctest::Approx(2.0));
  CHECK_FALSE(singular_control(1e-12, 4.0).has_value());
  CHECK(singular_control(-1e-6, 0.0).has_value());
}

TEST_CASE("legendre-clebsch intervals") {
  const std::vector<double> negative(10, -1.0);
  CHECK(check_legendre_clebsch(negative, 1.0, 0.0).empty());

  std::vector<double> gfg(10, -1.0);
  gfg[1] = gfg[2] = 0.5;
  gfg[7] = 0.1;
  const auto intervals = check_legendre_clebsch(gfg, 2.0, 0.0);
  REQUIRE(intervals.size() == 2);
  CHECK(intervals[0].begin == doctest::Approx(0.2));
  CHECK(intervals[0].end == doctest::Approx(0.6));
  CHECK(intervals[1].begin == doctest::Approx(1.4));
  CHECK(intervals[1].end == doctest::Approx(1.6));
  CHECK(check_legendre_clebsch(gfg, 2.0, 0.2).size() == 1);
}

TEST_CASE("first-order classification") {
  PmpDiagnostics d;
  d.phi = {-0.5, 0.4, 1e-6, 0.3, -0.2};
  d.hoc = {-1.0, -1.0, -1.0, -1.0, -1.0};
  ControlProtocol u = ControlProtocol::constant(1.0, 5, 0.0, 2.0);
  u.values = {2.0, -2.0, 0.7, 2.0, 1.0};
  const FirstOrderReport r = check_first_order(d, u, 1e-3, 1e-6);
  REQUIRE(r.classes.size() == 5);
  CHECK(r.classes[0] == SegmentClass::BangPlus);
  CHECK(r.classes[1] == SegmentClass::BangMinus);
  CHECK(r.classes[2] == SegmentClass::Singular);
  CHECK(r.classes[3] == SegmentClass::Violation);  // at +u_max but Phi > 0
  CHECK(r.classes[4] == SegmentClass::Violation);  // interior with large Phi
  CHECK(r.violations == 2);
  CHECK(r.count(SegmentClass::BangPlus) == 1);
  CHECK(r.hoc_flat);
  CHECK(r.hoc_mean == doctest::Approx(-1.0));
  CHECK(to_string(SegmentClass::BangPlus) == "bang");
  CHECK(to_string(SegmentClass::BangMinus) == "bang");
  CHECK(to_string(SegmentClass::Singular) == "singular");
  CHECK(to_string(SegmentClass::Violation) == "violation");

  SUBCASE("zero costates make every segment trivially singular") {
    PmpDiagnostics z;
    z.phi.assign(5, 0.0);
    z.hoc.assign(5, 0.0);
    const FirstOrderReport zr = check_first_order(z, u, 1e-12, 1e-12);
    CHECK(zr.count(SegmentClass::Singular) == 5);
    CHECK(zr.violations == 0);
  }
  SUBCASE("uneven hoc is reported") {
    d.hoc = {-1.0, -1.1, -1.0, -1.0, -1.0};
    CHECK_FALSE(check_first_order(d, u, 1e-3, 1e-3).hoc_flat);
  }
}

TEST_CASE("diagnostics on a perturbed stationary point flag the perturbed segments") {
  // A noiseless short-horizon problem driven to a stationary point by
  // backtracking descent with a tight tolerance.
  const Model model = make_model(ChannelKind::None, 0.0, 2, 1.0);
  const Operator rho0 = coherent_x_state(2);
  OptimizerConfig cfg;
  cfg.max_iters = 5000;
  cfg.learning_rate = 8.0;
  cfg.tol_grad = 1e-9;
  cfg.substeps = 20;
  const ControlProtocol u =
      descend_from(model, ControlProtocol::constant(0.5, 6, 0.0), cfg, rho0).best;
  const PmpDiagnostics base = compute_diagnostics(model, u, rho0, {}, 20);
  double phi_max = 0.0;
  for (double p : base.phi) phi_max = std::max(phi_max, std::abs(p));
  REQUIRE(phi_max < 1e-6);
  const FirstOrderReport ok = check_first_order(base, u, 1e-4, 1e-3);
  CHECK(ok.violations == 0);
  CHECK(ok.hoc_flat);

  ControlProtocol bent = u;
  bent.values[3] += 0.5;
  const FirstOrderReport bad = check_first_order(compute_diagnostics(model, bent, rho0, {}, 20),
                                                 bent, 1e-4, 1e-3);
  CHECK(bad.violations >= 1);
  CHECK(bad.classes[3] == SegmentClass::Violation);
}

TEST_CASE("diagnostics layout") {
  const Model model = make_model(ChannelKind::Dephasing);
  const ControlProtocol u = ControlProtocol::constant(0.5, 5, 1.0);
  const PmpDiagnostics d = compute_diagnostics(model, u, coherent_x_state(2), {}, 20);
  REQUIRE(d.times.size() == 5);
  CHECK(d.times[0] == doctest::Approx(0.05));
  CHECK(d.phi.size() == 5);
  CHECK(d.hoc.size() == 5);
  CHECK(d.gfg.size() == 5);
  CHECK(d.ffg.size() == 5);
  CHECK(d.u_sing.size() == 5);
  CHECK(d.fisher_T == doctest::Approx(evaluate_fisher(model, u, coherent_x_state(2), {}, 20)));
}
