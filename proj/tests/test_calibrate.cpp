#include <doctest.h>

#include <cavtel/calibrate.hpp>

#include <cmath>
#include <numbers>

using namespace cavtel;

namespace {

PhysicalParams params_kappa(double kappa_mhz, double gamma_mhz = 0.0) {
  return PhysicalParams::from_mhz(100, 10, 10, gamma_mhz, kappa_mhz);
}

// Deterministic no-jump state of one node evolved from |10> with the
// laser on.
Vector evolve_mapping(const PhysicalParams& p, ModelKind model, double t) {
  const SiteBasis b;
  const Matrix h = model == ModelKind::Full
                       ? full_site_hamiltonian(p, true, b)
                       : effective_site_hamiltonian(p, true, b);
  Vector psi = Vector::Zero(b.dim());
  psi(b.index(1, 0)) = 1.0;
  return SegmentPropagator(h).apply(psi, t);
}

// Joint state heralded by C+ at the start of the detection window and
// evolved for t_d with the lasers off.
Vector heralded_state(const PhysicalParams& p, ModelKind model, double t_A,
                      double t_B, double t_d, const JointBasis& basis) {
  Vector psi = initial_joint_state(
      QubitState(1 / std::numbers::sqrt2, 1 / std::numbers::sqrt2), basis);
  psi = SegmentPropagator(joint_hamiltonian(p, {true, false}, model, basis))
            .apply(psi, t_A - t_B);
  psi = SegmentPropagator(joint_hamiltonian(p, {true, true}, model, basis))
            .apply(psi, t_B);
  psi = detection_collapse_ops(p, basis)[0].op * psi;
  return SegmentPropagator(joint_hamiltonian(p, {false, false}, model, basis))
      .apply(psi, t_d);
}

}  // namespace

TEST_CASE("mapping-time calibration") {
  SUBCASE("effective model recovers the closed form") {
    for (double k : {0.05, 0.12, 0.2}) {
      const auto p = params_kappa(k);
      CHECK(std::abs(calibrate_mapping_time(p, ModelKind::Effective) -
                     t_map(p)) < 1e-6);
    }
  }
  SUBCASE("full model leaves almost nothing behind") {
    const auto p = params_kappa(0.265);
    const double t = calibrate_mapping_time(p, ModelKind::Full);
    const Vector psi = evolve_mapping(p, ModelKind::Full, t);
    const SiteBasis b;
    const double residual =
        std::norm(psi(b.index(1, 0))) / psi.squaredNorm();
    CHECK(residual < 1e-3);
    // no worse than the closed-form seed
    CHECK(detail::mapping_objective_at(p, ModelKind::Full, t) >=
          detail::mapping_objective_at(p, ModelKind::Full, t_map(p)));
  }
}

TEST_CASE("entangling-time calibration") {
  SUBCASE("effective model recovers the closed form") {
    for (double k : {0.05, 0.12, 0.2}) {
      const auto p = params_kappa(k);
      CHECK(std::abs(calibrate_entangling_time(p, ModelKind::Effective) -
                     t_entangle(p)) < 1e-6);
    }
  }
  SUBCASE("lossless limit") {
    const auto p0 = PhysicalParams::from_mhz(100, 10, 10, 0, 0);
    CHECK(calibrate_entangling_time(p0, ModelKind::Effective) ==
          doctest::Approx(0.25 * std::numbers::pi / p0.raman_delta())
              .epsilon(1e-7));
  }
  SUBCASE("equal amplitude moduli at the optimum") {
    // exact in the Raman model; the three-level model trades modulus
    // balance against the excited-state admixture
    for (ModelKind model : {ModelKind::Effective, ModelKind::Full}) {
      const auto p = params_kappa(0.12);
      const double t = calibrate_entangling_time(p, model);
      const SiteBasis b;
      const Matrix h = model == ModelKind::Full
                           ? full_site_hamiltonian(p, true, b)
                           : effective_site_hamiltonian(p, true, b);
      Vector psi = Vector::Zero(b.dim());
      psi(b.index(1, 0)) = 1.0;
      psi = SegmentPropagator(h).apply(psi, t);
      const double m10 = std::abs(psi(b.index(1, 0)));
      const double m01 = std::abs(psi(b.index(0, 1)));
      const double tol = model == ModelKind::Effective ? 1e-6 : 0.05;
      CHECK(std::abs(m10 - m01) / m10 < tol);
    }
  }
}

TEST_CASE("detection-time calibration") {
  SUBCASE("effective model recovers pi(2m+1)/delta") {
    const auto p = params_kappa(0.12);
    for (int m : {0, 1}) {
      CHECK(std::abs(calibrate_detection_time(p, ModelKind::Effective, m) -
                     t_detect_choice(p, m)) < 1e-8);
    }
  }
  SUBCASE("full model pins the heralded relative phase at -pi/2") {
    const auto p = params_kappa(0.12);
    const double t_A = calibrate_mapping_time(p, ModelKind::Full);
    const double t_B = calibrate_entangling_time(p, ModelKind::Full);
    const double t_d = calibrate_detection_time(p, ModelKind::Full, 0);
    const JointBasis basis;
    const Vector psi = heralded_state(p, ModelKind::Full, t_A, t_B, t_d, basis);
    const Complex ratio =
        psi(basis.index(0, 0, 0, 1)) / psi(basis.index(0, 0, 1, 0));
    CHECK(std::abs(std::remainder(std::arg(ratio) + 0.5 * std::numbers::pi,
                                  two_pi)) < 1e-3);
  }
  SUBCASE("objective is concave at the optimum") {
    const auto p = params_kappa(0.12);
    const double t_A = calibrate_mapping_time(p, ModelKind::Full);
    const double t_B = calibrate_entangling_time(p, ModelKind::Full);
    const double t_d = calibrate_detection_time(p, ModelKind::Full, 0);
    const JointBasis basis;
    auto objective = [&](double t) {
      const Vector psi = heralded_state(p, ModelKind::Full, t_A, t_B, t, basis);
      AnalyticTimes times{t_A, t_B, t, 0.0};
      const Vector target = ideal_stage_state(
          QubitState(1 / std::numbers::sqrt2, 1 / std::numbers::sqrt2), p, +1,
          Stage::PostDetectI, times, basis);
      return std::norm(target.dot(psi)) /
             (target.squaredNorm() * psi.squaredNorm());
    };
    const double h = 1e-4;
    CHECK(objective(t_d + h) + objective(t_d - h) - 2.0 * objective(t_d) < 0.0);
  }
}

TEST_CASE("compensation-time calibration") {
  SUBCASE("effective model recovers the closed-form root") {
    const auto p = params_kappa(0.12);
    const double t_d = t_detect_choice(p, 0);
    CHECK(std::abs(calibrate_compensation_time(p, ModelKind::Effective, t_d) -
                   t_compensate(p, t_d)) < 1e-8);
  }
  SUBCASE("zero loss needs no compensation") {
    const auto p0 = PhysicalParams::from_mhz(100, 10, 10, 0, 0);
    CHECK(calibrate_compensation_time(p0, ModelKind::Effective,
                                      t_detect_choice(p0, 0)) == 0.0);
  }
  SUBCASE("full model restores the amplitude ratio to 1e-3") {
    const auto p = params_kappa(0.12);
    const double t_A = calibrate_mapping_time(p, ModelKind::Full);
    const double t_B = calibrate_entangling_time(p, ModelKind::Full);
    const double t_d = calibrate_detection_time(p, ModelKind::Full, 0);
    const double t_c = calibrate_compensation_time(p, ModelKind::Full, t_d);
    const JointBasis basis;
    Vector psi = heralded_state(p, ModelKind::Full, t_A, t_B, t_d, basis);
    psi = SegmentPropagator(joint_hamiltonian(p, {false, true},
                                              ModelKind::Full, basis))
              .apply(psi, t_c);
    const double ratio = std::abs(psi(basis.index(0, 0, 1, 0))) /
                         std::abs(psi(basis.index(0, 0, 0, 0)));
    CHECK(std::abs(ratio - 1.0) < 1e-3);
  }
  SUBCASE("infeasible past the closed-form limit") {
    const auto p = params_kappa(0.20);
    CHECK_THROWS_AS(calibrate_compensation_time(p, ModelKind::Effective,
                                                t_detect_choice(p, 0)),
                    InfeasibleCompensationError);
  }
}

TEST_CASE("recovery-phase calibration") {
  const auto p = params_kappa(0.12);

  SUBCASE("effective model matches the heralded phase factor") {
    const CalibrationReport rep = calibrate_schedule(
        p, ModelKind::Effective, ProtocolKind::Modified);
    const double expected_base =
        p.raman_delta() * (rep.schedule.t_A + rep.schedule.t_c);
    for (int eps : {+1, -1}) {
      const double theta =
          eps == 1 ? rep.schedule.theta_plus : rep.schedule.theta_minus;
      const double derived = eps * 0.5 * std::numbers::pi - expected_base;
      CHECK(std::abs(std::remainder(theta - derived, two_pi)) < 1e-8);
    }
    CHECK(std::abs(std::remainder(rep.schedule.theta_plus -
                                      rep.schedule.theta_minus -
                                      std::numbers::pi,
                                  two_pi)) < 1e-8);
  }
  SUBCASE("original protocol phase tracks t_A only") {
    const CalibrationReport rep = calibrate_schedule(
        p, ModelKind::Effective, ProtocolKind::Original);
    const double derived =
        0.5 * std::numbers::pi - p.raman_delta() * rep.schedule.t_A;
    CHECK(std::abs(std::remainder(rep.schedule.theta_plus - derived, two_pi)) <
          1e-8);
  }
  SUBCASE("the phased reference pass teleports exactly") {
    const CalibrationReport rep = calibrate_schedule(
        p, ModelKind::Effective, ProtocolKind::Modified);
    const ProtocolMachine machine(ProtocolKind::Modified, p, rep.schedule,
                                  ModelKind::Effective);
    const QubitState q(0.6, Complex(0.48, 0.64));
    Vector out = machine.reference_pass(q, +1);
    out.normalize();
    CHECK(qubit_fidelity(q, out, machine.basis()) > 1.0 - 1e-6);
  }
}

TEST_CASE("schedule calibration is deterministic and sane") {
  const auto p = params_kappa(0.12, 1.0);
  const CalibrationReport a =
      calibrate_schedule(p, ModelKind::Full, ProtocolKind::Modified);
  const CalibrationReport b =
      calibrate_schedule(p, ModelKind::Full, ProtocolKind::Modified);
  CHECK(a.schedule.t_A == b.schedule.t_A);
  CHECK(a.schedule.t_B == b.schedule.t_B);
  CHECK(a.schedule.t_d == b.schedule.t_d);
  CHECK(a.schedule.t_c == b.schedule.t_c);
  CHECK(a.schedule.theta_plus == b.schedule.theta_plus);
  CHECK(a.schedule.theta_minus == b.schedule.theta_minus);

  CHECK(a.flags.empty());
  CHECK(a.compensation_exact);
  CHECK(a.schedule.t_D == doctest::Approx(10.0 / p.kappa()));
  CHECK(a.mapping_objective > 0.99);
  CHECK(a.detection_objective > 0.99);

  // seeds within the trust region of their calibrated values
  CHECK(std::abs(a.schedule.t_A - a.seeds.t_A) < 0.5 * a.seeds.t_A);
  CHECK(std::abs(a.schedule.t_d - a.seeds.t_d) < 0.5 * a.seeds.t_d);
}

TEST_CASE("compensation fallback is flagged, not fatal") {
  const auto p = params_kappa(0.20);
  const CalibrationReport rep =
      calibrate_schedule(p, ModelKind::Effective, ProtocolKind::Modified);
  CHECK(!rep.compensation_exact);
  CHECK(rep.compensation_ratio < 1.0);
  REQUIRE(!rep.flags.empty());
  CHECK(rep.flags[0].find("compensation") != std::string::npos);
  // the full model still compensates there thanks to the excited state
  const CalibrationReport full =
      calibrate_schedule(p, ModelKind::Full, ProtocolKind::Modified);
  CHECK(full.compensation_exact);
}

TEST_CASE("mapping branch jumps cross at equal objectives") {
  // As kappa grows, the winning interference lobe of the mapping objective
  // hops; at the hop the two competing lobes must tie.
  const double step = 0.01;
  double prev_t = -1.0, jump_lo = -1.0, jump_hi = -1.0;
  for (double k = 0.05; k <= 0.305; k += step) {
    const auto p = params_kappa(k);
    const double t = calibrate_mapping_time(p, ModelKind::Full);
    const double lobe = two_pi / p.delta_detuning();
    if (prev_t >= 0.0 && std::abs(t - prev_t) > 0.5 * lobe) {
      jump_lo = k - step;
      jump_hi = k;
      break;
    }
    prev_t = t;
  }
  REQUIRE(jump_lo > 0.0);

  // refine the crossing point and compare the two lobes there
  auto winner_time = [&](double k) {
    return calibrate_mapping_time(params_kappa(k), ModelKind::Full);
  };
  const double t_left = winner_time(jump_lo);
  const double t_right = winner_time(jump_hi);
  auto lobe_value = [&](double k, double t_center) {
    const auto p = params_kappa(k);
    const double half = 0.4 * two_pi / p.delta_detuning();
    int iters = 0;
    const auto maxima = detail::local_maxima(
        [&](double t) {
          return detail::mapping_objective_at(p, ModelKind::Full, t);
        },
        t_center - half, t_center + half, half / 12.0, 1e-10, &iters);
    double best = 0.0;
    for (const auto& m : maxima) best = std::max(best, m.value);
    return best;
  };
  double lo = jump_lo, hi = jump_hi;
  for (int i = 0; i < 30; ++i) {
    const double mid = 0.5 * (lo + hi);
    (lobe_value(mid, t_left) > lobe_value(mid, t_right) ? lo : hi) = mid;
  }
  const double k_star = 0.5 * (lo + hi);
  CHECK(std::abs(lobe_value(k_star, t_left) - lobe_value(k_star, t_right)) <
        1e-6);
}
