#include "cavtel/analytic.hpp"

#include <cmath>
#include <functional>
#include <numbers>

#include "cavtel/errors.hpp"

namespace cavtel {

namespace {

const Complex kI(0.0, 1.0);

void check_epsilon(int epsilon) {
  if (epsilon != 1 && epsilon != -1)
    throw ModelError("detector sign must be +1 or -1");
}

}  // namespace

double omega_kappa(const PhysicalParams& p) { return p.omega_kappa(); }

SubspaceAmplitudes propagate_closed_form(const SubspaceAmplitudes& s, double t,
                                         bool laser_on,
                                         const PhysicalParams& p) {
  if (t < 0.0) throw ModelError("propagate_closed_form: negative time");
  const double delta = p.raman_delta();
  const double kappa = p.kappa();
  SubspaceAmplitudes out;
  out.c00 = s.c00;
  if (laser_on) {
    const double ok = p.omega_kappa();
    const double c = std::cos(0.5 * ok * t), sn = std::sin(0.5 * ok * t);
    const Complex g = std::exp(Complex(-0.5 * kappa * t, delta * t));
    const Complex mix = kI * (2.0 * delta / ok) * sn;
    out.c10 = g * ((c + (kappa / ok) * sn) * s.c10 + mix * s.c01);
    out.c01 = g * (mix * s.c10 + (c - (kappa / ok) * sn) * s.c01);
  } else {
    out.c10 = s.c10;
    out.c01 = std::exp(Complex(-kappa * t, delta * t)) * s.c01;
  }
  return out;
}

double t_map(const PhysicalParams& p) {
  const double ok = p.omega_kappa();
  return (2.0 / ok) * (std::numbers::pi - std::atan2(ok, p.kappa()));
}

double t_entangle(const PhysicalParams& p) {
  const double ok = p.omega_kappa();
  return (2.0 / ok) * std::atan2(ok, 2.0 * p.raman_delta() - p.kappa());
}

double prob_prep_alice(const QubitState& q, const PhysicalParams& p) {
  return std::norm(q.alpha()) +
         std::exp(-p.kappa() * t_map(p)) * std::norm(q.beta());
}

double prob_prep_bob(const PhysicalParams& p) {
  const double ok = p.omega_kappa();
  const double tb = t_entangle(p);
  const double d = p.raman_delta();
  const double s = std::sin(0.5 * ok * tb);
  return std::exp(-p.kappa() * tb) * (8.0 * d * d / (ok * ok)) * s * s;
}

double t_detect_choice(const PhysicalParams& p, int m) {
  if (m < 0) throw ModelError("t_detect_choice: m must be >= 0");
  return std::numbers::pi * (2.0 * m + 1.0) / p.raman_delta();
}

std::pair<double, double> compensation_functions(double t_c, double t_d,
                                                 const PhysicalParams& p) {
  if (t_c < 0.0 || t_d < 0.0)
    throw ModelError("compensation_functions: negative time");
  const double ok = p.omega_kappa();
  const double d = p.raman_delta(), k = p.kappa();
  const double e = std::exp(-k * t_d);
  const double c = std::cos(0.5 * ok * t_c), s = std::sin(0.5 * ok * t_c);
  const double phi = e * c - (2.0 * d + k * e) / ok * s;
  const double vartheta = c + (k + 2.0 * d * e) / ok * s;
  return {phi, vartheta};
}

namespace {

// e^{-kappa (tA+tc)/2} * vartheta(tc) - 1, the compensation residual.
double compensation_residual(double t_c, double t_d, double t_A,
                             const PhysicalParams& p) {
  const double vartheta = compensation_functions(t_c, t_d, p).second;
  return std::exp(-0.5 * p.kappa() * (t_A + t_c)) * vartheta - 1.0;
}

// Bisection to floating-point exhaustion; f(lo) and f(hi) must straddle 0.
double bisect(const std::function<double(double)>& f, double lo, double hi,
              double f_lo) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double fm = f(mid);
    if ((fm > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double t_compensate(const PhysicalParams& p, double t_d) {
  if (p.kappa() == 0.0) return 0.0;
  const double t_A = t_map(p);
  const double hi = t_compensate_max(p, t_d);
  auto f = [&](double tc) { return compensation_residual(tc, t_d, t_A, p); };
  const double f_lo = f(0.0);
  if (f(hi) < 0.0)
    throw InfeasibleCompensationError(
        "t_compensate: damping cannot be compensated at this detection time");
  const double root = bisect(f, 0.0, hi, f_lo);
  return root;
}

double t_compensate_max(const PhysicalParams& p, double t_d) {
  const double ok = p.omega_kappa();
  const double d = p.raman_delta(), k = p.kappa();
  const double e = std::exp(-k * t_d);
  return (2.0 / ok) *
         std::atan(2.0 * d * ok * e / (ok * ok + k * (k + 2.0 * d * e)));
}

double t_detect_max(const PhysicalParams& p) {
  const double t_A = t_map(p);
  auto g = [&](double td) {
    return compensation_residual(t_compensate_max(p, td), td, t_A, p);
  };
  const double g0 = g(0.0);
  if (g0 < 0.0)
    throw InfeasibleCompensationError(
        "t_detect_max: kappa too large, compensation impossible at any "
        "detection time");
  double hi = t_detect_choice(p, 0);
  int guard = 0;
  while (g(hi) > 0.0) {
    hi *= 2.0;
    if (++guard > 200)
      throw BracketError("t_detect_max: failed to bracket the root");
  }
  return bisect(g, 0.0, hi, g0);
}

AnalyticTimes analytic_times(const PhysicalParams& p, int m) {
  AnalyticTimes t;
  t.t_A = t_map(p);
  t.t_B = t_entangle(p);
  t.t_d = t_detect_choice(p, m);
  try {
    t.t_c = t_compensate(p, t.t_d);
  } catch (const InfeasibleCompensationError&) {
    t.t_c = 0.0;
  }
  return t;
}

Vector ideal_stage_state(const QubitState& q, const PhysicalParams& p,
                         int epsilon, Stage stage, const AnalyticTimes& times,
                         const JointBasis& basis) {
  check_epsilon(epsilon);
  const double k = p.kappa(), d = p.raman_delta();
  const double eps = double(epsilon);
  const Complex alpha = q.alpha(), beta = q.beta();
  // Alice's mapped amplitude i e^{i delta tA} e^{-kappa tA/2} beta and the
  // same factor without the i, as it appears in the heralded states.
  const Complex damp_a = std::exp(Complex(-0.5 * k * times.t_A, d * times.t_A));
  const Complex beta_mapped = kI * damp_a * beta;

  Vector psi = Vector::Zero(basis.dim());
  auto at = [&](int ja, int na, int jb, int nb) -> Complex& {
    return psi(basis.index(ja, na, jb, nb));
  };

  switch (stage) {
    case Stage::PostPrepAlice: {
      at(0, 0, 1, 0) = alpha;
      at(0, 1, 1, 0) = beta_mapped;
      return psi;
    }
    case Stage::PostPrepBob: {
      const double ok = p.omega_kappa();
      const double nb = std::exp(-0.5 * k * times.t_B) * (2.0 * d / ok) *
                        std::sin(0.5 * ok * times.t_B);
      const double pa = std::norm(alpha) + std::norm(beta_mapped);
      const Complex a_n = alpha / std::sqrt(pa);
      const Complex b_n = beta_mapped / std::sqrt(pa);
      at(0, 0, 1, 0) = a_n * nb;
      at(0, 0, 0, 1) = a_n * kI * nb;
      at(0, 1, 1, 0) = b_n * nb;
      at(0, 1, 0, 1) = b_n * kI * nb;
      return psi;
    }
    case Stage::PostDetectI: {
      const double ed = std::exp(-k * times.t_d);
      at(0, 0, 0, 0) = kI * eps * alpha;
      at(0, 1, 0, 0) = damp_a * beta * ed * eps;
      at(0, 0, 1, 0) = damp_a * beta;
      at(0, 0, 0, 1) = -kI * damp_a * beta * ed;
      return psi;
    }
    case Stage::PostCompensation: {
      const auto [phi, vartheta] =
          compensation_functions(times.t_c, times.t_d, p);
      const Complex rot =
          std::exp(Complex(0.0, d * (times.t_A + times.t_c)));
      const double damp_ac = std::exp(-0.5 * k * (times.t_A + times.t_c));
      at(0, 1, 0, 0) = rot * std::exp(-0.5 * k * times.t_A) * beta *
                       std::exp(-k * (times.t_d + times.t_c)) * eps;
      at(0, 0, 0, 1) = -kI * rot * beta * damp_ac * phi;
      at(0, 0, 1, 0) = rot * beta * damp_ac * vartheta;
      at(0, 0, 0, 0) = kI * eps * alpha;
      return psi;
    }
    case Stage::PostDetectII: {
      at(0, 0, 0, 0) = kI * eps * alpha;
      at(0, 0, 1, 0) =
          std::exp(Complex(0.0, d * (times.t_A + times.t_c))) * beta;
      return psi;
    }
  }
  throw ModelError("ideal_stage_state: unknown stage");
}

Vector ideal_stage_state(const QubitState& q, const PhysicalParams& p,
                         int epsilon, Stage stage, const JointBasis& basis,
                         int m) {
  return ideal_stage_state(q, p, epsilon, stage, analytic_times(p, m), basis);
}

}  // namespace cavtel
