#pragma once

#include <utility>

#include "cavtel/hilbert.hpp"
#include "cavtel/model.hpp"
#include "cavtel/types.hpp"

namespace cavtel {

/// Amplitudes of one node restricted to the protocol subspace
/// {|00>, |10>, |01>}. The |00> component never evolves.
struct SubspaceAmplitudes {
  Complex c00{0.0};
  Complex c10{0.0};
  Complex c01{0.0};

  double norm2() const {
    return std::norm(c00) + std::norm(c10) + std::norm(c01);
  }
};

/// Damped vacuum-Rabi frequency sqrt(4*delta^2 - kappa^2), rad/us.
double omega_kappa(const PhysicalParams& p);

/// Closed-form conditional evolution of one node for time t. With the
/// laser on, |10> and |01> mix at omega_kappa under the common factor
/// e^{i delta t} e^{-kappa t/2}; with the laser off, |01> picks up
/// e^{i delta t} e^{-kappa t} and |10> is frozen.
SubspaceAmplitudes propagate_closed_form(const SubspaceAmplitudes& s, double t,
                                         bool laser_on,
                                         const PhysicalParams& p);

/// Laser-on time mapping the atomic qubit onto the cavity mode:
/// (2/omega_kappa) * (pi - arctan(omega_kappa/kappa)).
double t_map(const PhysicalParams& p);

/// Laser-on time creating the equal-amplitude atom-photon state:
/// (2/omega_kappa) * arctan(omega_kappa/(2*delta - kappa)).
double t_entangle(const PhysicalParams& p);

/// No-collapse probability of the mapping step, |alpha|^2 + e^{-k tA}|beta|^2.
double prob_prep_alice(const QubitState& q, const PhysicalParams& p);

/// No-collapse probability of the entangling step,
/// e^{-k tB} (8 delta^2/omega_kappa^2) sin^2(omega_kappa tB / 2).
double prob_prep_bob(const PhysicalParams& p);

/// Detection window satisfying e^{i delta t_d} = -1: pi*(2m+1)/delta.
double t_detect_choice(const PhysicalParams& p, int m);

/// The transfer amplitudes (phi, vartheta) of the compensation step as
/// functions of its duration t_c, for a preceding detection window t_d.
std::pair<double, double> compensation_functions(double t_c, double t_d,
                                                 const PhysicalParams& p);

/// Smallest t_c >= 0 with e^{-kappa (tA+tc)/2} * vartheta(tc) = 1.
/// Throws InfeasibleCompensationError when no such time exists.
double t_compensate(const PhysicalParams& p, double t_d);

/// Duration maximizing the compensated amplitude
/// e^{-kappa (tA+tc)/2} * vartheta(tc).
double t_compensate_max(const PhysicalParams& p, double t_d);

/// Largest detection window for which full compensation is still possible,
/// i.e. the t_d where the maximal compensated amplitude equals 1. Throws
/// InfeasibleCompensationError when even t_d -> 0 cannot compensate
/// (kappa too large).
double t_detect_max(const PhysicalParams& p);

enum class Stage {
  PostPrepAlice,
  PostPrepBob,
  PostDetectI,
  PostCompensation,
  PostDetectII,
};

/// Stage times entering the reference-state formulas.
struct AnalyticTimes {
  double t_A = 0.0;
  double t_B = 0.0;
  double t_d = 0.0;
  double t_c = 0.0;
};

/// All analytic stage times for the given m (t_c = 0 when compensation is
/// infeasible at pi*(2m+1)/delta; callers that need to distinguish should
/// call t_compensate directly).
AnalyticTimes analytic_times(const PhysicalParams& p, int m = 0);

/// Unnormalized reference state of the modified protocol after the given
/// stage, in the joint basis. PostPrepAlice is Alice's mapped node joined
/// with Bob's initial |10>; PostPrepBob is Alice's renormalized mapped node
/// joined with Bob's unnormalized entangled node (so its squared norm is
/// the entangling no-collapse probability). The detection-I state assumes
/// the phase condition e^{i delta t_d} = -1.
Vector ideal_stage_state(const QubitState& q, const PhysicalParams& p,
                         int epsilon, Stage stage, const AnalyticTimes& times,
                         const JointBasis& basis);

/// Convenience overload using analytic_times(p, m).
Vector ideal_stage_state(const QubitState& q, const PhysicalParams& p,
                         int epsilon, Stage stage, const JointBasis& basis,
                         int m = 0);

}  // namespace cavtel
