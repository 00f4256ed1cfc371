#pragma once

#include <string>
#include <vector>

#include "cavtel/hilbert.hpp"
#include "cavtel/types.hpp"

namespace cavtel {

/// Physical rates of one node, stored as angular frequencies in rad/us.
/// Times are in us throughout. Inputs quoted as nu-values in MHz (the
/// lab convention) are converted once via from_mhz().
class PhysicalParams {
 public:
  /// All arguments angular, rad/us. Requires delta_detuning > 0, all rates
  /// >= 0 and the underdamped condition 2*g^2/Delta > kappa_t + kappa_a.
  PhysicalParams(double delta_detuning, double omega_laser, double g_coupling,
                 double gamma, double kappa_t, double kappa_a,
                 double branch_to_0 = 0.5);

  /// Construct from nu-values in MHz (each multiplied by 2*pi).
  static PhysicalParams from_mhz(double delta_mhz, double omega_mhz,
                                 double g_mhz, double gamma_mhz,
                                 double kappa_t_mhz, double kappa_a_mhz = 0.0,
                                 double branch_to_0 = 0.5);

  double delta_detuning() const { return delta_; }
  double omega_laser() const { return omega_; }
  double g_coupling() const { return g_; }
  double gamma() const { return gamma_; }
  double kappa_t() const { return kappa_t_; }
  double kappa_a() const { return kappa_a_; }

  /// Fraction of the excited-state decay feeding |2> -> |0>. The level
  /// scheme fixes only the total rate; the split is a free parameter.
  double branch_to_0() const { return branch_to_0_; }

  double kappa() const { return kappa_t_ + kappa_a_; }       // total decay
  double raman_delta() const { return g_ * g_ / delta_; }    // g^2/Delta

  /// Damped vacuum-Rabi frequency sqrt(4*delta^2 - kappa^2).
  double omega_kappa() const;

  /// Non-fatal sanity warnings (low-saturation limit violated, ...).
  std::vector<std::string> warnings() const;

  PhysicalParams with_kappa_t(double kappa_t) const;

 private:
  double delta_, omega_, g_, gamma_, kappa_t_, kappa_a_, branch_to_0_;
};

struct LaserSetting {
  bool alice_on = false;
  bool bob_on = false;
};

/// Tag attached to each collapse operator; decides how a jump through the
/// channel is recorded and whether it can be observed.
enum class ChannelKind { DetectionPlus, DetectionMinus, Absorption, Spontaneous };

struct CollapseOp {
  Matrix op;
  ChannelKind kind;
};

/// Three-level Hamiltonian of one node,
/// (Delta - i*gamma) s22 + (Omega s21 + g a s20 + h.c.) - i*kappa n.
/// Omega is replaced by 0 when the laser is off.
Matrix full_site_hamiltonian(const PhysicalParams& p, bool laser_on,
                             const SiteBasis& b);

/// Raman Hamiltonian with the excited state eliminated (requires
/// Omega == g, level |2> kept in the basis but decoupled):
///   on:  -delta s11 - delta n s00 - (delta a s10 + h.c.) - i*kappa n
///   off: -delta n s00 - i*kappa n
Matrix effective_site_hamiltonian(const PhysicalParams& p, bool laser_on,
                                  const SiteBasis& b);

/// Sum of the two embedded site Hamiltonians with per-site laser settings.
Matrix joint_hamiltonian(const PhysicalParams& p, LaserSetting lasers,
                         ModelKind model, const JointBasis& basis);

/// Beam-splitter detection channels C_eps = sqrt(kappa_t) (a_A + i eps a_B),
/// eps = +1 for D+ and -1 for D-.
std::vector<CollapseOp> detection_collapse_ops(const PhysicalParams& p,
                                               const JointBasis& basis);

/// Mirror absorption channels sqrt(2*kappa_a) a on each node.
std::vector<CollapseOp> absorption_collapse_ops(const PhysicalParams& p,
                                                const JointBasis& basis);

/// Excited-state emission channels on each node. With branching ratio r
/// to level 0: sqrt(2*gamma*r) s02 and sqrt(2*gamma*(1-r)) s12, so the
/// channel rates always sum to the 2*gamma population decay of level 2.
std::vector<CollapseOp> spontaneous_collapse_ops(const PhysicalParams& p,
                                                 const JointBasis& basis);

/// All collapse channels present for the given model (the effective model
/// carries no spontaneous channels).
std::vector<CollapseOp> collapse_ops(const PhysicalParams& p, ModelKind model,
                                     const JointBasis& basis);

}  // namespace cavtel
