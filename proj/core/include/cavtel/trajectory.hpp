#pragma once

#include <memory>
#include <vector>

#include "cavtel/model.hpp"
#include "cavtel/rng.hpp"
#include "cavtel/types.hpp"

namespace cavtel {

/// Detector characteristics. eta is the intrinsic quantum efficiency,
/// eta_p collects propagation losses between cavity and detector, and
/// dark_rate is the spurious click rate per detector in 1/us.
///
/// A jump through a detection channel is observed with probability
/// eta*eta_p; the mirror-absorption share eta_a = kappa_t/kappa arises
/// from channel competition, so the overall detection efficiency is
/// eta' = eta_a * eta_p * eta.
class DetectorModel {
 public:
  DetectorModel(double eta, double eta_p, double dark_rate);

  double eta() const { return eta_; }
  double eta_p() const { return eta_p_; }
  double dark_rate() const { return dark_rate_; }

  /// Bernoulli probability that a detection-channel jump is observed.
  double observe_prob() const { return eta_ * eta_p_; }

  /// kappa_t / kappa (1 when the cavity does not decay at all).
  static double eta_a(const PhysicalParams& p);

  /// eta_a * eta_p * eta.
  double overall_efficiency(const PhysicalParams& p) const;

  static DetectorModel perfect() { return DetectorModel(1.0, 1.0, 0.0); }

 private:
  double eta_, eta_p_, dark_rate_;
};

enum class EventKind {
  ClickPlus,
  ClickMinus,
  DarkPlus,
  DarkMinus,
  UnobservedLoss,
  SpontaneousEmission,
};

/// Click and Dark events are observed; losses and spontaneous emission
/// are not.
bool is_observed(EventKind kind);
bool is_plus(EventKind kind);
const char* to_string(EventKind kind);

struct Event {
  double time = 0.0;  // us from segment start
  EventKind kind = EventKind::UnobservedLoss;
  bool observed = false;
};

/// Time-ordered events of one segment. finalize() sorts by time and checks
/// the record invariants (bounds, monotonicity, observed flags).
class EventRecord {
 public:
  EventRecord() = default;
  explicit EventRecord(double duration) : duration_(duration) {}

  void add(double time, EventKind kind);
  void finalize();

  double duration() const { return duration_; }
  const std::vector<Event>& events() const { return events_; }
  int observed_click_count() const;

  /// Merge another record whose segment starts time_offset after ours.
  void append_shifted(const EventRecord& other, double time_offset);

 private:
  double duration_ = 0.0;
  std::vector<Event> events_;
};

/// Evaluates exp(-iHt)|psi> for the fixed H of one segment at arbitrary t.
/// Diagonalizes H once; if the eigenbasis is too ill-conditioned to trust,
/// falls back to scaling-and-squaring matrix exponentials per call.
class SegmentPropagator {
 public:
  explicit SegmentPropagator(Matrix h);

  const Matrix& hamiltonian() const { return h_; }
  bool spectral() const { return spectral_; }

  Vector apply(const Vector& psi, double t) const;

  /// Precomputed eigenbasis coordinates of a state, for repeated
  /// evaluations at many times.
  struct Prepared {
    Vector data;  // eigen coordinates (spectral) or the raw state
  };
  Prepared prepare(const Vector& psi) const;
  Vector apply_prepared(const Prepared& prep, double t) const;
  double norm2_prepared(const Prepared& prep, double t) const;

  /// Allocation-free evaluation into caller scratch (out = exp(-iHt)psi).
  void eval_prepared(const Prepared& prep, double t, Vector& phased,
                     Vector& out) const;

 private:
  Matrix h_;
  bool spectral_ = false;
  Vector eigvals_;   // of -iH, so exp(eigvals*t) propagates
  Matrix vecs_;
  Matrix vecs_inv_;
};

/// exp(-iHt) as a dense matrix (scaling-and-squaring Pade).
Matrix no_jump_propagator(const Matrix& h, double t);

/// One piece of piecewise-constant conditional evolution: a joint
/// Hamiltonian, its collapse channels, and a duration.
class SegmentSpec {
 public:
  SegmentSpec(Matrix hamiltonian, std::vector<CollapseOp> collapse_ops,
              double duration);

  /// Build from physical parameters; verifies channel completeness
  /// sum_k C_k^dag C_k = i(H - H^dag) at construction.
  static SegmentSpec from_params(const PhysicalParams& p, LaserSetting lasers,
                                 ModelKind model, double duration,
                                 const JointBasis& basis);

  const Matrix& hamiltonian() const { return propagator_->hamiltonian(); }
  const std::vector<CollapseOp>& collapse_ops() const { return ops_; }
  double duration() const { return duration_; }
  const SegmentPropagator& propagator() const { return *propagator_; }

 private:
  std::shared_ptr<const SegmentPropagator> propagator_;
  std::vector<CollapseOp> ops_;
  double duration_;
};

struct SegmentResult {
  Vector state;             // normalized state at segment end
  EventRecord record;
  double survival_prob;     // no-jump probability of the final stretch
};

enum class JumpMethod { WaitingTime, FixedStep };

struct RunOptions {
  JumpMethod method = JumpMethod::WaitingTime;
  double fixed_dt = 1e-3;  // us, FixedStep only
};

/// Propagate one normalized state through a segment: waiting-time
/// unraveling of the jump process, Bernoulli observation of detection
/// jumps, and independent Poisson dark counts on both detectors.
SegmentResult run_segment(const Vector& psi, const SegmentSpec& spec,
                          const DetectorModel& det, RngStream& rng,
                          const RunOptions& options = {});

/// Homogeneous Poisson arrivals on [0, duration) via exponential gaps.
std::vector<double> sample_dark_counts(double duration, double rate,
                                       RngStream& rng);

}  // namespace cavtel
