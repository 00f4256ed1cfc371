#pragma once

#include <optional>
#include <vector>

#include "cavtel/analytic.hpp"
#include "cavtel/trajectory.hpp"

namespace cavtel {

/// Calibrated stage times (us) and the detector-conditioned recovery
/// phases. The original protocol ignores t_d and t_c.
struct StageSchedule {
  double t_A = 0.0;
  double t_B = 0.0;
  double t_d = 0.0;
  double t_c = 0.0;
  double t_D = 0.0;
  double theta_plus = 0.0;
  double theta_minus = 0.0;

  /// Non-fatal warnings (negative times are hard errors in validate()).
  std::vector<std::string> warnings(const PhysicalParams& p) const;
  void validate() const;
};

enum class RejectReason { None, ClickInNoClickStage, WrongClickCountDetection };

enum class StageId { Preparation, DetectionI, Compensation, DetectionII };
const char* to_string(StageId id);

struct StageRecord {
  StageId id;
  EventRecord record;
};

struct RunOutcome {
  bool accepted = false;
  std::optional<int> epsilon;      // +1 for D+, -1 for D-
  std::optional<double> fidelity;  // present iff accepted
  std::vector<StageRecord> records;
  RejectReason reject_reason = RejectReason::None;
};

/// How Alice's mapping window and Bob's entangling window are aligned in
/// the preparation stage. CoTerminate starts Bob's laser t_A - t_B after
/// Alice's so that both finish together.
enum class PrepAlignment { CoTerminate, StartAligned };

struct ProtocolOptions {
  PrepAlignment prep_alignment = PrepAlignment::CoTerminate;
  RunOptions run;
};

/// Precompiled stage segments for one (params, model, schedule) triple;
/// immutable and shared across trajectories.
class ProtocolMachine {
 public:
  ProtocolMachine(ProtocolKind kind, const PhysicalParams& p,
                  const StageSchedule& sched, ModelKind model,
                  const JointBasis& basis = JointBasis(),
                  ProtocolOptions options = {});

  RunOutcome run(const QubitState& input, const DetectorModel& det,
                 RngStream& rng) const;

  /// Deterministic no-jump pass with an imposed detection outcome: the
  /// collapse C_eps is applied at the start of the detection stage and no
  /// other jump occurs. Used by calibration. Returns the unnormalized
  /// state before recovery, or after recovery if apply_phase is set.
  Vector reference_pass(const QubitState& input, int epsilon,
                        bool apply_phase = true) const;

  ProtocolKind kind() const { return kind_; }
  const JointBasis& basis() const { return basis_; }
  const StageSchedule& schedule() const { return sched_; }

 private:
  ProtocolKind kind_;
  PhysicalParams params_;
  StageSchedule sched_;
  ModelKind model_;
  JointBasis basis_;
  ProtocolOptions options_;
  std::vector<SegmentSpec> prep_segments_;   // co-terminating split
  std::vector<SegmentSpec> post_segments_;   // detection I [, comp, det II]
};

/// Joint initial state (alpha|00> + beta|10>)_A (x) |10>_B.
Vector initial_joint_state(const QubitState& q, const JointBasis& basis);

/// Acceptance rule on the observed clicks: the heralding stage must show
/// exactly one click (detection for Original, detection I for Modified),
/// every other stage none. Returns (accepted, epsilon, reason).
struct Classification {
  bool accepted = false;
  std::optional<int> epsilon;
  RejectReason reason = RejectReason::None;
};
Classification classify_record(ProtocolKind kind,
                               const std::vector<StageRecord>& records);

/// Multiply every amplitude with Bob's atom in level 1 by e^{i theta(eps)}.
Vector apply_recovery(const Vector& psi, int epsilon,
                      const StageSchedule& sched, const JointBasis& basis);

/// One full stochastic protocol run.
RunOutcome run_protocol(ProtocolKind kind, const QubitState& input,
                        const PhysicalParams& p, const StageSchedule& sched,
                        const DetectorModel& det, ModelKind model,
                        RngStream& rng, const JointBasis& basis = JointBasis(),
                        const ProtocolOptions& options = {});

}  // namespace cavtel
