#include "cavtel/protocol.hpp"

#include <cmath>

#include "cavtel/errors.hpp"

namespace cavtel {

namespace {

const Complex kI(0.0, 1.0);

}  // namespace

std::vector<std::string> StageSchedule::warnings(const PhysicalParams& p) const {
  std::vector<std::string> out;
  if (p.kappa() > 0.0 && t_D < 5.0 / p.kappa())
    out.push_back("t_D below 5/kappa: residual photon population will not "
                  "have decayed away");
  return out;
}

void StageSchedule::validate() const {
  if (t_A < 0.0 || t_B < 0.0 || t_d < 0.0 || t_c < 0.0 || t_D < 0.0)
    throw ConfigError("StageSchedule: stage times must be nonnegative");
}

const char* to_string(StageId id) {
  switch (id) {
    case StageId::Preparation: return "preparation";
    case StageId::DetectionI: return "detection-I";
    case StageId::Compensation: return "compensation";
    case StageId::DetectionII: return "detection-II";
  }
  return "?";
}

Vector initial_joint_state(const QubitState& q, const JointBasis& basis) {
  Vector psi = Vector::Zero(basis.dim());
  psi(basis.index(0, 0, 1, 0)) = q.alpha();
  psi(basis.index(1, 0, 1, 0)) = q.beta();
  return psi;
}

Classification classify_record(ProtocolKind kind,
                               const std::vector<StageRecord>& records) {
  auto find = [&](StageId id) -> const EventRecord& {
    for (const StageRecord& r : records)
      if (r.id == id) return r.record;
    throw ModelError("classify_record: missing stage record");
  };

  Classification out;
  if (find(StageId::Preparation).observed_click_count() != 0) {
    out.reason = RejectReason::ClickInNoClickStage;
    return out;
  }

  const EventRecord& herald = find(StageId::DetectionI);
  const Event* click = nullptr;
  int n_clicks = 0;
  for (const Event& e : herald.events()) {
    if (e.observed) {
      ++n_clicks;
      click = &e;
    }
  }
  if (n_clicks != 1) {
    out.reason = RejectReason::WrongClickCountDetection;
    return out;
  }

  if (kind == ProtocolKind::Modified) {
    if (find(StageId::Compensation).observed_click_count() != 0 ||
        find(StageId::DetectionII).observed_click_count() != 0) {
      out.reason = RejectReason::ClickInNoClickStage;
      return out;
    }
  }

  out.accepted = true;
  out.epsilon = is_plus(click->kind) ? +1 : -1;
  return out;
}

Vector apply_recovery(const Vector& psi, int epsilon,
                      const StageSchedule& sched, const JointBasis& basis) {
  if (epsilon != 1 && epsilon != -1)
    throw ModelError("apply_recovery: detector sign must be +1 or -1");
  const double theta = epsilon == 1 ? sched.theta_plus : sched.theta_minus;
  const Complex phase = std::exp(kI * theta);
  Vector out = psi;
  const SiteBasis& site = basis.site();
  for (int a = 0; a < site.dim(); ++a)
    for (int n = 0; n <= site.n_max(); ++n)
      out(basis.index(a, site.index(1, n))) *= phase;
  return out;
}

ProtocolMachine::ProtocolMachine(ProtocolKind kind, const PhysicalParams& p,
                                 const StageSchedule& sched, ModelKind model,
                                 const JointBasis& basis,
                                 ProtocolOptions options)
    : kind_(kind),
      params_(p),
      sched_(sched),
      model_(model),
      basis_(basis),
      options_(options) {
  sched_.validate();
  if (kind_ == ProtocolKind::Modified && sched_.t_d <= 0.0)
    throw ConfigError("ProtocolMachine: modified protocol needs t_d > 0");

  const LaserSetting both{true, true};
  const LaserSetting alice_only{true, false};
  const LaserSetting bob_only{false, true};
  const LaserSetting off{false, false};

  const double t_long = std::max(sched_.t_A, sched_.t_B);
  const double t_short = std::min(sched_.t_A, sched_.t_B);
  const LaserSetting solo =
      sched_.t_A >= sched_.t_B ? alice_only : bob_only;
  if (t_long > t_short) {
    if (options_.prep_alignment == PrepAlignment::CoTerminate) {
      prep_segments_.push_back(SegmentSpec::from_params(
          p, solo, model, t_long - t_short, basis_));
      prep_segments_.push_back(
          SegmentSpec::from_params(p, both, model, t_short, basis_));
    } else {
      prep_segments_.push_back(
          SegmentSpec::from_params(p, both, model, t_short, basis_));
      prep_segments_.push_back(SegmentSpec::from_params(
          p, solo, model, t_long - t_short, basis_));
    }
  } else {
    prep_segments_.push_back(
        SegmentSpec::from_params(p, both, model, t_short, basis_));
  }

  if (kind_ == ProtocolKind::Original) {
    post_segments_.push_back(
        SegmentSpec::from_params(p, off, model, sched_.t_D, basis_));
  } else {
    post_segments_.push_back(
        SegmentSpec::from_params(p, off, model, sched_.t_d, basis_));
    post_segments_.push_back(
        SegmentSpec::from_params(p, bob_only, model, sched_.t_c, basis_));
    post_segments_.push_back(
        SegmentSpec::from_params(p, off, model, sched_.t_D, basis_));
  }
}

RunOutcome ProtocolMachine::run(const QubitState& input,
                                const DetectorModel& det,
                                RngStream& rng) const {
  RunOutcome outcome;
  Vector psi = initial_joint_state(input, basis_);

  EventRecord prep_rec(sched_.t_A >= sched_.t_B ? sched_.t_A : sched_.t_B);
  double offset = 0.0;
  for (const SegmentSpec& seg : prep_segments_) {
    SegmentResult res = run_segment(psi, seg, det, rng, options_.run);
    psi = std::move(res.state);
    prep_rec.append_shifted(res.record, offset);
    offset += seg.duration();
  }
  outcome.records.push_back({StageId::Preparation, std::move(prep_rec)});

  static const StageId kModifiedStages[] = {
      StageId::DetectionI, StageId::Compensation, StageId::DetectionII};
  for (size_t i = 0; i < post_segments_.size(); ++i) {
    SegmentResult res = run_segment(psi, post_segments_[i], det, rng,
                                    options_.run);
    psi = std::move(res.state);
    outcome.records.push_back({kModifiedStages[i], std::move(res.record)});
  }

  const Classification cls = classify_record(kind_, outcome.records);
  outcome.accepted = cls.accepted;
  outcome.epsilon = cls.epsilon;
  outcome.reject_reason = cls.reason;
  if (cls.accepted) {
    psi = apply_recovery(psi, *cls.epsilon, sched_, basis_);
    outcome.fidelity = qubit_fidelity(input, psi, basis_);
  }
  return outcome;
}

Vector ProtocolMachine::reference_pass(const QubitState& input, int epsilon,
                                       bool apply_phase) const {
  if (epsilon != 1 && epsilon != -1)
    throw ModelError("reference_pass: detector sign must be +1 or -1");
  Vector psi = initial_joint_state(input, basis_);
  for (const SegmentSpec& seg : prep_segments_)
    psi = seg.propagator().apply(psi, seg.duration());

  const auto detection = detection_collapse_ops(params_, basis_);
  const Matrix& c_eps = epsilon == 1 ? detection[0].op : detection[1].op;
  psi = c_eps * psi;

  for (const SegmentSpec& seg : post_segments_)
    psi = seg.propagator().apply(psi, seg.duration());
  if (apply_phase) psi = apply_recovery(psi, epsilon, sched_, basis_);
  return psi;
}

RunOutcome run_protocol(ProtocolKind kind, const QubitState& input,
                        const PhysicalParams& p, const StageSchedule& sched,
                        const DetectorModel& det, ModelKind model,
                        RngStream& rng, const JointBasis& basis,
                        const ProtocolOptions& options) {
  ProtocolMachine machine(kind, p, sched, model, basis, options);
  return machine.run(input, det, rng);
}

}  // namespace cavtel
