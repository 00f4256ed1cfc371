#include "cavtel/trajectory.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "cavtel/errors.hpp"

namespace cavtel {

namespace {

const Complex kI(0.0, 1.0);

constexpr double kJumpTimeTol = 1e-9;     // us, jump-time bisection
constexpr double kNormUnderflow = 1e-300;  // squared norm

}  // namespace

DetectorModel::DetectorModel(double eta, double eta_p, double dark_rate)
    : eta_(eta), eta_p_(eta_p), dark_rate_(dark_rate) {
  if (eta < 0.0 || eta > 1.0 || eta_p < 0.0 || eta_p > 1.0)
    throw ConfigError("DetectorModel: efficiencies must lie in [0, 1]");
  if (dark_rate < 0.0)
    throw ConfigError("DetectorModel: dark rate must be nonnegative");
}

double DetectorModel::eta_a(const PhysicalParams& p) {
  const double k = p.kappa();
  return k == 0.0 ? 1.0 : p.kappa_t() / k;
}

double DetectorModel::overall_efficiency(const PhysicalParams& p) const {
  return eta_a(p) * eta_p_ * eta_;
}

bool is_observed(EventKind kind) {
  switch (kind) {
    case EventKind::ClickPlus:
    case EventKind::ClickMinus:
    case EventKind::DarkPlus:
    case EventKind::DarkMinus:
      return true;
    case EventKind::UnobservedLoss:
    case EventKind::SpontaneousEmission:
      return false;
  }
  return false;
}

bool is_plus(EventKind kind) {
  return kind == EventKind::ClickPlus || kind == EventKind::DarkPlus;
}

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::ClickPlus: return "click+";
    case EventKind::ClickMinus: return "click-";
    case EventKind::DarkPlus: return "dark+";
    case EventKind::DarkMinus: return "dark-";
    case EventKind::UnobservedLoss: return "unobserved-loss";
    case EventKind::SpontaneousEmission: return "spontaneous-emission";
  }
  return "?";
}

void EventRecord::add(double time, EventKind kind) {
  events_.push_back(Event{time, kind, is_observed(kind)});
}

void EventRecord::finalize() {
  std::stable_sort(events_.begin(), events_.end(),
                   [](const Event& a, const Event& b) { return a.time < b.time; });
  for (const Event& e : events_) {
    if (e.time < 0.0 || e.time > duration_)
      throw ModelError("EventRecord: event outside segment bounds");
    if (e.observed != is_observed(e.kind))
      throw ModelError("EventRecord: inconsistent observed flag");
  }
}

int EventRecord::observed_click_count() const {
  int n = 0;
  for (const Event& e : events_) n += e.observed ? 1 : 0;
  return n;
}

void EventRecord::append_shifted(const EventRecord& other, double time_offset) {
  for (const Event& e : other.events_)
    events_.push_back(Event{e.time + time_offset, e.kind, e.observed});
  duration_ = std::max(duration_, time_offset + other.duration_);
  finalize();
}

SegmentPropagator::SegmentPropagator(Matrix h) : h_(std::move(h)) {
  if (h_.rows() != h_.cols())
    throw DimensionError("SegmentPropagator: Hamiltonian must be square");
  const Eigen::Index d = h_.rows();
  Eigen::ComplexEigenSolver<Matrix> solver(h_);
  if (solver.info() == Eigen::Success) {
    vecs_ = solver.eigenvectors();
    Eigen::PartialPivLU<Matrix> lu(vecs_);
    vecs_inv_ = lu.solve(Matrix::Identity(d, d));
    eigvals_ = -kI * solver.eigenvalues();
    const Matrix recon =
        vecs_ * solver.eigenvalues().asDiagonal() * vecs_inv_;
    const double scale = std::max(1.0, h_.cwiseAbs().maxCoeff());
    spectral_ = (recon - h_).cwiseAbs().maxCoeff() <= 1e-10 * scale;
  }
}

void SegmentPropagator::eval_prepared(const Prepared& prep, double t,
                                      Vector& phased, Vector& out) const {
  if (spectral_) {
    phased = ((eigvals_ * t).array().exp() * prep.data.array()).matrix();
    out.noalias() = vecs_ * phased;
  } else {
    out = no_jump_propagator(h_, t) * prep.data;
  }
}

SegmentPropagator::Prepared SegmentPropagator::prepare(const Vector& psi) const {
  if (psi.size() != h_.rows())
    throw DimensionError("SegmentPropagator: state dimension mismatch");
  if (spectral_) return Prepared{vecs_inv_ * psi};
  return Prepared{psi};
}

Vector SegmentPropagator::apply_prepared(const Prepared& prep, double t) const {
  Vector phased, out;
  eval_prepared(prep, t, phased, out);
  return out;
}

double SegmentPropagator::norm2_prepared(const Prepared& prep, double t) const {
  Vector phased, out;
  eval_prepared(prep, t, phased, out);
  return out.squaredNorm();
}

Vector SegmentPropagator::apply(const Vector& psi, double t) const {
  return apply_prepared(prepare(psi), t);
}

Matrix no_jump_propagator(const Matrix& h, double t) {
  if (t < 0.0) throw ModelError("no_jump_propagator: negative time");
  if (h.rows() != h.cols())
    throw DimensionError("no_jump_propagator: Hamiltonian must be square");
  return ((-kI * t) * h).exp();
}

SegmentSpec::SegmentSpec(Matrix hamiltonian, std::vector<CollapseOp> collapse_ops,
                         double duration)
    : propagator_(std::make_shared<const SegmentPropagator>(std::move(hamiltonian))),
      ops_(std::move(collapse_ops)),
      duration_(duration) {
  if (duration_ < 0.0) throw ModelError("SegmentSpec: negative duration");
  const Eigen::Index d = propagator_->hamiltonian().rows();
  for (const CollapseOp& c : ops_)
    if (c.op.rows() != d || c.op.cols() != d)
      throw DimensionError("SegmentSpec: collapse operator dimension mismatch");
}

SegmentSpec SegmentSpec::from_params(const PhysicalParams& p,
                                     LaserSetting lasers, ModelKind model,
                                     double duration, const JointBasis& basis) {
  Matrix h = joint_hamiltonian(p, lasers, model, basis);
  std::vector<CollapseOp> ops = cavtel::collapse_ops(p, model, basis);

  // channel completeness: sum_k C_k^dag C_k == i (H - H^dag)
  Matrix lhs = Matrix::Zero(basis.dim(), basis.dim());
  for (const CollapseOp& c : ops) lhs += c.op.adjoint() * c.op;
  const Matrix rhs = kI * (h - h.adjoint());
  if ((lhs - rhs).cwiseAbs().maxCoeff() > 1e-11)
    throw ModelError("SegmentSpec: collapse channels do not match the "
                     "anti-Hermitian part of H");

  // drop identically zero channels (e.g. kappa_a = 0)
  std::vector<CollapseOp> live;
  for (auto& c : ops)
    if (c.op.cwiseAbs().maxCoeff() > 0.0) live.push_back(std::move(c));
  return SegmentSpec(std::move(h), std::move(live), duration);
}

std::vector<double> sample_dark_counts(double duration, double rate,
                                       RngStream& rng) {
  std::vector<double> times;
  if (rate <= 0.0 || duration <= 0.0) return times;
  double t = rng.exponential(rate);
  while (t < duration) {
    times.push_back(t);
    t += rng.exponential(rate);
  }
  return times;
}

namespace {

// Locate the time where the decaying squared norm crosses r, to
// kJumpTimeTol. Secant steps alternate with plain bisection so the
// bracket provably halves at least every other iteration;
// f(0) = 1 - r > 0 and f(remain) < 0 on entry.
double find_jump_time(const SegmentPropagator& prop,
                      const SegmentPropagator::Prepared& prep, double r,
                      double remain, double f_hi, Vector& phased, Vector& out) {
  double lo = 0.0, hi = remain;
  double f_lo = 1.0 - r;
  for (int iter = 0; hi - lo > kJumpTimeTol && iter < 200; ++iter) {
    double mid = 0.5 * (lo + hi);
    if (iter % 2 == 0 && f_lo != f_hi) {
      const double sec = (f_lo * hi - f_hi * lo) / (f_lo - f_hi);
      if (sec > lo && sec < hi) mid = sec;
    }
    prop.eval_prepared(prep, mid, phased, out);
    const double fm = out.squaredNorm() - r;
    if (fm > 0.0) {
      lo = mid;
      f_lo = fm;
    } else {
      hi = mid;
      f_hi = fm;
    }
  }
  return 0.5 * (lo + hi);
}

EventKind jump_event_kind(ChannelKind channel, const DetectorModel& det,
                          RngStream& rng) {
  switch (channel) {
    case ChannelKind::DetectionPlus:
    case ChannelKind::DetectionMinus: {
      if (rng.bernoulli(det.observe_prob()))
        return channel == ChannelKind::DetectionPlus ? EventKind::ClickPlus
                                                     : EventKind::ClickMinus;
      return EventKind::UnobservedLoss;
    }
    case ChannelKind::Absorption:
      return EventKind::UnobservedLoss;
    case ChannelKind::Spontaneous:
      return EventKind::SpontaneousEmission;
  }
  return EventKind::UnobservedLoss;
}

void merge_dark_counts(EventRecord& rec, double duration,
                       const DetectorModel& det, RngStream& rng) {
  for (double t : sample_dark_counts(duration, det.dark_rate(), rng))
    rec.add(t, EventKind::DarkPlus);
  for (double t : sample_dark_counts(duration, det.dark_rate(), rng))
    rec.add(t, EventKind::DarkMinus);
}

SegmentResult run_segment_waiting_time(const Vector& psi,
                                       const SegmentSpec& spec,
                                       const DetectorModel& det,
                                       RngStream& rng) {
  const SegmentPropagator& prop = spec.propagator();
  EventRecord rec(spec.duration());
  Vector cur = psi;
  Vector phased, out;
  double t = 0.0;
  const double T = spec.duration();
  double survival = 1.0;

  while (T - t > 0.0) {
    const double remain = T - t;
    const auto prep = prop.prepare(cur);
    const double r = rng.uniform();
    prop.eval_prepared(prep, remain, phased, out);
    const double n2_end = out.squaredNorm();
    if (n2_end >= r) {  // no jump in the rest of the segment
      if (n2_end < kNormUnderflow)
        throw NormUnderflowError("run_segment: norm underflow");
      cur = out / std::sqrt(n2_end);
      survival = n2_end;
      break;
    }
    const double s =
        find_jump_time(prop, prep, r, remain, n2_end - r, phased, out);
    prop.eval_prepared(prep, s, phased, out);

    // channel selection with probability ~ <psi|C_k^dag C_k|psi>
    const auto& ops = spec.collapse_ops();
    std::vector<double> rates(ops.size());
    double total = 0.0;
    for (size_t k = 0; k < ops.size(); ++k) {
      rates[k] = (ops[k].op * out).squaredNorm();
      total += rates[k];
    }
    if (total <= 0.0)
      throw ModelError("run_segment: norm decayed with no open channel");
    double u = rng.uniform() * total;
    size_t pick = 0;
    for (; pick + 1 < ops.size(); ++pick) {
      if (u < rates[pick]) break;
      u -= rates[pick];
    }

    cur = ops[pick].op * out;
    const double n2 = cur.squaredNorm();
    if (n2 < kNormUnderflow)
      throw NormUnderflowError("run_segment: norm underflow at jump");
    cur /= std::sqrt(n2);
    t += s;
    rec.add(t, jump_event_kind(ops[pick].kind, det, rng));
  }

  merge_dark_counts(rec, T, det, rng);
  rec.finalize();
  return SegmentResult{std::move(cur), std::move(rec), survival};
}

SegmentResult run_segment_fixed_step(const Vector& psi, const SegmentSpec& spec,
                                     const DetectorModel& det, RngStream& rng,
                                     double dt) {
  if (dt <= 0.0) throw ConfigError("run_segment: fixed_dt must be positive");
  EventRecord rec(spec.duration());
  const Matrix u_step = no_jump_propagator(spec.hamiltonian(), dt);
  const auto& ops = spec.collapse_ops();

  Vector cur = psi;
  double survival = 1.0;
  const long n_steps = std::lround(std::ceil(spec.duration() / dt));
  for (long step = 0; step < n_steps; ++step) {
    const double t0 = step * dt;
    const double h = std::min(dt, spec.duration() - t0);
    std::vector<double> rates(ops.size());
    double total_rate = 0.0;
    for (size_t k = 0; k < ops.size(); ++k) {
      rates[k] = (ops[k].op * cur).squaredNorm();
      total_rate += rates[k];
    }
    const double p_jump = total_rate * h;
    if (rng.uniform() < p_jump) {
      double u = rng.uniform() * total_rate;
      size_t pick = 0;
      for (; pick + 1 < ops.size(); ++pick) {
        if (u < rates[pick]) break;
        u -= rates[pick];
      }
      cur = ops[pick].op * cur;
      const double n2 = cur.squaredNorm();
      if (n2 < kNormUnderflow)
        throw NormUnderflowError("run_segment: norm underflow at jump");
      cur /= std::sqrt(n2);
      survival = 1.0;
      rec.add(t0 + 0.5 * h, jump_event_kind(ops[pick].kind, det, rng));
    } else {
      cur = (h == dt) ? Vector(u_step * cur)
                      : Vector(no_jump_propagator(spec.hamiltonian(), h) * cur);
      const double n2 = cur.squaredNorm();
      if (n2 < kNormUnderflow)
        throw NormUnderflowError("run_segment: norm underflow");
      survival *= n2;
      cur /= std::sqrt(n2);
    }
  }
  merge_dark_counts(rec, spec.duration(), det, rng);
  rec.finalize();
  return SegmentResult{std::move(cur), std::move(rec), survival};
}

}  // namespace

SegmentResult run_segment(const Vector& psi, const SegmentSpec& spec,
                          const DetectorModel& det, RngStream& rng,
                          const RunOptions& options) {
  if (psi.size() != spec.hamiltonian().rows())
    throw DimensionError("run_segment: state dimension mismatch");
  if (std::abs(psi.squaredNorm() - 1.0) > 1e-6)
    throw ZeroNormError("run_segment: state must enter normalized");
  if (options.method == JumpMethod::FixedStep)
    return run_segment_fixed_step(psi, spec, det, rng, options.fixed_dt);
  return run_segment_waiting_time(psi, spec, det, rng);
}

}  // namespace cavtel
