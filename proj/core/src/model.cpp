#include "cavtel/model.hpp"

#include <cmath>
#include <sstream>

#include "cavtel/errors.hpp"

namespace cavtel {

namespace {

const Complex kI(0.0, 1.0);

void require(bool ok, const char* msg) {
  if (!ok) throw ModelError(msg);
}

}  // namespace

PhysicalParams::PhysicalParams(double delta_detuning, double omega_laser,
                               double g_coupling, double gamma, double kappa_t,
                               double kappa_a, double branch_to_0)
    : delta_(delta_detuning),
      omega_(omega_laser),
      g_(g_coupling),
      gamma_(gamma),
      kappa_t_(kappa_t),
      kappa_a_(kappa_a),
      branch_to_0_(branch_to_0) {
  require(delta_ > 0.0, "PhysicalParams: detuning must be positive");
  require(omega_ >= 0.0 && g_ >= 0.0 && gamma_ >= 0.0 && kappa_t_ >= 0.0 &&
              kappa_a_ >= 0.0,
          "PhysicalParams: rates must be nonnegative");
  require(branch_to_0_ >= 0.0 && branch_to_0_ <= 1.0,
          "PhysicalParams: branching ratio must lie in [0, 1]");
  if (2.0 * raman_delta() <= kappa()) {
    std::ostringstream os;
    os << "PhysicalParams: overdamped regime 2*delta = " << 2.0 * raman_delta()
       << " <= kappa = " << kappa() << " (rad/us)";
    throw OverdampedError(os.str());
  }
}

PhysicalParams PhysicalParams::from_mhz(double delta_mhz, double omega_mhz,
                                        double g_mhz, double gamma_mhz,
                                        double kappa_t_mhz, double kappa_a_mhz,
                                        double branch_to_0) {
  return PhysicalParams(two_pi * delta_mhz, two_pi * omega_mhz, two_pi * g_mhz,
                        two_pi * gamma_mhz, two_pi * kappa_t_mhz,
                        two_pi * kappa_a_mhz, branch_to_0);
}

double PhysicalParams::omega_kappa() const {
  const double d = raman_delta(), k = kappa();
  return std::sqrt(4.0 * d * d - k * k);
}

std::vector<std::string> PhysicalParams::warnings() const {
  std::vector<std::string> out;
  const double gs = (g_ / delta_) * (g_ / delta_);
  const double os = (omega_ / delta_) * (omega_ / delta_);
  if (gs > 0.05) out.push_back("low-saturation limit strained: g^2/Delta^2 = " +
                               std::to_string(gs));
  if (os > 0.05)
    out.push_back("low-saturation limit strained: Omega^2/Delta^2 = " +
                  std::to_string(os));
  return out;
}

PhysicalParams PhysicalParams::with_kappa_t(double kappa_t) const {
  return PhysicalParams(delta_, omega_, g_, gamma_, kappa_t, kappa_a_,
                        branch_to_0_);
}

Matrix full_site_hamiltonian(const PhysicalParams& p, bool laser_on,
                             const SiteBasis& b) {
  const double omega = laser_on ? p.omega_laser() : 0.0;
  const Matrix a = annihilation(b);
  Matrix h = (Complex(p.delta_detuning(), -p.gamma())) * atom_flip(b, 2, 2);
  h += omega * (atom_flip(b, 2, 1) + atom_flip(b, 1, 2));
  const Matrix drive = p.g_coupling() * atom_flip(b, 2, 0) * a;
  h += drive + drive.adjoint();
  h += -kI * p.kappa() * number_operator(b);
  return h;
}

Matrix effective_site_hamiltonian(const PhysicalParams& p, bool laser_on,
                                  const SiteBasis& b) {
  if (std::abs(p.omega_laser() - p.g_coupling()) >
      1e-12 * std::max(1.0, p.g_coupling()))
    throw ModelError("effective_site_hamiltonian: requires Omega == g");
  const double delta = p.raman_delta();
  const Matrix n_op = number_operator(b);
  Matrix h = -kI * p.kappa() * n_op;
  h -= delta * atom_flip(b, 0, 0) * n_op;
  if (laser_on) {
    h -= delta * atom_flip(b, 1, 1);
    const Matrix raman = delta * atom_flip(b, 1, 0) * annihilation(b);
    h -= raman + raman.adjoint();
  }
  return h;
}

Matrix joint_hamiltonian(const PhysicalParams& p, LaserSetting lasers,
                         ModelKind model, const JointBasis& basis) {
  const SiteBasis& b = basis.site();
  auto site_h = [&](bool on) {
    return model == ModelKind::Full ? full_site_hamiltonian(p, on, b)
                                    : effective_site_hamiltonian(p, on, b);
  };
  return embed_site(site_h(lasers.alice_on), Site::Alice, basis) +
         embed_site(site_h(lasers.bob_on), Site::Bob, basis);
}

std::vector<CollapseOp> detection_collapse_ops(const PhysicalParams& p,
                                               const JointBasis& basis) {
  const double amp = std::sqrt(p.kappa_t());
  const Matrix a_A = embed_site(annihilation(basis.site()), Site::Alice, basis);
  const Matrix a_B = embed_site(annihilation(basis.site()), Site::Bob, basis);
  return {{amp * (a_A + kI * a_B), ChannelKind::DetectionPlus},
          {amp * (a_A - kI * a_B), ChannelKind::DetectionMinus}};
}

std::vector<CollapseOp> absorption_collapse_ops(const PhysicalParams& p,
                                                const JointBasis& basis) {
  const double amp = std::sqrt(2.0 * p.kappa_a());
  const Matrix a = annihilation(basis.site());
  return {{amp * embed_site(a, Site::Alice, basis), ChannelKind::Absorption},
          {amp * embed_site(a, Site::Bob, basis), ChannelKind::Absorption}};
}

std::vector<CollapseOp> spontaneous_collapse_ops(const PhysicalParams& p,
                                                 const JointBasis& basis) {
  const double to0 = std::sqrt(2.0 * p.gamma() * p.branch_to_0());
  const double to1 = std::sqrt(2.0 * p.gamma() * (1.0 - p.branch_to_0()));
  const SiteBasis& b = basis.site();
  std::vector<CollapseOp> ops;
  for (Site s : {Site::Alice, Site::Bob}) {
    ops.push_back(
        {to0 * embed_site(atom_flip(b, 0, 2), s, basis), ChannelKind::Spontaneous});
    ops.push_back(
        {to1 * embed_site(atom_flip(b, 1, 2), s, basis), ChannelKind::Spontaneous});
  }
  return ops;
}

std::vector<CollapseOp> collapse_ops(const PhysicalParams& p, ModelKind model,
                                     const JointBasis& basis) {
  std::vector<CollapseOp> ops = detection_collapse_ops(p, basis);
  for (auto& c : absorption_collapse_ops(p, basis)) ops.push_back(std::move(c));
  if (model == ModelKind::Full) {
    for (auto& c : spontaneous_collapse_ops(p, basis))
      ops.push_back(std::move(c));
  }
  return ops;
}

}  // namespace cavtel
