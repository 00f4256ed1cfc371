#include "cavtel/hilbert.hpp"

#include <cmath>
#include <string>

namespace cavtel {

SiteBasis::SiteBasis(int n_max) : n_max_(n_max) {
  if (n_max < 0) throw DimensionError("SiteBasis: n_max must be >= 0");
}

int SiteBasis::index(int atom_level, int photon_number) const {
  if (atom_level < 0 || atom_level > 2)
    throw DimensionError("SiteBasis: atom level out of range");
  if (photon_number < 0 || photon_number > n_max_)
    throw DimensionError("SiteBasis: photon number out of range");
  return atom_level * (n_max_ + 1) + photon_number;
}

int JointBasis::index(int alice_index, int bob_index) const {
  const int d = site_.dim();
  if (alice_index < 0 || alice_index >= d || bob_index < 0 || bob_index >= d)
    throw DimensionError("JointBasis: site index out of range");
  return alice_index * d + bob_index;
}

int JointBasis::index(int alice_level, int alice_photons, int bob_level,
                      int bob_photons) const {
  return index(site_.index(alice_level, alice_photons),
               site_.index(bob_level, bob_photons));
}

QubitState::QubitState(Complex alpha, Complex beta)
    : alpha_(alpha), beta_(beta) {
  const double n2 = std::norm(alpha) + std::norm(beta);
  if (std::abs(n2 - 1.0) > 1e-12)
    throw ZeroNormError("QubitState: |alpha|^2 + |beta|^2 = " +
                        std::to_string(n2) + ", expected 1");
}

Matrix site_identity(const SiteBasis& b) {
  return Matrix::Identity(b.dim(), b.dim());
}

Matrix annihilation(const SiteBasis& b) {
  Matrix a = Matrix::Zero(b.dim(), b.dim());
  for (int j = 0; j < 3; ++j)
    for (int n = 1; n <= b.n_max(); ++n)
      a(b.index(j, n - 1), b.index(j, n)) = std::sqrt(double(n));
  return a;
}

Matrix number_operator(const SiteBasis& b) {
  Matrix n_op = Matrix::Zero(b.dim(), b.dim());
  for (int j = 0; j < 3; ++j)
    for (int n = 0; n <= b.n_max(); ++n)
      n_op(b.index(j, n), b.index(j, n)) = double(n);
  return n_op;
}

Matrix atom_flip(const SiteBasis& b, int i, int j) {
  Matrix s = Matrix::Zero(b.dim(), b.dim());
  for (int n = 0; n <= b.n_max(); ++n) s(b.index(i, n), b.index(j, n)) = 1.0;
  return s;
}

Matrix tensor(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols())
    throw DimensionError("tensor: factors must be square");
  const auto ra = a.rows(), rb = b.rows();
  Matrix out(ra * rb, ra * rb);
  for (Eigen::Index i = 0; i < ra; ++i)
    for (Eigen::Index j = 0; j < ra; ++j)
      out.block(i * rb, j * rb, rb, rb) = a(i, j) * b;
  return out;
}

Matrix embed_site(const Matrix& op, Site site, const JointBasis& basis) {
  const int d = basis.site().dim();
  if (op.rows() != d || op.cols() != d)
    throw DimensionError("embed_site: operator is not site-dimensional");
  const Matrix id = Matrix::Identity(d, d);
  return site == Site::Alice ? tensor(op, id) : tensor(id, op);
}

Eigen::Matrix3cd reduced_density_bob_atom(const Vector& psi,
                                          const JointBasis& basis) {
  if (psi.size() != basis.dim())
    throw DimensionError("reduced_density_bob_atom: state dimension mismatch");
  const double n2 = psi.squaredNorm();
  if (n2 <= 0.0)
    throw ZeroNormError("reduced_density_bob_atom: zero-norm state");

  const SiteBasis& site = basis.site();
  Eigen::Matrix3cd rho = Eigen::Matrix3cd::Zero();
  for (int a = 0; a < site.dim(); ++a)
    for (int n = 0; n <= site.n_max(); ++n)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
          rho(j, k) += psi(basis.index(a, site.index(j, n))) *
                       std::conj(psi(basis.index(a, site.index(k, n))));
  return rho / n2;
}

double qubit_fidelity(const QubitState& input, const Vector& psi_final,
                      const JointBasis& basis) {
  const Eigen::Matrix3cd rho = reduced_density_bob_atom(psi_final, basis);
  Eigen::Vector3cd v(input.alpha(), input.beta(), Complex(0.0));
  return std::real(v.dot(rho * v));  // dot conjugates the left argument
}

}  // namespace cavtel
