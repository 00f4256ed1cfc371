#pragma once

#include "cavtel/errors.hpp"
#include "cavtel/types.hpp"

namespace cavtel {

/// Basis of one atom-cavity node: a three-level atom tensored with a
/// truncated cavity mode. Basis state |j n> (atom level j, n photons) is
/// flattened as index = j*(n_max+1) + n.
class SiteBasis {
 public:
  explicit SiteBasis(int n_max = 2);

  int n_max() const { return n_max_; }
  int dim() const { return 3 * (n_max_ + 1); }

  int index(int atom_level, int photon_number) const;
  int atom_level(int index) const { return index / (n_max_ + 1); }
  int photon_number(int index) const { return index % (n_max_ + 1); }

 private:
  int n_max_;
};

/// Joint basis of the two nodes, Alice first: index = a*site_dim + b.
class JointBasis {
 public:
  explicit JointBasis(SiteBasis site = SiteBasis()) : site_(site) {}

  const SiteBasis& site() const { return site_; }
  int dim() const { return site_.dim() * site_.dim(); }

  int index(int alice_index, int bob_index) const;
  int index(int alice_level, int alice_photons, int bob_level,
            int bob_photons) const;
  int alice_index(int joint_index) const { return joint_index / site_.dim(); }
  int bob_index(int joint_index) const { return joint_index % site_.dim(); }

 private:
  SiteBasis site_;
};

/// Single-qubit state alpha|0> + beta|1>, normalized to 1e-12.
class QubitState {
 public:
  QubitState(Complex alpha, Complex beta);

  Complex alpha() const { return alpha_; }
  Complex beta() const { return beta_; }

 private:
  Complex alpha_;
  Complex beta_;
};

// Elementary site operators in the flattened |j n> ordering.
Matrix site_identity(const SiteBasis& b);
Matrix annihilation(const SiteBasis& b);           // a |j n> = sqrt(n) |j n-1>
Matrix number_operator(const SiteBasis& b);        // a^dag a
Matrix atom_flip(const SiteBasis& b, int i, int j);  // |i><j| on the atom

/// Kronecker product in the documented ordering: entry
/// (i*dim(b)+k, j*dim(b)+l) = a(i,j)*b(k,l). Both factors must be square.
Matrix tensor(const Matrix& a, const Matrix& b);

/// Lift a site operator to the joint space: op (x) I for Alice,
/// I (x) op for Bob.
Matrix embed_site(const Matrix& op, Site site, const JointBasis& basis);

/// Partial trace of |psi><psi| / <psi|psi> over Alice's node and Bob's
/// cavity mode; returns Bob's 3x3 atomic density matrix.
Eigen::Matrix3cd reduced_density_bob_atom(const Vector& psi,
                                          const JointBasis& basis);

/// Overlap <in| rho_B |in> of the input qubit (on atomic levels 0,1) with
/// Bob's reduced atomic state.
double qubit_fidelity(const QubitState& input, const Vector& psi_final,
                      const JointBasis& basis);

}  // namespace cavtel
