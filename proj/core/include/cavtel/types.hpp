#pragma once

#include <complex>
#include <Eigen/Dense>

namespace cavtel {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double two_pi = 6.283185307179586476925286766559;

/// One of the two atom-cavity nodes.
enum class Site { Alice, Bob };

/// Which Hamiltonian governs the dynamics: the three-level model with the
/// detuned excited state, or the Raman model with the excited state
/// adiabatically eliminated.
enum class ModelKind { Full, Effective };

enum class ProtocolKind { Original, Modified };

inline const char* to_string(ProtocolKind k) {
  return k == ProtocolKind::Original ? "original" : "modified";
}
inline const char* to_string(ModelKind k) {
  return k == ModelKind::Full ? "full" : "effective";
}

}  // namespace cavtel
