#include <doctest.h>

#include <cavtel/hilbert.hpp>
#include <cavtel/rng.hpp>

using namespace cavtel;

namespace {

Matrix random_matrix(int dim, RngStream& rng) {
  Matrix m(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      m(i, j) = Complex(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
  return m;
}

Vector random_vector(int dim, RngStream& rng) {
  Vector v(dim);
  for (int i = 0; i < dim; ++i)
    v(i) = Complex(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
  return v;
}

}  // namespace

TEST_CASE("basis indexing") {
  SiteBasis b(2);
  CHECK(b.dim() == 9);
  CHECK(b.index(0, 0) == 0);
  CHECK(b.index(1, 0) == 3);
  CHECK(b.index(2, 1) == 7);
  CHECK(b.atom_level(7) == 2);
  CHECK(b.photon_number(7) == 1);
  CHECK_THROWS_AS(b.index(3, 0), DimensionError);
  CHECK_THROWS_AS(b.index(0, 3), DimensionError);

  JointBasis j(b);
  CHECK(j.dim() == 81);
  CHECK(j.index(0, 0, 1, 0) == 3);
  CHECK(j.index(1, 0, 0, 0) == 27);
  CHECK(j.alice_index(30) == 3);
  CHECK(j.bob_index(30) == 3);
}

TEST_CASE("qubit state normalization") {
  CHECK_NOTHROW(QubitState(0.6, Complex(0.0, 0.8)));
  CHECK_THROWS_AS(QubitState(1.0, 1.0), ZeroNormError);
}

TEST_CASE("tensor product") {
  CHECK((tensor(Matrix::Identity(2, 2), Matrix::Identity(3, 3)) -
         Matrix::Identity(6, 6))
            .cwiseAbs()
            .maxCoeff() == 0.0);

  RngStream rng(42, 0);
  SUBCASE("acts factorwise on product vectors") {
    const Matrix a = random_matrix(3, rng), b = random_matrix(4, rng);
    const Vector x = random_vector(3, rng), y = random_vector(4, rng);
    Vector xy(12), axby(12);
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 4; ++k) xy(i * 4 + k) = x(i) * y(k);
    const Vector ax = a * x, by = b * y;
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 4; ++k) axby(i * 4 + k) = ax(i) * by(k);
    CHECK((tensor(a, b) * xy - axby).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("entry layout") {
    const Matrix a = random_matrix(3, rng), b = random_matrix(4, rng);
    const Matrix t = tensor(a, b);
    REQUIRE(t.rows() == 12);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 4; ++k)
          for (int l = 0; l < 4; ++l)
            CHECK(std::abs(t(i * 4 + k, j * 4 + l) - a(i, j) * b(k, l)) == 0.0);
  }
  CHECK_THROWS_AS(tensor(Matrix::Zero(2, 3), Matrix::Identity(2, 2)),
                  DimensionError);
}

TEST_CASE("embed_site") {
  JointBasis basis;
  const int d = basis.site().dim();
  CHECK((embed_site(Matrix::Identity(d, d), Site::Alice, basis) -
         Matrix::Identity(81, 81))
            .cwiseAbs()
            .maxCoeff() == 0.0);

  SUBCASE("annihilation removes Alice's photon") {
    const Matrix a_A = embed_site(annihilation(basis.site()), Site::Alice, basis);
    Vector psi = Vector::Zero(81);
    psi(basis.index(0, 1, 0, 0)) = 1.0;
    const Vector out = a_A * psi;
    Vector expected = Vector::Zero(81);
    expected(basis.index(0, 0, 0, 0)) = 1.0;
    CHECK((out - expected).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("different sites commute") {
    RngStream rng(7, 1);
    const Matrix x = random_matrix(d, rng), y = random_matrix(d, rng);
    const Matrix xa = embed_site(x, Site::Alice, basis);
    const Matrix yb = embed_site(y, Site::Bob, basis);
    CHECK((xa * yb - yb * xa).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((xa * yb - tensor(x, y)).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK_THROWS_AS(embed_site(Matrix::Identity(4, 4), Site::Alice, basis),
                  DimensionError);
}

TEST_CASE("reduced density of Bob's atom") {
  JointBasis basis;

  SUBCASE("product state is a rank-1 projector") {
    const Complex a(0.6, 0.0), b(0.0, 0.8);
    Vector psi = Vector::Zero(81);
    psi(basis.index(0, 0, 0, 0)) = a;
    psi(basis.index(0, 0, 1, 0)) = b;
    const Eigen::Matrix3cd rho = reduced_density_bob_atom(psi, basis);
    Eigen::Vector3cd v(a, b, Complex(0.0));
    const Eigen::Matrix3cd proj = v * v.adjoint();
    CHECK((rho - proj).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("atom-photon entanglement traces to a mixture") {
    Vector psi = Vector::Zero(81);
    psi(basis.index(0, 0, 1, 0)) = 1.0 / std::sqrt(2.0);
    psi(basis.index(0, 0, 0, 1)) = Complex(0.0, 1.0) / std::sqrt(2.0);
    const Eigen::Matrix3cd rho = reduced_density_bob_atom(psi, basis);
    Eigen::Matrix3cd expected = Eigen::Matrix3cd::Zero();
    expected(0, 0) = 0.5;
    expected(1, 1) = 0.5;
    CHECK((rho - expected).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("hermitian, positive, unit trace on random states") {
    RngStream rng(3, 2);
    for (int rep = 0; rep < 20; ++rep) {
      Vector psi = random_vector(81, rng);
      psi.normalize();
      const Eigen::Matrix3cd rho = reduced_density_bob_atom(psi, basis);
      CHECK((rho - rho.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(std::abs(rho.trace().real() - 1.0) < 1e-12);
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(rho);
      CHECK(es.eigenvalues().minCoeff() > -1e-10);
    }
  }
  CHECK_THROWS_AS(reduced_density_bob_atom(Vector::Zero(81), basis),
                  ZeroNormError);
  CHECK_THROWS_AS(reduced_density_bob_atom(Vector::Zero(5), basis),
                  DimensionError);
}

TEST_CASE("qubit fidelity") {
  JointBasis basis;
  const QubitState in(0.6, Complex(0.0, 0.8));

  SUBCASE("exact teleported state") {
    Vector psi = Vector::Zero(81);
    psi(basis.index(0, 0, 0, 0)) = in.alpha();
    psi(basis.index(0, 0, 1, 0)) = in.beta();
    CHECK(qubit_fidelity(in, psi, basis) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("maximally mixed qubit gives 1/2") {
    Vector psi = Vector::Zero(81);
    psi(basis.index(0, 0, 0, 0)) = 1.0 / std::sqrt(2.0);
    psi(basis.index(1, 0, 1, 0)) = 1.0 / std::sqrt(2.0);
    CHECK(qubit_fidelity(in, psi, basis) == doctest::Approx(0.5).epsilon(1e-12));
    const QubitState other(1.0, 0.0);
    CHECK(qubit_fidelity(other, psi, basis) ==
          doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("orthogonal state gives 0") {
    const QubitState plus(1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0));
    Vector psi = Vector::Zero(81);
    psi(basis.index(0, 0, 0, 0)) = 1.0 / std::sqrt(2.0);
    psi(basis.index(0, 0, 1, 0)) = -1.0 / std::sqrt(2.0);
    CHECK(qubit_fidelity(plus, psi, basis) < 1e-14);
  }
  SUBCASE("invariant under a global phase of the final state") {
    RngStream rng(11, 5);
    Vector psi = random_vector(81, rng);
    psi.normalize();
    const double f0 = qubit_fidelity(in, psi, basis);
    const Vector shifted = std::polar(1.0, 1.2345) * psi;
    CHECK(qubit_fidelity(in, shifted, basis) ==
          doctest::Approx(f0).epsilon(1e-12));
  }
}
