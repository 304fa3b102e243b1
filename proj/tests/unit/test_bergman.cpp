#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "bq/bergman.hpp"
#include "bq/errors.hpp"
#include "bq/quad.hpp"
#include "doctest.h"

using namespace bq;
constexpr double kPi = std::numbers::pi;

namespace {

// Half-plane inner product int f conj(g) y^(m-2) dx dy, pulled back to the
// disk by z = i(1+w)/(1-w) so the disk rule applies.
cplx halfplane_inner(int m, const std::function<cplx(const HPoint&)>& f, const std::function<cplx(const HPoint&)>& g,
                     const QuadratureRule& rule) {
  return integrate_disk(rule, [&](const DPoint& p) {
    const HPoint z = cayley_inv(p);
    const double one_minus = std::norm(1.0 - p.w);
    // y^(m-2) dxdy = (1-|w|^2)^(m-2) |1-w|^(-2(m-2)) * 4 |1-w|^(-4) dA
    return f(z) * std::conj(g(z)) * 4.0 * std::pow(one_minus, -m);
  });
}

GroupElement rotation(double th) { return GroupElement::real(std::cos(th), std::sin(th), -std::sin(th), std::cos(th)); }

double block_norm(const Eigen::MatrixXcd& A, int B) { return A.topLeftCorner(B, B).norm(); }

}  // namespace

TEST_CASE("basis_eval examples and orthonormality") {
  const BergmanModel M4(4, 40, ModelKind::Disk);
  CHECK(std::abs(basis_eval(M4, 0, DPoint{0}) - std::sqrt(3 / kPi)) < 1e-15);
  for (int n = 1; n < 40; ++n) CHECK(basis_eval(M4, n, DPoint{0}) == cplx(0));
  CHECK_THROWS(basis_eval(M4, 40, DPoint{0}));
  for (int m : {2, 4, 7, 12}) {
    const int N = 40;
    const auto rule = weighted_disk_rule(m, 2, N);
    Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(N, N);
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const auto v = basis_values(m, N, rule.dnode(i).w);
      G += rule.w[i] * v * v.adjoint();
    }
    CHECK((G - Eigen::MatrixXcd::Identity(N, N)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("kernel: constant, hermitian symmetry, reproducing property") {
  for (int m : {2, 4, 6, 12}) {
    const BergmanModel M(m, 40);
    CHECK(std::abs(kernel(M, HPoint{0, 1}, HPoint{0, 1}) - (m - 1) / (4 * kPi)) < 1e-15);
    CHECK(std::abs(kernel(M, HPoint{0.3, 2}, HPoint{0.3, 2}) - (m - 1) / (4 * kPi) * std::pow(2.0, -m)) < 1e-15);
  }
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> X(-3, 3), Y(0.1, 4);
  const BergmanModel M(6, 40);
  for (int s = 0; s < 100; ++s) {
    const HPoint z{X(rng), Y(rng)}, w{X(rng), Y(rng)};
    CHECK(std::abs(kernel(M, z, w) - std::conj(kernel(M, w, z))) <= 1e-12 * std::abs(kernel(M, z, w)));
  }
  // f = U e_3 is a half-plane function of unit norm; <f, K(., w)> = f(w).
  for (int m : {4, 6}) {
    const BergmanModel Mh(m, 40);
    const auto rule = weighted_disk_rule(m, 3, 40);
    auto f = [&](const HPoint& z) { return cayley_factor(m, z) * basis_norm(m, 3) * std::pow(cayley(z).w, 3); };
    CHECK(std::abs(halfplane_inner(m, f, f, rule) - 1.0) < 1e-8);
    for (const HPoint w : {HPoint{0, 1}, HPoint{0.4, 0.7}, HPoint{-1.2, 2.5}}) {
      auto Kw = [&](const HPoint& z) { return kernel(Mh, z, w); };
      CHECK(std::abs(halfplane_inner(m, f, Kw, rule) - f(w)) < 1e-6);
    }
  }
}

TEST_CASE("evaluation_vector") {
  const BergmanModel M(4, 80);
  const auto e0 = evaluation_vector(M, HPoint{0, 1});
  CHECK(std::abs(e0.coeffs(0)) > 0);
  for (int n = 1; n < 80; ++n) CHECK(e0.coeffs(n) == cplx(0));
  // Sum_n |e_n(w)|^2 -> K(z,z) for |w| <= 0.8.
  for (double r : {0.0, 0.3, 0.6, 0.8}) {
    const cplx w = std::polar(r, 0.7);
    const HPoint z = cayley_inv(DPoint{w});
    const double K = kernel(M, z, z).real();
    CHECK(std::abs(evaluation_vector(M, z).coeffs.squaredNorm() - K) < 1e-6 * K);
  }
  // Truncated reproducing error decreases monotonically in N.
  const HPoint z{0.2, 0.15};
  double prev = 1e300;
  for (int N = 5; N <= 80; N += 5) {
    const BergmanModel MN(4, N);
    const double K = kernel(MN, z, z).real();
    const double err = std::abs(evaluation_vector(MN, z).coeffs.squaredNorm() - K) / K;
    CHECK((err < prev || err < 1e-14));
    prev = err;
  }
  // f(z) = <f, E_z> agrees with direct evaluation of the transported polynomial.
  std::mt19937_64 rng(4);
  std::normal_distribution<double> G;
  Eigen::VectorXcd a(80), b(80);
  for (int n = 0; n < 80; ++n) {
    a(n) = cplx(G(rng), G(rng)) / (1.0 + n * n);
    b(n) = cplx(G(rng), G(rng)) / (1.0 + n * n);
  }
  const auto E = evaluation_vector(M, z);
  auto direct = [&](const Eigen::VectorXcd& c) {
    return cayley_factor(4, z) * cplx(basis_values(4, 80, cayley(z).w).transpose() * c);
  };
  CHECK(std::abs(E.coeffs.dot(a) - direct(a)) < 1e-12);
  const cplx s(0.3, -1.1);
  CHECK(std::abs(E.coeffs.dot(a + s * b) - (E.coeffs.dot(a) + s * E.coeffs.dot(b))) < 1e-12);
}

TEST_CASE("discrete_series_matrix: identity, rotations, relations") {
  const BergmanModel M(4, 30, ModelKind::Disk);
  CHECK((discrete_series_matrix(M, GroupElement::identity()).entries - Eigen::MatrixXcd::Identity(30, 30)).norm() <
        1e-14);
  const double th = 0.37;
  const auto R = discrete_series_matrix(M, rotation(th)).entries;
  for (int k = 0; k < 30; ++k)
    for (int l = 0; l < 30; ++l)
      if (k != l) CHECK(R(k, l) == cplx(0));
  for (int k = 0; k < 30; ++k) CHECK(std::abs(std::abs(R(k, k)) - 1) < 1e-13);
  for (int k = 1; k < 30; ++k) CHECK(std::abs(R(k, k) / R(k - 1, k - 1) - std::exp(cplx(0, -2 * th))) < 1e-13);
  // S fixes i, so it is diagonal too.
  const auto S = discrete_series_matrix(M, GroupElement::S()).entries;
  CHECK((S - Eigen::MatrixXcd(S.diagonal().asDiagonal())).norm() < 1e-13);
  const int B = 15;
  const BergmanModel Mb(4, 80, ModelKind::Disk);
  const auto Sb = discrete_series_matrix(Mb, GroupElement::S()).entries;
  const auto Tb = discrete_series_matrix(Mb, GroupElement::T()).entries;
  const auto I = Eigen::MatrixXcd::Identity(80, 80);
  CHECK(block_norm(Sb * Sb * Sb * Sb - I, B) < 1e-10);
  Eigen::MatrixXcd ST = Sb * Tb, P = I;
  for (int i = 0; i < 6; ++i) P = P * ST;
  CHECK(std::min(block_norm(P - I, B), block_norm(P + I, B)) < 1e-6);
  // Unitarity on a leading block.
  CHECK(block_norm(Tb.adjoint() * Tb - I, B) < 1e-6);
}

TEST_CASE("discrete_series_matrix: homomorphism ladder and unitarity") {
  const GroupElement g = GroupElement::integral(1, 1, 0, 1), h = GroupElement::integral(1, 0, 1, 1);
  const int B = 15;
  double res[2];
  int i = 0;
  for (int N : {30, 60}) {
    const BergmanModel M(6, N, ModelKind::Disk);
    const auto Mg = discrete_series_matrix(M, g).entries, Mh = discrete_series_matrix(M, h).entries;
    const auto Mgh = discrete_series_matrix(M, g * h).entries;
    res[i++] = block_norm(Mgh - Mg * Mh, B);
  }
  CHECK(res[1] < 1e-6);
  CHECK(res[1] <= 0.5 * res[0]);
  // <Lf, Lh> = <f, h> for f, h supported on low degrees.
  const BergmanModel M(6, 120, ModelKind::Disk);
  const auto L = discrete_series_matrix(M, GroupElement::integral(2, 1, 1, 1)).entries;
  std::mt19937_64 rng(8);
  std::normal_distribution<double> G;
  Eigen::VectorXcd f = Eigen::VectorXcd::Zero(120), k = Eigen::VectorXcd::Zero(120);
  for (int n = 0; n < 6; ++n) {
    f(n) = cplx(G(rng), G(rng));
    k(n) = cplx(G(rng), G(rng));
  }
  CHECK(std::abs((L * k).dot(L * f) - k.dot(f)) < 1e-8 * f.norm() * k.norm());
}

TEST_CASE("discrete_series_matrix: series divergence") {
  const BergmanModel M(4, 10, ModelKind::Disk);
  CHECK_NOTHROW(discrete_series_matrix(M, GroupElement::integral(7, 3, 2, 1)));
  CHECK_THROWS_AS(discrete_series_matrix(M, GroupElement::real(1e5, 0, 0, 1e-5)), SeriesDivergence);
}

TEST_CASE("block_twist") {
  const BlockModel B({4, 6, 10}, 5);
  CHECK(B.dim() == 15);
  CHECK(block_twist(B, HPoint{0.4, 1}).isIdentity(0));
  const HPoint z{0.1, 2.5};
  const auto H = block_twist(B, z);
  const Eigen::MatrixXd HH = H.transpose() * H;
  for (int i = 0; i < 3; ++i) CHECK(std::abs(HH(i, i) - std::pow(2.5, B.weights[i])) <= 1e-15 * HH(i, i));
  CHECK(std::abs(block_twist(BlockModel({4}, 3), z)(0, 0) - std::pow(2.5, 2)) < 1e-15);
}

TEST_CASE("operator serialization round trip") {
  const BergmanModel M(4, 12, ModelKind::Disk);
  auto op = discrete_series_matrix(M, GroupElement::T());
  const auto path = (std::filesystem::temp_directory_path() / "bq_op_test.bin").string();
  write_operator(op, path);
  const auto back = read_operator(path);
  CHECK(back.entries == op.entries);
  CHECK(back.weights == op.weights);
  const auto js = operator_from_json(operator_to_json(op));
  CHECK(js.entries == op.entries);
  std::filesystem::remove(path);
  CHECK_THROWS(operator_from_json("[1,2"));
}
