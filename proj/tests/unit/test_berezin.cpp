#include <cmath>
#include <numbers>
#include <random>

#include "bq/berezin.hpp"
#include "bq/errors.hpp"
#include "doctest.h"

using namespace bq;
constexpr double kPi = std::numbers::pi;

namespace {

OperatorMatrix identity_op(std::vector<int> weights, int N) {
  const int d = static_cast<int>(weights.size()) * N;
  return {Eigen::MatrixXcd::Identity(d, d), std::move(weights), N};
}

Eigen::MatrixXcd random_matrix(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> G;
  Eigen::MatrixXcd A(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) A(i, j) = cplx(G(rng), G(rng));
  return A;
}

double op_norm(const Eigen::MatrixXcd& A) { return Eigen::JacobiSVD<Eigen::MatrixXcd>(A).singularValues()(0); }

std::vector<HPoint> f_grid(int nx, int ny) {
  std::vector<HPoint> pts;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      const double x = -0.5 + (i + 0.5) / nx;
      const double y = std::sqrt(1 - x * x) + 0.02 + 3.0 * j / ny;
      pts.push_back({x, y});
    }
  return pts;
}

}  // namespace

TEST_CASE("S(I) is the identity on an F grid") {
  const auto grid = f_grid(20, 10);
  const auto I1 = identity_op({4}, 40);
  const auto I3 = identity_op({4, 6, 12}, 30);
  for (const auto& z : grid) {
    CHECK(std::abs(symbol_S_scalar(I1, z) - 1.0) < 1e-10);
    CHECK((symbol_S(I3, z) - Eigen::MatrixXcd::Identity(3, 3)).norm() < 1e-10);
    CHECK((symbol_Q(I3, z) - Eigen::MatrixXcd::Identity(3, 3)).norm() < 1e-10);
  }
}

TEST_CASE("S of the projector onto e_0") {
  const int N = 30, m = 4;
  OperatorMatrix P{Eigen::MatrixXcd::Zero(N, N), {m}, N};
  P.entries(0, 0) = 1;
  CHECK(std::abs(symbol_S_scalar(P, HPoint{0, 1}) - 1.0) < 1e-14);
  for (const HPoint z : {HPoint{0.3, 0.8}, HPoint{-0.2, 2.0}, HPoint{1.5, 0.4}}) {
    const auto e = basis_values(m, N, cayley(z).w);
    CHECK(std::abs(symbol_S_scalar(P, z) - std::norm(e(0)) / e.squaredNorm()) < 1e-14);
  }
}

TEST_CASE("symbols of contractions are bounded by the norm") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> X(-2, 2), Y(0.2, 3);
  for (int s = 0; s < 100; ++s) {
    OperatorMatrix A{random_matrix(rng, 20), {6}, 20};
    A.entries /= op_norm(A.entries);
    const HPoint z{X(rng), Y(rng)};
    CHECK(std::abs(symbol_S_scalar(A, z)) <= 1 + 1e-8);
    CHECK(std::abs(symbol_S(A, z)(0, 0) - symbol_S_scalar(A, z)) < 1e-12);
    CHECK(std::abs(symbol_Q(A, z)(0, 0) - symbol_S_scalar(A, z)) < 1e-12);
  }
  for (int s = 0; s < 30; ++s) {
    OperatorMatrix A{random_matrix(rng, 30), {4, 8}, 15};
    const double nrm = op_norm(A.entries);
    const HPoint z{X(rng), Y(rng)};
    const auto ev = symbol_S(A, z).eigenvalues();
    CHECK(ev.cwiseAbs().maxCoeff() <= nrm + 1e-8);
  }
}

TEST_CASE("two-point symbol") {
  const int N = 120;
  const auto I = identity_op({6}, N);
  const BergmanModel M(6, N);
  const HPoint z{0.2, 1.1}, w{-0.3, 0.9};
  CHECK(std::abs(symbol_two_point(I, z, w)(0, 0) - kernel(M, z, w)) < 1e-8 * std::abs(kernel(M, z, w)));
  std::mt19937_64 rng(12);
  OperatorMatrix A{random_matrix(rng, 20), {4, 6}, 10};
  const auto Kz = symbol_two_point(A, z, w), Ka = symbol_two_point(A.adjoint(), w, z);
  CHECK((Kz - Ka.adjoint()).norm() < 1e-10 * Kz.norm());
  // Holomorphic in z, antiholomorphic in w: central-difference Cauchy-Riemann
  // residuals are pure O(h^2) discretization error.
  auto K = [&](double zx, double zy, double wx, double wy) {
    return symbol_two_point(A, HPoint{zx, zy}, HPoint{wx, wy});
  };
  auto residuals = [&](double h) {
    const Eigen::MatrixXcd dzbar = (K(z.x + h, z.y, w.x, w.y) - K(z.x - h, z.y, w.x, w.y) +
                                    cplx(0, 1) * (K(z.x, z.y + h, w.x, w.y) - K(z.x, z.y - h, w.x, w.y))) /
                                   (4 * h);
    const Eigen::MatrixXcd dw = (K(z.x, z.y, w.x + h, w.y) - K(z.x, z.y, w.x - h, w.y) -
                                 cplx(0, 1) * (K(z.x, z.y, w.x, w.y + h) - K(z.x, z.y, w.x, w.y - h))) /
                                (4 * h);
    return std::pair{dzbar.norm() / Kz.norm(), dw.norm() / Kz.norm()};
  };
  const auto [a3, b3] = residuals(1e-3);
  const auto [a4, b4] = residuals(1e-4);
  CHECK(a3 < 1e-4);
  CHECK(b3 < 1e-4);
  CHECK(a4 < a3 / 50);
  CHECK(b4 < b3 / 50);
}

TEST_CASE("Berezin transform") {
  for (int m : {4, 6, 12}) {
    const auto rule = weighted_disk_rule(m, 3);
    for (const HPoint z : {HPoint{0, 1}, HPoint{0.3, 2}, HPoint{-1, 0.1}})
      CHECK(std::abs(berezin_transform([](const HPoint&) { return cplx(1); }, z, rule) - 1.0) < 1e-6);
  }
  const auto rule = weighted_disk_rule(4, 2);
  const auto bump = bump_symbol(HPoint{0, 2}, 1.0);
  for (const HPoint z : {HPoint{0, 1}, HPoint{0.3, 2}, HPoint{-0.4, 1.2}, HPoint{0.1, 5}}) {
    const cplx b = berezin_transform([&](const HPoint& p) { return bump(p); }, z, rule);
    CHECK(b.real() >= 0);
    CHECK(std::abs(b.imag()) < 1e-14);
  }
}

TEST_CASE("trace tau") {
  const auto rule = fundamental_rule(6);
  CHECK(std::abs(trace_tau(identity_op({4}, 40), rule) - 1.0) < 1e-6);
  CHECK(std::abs(trace_tau(identity_op({4, 6}, 20), rule) - 1.0) < 1e-6);
  std::mt19937_64 rng(13);
  for (int s = 0; s < 50; ++s) {
    const OperatorMatrix A{random_matrix(rng, 12), {4}, 12};
    const OperatorMatrix B{random_matrix(rng, 12), {4}, 12};
    CHECK(std::abs(trace_tau(A.adjoint(), rule) - std::conj(trace_tau(A, rule))) < 1e-10 * A.entries.norm());
    const cplx s2(0.7, -0.2);
    const OperatorMatrix C{A.entries + s2 * B.entries, {4}, 12};
    CHECK(std::abs(trace_tau(C, rule) - trace_tau(A, rule) - s2 * trace_tau(B, rule)) < 1e-10 * C.entries.norm());
    const OperatorMatrix AA{A.entries.adjoint() * A.entries, {4}, 12};
    const cplx t = trace_tau(AA, rule);
    CHECK(t.real() > 0);
    CHECK(std::abs(t.imag()) < 1e-10 * t.real());
  }
}

TEST_CASE("trace_via_Q reductions") {
  const auto rule = fundamental_rule(6);
  const auto b = cusp_basis(12);
  const auto f = pair_symbol(b[0], b[0]);
  const cplx mean = integrate(rule, [&](const HPoint& z) { return f.at_reduced(z); }) / rule.total_weight();
  CHECK(std::abs(trace_via_Q(identity_op({4}, 30), f, rule) - mean) < 1e-12 * std::abs(mean));
  std::mt19937_64 rng(14);
  const OperatorMatrix A{random_matrix(rng, 40), {4, 6}, 20};
  CHECK(std::abs(trace_via_Q(A, constant_symbol(1.0), rule) - trace_tau(A, rule)) < 1e-12 * A.entries.norm());
  const MatrixField one = [](const HPoint&) { return Eigen::MatrixXcd::Identity(2, 2); };
  CHECK(std::abs(trace_via_Q(A, one, rule) - trace_tau(A, rule)) < 1e-12 * A.entries.norm());
}

TEST_CASE("covariance") {
  std::mt19937_64 rng(15);
  const HPoint z{0.1, 1.3};
  const OperatorMatrix A{random_matrix(rng, 20), {4}, 20};
  CHECK(covariance_check(A, GroupElement::identity(), z) < 1e-12);
  CHECK(covariance_check(identity_op({6}, 40), GroupElement::S(), z) < 1e-10);
  CHECK(covariance_check(identity_op({4, 6}, 40), GroupElement::T(), z) < 1e-10);
  // A supported on degrees < 5, embedded at growing truncation.
  const Eigen::MatrixXcd small = random_matrix(rng, 5);
  for (const auto& w : {std::vector<int>{4}, std::vector<int>{4, 8}}) {
    double prev = 1e300;
    for (int N : {20, 40, 80}) {
      const int n = static_cast<int>(w.size());
      OperatorMatrix B{Eigen::MatrixXcd::Zero(n * N, n * N), w, N};
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) B.entries.block(i * N, j * N, 5, 5) = small;
      const double r = covariance_check(B, GroupElement::T(), z);
      CHECK((r < prev || r < 1e-13));
      prev = r;
    }
    CHECK(prev < 1e-6);
  }
}

TEST_CASE("symbol map is injective on low-degree matrix units") {
  const int N = 10, d = 4;
  const auto grid = f_grid(12, 12);
  std::vector<std::vector<cplx>> rows;
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k) {
      OperatorMatrix E{Eigen::MatrixXcd::Zero(N, N), {4}, N};
      E.entries(j, k) = 1;
      std::vector<cplx> v;
      for (const auto& z : grid) v.push_back(symbol_S_scalar(E, z));
      rows.push_back(v);
    }
  Eigen::MatrixXcd G(d * d, d * d);
  for (int a = 0; a < d * d; ++a)
    for (int b = 0; b < d * d; ++b) {
      cplx s = 0;
      for (std::size_t p = 0; p < grid.size(); ++p) s += rows[a][p] * std::conj(rows[b][p]);
      G(a, b) = s;
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G);
  CHECK(es.eigenvalues().minCoeff() > 1e-12 * es.eigenvalues().maxCoeff());
}

TEST_CASE("shape errors") {
  OperatorMatrix bad{Eigen::MatrixXcd::Identity(5, 5), {4}, 4};
  CHECK_THROWS_AS(symbol_S(bad, HPoint{0, 1}), SpaceMismatch);
}
