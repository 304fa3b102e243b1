#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <tuple>

#include "bq/berezin.hpp"
#include "bq/errors.hpp"
#include "bq/toeplitz.hpp"
#include "doctest.h"

using namespace bq;

namespace {

// Delta scaled so that |Delta| y^6 is of order one on F.
const QExpansion& delta() {
  static const QExpansion d = scale(delta_qexp(), 1000.0);
  return d;
}

const QuadratureRule& disk(int m, int level, int N) {
  static std::map<std::tuple<int, int, int>, QuadratureRule> cache;
  auto key = std::make_tuple(m, level, N);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, weighted_disk_rule(m, level, N)).first;
  return it->second;
}

std::vector<HPoint> f_grid(int nx, int ny, double ymax) {
  std::vector<HPoint> pts;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      const double x = -0.5 + (i + 0.5) / nx;
      const double y0 = std::sqrt(1 - x * x);
      pts.push_back({x, y0 + (ymax - y0) * j / (ny - 1)});
    }
  return pts;
}

double op_norm(const Eigen::MatrixXcd& A) { return Eigen::JacobiSVD<Eigen::MatrixXcd>(A).singularValues()(0); }

// Ladder check that tolerates two residuals already at roundoff.
bool halves_or_floor(double coarse, double fine, double floor) {
  return fine <= 0.5 * coarse || (coarse < floor && fine < floor);
}

}  // namespace

TEST_CASE("scalar Toeplitz: constants, linearity, hermitian and positive symbols") {
  const int m = 4, N = 40;
  const BergmanModel M(m, N, ModelKind::Disk);
  const auto& rule = disk(m, 5, N);
  const auto I = Eigen::MatrixXcd::Identity(N, N);
  CHECK((toeplitz_matrix(constant_symbol(1.0), M, rule).entries - I).norm() < 1e-8);
  const cplx c(0.3, -1.7);
  CHECK((toeplitz_matrix(constant_symbol(c), M, rule).entries - c * I).norm() < 1e-8);

  const auto f = pair_symbol(delta(), delta());
  const auto g = bump_symbol(HPoint{0.1, 1.6}, 1.0);
  const auto Tf = toeplitz_matrix(f, M, rule).entries;
  const auto Tg = toeplitz_matrix(g, M, rule).entries;
  CHECK((Tf - Tf.adjoint()).norm() < 1e-10 * Tf.norm());
  const cplx a(2.0, 0.5), b(-0.7, 1.1);
  const auto Tc = toeplitz_matrix(linear_combination({f, g}, {a, b}), M, rule).entries;
  CHECK((Tc - a * Tf - b * Tg).norm() < 1e-13 * Tc.norm());

  for (const auto* T : {&Tf, &Tg}) {
    const Eigen::MatrixXcd H = 0.5 * (*T + T->adjoint());
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(H).eigenvalues().minCoeff() > -1e-10 * T->norm());
  }
}

TEST_CASE("Gamma-invariant symbols commute with the discrete series") {
  const int m = 4, blk = 10;
  const auto f = pair_symbol(delta(), delta());
  double prev_S = 0, prev_T = 0;
  for (int N : {40, 60}) {
    const BergmanModel M(m, N, ModelKind::Disk);
    const auto T = toeplitz_matrix(f, M, disk(m, 5, N)).entries;
    const auto LS = discrete_series_matrix(M, GroupElement::S()).entries;
    const auto LT = discrete_series_matrix(M, GroupElement::T()).entries;
    const double rS = leading_block_residual(T * LS - LS * T, blk) / T.norm();
    const double rT = leading_block_residual(T * LT - LT * T, blk) / T.norm();
    if (N == 60) {
      CHECK(rS < 1e-6);
      CHECK(rT < 1e-6);
      CHECK(halves_or_floor(prev_S, rS, 1e-12));
      CHECK(halves_or_floor(prev_T, rT, 1e-12));
    }
    prev_S = rS;
    prev_T = rT;
  }
}

TEST_CASE("Berezin transform matches the symbol of T_f and tr S(T_f) is Gamma-invariant") {
  const int m = 4, N = 60;
  const auto f = pair_symbol(delta(), delta());
  const auto& rule = disk(m, 5, N);
  const auto T = toeplitz_matrix(f, BergmanModel(m, N, ModelKind::Disk), rule);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> X(-0.5, 0.5), Y(0.9, 1.8);
  for (int s = 0; s < 20; ++s) {
    const HPoint z{X(rng), Y(rng)};
    const cplx st = symbol_S_scalar(T, z);
    const cplx bt = berezin_transform([&](const HPoint& p) { return f(p); }, z, rule);
    CHECK(std::abs(st - bt) < 1e-8);
    CHECK(std::abs(st - symbol_S_scalar(T, mobius_apply(GroupElement::T(), z))) < 1e-8);
    CHECK(std::abs(st - symbol_S_scalar(T, mobius_apply(GroupElement::S(), z))) < 1e-8);
  }
}

TEST_CASE("cusp-form blocks: zero form, non-cusp input, norm bound") {
  const int m = 4, N = 40;
  const auto& rule = disk(m + 6, 5, N);
  const auto zero = QExpansion::from_complex(12, std::vector<cplx>(50, 0.0));
  CHECK(toeplitz_block(zero, m, N, rule).entries.norm() == 0.0);
  CHECK(adjoint_formula_check(zero, m, N, rule) == 0.0);
  CHECK_THROWS_AS(toeplitz_block(eisenstein_qexp(4), m, N, disk(m + 2, 5, N)), NotCuspidal);
  CHECK_THROWS_AS(toeplitz_block(delta(), m, N, disk(m + 5, 5, N)), SpaceMismatch);

  const auto T = toeplitz_block(delta(), m, N, rule);
  CHECK(T.weights == std::vector<int>{16});
  CHECK(T.domain() == std::vector<int>{4});
  double sup = 0;
  for (const auto& z : f_grid(40, 60, 4.0)) sup = std::max(sup, std::abs(cusp_twisted(delta(), z)));
  CHECK(op_norm(T.entries) <= sup * (1 + 1e-6));
}

TEST_CASE("T_Delta intertwines L_4 and L_16") {
  const int m = 4, blk = 10;
  double prev[2] = {0, 0};
  for (int N : {40, 60}) {
    const auto T = toeplitz_block(delta(), m, N, disk(m + 6, 5, N));
    int k = 0;
    for (const auto& g : {GroupElement::S(), GroupElement::T()}) {
      const double r = intertwining_residual(T, g, blk) / T.entries.norm();
      if (N == 60) {
        CHECK(r < 1e-4);
        CHECK(halves_or_floor(prev[k], r, 1e-12));
      }
      prev[k++] = r;
    }
  }
}

TEST_CASE("adjoint formula and composite identity") {
  const int m = 4, blk = 10;
  const auto& D = delta();
  const double a40 = adjoint_formula_check(D, m, 40, disk(m + 6, 5, 40));
  const double a60 = adjoint_formula_check(D, m, 60, disk(m + 6, 5, 60));
  CHECK(a40 < 1e-10);
  CHECK(a60 < 1e-10);

  const double c40 = composite_identity_check(D, D, m, 40, blk, disk(m + 6, 5, 40), disk(m, 5, 40));
  const double c60 = composite_identity_check(D, D, m, 60, blk, disk(m + 6, 5, 60), disk(m, 5, 60));
  CHECK(c60 < c40);
  const auto zero = QExpansion::from_complex(12, std::vector<cplx>(50, 0.0));
  CHECK(composite_identity_check(zero, zero, m, 20, blk, disk(m + 6, 4, 20), disk(m, 4, 20)) == 0.0);
  const auto S16 = cusp_basis(16).at(0);
  CHECK_THROWS_AS(composite_identity_check(D, S16, m, 20, blk, disk(m + 6, 4, 20), disk(m, 4, 20)), WeightMismatch);
}

TEST_CASE("matrix Toeplitz: identity, block bridge, adjoint law") {
  const int N = 30, level = 4;
  const RuleCache cache("");
  const auto one = scalar_diagonal_symbol(constant_symbol(1.0), {4, 16});
  const auto I = matrix_toeplitz(one, BlockModel({4, 16}, N), level, cache);
  CHECK((I.entries - Eigen::MatrixXcd::Identity(2 * N, 2 * N)).norm() < 1e-8);

  const auto sym = cusp_pair_symbol(delta(), delta(), 4);
  const auto A = matrix_toeplitz(sym, BlockModel({4, 16}, N), level, cache);
  const auto rule = cache.disk(10, level, N);
  const auto Tf = toeplitz_block(delta(), 4, N, rule);
  const auto Tp = toeplitz_block_partner(delta(), 4, N, rule);
  CHECK(A.entries.block(N, 0, N, N) == Tf.entries);
  CHECK(A.entries.block(0, N, N, N) == Tp.entries);
  CHECK(A.entries.block(0, 0, N, N).norm() == 0.0);

  // Asymmetric symbol so that the adjoint is not the operator itself.
  const auto b = bump_symbol(HPoint{0, 1.5}, 1.2);
  MatrixSymbol s = extend_from_F({4, 6}, {[b](const HPoint& z) { return b(z); },
                                          [](const HPoint& z) { return cplx(0.2, 0.1) * std::exp(-z.y); },
                                          [](const HPoint& z) { return cplx(z.x, -0.4) / z.y; },
                                          [](const HPoint& z) { return cplx(0, 1) * std::exp(-0.5 * z.y); }});
  const auto As = matrix_toeplitz(s, BlockModel({4, 6}, N), level, cache);
  const auto Aa = matrix_toeplitz(adjoint_symbol(s), BlockModel({4, 6}, N), level, cache);
  CHECK((As.entries.adjoint() - Aa.entries).norm() < 1e-12 * As.entries.norm());
  CHECK_THROWS_AS(matrix_toeplitz(s, BlockModel({4, 8}, N), level, cache), SpaceMismatch);
}

TEST_CASE("L-infinity-H membership") {
  const auto grid = f_grid(10, 20, 50.0);
  const auto sym = cusp_pair_symbol(delta(), delta(), 4);
  CHECK(linfty_h_norm(sym, grid) < 10.0);
  MatrixSymbol bad = scalar_diagonal_symbol(constant_symbol(1.0), {4});
  bad.entries[0] = [](const HPoint& z) { return cplx(std::exp(z.y)); };
  CHECK_THROWS_AS(linfty_h_norm(bad, grid), NotInLinftyH);
  bad.entries[0] = [](const HPoint&) { return cplx(std::nan("")); };
  CHECK_THROWS_AS(sample_nodes(disk(4, 2, 4), bad.entries[0]), NotInLinftyH);
  CHECK_THROWS_AS(cusp_pair_symbol(eisenstein_qexp(4), eisenstein_qexp(4), 4), NotCuspidal);
}

TEST_CASE("lifted symbols obey the equivariance law") {
  const std::vector<int> w{4, 10};
  const auto lifted = extend_from_F(w, {[](const HPoint& z) { return cplx(z.y, 0); },
                                        [](const HPoint& z) { return cplx(z.x, 1.0); },
                                        [](const HPoint& z) { return cplx(1.0 / z.y, z.x * z.x); },
                                        ScalarField()});
  const auto pair = cusp_pair_symbol(delta(), delta(), 4);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> X(-0.5, 0.5), Y(0.9, 2.0);
  std::uniform_int_distribution<int> K(-3, 3);
  for (int s = 0; s < 40; ++s) {
    const HPoint z0{X(rng), Y(rng)};
    const GroupElement g = GroupElement::T().power(K(rng)) * GroupElement::S() * GroupElement::T().power(K(rng));
    const HPoint z = mobius_apply(g, z0);
    for (const auto* sym : {&lifted, &pair}) {
      const auto v0 = sym->twisted(z0);
      const auto v = sym->twisted(z);
      const cplx J = automorphy_J(g.inverse(), z);
      const cplx u = J / std::abs(J);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          const cplx expect = std::pow(u, sym->weights[i] - sym->weights[j]) * v(i, j);
          CHECK(std::abs(v0(i, j) - expect) < 1e-8 * (1 + std::abs(v0(i, j))));
        }
    }
  }
}

TEST_CASE("operator B: identity, positivity, Kadison step, Q-symbol consistency") {
  const auto fr = fundamental_rule(6);
  const std::vector<int> w{6, 8};
  const auto one = scalar_diagonal_symbol(constant_symbol(1.0), w);
  for (const HPoint z : {HPoint{0, 1.5}, HPoint{0.3, 1.1}}) {
    const auto B = operator_B_apply(one, {z}, 10, fr);
    CHECK((B[0] - Eigen::MatrixXcd::Identity(2, 2)).norm() < 1e-4);
  }

  const auto bump = scalar_diagonal_symbol(bump_symbol(HPoint{0.1, 1.4}, 1.2), {6});
  for (const auto& Bz : operator_B_apply(bump, {HPoint{0, 1.2}, HPoint{0.4, 2.5}, HPoint{-2.3, 0.4}}, 10, fr))
    CHECK(Bz(0, 0).real() >= 0.0);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> G;
  std::vector<ScalarField> base;
  for (int k = 0; k < 4; ++k) {
    const cplx a(G(rng), G(rng)), b(G(rng), G(rng));
    base.push_back([a, b](const HPoint& z) { return a * std::exp(-0.3 * z.y) + b * std::cos(6.283185307179586 * z.x); });
  }
  const auto rs = extend_from_F(w, base);
  const BSum B{w, &fr, 5};
  const auto vn = sample_twisted(rs, fr);
  for (const HPoint z : {HPoint{0, 1.2}, HPoint{0.3, 0.8}, HPoint{1.7, 2.2}})
    CHECK(B.kadison_min_eig(vn, z) >= -1e-8);

  const int N = 60;
  const auto pair = cusp_pair_symbol(delta(), delta(), 6);
  const auto T = matrix_toeplitz(pair, BlockModel({6, 18}, N), 5, RuleCache(""));
  const HPoint z{0.1, 1.2};
  const auto Bz = operator_B_apply(pair, {z}, 10, fr)[0];
  const auto Qz = symbol_Q(T, z);
  CHECK((Bz - Qz).norm() < 1e-6 * Qz.norm());
}

TEST_CASE("operator B is bounded in the L2_H norm") {
  const auto outer = fundamental_rule(2);
  const auto inner = fundamental_rule(4);
  const std::vector<int> w{6, 8};
  const auto s = extend_from_F(w, {[](const HPoint& z) { return cplx(std::exp(-z.y), 0); },
                                   [](const HPoint& z) { return cplx(0, z.x) / z.y; },
                                   [](const HPoint& z) { return cplx(0.5, 0) / (z.y * z.y); },
                                   [](const HPoint& z) { return cplx(std::cos(3.0 * z.x), 0) / z.y; }});
  std::vector<HPoint> nodes(outer.size());
  for (std::size_t k = 0; k < outer.size(); ++k) nodes[k] = outer.hnode(k);
  const auto Bf = operator_B_apply(s, nodes, 5, inner);
  double nb = 0, nf = 0;
  for (std::size_t k = 0; k < outer.size(); ++k) {
    // L2_H norm uses the twisted field H_z X H_z^{-1}.
    Eigen::MatrixXcd b = Bf[k];
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) b(i, j) *= std::pow(nodes[k].y, 0.5 * (w[i] - w[j]));
    nb += outer.w[k] * b.squaredNorm();
    nf += outer.w[k] * s.twisted(nodes[k]).squaredNorm();
  }
  CHECK(std::sqrt(nb / nf) <= std::sqrt(2.0) + 1e-6);
}

TEST_CASE("T-star pairing against tau") {
  const int N = 30;
  const auto fr = fundamental_rule(5);
  const std::vector<int> w{4, 6};
  const OperatorMatrix I{Eigen::MatrixXcd::Identity(2 * N, 2 * N), w, N};
  const auto one = scalar_diagonal_symbol(constant_symbol(1.0), w);
  const auto r1 = T_star_check({I}, {one}, fr);
  CHECK(std::abs(r1.lhs[0] - 1.0) < 1e-6);
  CHECK(std::abs(r1.rhs[0] - 1.0) < 1e-6);

  std::mt19937_64 rng(9);
  std::normal_distribution<double> G;
  std::vector<OperatorMatrix> ops;
  for (int a = 0; a < 3; ++a) {
    Eigen::MatrixXcd M(2 * N, 2 * N);
    for (int i = 0; i < 2 * N; ++i)
      for (int j = 0; j < 2 * N; ++j) M(i, j) = cplx(G(rng), G(rng)) / std::sqrt(2.0 * N);
    ops.push_back({M, w, N});
  }
  std::vector<MatrixSymbol> dict;
  for (int d = 0; d < 3; ++d) {
    const cplx a(G(rng), G(rng)), b(G(rng), G(rng));
    dict.push_back(extend_from_F(w, {[a](const HPoint& z) { return a * std::exp(-z.y); },
                                     [b](const HPoint& z) { return b / z.y; }, ScalarField(),
                                     [a, b](const HPoint& z) { return a * b * std::cos(6.283185307179586 * z.x); }}));
  }
  const auto r = T_star_check(ops, dict, fr);
  CHECK(r.max_residual < 1e-6);
}

TEST_CASE("density experiment: exact member and empty dictionary") {
  const auto target = pair_symbol(delta(), delta());
  const auto res = density_experiment({12}, target, 4, 20, fundamental_rule(5), disk(4, 4, 20));
  REQUIRE(res.rungs.size() == 2);
  CHECK(res.rungs[0].size == 0);
  CHECK(res.rungs[0].symbol_residual == doctest::Approx(res.target_symbol_norm));
  CHECK(res.rungs[0].operator_residual == doctest::Approx(res.target_operator_norm));
  CHECK(res.rungs[1].size == 1);
  CHECK(res.rungs[1].symbol_residual < 1e-10 * res.target_symbol_norm);
  CHECK(res.rungs[1].operator_residual < 1e-6 * res.target_operator_norm);
}
