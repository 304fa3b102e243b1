#include "bq/toeplitz.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "bq/errors.hpp"

namespace bq {
namespace {

constexpr double kPi = std::numbers::pi;

struct FftPlan {
  fftw_plan plan = nullptr;
  fftw_complex* in = nullptr;
  fftw_complex* out = nullptr;
  ~FftPlan() {
    if (plan) fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
  }
};

// One forward plan per length, created under a lock (the planner is not thread safe).
FftPlan& plan_for(std::size_t L) {
  static std::map<std::size_t, std::unique_ptr<FftPlan>> plans;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto& p = plans[L];
  if (!p) {
    p = std::make_unique<FftPlan>();
    p->in = fftw_alloc_complex(L);
    p->out = fftw_alloc_complex(L);
    p->plan = fftw_plan_dft_1d(static_cast<int>(L), p->in, p->out, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  return *p;
}

std::vector<double> norms(int m, int N) {
  std::vector<double> a(N);
  a[0] = basis_norm(m, 0);
  for (int n = 1; n < N; ++n) a[n] = a[n - 1] * std::sqrt((n + m - 1.0) / n);
  return a;
}

cplx ipow(cplx x, int n) {
  cplx r = 1.0;
  for (; n > 0; n >>= 1, x *= x)
    if (n & 1) r *= x;
  return r;
}

void require_cusp(const QExpansion& f) {
  if (!f.cuspidal) throw NotCuspidal("constant term of the q-expansion is nonzero");
}

void require_weight(const QuadratureRule& rule, int twice_weight, const char* who) {
  if (rule.tag != DomainTag::FullDisk || 2 * rule.m != twice_weight)
    throw SpaceMismatch(std::string(who) + ": disk rule has the wrong weight");
}

}  // namespace

Eigen::MatrixXcd MatrixSymbol::twisted(const HPoint& z) const {
  const int n = size();
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (entry(i, j)) v(i, j) = entry(i, j)(z);
  return v;
}

Eigen::MatrixXcd MatrixSymbol::untwisted(const HPoint& z) const {
  Eigen::MatrixXcd u = twisted(z);
  for (int i = 0; i < size(); ++i)
    for (int j = 0; j < size(); ++j) u(i, j) *= std::pow(z.y, 0.5 * (weights[j] - weights[i]));
  return u;
}

MatrixSymbol scalar_diagonal_symbol(const InvariantSymbol& f, std::vector<int> weights) {
  MatrixSymbol s;
  s.weights = std::move(weights);
  s.name = f.name;
  s.entries.resize(s.weights.size() * s.weights.size());
  for (int i = 0; i < s.size(); ++i) s.entries[static_cast<std::size_t>(i * s.size() + i)] = f;
  return s;
}

cplx cusp_twisted(const QExpansion& f, const HPoint& z) { return std::pow(z.y, 0.5 * f.weight) * eval_form(f, z); }

MatrixSymbol cusp_pair_symbol(const QExpansion& f, const QExpansion& g, int m) {
  require_cusp(f);
  require_cusp(g);
  if (f.weight != g.weight) throw WeightMismatch("cusp_pair_symbol: weights differ");
  MatrixSymbol s;
  s.weights = {m, m + f.weight};
  s.name = "cusp_pair";
  s.entries.resize(4);
  s.entries[2] = [f](const HPoint& z) { return cusp_twisted(f, z); };
  s.entries[1] = [g](const HPoint& z) { return std::conj(cusp_twisted(g, z)); };
  return s;
}

MatrixSymbol extend_from_F(std::vector<int> weights, std::vector<ScalarField> on_F, std::string name) {
  MatrixSymbol s;
  s.weights = std::move(weights);
  s.name = std::move(name);
  const int n = s.size();
  if (on_F.size() != static_cast<std::size_t>(n * n)) throw Error("extend_from_F: need n*n entries");
  s.entries.resize(on_F.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const auto& base = on_F[static_cast<std::size_t>(i * n + j)];
      if (!base) continue;
      const int d = s.weights[j] - s.weights[i];
      s.entries[static_cast<std::size_t>(i * n + j)] = [base, d](const HPoint& z) {
        const auto r = reduce_to_fundamental(z);
        const cplx J = automorphy_J(r.gamma, z);
        return std::pow(J / std::abs(J), d) * base(r.zstar);
      };
    }
  return s;
}

MatrixSymbol adjoint_symbol(const MatrixSymbol& s) {
  MatrixSymbol a = s;
  a.name = s.name + "*";
  const int n = s.size();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const auto& e = s.entry(j, i);
      a.entries[static_cast<std::size_t>(i * n + j)] =
          e ? ScalarField([e](const HPoint& z) { return std::conj(e(z)); }) : ScalarField();
    }
  return a;
}

double linfty_h_norm(const MatrixSymbol& s, const std::vector<HPoint>& grid, double cap) {
  double sup = 0;
  for (const auto& z : grid) {
    const double v = s.twisted(z).norm();
    if (!std::isfinite(v) || v > cap) throw NotInLinftyH("symbol is not bounded in the twisted norm");
    sup = std::max(sup, v);
  }
  return sup;
}

std::vector<cplx> sample_nodes(const QuadratureRule& rule, const ScalarField& v) {
  const auto n = static_cast<std::ptrdiff_t>(rule.size());
  std::vector<cplx> out(rule.size());
  std::ptrdiff_t bad = -1;
  std::string err;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = v(rule.hnode(static_cast<std::size_t>(i)));
    } catch (const std::exception& e) {
#pragma omp critical
      if (bad < 0 || i < bad) {
        bad = i;
        err = e.what();
      }
    }
  }
  if (bad >= 0) throw EvaluationError(static_cast<std::size_t>(bad), err);
  for (std::ptrdiff_t i = 0; i < n; ++i)
    if (!std::isfinite(out[i].real()) || !std::isfinite(out[i].imag()))
      throw NotInLinftyH("non-finite symbol value at node " + std::to_string(i));
  return out;
}

Eigen::MatrixXcd assemble_block(int mi, int mj, int N, const QuadratureRule& rule, const std::vector<cplx>& v,
                                bool direct) {
  require_weight(rule, mi + mj, "assemble_block");
  if (v.size() != rule.size()) throw Error("assemble_block: sample count does not match the rule");
  const auto ai = norms(mi, N), aj = norms(mj, N);
  const cplx global = std::exp(cplx(0, kPi * (mi - mj) / 4.0));
  const int d = mj - mi;
  Eigen::MatrixXcd E = Eigen::MatrixXcd::Zero(N, N);
  std::vector<cplx> g, G;
  std::vector<double> rk(N);
  for (const auto& ring : rule.rings) {
    const std::size_t L = ring.count;
    if (L < static_cast<std::size_t>(2 * N)) throw Error("assemble_block: ring too coarse for the truncation");
    g.resize(L);
    for (std::size_t q = 0; q < L; ++q) {
      const std::size_t i = ring.offset + q;
      const cplx w(rule.x[i], rule.y[i]);
      const cplx om = 1.0 - w;
      g[q] = v[i] * global * (d == 0 ? cplx(1) : std::pow(om / std::abs(om), d));
    }
    // G[n] = sum_q g_q e^{-2 pi i q n / L}; entry (k,l) uses n = (k - l) mod L.
    G.assign(L, 0.0);
    if (!direct) {
      auto& p = plan_for(L);
      auto* in = fftw_alloc_complex(L);
      auto* out = fftw_alloc_complex(L);
      for (std::size_t q = 0; q < L; ++q) {
        in[q][0] = g[q].real();
        in[q][1] = g[q].imag();
      }
      fftw_execute_dft(p.plan, in, out);
      for (std::size_t q = 0; q < L; ++q) G[q] = {out[q][0], out[q][1]};
      fftw_free(in);
      fftw_free(out);
    } else {
      std::vector<cplx> tw(L);
      for (std::size_t j = 0; j < L; ++j) tw[j] = std::polar(1.0, -2.0 * kPi * static_cast<double>(j) / L);
      for (int n = -(N - 1); n < N; ++n) {
        const std::size_t nn = static_cast<std::size_t>((n % static_cast<long>(L) + static_cast<long>(L)) %
                                                        static_cast<long>(L));
        cplx s = 0;
        for (std::size_t q = 0; q < L; ++q) s += g[q] * tw[(q * nn) % L];
        G[nn] = s;
      }
    }
    const double r = std::sqrt(ring.t);
    const double c = ring.radial_weight * 2.0 * kPi / static_cast<double>(L);
    rk[0] = 1;
    for (int k = 1; k < N; ++k) rk[k] = rk[k - 1] * r;
    for (int l = 0; l < N; ++l)
      for (int k = 0; k < N; ++k) {
        const std::size_t nn = static_cast<std::size_t>(k >= l ? k - l : static_cast<long>(L) + k - l);
        E(k, l) += c * ai[k] * aj[l] * rk[k] * rk[l] * G[nn];
      }
  }
  return E;
}

OperatorMatrix toeplitz_matrix(const InvariantSymbol& f, const BergmanModel& model, const QuadratureRule& rule) {
  const auto v = sample_nodes(rule, [&](const HPoint& z) { return f(z); });
  return {assemble_block(model.m, model.m, model.N, rule, v), {model.m}, model.N, {}};
}

OperatorMatrix toeplitz_block(const QExpansion& f, int m, int N, const QuadratureRule& rule) {
  require_cusp(f);
  const int mp = m + f.weight;
  const auto v = sample_nodes(rule, [&](const HPoint& z) { return cusp_twisted(f, z); });
  return {assemble_block(mp, m, N, rule, v), {mp}, N, {m}};
}

OperatorMatrix toeplitz_block_partner(const QExpansion& g, int m, int N, const QuadratureRule& rule, bool direct) {
  require_cusp(g);
  const int mp = m + g.weight;
  const auto v = sample_nodes(rule, [&](const HPoint& z) { return std::conj(cusp_twisted(g, z)); });
  return {assemble_block(m, mp, N, rule, v, direct), {m}, N, {mp}};
}

OperatorMatrix matrix_toeplitz(const MatrixSymbol& s, const BlockModel& block, int level, const RuleCache& cache) {
  if (s.weights != block.weights) throw SpaceMismatch("matrix_toeplitz: symbol and space weights differ");
  const int n = s.size(), N = block.N;
  OperatorMatrix T{Eigen::MatrixXcd::Zero(n * N, n * N), s.weights, N, {}};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (!s.entry(i, j)) continue;
      const int mi = s.weights[i], mj = s.weights[j];
      if ((mi + mj) % 2) throw Error("matrix_toeplitz: weights of a block pair must have even sum");
      const auto rule = cache.disk((mi + mj) / 2, level, N);
      const auto v = sample_nodes(rule, s.entry(i, j));
      T.entries.block(i * N, j * N, N, N) = assemble_block(mi, mj, N, rule, v);
    }
  return T;
}

double leading_block_residual(const Eigen::MatrixXcd& A, int size) {
  const auto b = static_cast<Eigen::Index>(size);
  return A.topLeftCorner(std::min(b, A.rows()), std::min(b, A.cols())).norm();
}

double adjoint_formula_check(const QExpansion& g, int m, int N, const QuadratureRule& rule) {
  const auto T = toeplitz_block(g, m, N, rule);
  const auto P = toeplitz_block_partner(g, m, N, rule, true);
  return (T.entries.adjoint() - P.entries).norm();
}

double composite_identity_check(const QExpansion& f, const QExpansion& g, int m, int N, int block,
                                const QuadratureRule& block_rule, const QuadratureRule& pair_rule) {
  if (f.weight != g.weight) throw WeightMismatch("composite_identity_check: weights differ");
  const auto Tf = toeplitz_block(f, m, N, block_rule);
  const auto Tg = toeplitz_block(g, m, N, block_rule);
  const auto lhs = compose(Tg.adjoint(), Tf);
  const auto rhs = toeplitz_matrix(pair_symbol(f, g), BergmanModel(m, N, ModelKind::Disk), pair_rule);
  return leading_block_residual(lhs.entries - rhs.entries, block);
}

double intertwining_residual(const OperatorMatrix& Tf, const GroupElement& gamma, int block) {
  const int m = Tf.domain().at(0), mp = Tf.weights.at(0);
  const auto Lm = discrete_series_matrix(BergmanModel(m, Tf.N, ModelKind::Disk), gamma).entries;
  const auto Lp = discrete_series_matrix(BergmanModel(mp, Tf.N, ModelKind::Disk), gamma).entries;
  return leading_block_residual(Tf.entries * Lm - Lp * Tf.entries, block);
}

std::vector<Eigen::MatrixXcd> sample_twisted(const MatrixSymbol& s, const QuadratureRule& rule) {
  std::vector<Eigen::MatrixXcd> out(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) out[i] = s.twisted(rule.hnode(i));
  return out;
}

Eigen::MatrixXcd BSum::apply(const std::vector<Eigen::MatrixXcd>& v_nodes, const HPoint& z,
                             std::vector<double>* shells) const {
  if (!rule || rule->tag != DomainTag::FundamentalDomain) throw Error("BSum: needs a fundamental-domain rule");
  if (v_nodes.size() != rule->size()) throw Error("BSum: sample count does not match the rule");
  const int n = static_cast<int>(weights.size());
  std::vector<double> scale(n);
  for (int i = 0; i < n; ++i) {
    const int m = weights[i];
    const double c = (m - 1) / (4 * kPi);
    // a_i = K_i y_w^{m/2} y_z^{m/2} / sqrt(c) with K_i = c ((p - conj z)/2i)^{-m}
    scale[i] = std::sqrt(c) * std::pow(z.y, 0.5 * m);
  }
  const auto& G = psl_elements(height);
  if (shells) shells->assign(height, 0.0);
  Eigen::MatrixXcd total = Eigen::MatrixXcd::Zero(n, n);
  Eigen::VectorXcd b(n);
  for (const auto& g : G) {
    Eigen::MatrixXcd part = Eigen::MatrixXcd::Zero(n, n);
    for (std::size_t k = 0; k < rule->size(); ++k) {
      const HPoint w = rule->hnode(k);
      const cplx J = automorphy_J(g, w);
      const cplx u = J / std::abs(J);
      const HPoint p = mobius_apply(g, w);
      const cplx t = (p.z() - std::conj(z.z())) / cplx(0, 2);
      // b_i = a_i conj(u)^{m_i}, which turns v(gamma w) = D v(w) D^* back into v(w).
      const cplx q = std::sqrt(p.y) * std::conj(u) / t;
      for (int i = 0; i < n; ++i) b(i) = scale[i] * ipow(q, weights[i]);
      const double wk = rule->w[k];
      const auto& v = v_nodes[k];
      for (int j = 0; j < n; ++j) {
        const cplx bj = wk * b(j);
        for (int i = 0; i < n; ++i) part(i, j) += std::conj(b(i)) * v(i, j) * bj;
      }
    }
    if (shells) (*shells)[g.height() - 1] += part.norm();
    total += part;
  }
  return total;
}

double BSum::kadison_min_eig(const std::vector<Eigen::MatrixXcd>& v_nodes, const HPoint& z) const {
  std::vector<Eigen::MatrixXcd> vv(v_nodes.size()), vs(v_nodes.size());
  for (std::size_t k = 0; k < v_nodes.size(); ++k) {
    vv[k] = v_nodes[k] * v_nodes[k].adjoint();
    vs[k] = v_nodes[k].adjoint();
  }
  const Eigen::MatrixXcd D = apply(vv, z) - apply(v_nodes, z) * apply(vs, z);
  const Eigen::MatrixXcd H = 0.5 * (D + D.adjoint());
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(H).eigenvalues().minCoeff();
}

std::vector<Eigen::MatrixXcd> operator_B_apply(const MatrixSymbol& s, const std::vector<HPoint>& grid, int height,
                                               const QuadratureRule& rule) {
  const BSum B{s.weights, &rule, height};
  const auto v = sample_twisted(s, rule);
  std::vector<Eigen::MatrixXcd> out;
  out.reserve(grid.size());
  for (const auto& z : grid) {
    Eigen::MatrixXcd phi = B.apply(v, z);
    for (int i = 0; i < s.size(); ++i)
      for (int j = 0; j < s.size(); ++j) phi(i, j) *= std::pow(z.y, 0.5 * (s.weights[j] - s.weights[i]));
    out.push_back(std::move(phi));
  }
  return out;
}

TStarResult T_star_check(const std::vector<OperatorMatrix>& ops, const std::vector<MatrixSymbol>& dict,
                         const QuadratureRule& rule, const std::vector<OperatorMatrix>& dict_ops) {
  TStarResult r;
  const double mu = rule.total_weight();
  for (const auto& A : ops) {
    for (std::size_t d = 0; d < dict.size(); ++d) {
      const auto& f = dict[d];
      if (f.weights != A.weights) throw SpaceMismatch("T_star_check: symbol and operator weights differ");
      const double n = static_cast<double>(f.size());
      const cplx lhs = integrate(rule, [&](const HPoint& z) {
                         return (symbol_S(A, z) * f.twisted(z).adjoint()).trace();
                       }) /
                       (n * mu);
      const MatrixField sharp = [&](const HPoint& z) {
        Eigen::MatrixXcd u = f.untwisted(z).adjoint();
        for (int i = 0; i < f.size(); ++i)
          for (int j = 0; j < f.size(); ++j) u(i, j) *= std::pow(z.y, f.weights[j] - f.weights[i]);
        return u;
      };
      const cplx rhs = trace_via_Q(A, sharp, rule);
      r.lhs.push_back(lhs);
      r.rhs.push_back(rhs);
      r.max_residual = std::max(r.max_residual, std::abs(lhs - rhs));
      if (!dict_ops.empty()) r.direct.push_back(trace_tau(compose(A, dict_ops[d].adjoint()), rule));
    }
  }
  return r;
}

DensityResult density_experiment(const std::vector<int>& weights, const InvariantSymbol& target, int m, int N,
                                 const QuadratureRule& f_rule, const QuadratureRule& disk_rule) {
  DensityResult out;
  const std::size_t nn = f_rule.size();
  const double mu = f_rule.total_weight();
  auto values = [&](const InvariantSymbol& s) {
    std::vector<cplx> v(nn);
    for (std::size_t k = 0; k < nn; ++k) v[k] = s.at_reduced(f_rule.hnode(k));
    return v;
  };
  auto inner = [&](const std::vector<cplx>& a, const std::vector<cplx>& b) {
    std::vector<cplx> t(nn);
    for (std::size_t k = 0; k < nn; ++k) t[k] = f_rule.w[k] * a[k] * std::conj(b[k]);
    return pairwise_sum(t) / mu;
  };
  const BergmanModel model(m, N, ModelKind::Disk);
  const auto tv = values(target);
  const auto Tt = toeplitz_matrix(target, model, disk_rule);
  const double tnorm2 = inner(tv, tv).real();
  const double onorm2 = trace_via_Q(Tt.adjoint(), target, f_rule).real();
  out.target_symbol_norm = std::sqrt(tnorm2);
  out.target_operator_norm = std::sqrt(std::max(onorm2, 0.0));

  std::vector<InvariantSymbol> dict;
  std::vector<std::vector<cplx>> dv;
  std::vector<OperatorMatrix> dT;
  out.rungs.push_back({0, 0, out.target_symbol_norm, out.target_operator_norm, 0.0});
  // Normal equations M c = r; a ridge is added only when M is numerically singular.
  auto solve = [](const Eigen::MatrixXcd& M0, const Eigen::VectorXcd& rhs, double& ridge) {
    const Eigen::MatrixXcd M = 0.5 * (M0 + M0.adjoint());
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(M).eigenvalues();
    ridge = (ev.minCoeff() <= 1e-12 * ev.maxCoeff()) ? 1e-12 * ev.maxCoeff() : 0.0;
    const Eigen::MatrixXcd Mr = M + ridge * Eigen::MatrixXcd::Identity(M.rows(), M.cols());
    return Eigen::VectorXcd(Mr.ldlt().solve(rhs));
  };
  for (int k : weights) {
    const auto basis = cusp_basis(k);
    for (const auto& f : basis)
      for (const auto& g : basis) {
        dict.push_back(pair_symbol(f, g));
        dv.push_back(values(dict.back()));
        dT.push_back(toeplitz_matrix(dict.back(), model, disk_rule));
      }
    const int n = static_cast<int>(dict.size());
    Eigen::MatrixXcd Ms(n, n), Mo(n, n);
    Eigen::VectorXcd rs(n), ro(n);
    for (int a = 0; a < n; ++a) {
      const auto TaH = dT[a].adjoint();
      for (int b = 0; b < n; ++b) {
        Ms(a, b) = inner(dv[b], dv[a]);
        Mo(a, b) = trace_via_Q(TaH, dict[b], f_rule);  // <T_b, T_a>_tau = tau(T_a^* T_b)
      }
      rs(a) = inner(tv, dv[a]);
      ro(a) = trace_via_Q(TaH, target, f_rule);
    }
    DensityRung rung;
    rung.weight = k;
    rung.size = n;
    double ridge_s = 0, ridge_o = 0;
    const Eigen::VectorXcd cs = solve(Ms, rs, ridge_s), co = solve(Mo, ro, ridge_o);
    std::vector<cplx> res = tv;
    for (int a = 0; a < n; ++a)
      for (std::size_t k2 = 0; k2 < nn; ++k2) res[k2] -= cs(a) * dv[a][k2];
    rung.symbol_residual = std::sqrt(inner(res, res).real());
    // tau 2-norm of R = T_t - sum c_a T_a through its symbol t - sum c_a s_a.
    OperatorMatrix R = Tt;
    std::vector<InvariantSymbol> parts{target};
    std::vector<cplx> coef{1.0};
    for (int a = 0; a < n; ++a) {
      R.entries -= co(a) * dT[a].entries;
      parts.push_back(dict[a]);
      coef.push_back(-co(a));
    }
    rung.operator_residual = std::sqrt(std::abs(trace_via_Q(R.adjoint(), linear_combination(parts, coef), f_rule)));
    rung.ridge = std::max(ridge_s, ridge_o);
    out.rungs.push_back(rung);
  }
  return out;
}

}  // namespace bq
