#include "bq/modforms.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <numbers>

#include "bq/errors.hpp"
#include "json.hpp"

namespace bq {
namespace {

constexpr double kPi = std::numbers::pi;
// |q| on F is at most exp(-pi sqrt 3).
const double kQMax = std::exp(-kPi * std::sqrt(3.0));

double to_double(const BigRational& r) { return static_cast<double>(r); }

// C * sum_{n > D} n^k x^n, summed until the terms are negligible.
double tail_sum(double C, int k, int D, double x) {
  if (C == 0 || x == 0) return 0.0;
  double s = 0;
  for (int n = D + 1; n < D + 100000; ++n) {
    const double t = C * std::exp(k * std::log(static_cast<double>(n)) + n * std::log(x));
    s += t;
    if (n > k / -std::log(x) && t < 1e-30 * s) break;
    if (t == 0 && n > k / -std::log(x)) break;
  }
  return s;
}

cplx horner(const std::vector<cplx>& a, int D, cplx q) {
  cplx s = 0;
  for (int n = D; n >= 0; --n) s = s * q + a[n];
  return s;
}

}  // namespace

void QExpansion::finalize() {
  order = 0;
  while (order < static_cast<int>(coeffs.size()) && coeffs[order] == cplx{}) ++order;
  growth_const = 0;
  for (std::size_t n = 1; n < coeffs.size(); ++n)
    growth_const = std::max(growth_const, std::abs(coeffs[n]) / std::pow(static_cast<double>(n), weight));
  const int M = depth();
  fast_depth = M;
  if (order > M) {
    fast_depth = 0;
    return;
  }
  const double scale = std::abs(coeffs[order]) * std::pow(kQMax, order);
  for (int D = std::max(order, 1); D <= M; ++D) {
    if (tail_sum(growth_const, weight, D, kQMax) <= 1e-17 * scale) {
      fast_depth = D;
      break;
    }
  }
}

QExpansion QExpansion::from_exact(int weight, std::vector<BigRational> a, std::string label) {
  QExpansion f;
  f.weight = weight;
  f.coeffs.reserve(a.size());
  for (const auto& v : a) f.coeffs.emplace_back(to_double(v), 0.0);
  f.exact = std::move(a);
  f.cuspidal = !f.exact.empty() && f.exact[0] == 0;
  f.label = std::move(label);
  f.finalize();
  return f;
}

QExpansion QExpansion::from_complex(int weight, std::vector<cplx> a, std::string label) {
  QExpansion f;
  f.weight = weight;
  f.coeffs = std::move(a);
  f.cuspidal = !f.coeffs.empty() && f.coeffs[0] == cplx{};
  f.label = std::move(label);
  f.finalize();
  return f;
}

QExpansion multiply(const QExpansion& f, const QExpansion& g) {
  const int M = std::min(f.depth(), g.depth());
  const std::string label = f.label + "*" + g.label;
  if (!f.exact.empty() && !g.exact.empty()) {
    std::vector<BigRational> c(M + 1);
    for (int i = 0; i <= M; ++i) {
      if (f.exact[i] == 0) continue;
      for (int j = 0; i + j <= M; ++j) c[i + j] += f.exact[i] * g.exact[j];
    }
    return QExpansion::from_exact(f.weight + g.weight, std::move(c), label);
  }
  std::vector<cplx> c(M + 1);
  for (int i = 0; i <= M; ++i)
    for (int j = 0; i + j <= M; ++j) c[i + j] += f.coeffs[i] * g.coeffs[j];
  return QExpansion::from_complex(f.weight + g.weight, std::move(c), label);
}

QExpansion scale(const QExpansion& f, cplx s) {
  std::vector<cplx> c = f.coeffs;
  for (auto& v : c) v *= s;
  QExpansion out = QExpansion::from_complex(f.weight, std::move(c), f.label);
  if (!f.exact.empty() && s.imag() == 0 && s.real() == std::nearbyint(s.real())) {
    out.exact = f.exact;
    for (auto& v : out.exact) v *= static_cast<long long>(s.real());
  }
  return out;
}

std::vector<BigInt> divisor_sigma(int power, int M) {
  std::vector<BigInt> s(M + 1);
  for (int d = 1; d <= M; ++d) {
    BigInt dp = boost::multiprecision::pow(BigInt(d), power);
    for (int n = d; n <= M; n += d) s[n] += dp;
  }
  return s;
}

QExpansion eisenstein_qexp(int k, int M) {
  if (M < 1) throw Error("eisenstein_qexp: M must be >= 1");
  // -2k/B_k with B_4 = -1/30, B_6 = 1/42.
  BigInt factor;
  if (k == 4)
    factor = 240;
  else if (k == 6)
    factor = -504;
  else
    throw Error("eisenstein_qexp: only k = 4, 6 are supported");
  const auto sig = divisor_sigma(k - 1, M);
  std::vector<BigRational> a(M + 1);
  a[0] = 1;
  for (int n = 1; n <= M; ++n) a[n] = BigRational(factor * sig[n]);
  return QExpansion::from_exact(k, std::move(a), k == 4 ? "E4" : "E6");
}

QExpansion delta_qexp(int M) {
  if (M < 1) throw Error("delta_qexp: M must be >= 1");
  // prod_{n=1}^{M} (1 - q^n)^24 truncated at q^(M-1), then shifted by q.
  std::vector<BigInt> p(M, 0);
  p[0] = 1;
  for (int n = 1; n < M; ++n) {
    for (int r = 0; r < 24; ++r) {
      for (int i = M - 1; i >= n; --i) p[i] -= p[i - n];
    }
  }
  std::vector<BigRational> a(M + 1);
  a[0] = 0;
  for (int i = 1; i <= M; ++i) a[i] = BigRational(p[i - 1]);
  return QExpansion::from_exact(12, std::move(a), "Delta");
}

std::vector<QExpansion> cusp_basis(int k, int M) {
  if (k < 12 || k % 2 != 0) throw EmptySpace("cusp_basis: S_k is zero for odd k or k < 12");
  const QExpansion E4 = eisenstein_qexp(4, M);
  const QExpansion E6 = eisenstein_qexp(6, M);
  const QExpansion D = delta_qexp(M);
  std::vector<std::vector<BigRational>> rows;
  std::vector<std::string> labels;
  for (int b = 0; 6 * b <= k - 12; ++b) {
    const int rest = k - 12 - 6 * b;
    if (rest % 4 != 0) continue;
    const int a = rest / 4;
    QExpansion f = D;
    for (int i = 0; i < a; ++i) f = multiply(f, E4);
    for (int i = 0; i < b; ++i) f = multiply(f, E6);
    rows.push_back(f.exact);
    labels.push_back("Delta*E4^" + std::to_string(a) + "*E6^" + std::to_string(b));
  }
  if (rows.empty()) throw EmptySpace("cusp_basis: S_k is zero");
  // Reduced row echelon form over Q.
  std::size_t r = 0;
  for (int col = 0; col <= M && r < rows.size(); ++col) {
    std::size_t piv = r;
    while (piv < rows.size() && rows[piv][col] == 0) ++piv;
    if (piv == rows.size()) continue;
    std::swap(rows[r], rows[piv]);
    const BigRational inv = 1 / rows[r][col];
    for (auto& v : rows[r]) v *= inv;
    for (std::size_t o = 0; o < rows.size(); ++o) {
      if (o == r || rows[o][col] == 0) continue;
      const BigRational fac = rows[o][col];
      for (int j = 0; j <= M; ++j) rows[o][j] -= fac * rows[r][j];
    }
    ++r;
  }
  std::vector<QExpansion> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::string label = rows.size() == 1 ? labels[i] : "S" + std::to_string(k) + "_" + std::to_string(i + 1);
    out.push_back(QExpansion::from_exact(k, rows[i], label));
  }
  return out;
}

cplx eval_on_F(const QExpansion& f, const HPoint& z) {
  const cplx q = std::exp(cplx(-2.0 * kPi * z.y, 2.0 * kPi * z.x));
  return horner(f.coeffs, f.fast_depth, q);
}

FormValue eval_form_detail(const QExpansion& f, const HPoint& z, double tail_tol) {
  const ReductionResult red = reduce_to_fundamental(z);
  const HPoint& zs = red.zstar;
  const double aq = std::exp(-2.0 * kPi * zs.y);
  const cplx value_star = eval_on_F(f, zs);
  const double tail = tail_sum(f.growth_const, f.weight, f.fast_depth, aq);
  const double scale = f.order <= f.depth() ? std::abs(f.coeffs[f.order]) * std::pow(aq, f.order) : 0.0;
  if (tail > tail_tol * std::max(scale, 1e-300) && tail > 0) throw TailTooLarge("eval_form: q-series tail bound exceeds tolerance");
  // f(z*) = J(gamma, z)^k f(z)  =>  f(z) = J^{-k} f(z*).
  const cplx J = automorphy_J(red.gamma, z);
  const cplx value = value_star * std::pow(J, -f.weight);
  const double tail_z = tail * std::pow(std::abs(J), -f.weight);
  return {value, tail_z, zs};
}

cplx eval_form(const QExpansion& f, const HPoint& z) { return eval_form_detail(f, z).value; }

cplx InvariantSymbol::operator()(const HPoint& z) const { return on_F(reduce_to_fundamental(z).zstar); }

InvariantSymbol pair_symbol(const QExpansion& f, const QExpansion& g) {
  if (f.weight != g.weight) throw WeightMismatch("pair_symbol: weights differ");
  const int k = f.weight;
  return {"(" + f.label + "," + g.label + ")_" + std::to_string(k), [f, g, k](const HPoint& z) {
            return eval_on_F(f, z) * std::conj(eval_on_F(g, z)) * std::pow(z.y, k);
          }};
}

InvariantSymbol constant_symbol(cplx c) {
  return {"const", [c](const HPoint&) { return c; }};
}

double hyperbolic_distance(const HPoint& a, const HPoint& b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return std::acosh(1.0 + (dx * dx + dy * dy) / (2.0 * a.y * b.y));
}

InvariantSymbol bump_symbol(const HPoint& center, double radius) {
  if (!in_fundamental_domain(center) || radius <= 0) throw Error("bump_symbol: center must lie in F, radius > 0");
  // Orbit points gamma.c that can come within the support radius of F.
  const double R = radius;
  const double ymin = std::sqrt(3.0) / 2.0 * std::exp(-R);
  const double ymax_F = 2.0 * std::max(center.y, 1.0) * std::exp(R);
  const double xwin = std::sqrt(2.0 * ymax_F * std::max(center.y, 1.0) * (std::cosh(R) - 1.0)) + 1.0;
  std::vector<HPoint> orbit;
  const int cmax = static_cast<int>(std::ceil(std::sqrt(center.y / ymin))) + 1;
  for (int c = 0; c <= cmax; ++c) {
    for (int d = -4 * cmax - 4; d <= 4 * cmax + 4; ++d) {
      if (std::gcd(c, d) != 1 || (c == 0 && d != 1)) continue;
      // Find a, b with ad - bc = 1.
      int a = 0, b = 0;
      if (c == 0) {
        a = 1;
        b = 0;
      } else {
        bool found = false;
        for (a = -c; a <= c && !found; ++a) {
          if (((a * d - 1) % c) == 0) {
            b = (a * d - 1) / c;
            found = true;
            break;
          }
        }
        if (!found) continue;
      }
      const HPoint p0 = mobius_apply(GroupElement::integral(a, b, c, d), center);
      if (p0.y < ymin) continue;
      const int n0 = static_cast<int>(std::floor(-xwin - p0.x)), n1 = static_cast<int>(std::ceil(xwin - p0.x));
      for (int n = n0; n <= n1; ++n) orbit.push_back({p0.x + n, p0.y});
    }
  }
  // Keep the orbit points that can come within R of F. Lower bound of cosh d
  // over the strip |x| <= 1/2, y >= sqrt(3)/2, which contains F.
  const double coshR = std::cosh(R);
  const double y0 = std::sqrt(3.0) / 2.0;
  std::vector<HPoint> near;
  for (const auto& p : orbit) {
    const double dx = std::max(0.0, std::abs(p.x) - 0.5);
    const double y = std::max(y0, std::hypot(dx, p.y));
    const double lb = 1.0 + (dx * dx + (y - p.y) * (y - p.y)) / (2.0 * y * p.y);
    if (lb < coshR) near.push_back(p);
  }
  return {"bump", [near, R](const HPoint& zstar) -> cplx {
            double sum = 0;
            for (const auto& p : near) {
              const double t = hyperbolic_distance(zstar, p) / R;
              if (t < 1) sum += std::exp(1.0 - 1.0 / (1.0 - t * t));
            }
            return sum;
          }};
}

InvariantSymbol linear_combination(const std::vector<InvariantSymbol>& s, const std::vector<cplx>& c) {
  if (s.size() != c.size()) throw Error("linear_combination: size mismatch");
  return {"combo", [s, c](const HPoint& z) {
            cplx v = 0;
            for (std::size_t i = 0; i < s.size(); ++i) v += c[i] * s[i].at_reduced(z);
            return v;
          }};
}

cplx petersson(const QExpansion& f, const QExpansion& g, const QuadratureRule& rule) {
  if (f.weight != g.weight) throw WeightMismatch("petersson: weights differ");
  if (rule.tag != DomainTag::FundamentalDomain) throw Error("petersson: needs a FundamentalDomain rule");
  const int k = f.weight;
  const cplx I = integrate(rule, [&](const HPoint& z) {
    return eval_on_F(f, z) * std::conj(eval_on_F(g, z)) * std::pow(z.y, k);
  });
  return I / (kPi / 3.0);
}

namespace {

struct PslList {
  std::vector<GroupElement> elems;
};

cplx poly_eval(const std::vector<cplx>& p, cplx w) {
  cplx s = 0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) s = s * w + *it;
  return s;
}

}  // namespace

const std::vector<GroupElement>& psl_elements(int height) {
  static std::map<int, std::vector<GroupElement>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(height);
  if (it != cache.end()) return it->second;
  std::vector<GroupElement> out;
  for (const auto& g : enumerate_gamma(height)) {
    if (g.ic() > 0 || (g.ic() == 0 && g.id() > 0)) out.push_back(g);
  }
  return cache.emplace(height, std::move(out)).first->second;
}

PoincareResult poincare_series(int m, const std::vector<cplx>& poly, const HPoint& z, int height) {
  if (m < 4) throw Error("poincare_series: m must be >= 4");
  const auto& G = psl_elements(height);
  PoincareResult r;
  r.shell_abs.assign(height, 0.0);
  std::vector<cplx> terms;
  terms.reserve(G.size());
  for (const auto& g : G) {
    const cplx J = jacobian_disk(g, z);
    const DPoint w = cayley(mobius_apply(g, z));
    const cplx t = std::pow(J, m) * poly_eval(poly, w.w);
    terms.push_back(t);
    r.shell_abs[g.height() - 1] += std::abs(t);
  }
  r.value = pairwise_sum(terms);
  r.tail = 0;
  for (int h = height / 2 + 1; h <= height; ++h) r.tail += r.shell_abs[h - 1];
  for (int h = 1; h <= height; ++h) {
    const auto j = static_cast<std::size_t>(std::bit_width(static_cast<unsigned>(h)) - 1);
    if (r.dyadic_abs.size() <= j) r.dyadic_abs.resize(j + 1, 0.0);
    r.dyadic_abs[j] += r.shell_abs[h - 1];
  }
  r.terms = terms.size();
  return r;
}

double poincare_bound_proxy(int m, const std::vector<cplx>& poly, const std::vector<HPoint>& grid, int height) {
  double sup = 0;
  for (const auto& z : grid) {
    const double r2 = std::norm(cayley(z).w);
    sup = std::max(sup, std::pow(1.0 - r2, m) * std::abs(poincare_series(m, poly, z, height).value));
  }
  return sup;
}

SeparationResult separation_check(const std::vector<HPoint>& points, const std::vector<cplx>& targets, int m,
                                  int height, int dict_size) {
  if (points.size() != targets.size()) throw Error("separation_check: size mismatch");
  const int n = static_cast<int>(points.size());
  for (int i = 0; i < n; ++i) {
    const HPoint a = reduce_to_fundamental(points[i]).zstar;
    for (int j = 0; j < i; ++j) {
      const HPoint b = reduce_to_fundamental(points[j]).zstar;
      if (std::abs(a.x - b.x) < 1e-9 && std::abs(a.y - b.y) < 1e-9)
        throw Error("separation_check: points are Gamma-equivalent");
    }
  }
  const int D = dict_size > 0 ? dict_size : 2 * n + 2;
  Eigen::MatrixXcd E(n, D);
  double tail = 0;
  for (int j = 0; j < D; ++j) {
    std::vector<cplx> mono(j + 1, 0.0);
    mono[j] = 1.0;
    for (int i = 0; i < n; ++i) {
      const auto p = poincare_series(m, mono, points[i], height);
      E(i, j) = p.value;
      tail = std::max(tail, p.tail);
    }
  }
  Eigen::VectorXcd c(n);
  for (int i = 0; i < n; ++i) c(i) = targets[i];
  SeparationResult r;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(E);
  // Directions below the truncation level of the series are not resolved.
  const double scale = E.cwiseAbs().maxCoeff();
  if (scale > 0) cod.setThreshold(std::max(1e-12, 1e3 * height * tail / scale));
  r.rank = static_cast<int>(cod.rank());
  r.rank_deficient = r.rank < n;
  Eigen::VectorXcd a = cod.solve(c);
  if (c.norm() == 0) a.setZero();
  const Eigen::VectorXcd got = E * a;
  r.poly.assign(a.data(), a.data() + a.size());
  r.achieved.assign(got.data(), got.data() + got.size());
  r.residual = (got - c).norm();
  return r;
}

std::string qexp_to_json(const QExpansion& f) {
  nlohmann::json j;
  j["weight"] = f.weight;
  j["M"] = f.depth();
  j["label"] = f.label;
  nlohmann::json arr = nlohmann::json::array();
  if (!f.exact.empty()) {
    for (const auto& v : f.exact) {
      if (denominator(v) == 1) {
        const BigInt num = numerator(v);
        if (num <= BigInt(std::numeric_limits<std::int64_t>::max()) &&
            num >= BigInt(std::numeric_limits<std::int64_t>::min()))
          arr.push_back(static_cast<std::int64_t>(num));
        else
          arr.push_back(num.str());
      } else {
        arr.push_back(numerator(v).str() + "/" + denominator(v).str());
      }
    }
  } else {
    for (const auto& v : f.coeffs) arr.push_back({v.real(), v.imag()});
  }
  j["coefficients"] = arr;
  return j.dump();
}

QExpansion qexp_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw Error(std::string("qexp_from_json: ") + e.what());
  }
  const int k = j.at("weight").get<int>();
  if (k < 4 || k % 2 != 0) throw Error("qexp_from_json: weight must be even and >= 4");
  const auto& arr = j.at("coefficients");
  const std::string label = j.value("label", std::string("ext"));
  bool exact = true;
  for (const auto& v : arr)
    if (v.is_array() || v.is_number_float()) exact = false;
  if (exact) {
    std::vector<BigRational> a;
    for (const auto& v : arr) {
      if (v.is_number_integer()) {
        a.emplace_back(v.get<std::int64_t>());
      } else {
        const std::string s = v.get<std::string>();
        const auto slash = s.find('/');
        if (slash == std::string::npos)
          a.emplace_back(BigInt(s));
        else
          a.emplace_back(BigInt(s.substr(0, slash)), BigInt(s.substr(slash + 1)));
      }
    }
    return QExpansion::from_exact(k, std::move(a), label);
  }
  std::vector<cplx> a;
  for (const auto& v : arr) {
    if (v.is_array())
      a.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
    else
      a.emplace_back(v.get<double>(), 0.0);
  }
  return QExpansion::from_complex(k, std::move(a), label);
}

}  // namespace bq
