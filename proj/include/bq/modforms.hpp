// Modular forms for SL(2,Z) as truncated q-expansions.
//
// Automorphy convention: f(gz) = (cz + d)^k f(z) for g in SL(2,Z).
#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bq/hypgeom.hpp"
#include "bq/quad.hpp"

namespace bq {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

inline constexpr int kDefaultQDepth = 200;

struct QExpansion {
  int weight = 0;
  std::vector<BigRational> exact;  // a_0 .. a_M, empty when only floating data is known
  std::vector<cplx> coeffs;        // a_0 .. a_M
  bool cuspidal = false;
  std::string label;
  // Growth model |a_n| <= growth_const * n^k used for tail bounds, and the
  // depth that already meets the tail tolerance anywhere in F.
  double growth_const = 0;
  int fast_depth = 0;
  int order = 0;  // index of the first nonzero coefficient

  void finalize();
  int depth() const { return static_cast<int>(coeffs.size()) - 1; }
  static QExpansion from_exact(int weight, std::vector<BigRational> a, std::string label = "");
  static QExpansion from_complex(int weight, std::vector<cplx> a, std::string label = "");
};

// Coefficientwise operations on exact expansions, truncated to the shorter depth.
QExpansion multiply(const QExpansion& f, const QExpansion& g);
QExpansion scale(const QExpansion& f, cplx s);

std::vector<BigInt> divisor_sigma(int power, int M);
QExpansion eisenstein_qexp(int k, int M = kDefaultQDepth);  // k in {4, 6}
QExpansion delta_qexp(int M = kDefaultQDepth);

// Basis of S_k built from Delta * E4^a * E6^b and reduced to echelon form.
std::vector<QExpansion> cusp_basis(int k, int M = kDefaultQDepth);

struct FormValue {
  cplx value;
  double tail_bound;  // bound on the neglected q-series tail at the reduced point
  HPoint zstar;
};

inline constexpr double kTailTolerance = 1e-12;

// Reduce z into F, sum the q-series there, pull back with (cz+d)^{-k}.
FormValue eval_form_detail(const QExpansion& f, const HPoint& z, double tail_tol = kTailTolerance);
cplx eval_form(const QExpansion& f, const HPoint& z);
// q-series evaluation at a point of F (no reduction, no automorphy factor).
cplx eval_on_F(const QExpansion& f, const HPoint& zstar);

// Gamma-invariant bounded function. `on_F` is evaluated at reduced points.
struct InvariantSymbol {
  std::string name;
  std::function<cplx(const HPoint&)> on_F;
  cplx operator()(const HPoint& z) const;
  cplx at_reduced(const HPoint& zstar) const { return on_F(zstar); }
};

// (f, g)_k(z) = f(z) conj(g(z)) y^k.
InvariantSymbol pair_symbol(const QExpansion& f, const QExpansion& g);
InvariantSymbol constant_symbol(cplx c);
// Compactly supported smooth bump exp(1 - 1/(1 - (d/r)^2)) for d < r, d the
// hyperbolic distance to the center, summed over the orbit of the center.
// The center must lie in F.
InvariantSymbol bump_symbol(const HPoint& center, double radius);
InvariantSymbol linear_combination(const std::vector<InvariantSymbol>& s, const std::vector<cplx>& c);

double hyperbolic_distance(const HPoint& a, const HPoint& b);

// (1/mu(F)) int_F f conj(g) y^k dmu over a FundamentalDomain rule.
cplx petersson(const QExpansion& f, const QExpansion& g, const QuadratureRule& rule);

// PSL(2,Z) representatives (c > 0, or c = 0 and d > 0) of height <= height,
// cached per height.
const std::vector<GroupElement>& psl_elements(int height);

struct PoincareResult {
  cplx value;
  double tail;                      // sum of |term| over heights in (height/2, height]
  std::vector<double> shell_abs;    // shell_abs[h-1] = sum over height-h elements of |term|
  std::vector<double> dyadic_abs;   // dyadic_abs[j] = sum of shell_abs over heights in [2^j, 2^(j+1))
  std::size_t terms = 0;
};

// Disk-model Poincare series P_{m,f}(w) = sum_gamma J(gamma,w)^m f(gamma w)
// with the disk Jacobian, summed over PSL(2,Z) elements of height <= height.
// `poly` holds the monomial coefficients of f in the disk coordinate.
PoincareResult poincare_series(int m, const std::vector<cplx>& poly, const HPoint& z, int height);

// sup over `grid` of (1-|w|^2)^m |P_{m,f}(w)|.
double poincare_bound_proxy(int m, const std::vector<cplx>& poly, const std::vector<HPoint>& grid, int height);

struct SeparationResult {
  std::vector<cplx> poly;      // fitted monomial coefficients
  std::vector<cplx> achieved;  // P_{m,poly}(z_i)
  double residual = 0;         // || achieved - targets ||_2
  int rank = 0;
  bool rank_deficient = false;  // rank < number of points
};

// Least-squares fit of P_{m,f}(z_i) = c_i over monomials of degree < dict_size.
SeparationResult separation_check(const std::vector<HPoint>& points, const std::vector<cplx>& targets, int m,
                                  int height, int dict_size = 0);

// JSON interchange: {"weight": k, "M": M, "coefficients": [...]} where exact
// integers are numbers (or decimal strings beyond int64), rationals are "p/q"
// strings and inexact values are [re, im] pairs.
std::string qexp_to_json(const QExpansion& f);
QExpansion qexp_from_json(const std::string& text);

}  // namespace bq
