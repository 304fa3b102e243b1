// Quadrature over the modular fundamental domain and the weighted disk.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bq/hypgeom.hpp"

namespace bq {

enum class DomainTag : std::uint32_t { FundamentalDomain = 0, FullDisk = 1, HalfPlaneStrip = 2 };

// One circle of a polar disk rule: `count` equispaced angles at radius
// sqrt(t), starting at node index `offset`.
struct Ring {
  double t = 0;
  double radial_weight = 0;  // Gauss-Jacobi weight, includes the 1/2 from dA = (1/2) dt dtheta
  std::uint64_t offset = 0;
  std::uint64_t count = 0;
};

struct QuadratureRule {
  DomainTag tag = DomainTag::FundamentalDomain;
  int m = 0;           // disk rules: weight (1-|w|^2)^(m-2); 0 for F
  int level = 0;
  int degree_hint = 0;  // disk rules: polynomial degree the rule must resolve
  // Node coordinates. F rules: z = x + iy. Disk rules: w = x + iy.
  std::vector<double> x, y, w;
  std::vector<Ring> rings;  // disk rules only
  double error_estimate = 0;

  std::size_t size() const { return w.size(); }
  HPoint hnode(std::size_t i) const;  // disk rules are mapped through the Cayley transform
  DPoint dnode(std::size_t i) const;
  double total_weight() const;
};

// F = {|x| <= 1/2, |z| >= 1} in coordinates (x, u = 1/y), dmu = dx du.
// Gauss-Legendre tensor rule with 8*level points per direction.
QuadratureRule fundamental_rule(int level);

inline constexpr int kDefaultFundamentalLevel = 6;
inline constexpr int kDefaultDiskLevel = 5;

// Polar rule for the measure (1-|w|^2)^(m-2) dA on the unit disk: Gauss-Jacobi
// in t = |w|^2 and equispaced angles. The number of angles on each circle grows
// like 1/(1-r) so that Gamma-invariant integrands, which oscillate on the
// hyperbolic scale near the boundary, stay resolved. `degree_hint` N guarantees
// exact integration of w^j conj(w)^k for j, k < N.
QuadratureRule weighted_disk_rule(int m, int level, int degree_hint = 0);

// Deterministic pairwise summation in index order.
cplx pairwise_sum(const std::vector<cplx>& v);
double pairwise_sum(const std::vector<double>& v);

using ScalarIntegrand = std::function<cplx(const HPoint&)>;
using DiskIntegrand = std::function<cplx(const DPoint&)>;
using MatrixIntegrand = std::function<Eigen::MatrixXcd(const HPoint&)>;

// Sum_i w_i g(node_i). F rules pass the node as is; disk rules pass the
// Cayley preimage. Evaluation failures are rethrown as EvaluationError.
cplx integrate(const QuadratureRule& rule, const ScalarIntegrand& g);
cplx integrate_disk(const QuadratureRule& rule, const DiskIntegrand& g);
Eigen::MatrixXcd integrate(const QuadratureRule& rule, const MatrixIntegrand& g);
// Weighted sum of precomputed node values.
cplx integrate_values(const QuadratureRule& rule, const std::vector<cplx>& values);

struct MonteCarloEstimate {
  cplx mean;            // estimate of the integral over F
  double std_error;     // standard error of the estimate (modulus)
  std::size_t accepted;
};

// Rejection sampling in F with respect to dmu: (x, u) uniform on
// [-1/2, 1/2] x [0, 2/sqrt 3], accepted when u <= 1/sqrt(1 - x^2).
MonteCarloEstimate monte_carlo_fundamental(const ScalarIntegrand& g, std::size_t samples,
                                           std::uint64_t seed);

// On-disk rule cache. Binary layout (little endian):
//   char[8] "BQRULE01", u32 tag, i32 m, i32 level, i32 degree_hint,
//   f64 error_estimate, u64 n_rings, u64 n_nodes,
//   n_rings x (f64 t, f64 radial_weight, u64 offset, u64 count),
//   n_nodes x (f64 x, f64 y, f64 w).
class RuleCache {
 public:
  // Empty directory disables the cache. BQ_CACHE_DIR overrides when set and
  // `dir` is empty.
  explicit RuleCache(std::string dir = "");
  const std::string& dir() const { return dir_; }
  bool enabled() const { return !dir_.empty(); }

  QuadratureRule fundamental(int level) const;
  QuadratureRule disk(int m, int level, int degree_hint = 0) const;

  std::vector<std::string> keys_used() const { return keys_; }

  static std::string key(DomainTag tag, int m, int level, int degree_hint);

 private:
  QuadratureRule load_or_build(DomainTag tag, int m, int level, int degree_hint) const;
  std::string dir_;
  mutable std::vector<std::string> keys_;
};

void write_rule(const QuadratureRule& rule, const std::string& path);
QuadratureRule read_rule(const std::string& path);

}  // namespace bq
