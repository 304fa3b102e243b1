// Hyperbolic plane geometry and the modular group SL(2,Z).
//
// Convention: a matrix g = (a b; c d) acts on the upper half-plane by
// g.z = (az + b)/(cz + d). The automorphy factor is J(g,z) = cz + d and
// J(gh,z) = J(g,hz) J(h,z).
#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace bq {

using cplx = std::complex<double>;

struct HPoint {
  double x = 0.0;
  double y = 1.0;
  cplx z() const { return {x, y}; }
  static HPoint from(cplx z) { return {z.real(), z.imag()}; }
};

struct DPoint {
  cplx w;
};

// Cayley transform w = (z - i)/(z + i) and its inverse z = i(1 + w)/(1 - w).
DPoint cayley(const HPoint& z);
HPoint cayley_inv(const DPoint& w);

class GroupElement {
 public:
  // Integer matrix with determinant exactly 1. Throws bq::Error otherwise.
  static GroupElement integral(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d);
  // Real matrix with |det - 1| <= 1e-12.
  static GroupElement real(double a, double b, double c, double d);

  static GroupElement identity();
  static GroupElement S();  // (0 -1; 1 0)
  static GroupElement T();  // (1 1; 0 1)

  bool is_integral() const { return integral_; }
  double a() const { return ra_; }
  double b() const { return rb_; }
  double c() const { return rc_; }
  double d() const { return rd_; }
  // Exact entries; only meaningful when is_integral().
  std::int64_t ia() const { return ia_; }
  std::int64_t ib() const { return ib_; }
  std::int64_t ic() const { return ic_; }
  std::int64_t id() const { return id_; }

  // Products of two integral elements are exact; int64 overflow throws
  // bq::OverflowError. Mixed products fall back to doubles.
  GroupElement operator*(const GroupElement& o) const;
  GroupElement operator-() const;
  GroupElement inverse() const;
  GroupElement power(int n) const;

  std::int64_t height() const;  // max |entry|, integral elements only
  bool operator==(const GroupElement& o) const;
  std::string str() const;

 private:
  bool integral_ = true;
  std::int64_t ia_ = 1, ib_ = 0, ic_ = 0, id_ = 1;
  double ra_ = 1, rb_ = 0, rc_ = 0, rd_ = 1;
};

cplx mobius_apply(const GroupElement& g, cplx z);
HPoint mobius_apply(const GroupElement& g, const HPoint& z);
cplx automorphy_J(const GroupElement& g, const HPoint& z);
// Complex derivative of z -> g.z, i.e. J(g,z)^{-2}.
cplx jacobian_JD(const GroupElement& g, const HPoint& z);

struct Generator {
  char symbol;  // 'S' or 'T'
  int power;
};

struct ReductionResult {
  HPoint zstar;
  GroupElement gamma;           // gamma . z == zstar
  std::vector<Generator> word;  // applied left to right: gamma = w_k ... w_1
};

inline constexpr int kDefaultReductionLimit = 200;

// Closed standard fundamental domain membership, with tolerance.
bool in_fundamental_domain(const HPoint& z, double tol = 1e-12);

ReductionResult reduce_to_fundamental(const HPoint& z, int max_iter = kDefaultReductionLimit);

inline constexpr std::size_t kDefaultGammaCapacity = 4'000'000;

// All of SL(2,Z) with max |entry| <= height, sorted lexicographically by
// (c, d, a, b). Throws CapacityExceeded if the list outgrows max_count.
std::vector<GroupElement> enumerate_gamma(int height, std::size_t max_count = kDefaultGammaCapacity);

}  // namespace bq

namespace bq {
// Derivative of the disk automorphism C g C^{-1} at w = C(z), where C is the
// Cayley transform. This is the Jacobian used by disk-model Poincare series.
cplx jacobian_disk(const GroupElement& g, const HPoint& z);
}  // namespace bq
