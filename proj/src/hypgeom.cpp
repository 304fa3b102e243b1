#include "bq/hypgeom.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <tuple>

#include "bq/errors.hpp"

namespace bq {
namespace {

std::int64_t mul_checked(std::int64_t x, std::int64_t y) {
  std::int64_t r;
  if (__builtin_mul_overflow(x, y, &r)) throw OverflowError("int64 overflow in SL(2,Z) product");
  return r;
}

std::int64_t add_checked(std::int64_t x, std::int64_t y) {
  std::int64_t r;
  if (__builtin_add_overflow(x, y, &r)) throw OverflowError("int64 overflow in SL(2,Z) product");
  return r;
}

constexpr cplx kI{0.0, 1.0};

}  // namespace

DPoint cayley(const HPoint& z) {
  const cplx zz = z.z();
  return {(zz - kI) / (zz + kI)};
}

HPoint cayley_inv(const DPoint& w) {
  // Im z = (1 - |w|^2)/|1 - w|^2, computed directly to keep it positive.
  const cplx one_minus = 1.0 - w.w;
  const double den = std::norm(one_minus);
  const cplx zz = kI * (1.0 + w.w) / one_minus;
  return {zz.real(), (1.0 - std::norm(w.w)) / den};
}

GroupElement GroupElement::integral(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d) {
  const std::int64_t det = add_checked(mul_checked(a, d), -mul_checked(b, c));
  if (det != 1) throw Error("integral matrix does not have determinant 1");
  GroupElement g;
  g.integral_ = true;
  g.ia_ = a;
  g.ib_ = b;
  g.ic_ = c;
  g.id_ = d;
  g.ra_ = static_cast<double>(a);
  g.rb_ = static_cast<double>(b);
  g.rc_ = static_cast<double>(c);
  g.rd_ = static_cast<double>(d);
  return g;
}

GroupElement GroupElement::real(double a, double b, double c, double d) {
  if (std::abs(a * d - b * c - 1.0) > 1e-12) throw Error("real matrix does not have determinant 1");
  GroupElement g;
  g.integral_ = false;
  g.ra_ = a;
  g.rb_ = b;
  g.rc_ = c;
  g.rd_ = d;
  return g;
}

GroupElement GroupElement::identity() { return integral(1, 0, 0, 1); }
GroupElement GroupElement::S() { return integral(0, -1, 1, 0); }
GroupElement GroupElement::T() { return integral(1, 1, 0, 1); }

GroupElement GroupElement::operator*(const GroupElement& o) const {
  if (integral_ && o.integral_) {
    return integral(add_checked(mul_checked(ia_, o.ia_), mul_checked(ib_, o.ic_)),
                    add_checked(mul_checked(ia_, o.ib_), mul_checked(ib_, o.id_)),
                    add_checked(mul_checked(ic_, o.ia_), mul_checked(id_, o.ic_)),
                    add_checked(mul_checked(ic_, o.ib_), mul_checked(id_, o.id_)));
  }
  GroupElement g;
  g.integral_ = false;
  g.ra_ = ra_ * o.ra_ + rb_ * o.rc_;
  g.rb_ = ra_ * o.rb_ + rb_ * o.rd_;
  g.rc_ = rc_ * o.ra_ + rd_ * o.rc_;
  g.rd_ = rc_ * o.rb_ + rd_ * o.rd_;
  return g;
}

GroupElement GroupElement::operator-() const {
  if (integral_) return integral(-ia_, -ib_, -ic_, -id_);
  return real(-ra_, -rb_, -rc_, -rd_);
}

GroupElement GroupElement::inverse() const {
  if (integral_) return integral(id_, -ib_, -ic_, ia_);
  GroupElement g;
  g.integral_ = false;
  g.ra_ = rd_;
  g.rb_ = -rb_;
  g.rc_ = -rc_;
  g.rd_ = ra_;
  return g;
}

GroupElement GroupElement::power(int n) const {
  GroupElement base = n < 0 ? inverse() : *this;
  GroupElement out = identity();
  for (int k = std::abs(n); k > 0; --k) out = out * base;
  return out;
}

std::int64_t GroupElement::height() const {
  return std::max({std::llabs(ia_), std::llabs(ib_), std::llabs(ic_), std::llabs(id_)});
}

bool GroupElement::operator==(const GroupElement& o) const {
  if (integral_ && o.integral_) return std::tie(ia_, ib_, ic_, id_) == std::tie(o.ia_, o.ib_, o.ic_, o.id_);
  return ra_ == o.ra_ && rb_ == o.rb_ && rc_ == o.rc_ && rd_ == o.rd_;
}

std::string GroupElement::str() const {
  std::ostringstream os;
  if (integral_)
    os << "(" << ia_ << "," << ib_ << ";" << ic_ << "," << id_ << ")";
  else
    os << "(" << ra_ << "," << rb_ << ";" << rc_ << "," << rd_ << ")";
  return os.str();
}

cplx mobius_apply(const GroupElement& g, cplx z) {
  const double jr = std::fma(g.c(), z.real(), g.d()), ji = g.c() * z.imag();
  const double nr = std::fma(g.a(), z.real(), g.b()), ni = g.a() * z.imag();
  const double den = jr * jr + ji * ji;
  return {(nr * jr + ni * ji) / den, (ni * jr - nr * ji) / den};
}

HPoint mobius_apply(const GroupElement& g, const HPoint& z) {
  // fma keeps cx + d and ax + b accurate when they nearly cancel, which is
  // the normal case for points close to the real axis.
  const double jr = std::fma(g.c(), z.x, g.d()), ji = g.c() * z.y;
  const double nr = std::fma(g.a(), z.x, g.b()), ni = g.a() * z.y;
  const double den = jr * jr + ji * ji;
  // Im(g.z) = y/|cz+d|^2 exactly for det 1.
  return {(nr * jr + ni * ji) / den, z.y / den};
}

cplx automorphy_J(const GroupElement& g, const HPoint& z) { return g.c() * z.z() + g.d(); }

cplx jacobian_JD(const GroupElement& g, const HPoint& z) {
  const cplx j = automorphy_J(g, z);
  return 1.0 / (j * j);
}

bool in_fundamental_domain(const HPoint& z, double tol) {
  return z.y > 0 && std::abs(z.x) <= 0.5 + tol && std::norm(z.z()) >= (1 - tol) * (1 - tol);
}

ReductionResult reduce_to_fundamental(const HPoint& z0, int max_iter) {
  if (!(z0.y > 0)) throw Error("reduce_to_fundamental: point not in upper half-plane");
  ReductionResult r{z0, GroupElement::identity(), {}};
  HPoint z = z0;
  const GroupElement S = GroupElement::S();
  bool done = false;
  constexpr double kTie = 1e-14;
  // The current point is always recomputed as gamma . z0 in one step, so
  // rounding does not accumulate along the word.
  for (int it = 0; it < max_iter; ++it) {
    const double n = std::nearbyint(z.x);
    if (n != 0.0) {
      const auto k = static_cast<std::int64_t>(n);
      r.gamma = GroupElement::integral(1, -k, 0, 1) * r.gamma;
      r.word.push_back({'T', static_cast<int>(-k)});
      z = mobius_apply(r.gamma, z0);
    }
    // Points within kTie of the unit arc count as reduced; otherwise rounding
    // can bounce an arc point between its two S-images forever.
    if (std::norm(z.z()) < 1.0 - kTie) {
      r.gamma = S * r.gamma;
      r.word.push_back({'S', 1});
      z = mobius_apply(r.gamma, z0);
      continue;
    }
    done = true;
    break;
  }
  if (!done) throw IterationLimit("reduce_to_fundamental: iteration limit reached");
  // Canonical representative on the boundary: prefer Re z <= 0.
  if (std::abs(z.x - 0.5) <= kTie) {
    r.gamma = GroupElement::integral(1, -1, 0, 1) * r.gamma;
    r.word.push_back({'T', -1});
    z = mobius_apply(r.gamma, z0);
  }
  if (z.x > 0 && std::abs(std::norm(z.z()) - 1.0) <= kTie) {
    r.gamma = S * r.gamma;
    z = mobius_apply(r.gamma, z0);
    r.word.push_back({'S', 1});
  }
  r.zstar = z;
  return r;
}

std::vector<GroupElement> enumerate_gamma(int height, std::size_t max_count) {
  if (height < 1) throw Error("enumerate_gamma: height must be >= 1");
  const std::int64_t h = height;
  std::vector<GroupElement> out;
  for (std::int64_t c = -h; c <= h; ++c) {
    for (std::int64_t d = -h; d <= h; ++d) {
      if (std::gcd(c, d) != 1) continue;
      for (std::int64_t a = -h; a <= h; ++a) {
        if (c == 0) {
          if (a * d != 1) continue;
          for (std::int64_t b = -h; b <= h; ++b) {
            if (out.size() >= max_count) throw CapacityExceeded("enumerate_gamma: capacity exceeded");
            out.push_back(GroupElement::integral(a, b, c, d));
          }
        } else {
          const std::int64_t num = a * d - 1;
          if (num % c != 0) continue;
          const std::int64_t b = num / c;
          if (b < -h || b > h) continue;
          if (out.size() >= max_count) throw CapacityExceeded("enumerate_gamma: capacity exceeded");
          out.push_back(GroupElement::integral(a, b, c, d));
        }
      }
    }
  }
  return out;
}

}  // namespace bq

namespace bq {

cplx jacobian_disk(const GroupElement& g, const HPoint& z) {
  // d/dw [C(g C^{-1} w)] = C'(gz) * J(g,z)^{-2} / C'(z), C'(z) = 2i/(z+i)^2.
  const cplx i{0.0, 1.0};
  const cplx gz = mobius_apply(g, z.z());
  const cplx r = (z.z() + i) / (gz + i);
  return jacobian_JD(g, z) * r * r;
}

}  // namespace bq
