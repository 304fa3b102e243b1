#include <random>
#include <set>
#include <tuple>

#include "bq/errors.hpp"
#include "bq/hypgeom.hpp"
#include "doctest.h"

using namespace bq;

namespace {

GroupElement random_gamma(std::mt19937_64& rng, int bound) {
  std::uniform_int_distribution<int> U(-bound, bound);
  for (;;) {
    const std::int64_t c = U(rng), d = U(rng);
    if (std::gcd(c, d) != 1) continue;
    for (std::int64_t a = -bound; a <= bound; ++a) {
      if (c == 0) {
        if (a * d == 1) return GroupElement::integral(a, U(rng), c, d);
        continue;
      }
      if ((a * d - 1) % c == 0) {
        const std::int64_t b = (a * d - 1) / c;
        if (std::llabs(b) <= bound) return GroupElement::integral(a, b, c, d);
      }
    }
  }
}

HPoint random_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> X(-3, 3), L(-3, 1.5);
  return {X(rng), std::pow(10.0, L(rng))};
}

}  // namespace

TEST_CASE("mobius_apply examples") {
  const HPoint z{2, 3};
  const HPoint a = mobius_apply(GroupElement::identity(), z);
  CHECK(a.x == doctest::Approx(2));
  CHECK(a.y == doctest::Approx(3));
  const HPoint s = mobius_apply(GroupElement::S(), HPoint{0, 1});
  CHECK(std::abs(s.x) < 1e-15);
  CHECK(s.y == doctest::Approx(1));
  const HPoint t = mobius_apply(GroupElement::T(), HPoint{0.3, 0.7});
  CHECK(t.x == doctest::Approx(1.3));
  CHECK(t.y == doctest::Approx(0.7));
}

TEST_CASE("automorphy factor examples and cocycle") {
  const HPoint z{0.2, 1.1};
  CHECK(std::abs(automorphy_J(GroupElement::identity(), z) - 1.0) == 0);
  CHECK(std::abs(automorphy_J(GroupElement::S(), z) - z.z()) < 1e-15);
  const auto S = GroupElement::S(), T = GroupElement::T();
  const cplx lhs = automorphy_J(S * T, z);
  const cplx rhs = automorphy_J(S, mobius_apply(T, z)) * automorphy_J(T, z);
  CHECK(std::abs(lhs - rhs) < 1e-12);
}

TEST_CASE("jacobian_JD matches a central difference") {
  CHECK(std::abs(jacobian_JD(GroupElement::identity(), HPoint{0.4, 2}) - 1.0) < 1e-15);
  CHECK(std::abs(jacobian_JD(GroupElement::T(), HPoint{0.4, 2}) - 1.0) < 1e-15);
  const cplx z{0, 1};
  const double h = 1e-5;
  auto f = [](cplx u) { return -1.0 / u; };
  const cplx fd = (f(z + h) - f(z - h)) / (2 * h);
  CHECK(std::abs(jacobian_JD(GroupElement::S(), HPoint{0, 1}) - fd) < 1e-8);
}

TEST_CASE("disk jacobian matches a central difference") {
  const GroupElement g = GroupElement::integral(2, 1, 1, 1);
  const HPoint z{0.3, 0.8};
  const cplx w = cayley(z).w;
  auto disk_map = [&](cplx u) { return cayley(mobius_apply(g, cayley_inv(DPoint{u}))).w; };
  const double h = 1e-5;
  const cplx fd = (disk_map(w + h) - disk_map(w - h)) / (2 * h);
  CHECK(std::abs(jacobian_disk(g, z) - fd) < 1e-8);
}

TEST_CASE("cocycle law and Im transform on random samples") {
  std::mt19937_64 rng(7);
  for (int s = 0; s < 100; ++s) {
    const auto g = random_gamma(rng, 10), h = random_gamma(rng, 10);
    const HPoint z = random_point(rng);
    const cplx lhs = automorphy_J(g * h, z);
    const cplx rhs = automorphy_J(g, mobius_apply(h, z)) * automorphy_J(h, z);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
    const HPoint gz = mobius_apply(g, z);
    const double expect = z.y / std::norm(automorphy_J(g, z));
    CHECK(std::abs(gz.y - expect) <= 1e-12 * std::max(1.0, expect));
  }
}

TEST_CASE("cayley round trip") {
  std::mt19937_64 rng(3);
  for (int s = 0; s < 100; ++s) {
    std::uniform_real_distribution<double> X(-2, 2), Y(0.1, 3);
    const HPoint z{X(rng), Y(rng)};
    const HPoint back = cayley_inv(cayley(z));
    CHECK(std::abs(back.z() - z.z()) < 1e-14 * std::max(1.0, std::abs(z.z())));
    CHECK(std::abs(cayley(z).w) < 1.0);
  }
}

TEST_CASE("reduce_to_fundamental examples") {
  auto r = reduce_to_fundamental(HPoint{0, 1});
  CHECK(r.gamma == GroupElement::identity());
  CHECK(r.zstar.y == doctest::Approx(1));
  r = reduce_to_fundamental(HPoint{1, 1});
  CHECK(std::abs(r.zstar.x) < 1e-15);
  CHECK(r.gamma == GroupElement::T().inverse());
  REQUIRE(r.word.size() == 1);
  CHECK(r.word[0].symbol == 'T');
  CHECK(r.word[0].power == -1);
  r = reduce_to_fundamental(HPoint{0.1, 0.1});
  CHECK(in_fundamental_domain(r.zstar));
  CHECK(std::abs(mobius_apply(r.gamma, cplx(0.1, 0.1)) - r.zstar.z()) < 1e-10);
}

TEST_CASE("reduction terminates for points mapped onto the unit arc") {
  const HPoint z{-0.5, 0.62500000000000011};
  const auto r = reduce_to_fundamental(z);
  CHECK(in_fundamental_domain(r.zstar));
  CHECK(std::abs(mobius_apply(r.gamma, z.z()) - r.zstar.z()) < 1e-12);
}

TEST_CASE("reduction tie breaking prefers Re z <= 0") {
  auto r = reduce_to_fundamental(HPoint{0.5, 2});
  CHECK(r.zstar.x == doctest::Approx(-0.5));
  const double th = 1.2;
  r = reduce_to_fundamental(HPoint{std::cos(th), std::sin(th)});
  CHECK(r.zstar.x <= 0);
}

TEST_CASE("reduction invariants on random points") {
  std::mt19937_64 rng(11);
  for (int s = 0; s < 1000; ++s) {
    std::uniform_real_distribution<double> X(-20, 20), L(-6, 2);
    const HPoint z{X(rng), std::pow(10.0, L(rng))};
    const auto r = reduce_to_fundamental(z);
    CHECK(in_fundamental_domain(r.zstar));
    const cplx img = mobius_apply(r.gamma, z.z());
    CHECK(std::abs(img - r.zstar.z()) < 1e-10);
    // Word reproduces gamma.
    GroupElement g = GroupElement::identity();
    for (const auto& w : r.word) g = (w.symbol == 'S' ? GroupElement::S() : GroupElement::T().power(w.power)) * g;
    CHECK(g == r.gamma);
  }
}

TEST_CASE("reduction iteration limit") {
  CHECK_THROWS_AS(reduce_to_fundamental(HPoint{0.123456, 1e-9}, 3), IterationLimit);
}

TEST_CASE("integer products detect overflow") {
  const auto big = GroupElement::integral(1, 4'000'000'000'000'000'000LL, 0, 1);
  CHECK_THROWS_AS(big * big * big, OverflowError);
}

TEST_CASE("enumerate_gamma height 1 matches brute force") {
  std::set<std::tuple<int, int, int, int>> brute;
  for (int a = -1; a <= 1; ++a)
    for (int b = -1; b <= 1; ++b)
      for (int c = -1; c <= 1; ++c)
        for (int d = -1; d <= 1; ++d)
          if (a * d - b * c == 1) brute.insert({c, d, a, b});
  const auto list = enumerate_gamma(1);
  CHECK(list.size() == brute.size());
  std::set<std::tuple<int, int, int, int>> got;
  for (const auto& g : list) {
    CHECK(g.ia() * g.id() - g.ib() * g.ic() == 1);
    got.insert({int(g.ic()), int(g.id()), int(g.ia()), int(g.ib())});
  }
  CHECK(got == brute);
  for (const auto& g : {GroupElement::identity(), -GroupElement::identity(), GroupElement::S(),
                        -GroupElement::S(), GroupElement::T(), GroupElement::T().inverse()})
    CHECK(std::find(list.begin(), list.end(), g) != list.end());
}

TEST_CASE("enumerate_gamma order, monotonicity, closure") {
  const auto h2 = enumerate_gamma(2), h1 = enumerate_gamma(1), h4 = enumerate_gamma(4);
  for (const auto& g : h1) CHECK(std::find(h2.begin(), h2.end(), g) != h2.end());
  for (std::size_t i = 1; i < h4.size(); ++i) {
    const auto& p = h4[i - 1];
    const auto& q = h4[i];
    CHECK(std::make_tuple(p.ic(), p.id(), p.ia(), p.ib()) < std::make_tuple(q.ic(), q.id(), q.ia(), q.ib()));
  }
  for (const auto& g : h4) {
    CHECK(g.height() <= 4);
    CHECK(std::find(h4.begin(), h4.end(), -g) != h4.end());
    CHECK(std::find(h4.begin(), h4.end(), g.inverse()) != h4.end());
  }
  CHECK_THROWS_AS(enumerate_gamma(4, 10), CapacityExceeded);
}
