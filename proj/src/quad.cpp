#include "bq/quad.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>

#include "bq/errors.hpp"

namespace bq {
namespace {

constexpr double kPi = std::numbers::pi;

struct FixedDeleter {
  void operator()(gsl_integration_fixed_workspace* w) const { gsl_integration_fixed_free(w); }
};

// Nodes/weights of a GSL fixed rule on [a, b].
void gsl_fixed(const gsl_integration_fixed_type* type, std::size_t n, double a, double b, double alpha,
               std::vector<double>& nodes, std::vector<double>& weights) {
  std::unique_ptr<gsl_integration_fixed_workspace, FixedDeleter> ws(
      gsl_integration_fixed_alloc(type, n, a, b, alpha, 0.0));
  if (!ws) throw Error("gsl_integration_fixed_alloc failed");
  const double* xs = gsl_integration_fixed_nodes(ws.get());
  const double* ws_ = gsl_integration_fixed_weights(ws.get());
  nodes.assign(xs, xs + n);
  weights.assign(ws_, ws_ + n);
}

std::uint64_t next_pow2(double v) {
  std::uint64_t p = 1;
  while (static_cast<double>(p) < v) p <<= 1;
  return p;
}

template <class T>
T pairwise_rec(const T* v, std::size_t n) {
  if (n <= 8) {
    T s{};
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_rec(v, h) + pairwise_rec(v + h, n - h);
}

double fundamental_mass(int level) {
  // Total weight of the level rule, i.e. the computed mu(F).
  const int n = 8 * level;
  std::vector<double> xs, xw, us, uw;
  gsl_fixed(gsl_integration_fixed_legendre, n, -0.5, 0.5, 0.0, xs, xw);
  std::vector<double> col(n);
  for (int i = 0; i < n; ++i) col[i] = xw[i] / std::sqrt(1.0 - xs[i] * xs[i]);
  return pairwise_sum(col);
}

}  // namespace

HPoint QuadratureRule::hnode(std::size_t i) const {
  if (tag == DomainTag::FullDisk) return cayley_inv(DPoint{{x[i], y[i]}});
  return {x[i], y[i]};
}

DPoint QuadratureRule::dnode(std::size_t i) const {
  if (tag == DomainTag::FullDisk) return DPoint{{x[i], y[i]}};
  return cayley(HPoint{x[i], y[i]});
}

double QuadratureRule::total_weight() const { return pairwise_sum(w); }

cplx pairwise_sum(const std::vector<cplx>& v) { return v.empty() ? cplx{} : pairwise_rec(v.data(), v.size()); }
double pairwise_sum(const std::vector<double>& v) { return v.empty() ? 0.0 : pairwise_rec(v.data(), v.size()); }

QuadratureRule fundamental_rule(int level) {
  if (level < 1) throw Error("fundamental_rule: level must be >= 1");
  const int n = 8 * level;
  QuadratureRule r;
  r.tag = DomainTag::FundamentalDomain;
  r.level = level;
  std::vector<double> xs, xw;
  gsl_fixed(gsl_integration_fixed_legendre, n, -0.5, 0.5, 0.0, xs, xw);
  r.x.reserve(n * n);
  r.y.reserve(n * n);
  r.w.reserve(n * n);
  for (int i = 0; i < n; ++i) {
    const double umax = 1.0 / std::sqrt(1.0 - xs[i] * xs[i]);
    std::vector<double> us, uw;
    gsl_fixed(gsl_integration_fixed_legendre, n, 0.0, umax, 0.0, us, uw);
    for (int j = 0; j < n; ++j) {
      r.x.push_back(xs[i]);
      r.y.push_back(1.0 / us[j]);
      r.w.push_back(xw[i] * uw[j]);
    }
  }
  const int other = level > 1 ? level - 1 : level + 1;
  r.error_estimate = std::abs(fundamental_mass(level) - fundamental_mass(other));
  return r;
}

QuadratureRule weighted_disk_rule(int m, int level, int degree_hint) {
  if (m < 2) throw Error("weighted_disk_rule: m must be >= 2");
  if (level < 1) throw Error("weighted_disk_rule: level must be >= 1");
  QuadratureRule r;
  r.tag = DomainTag::FullDisk;
  r.m = m;
  r.level = level;
  r.degree_hint = degree_hint;

  const std::size_t K = std::max<std::size_t>(40 * level, degree_hint + 8);
  const double grading = 5.0 * std::ldexp(1.0, level);
  const std::uint64_t lmin = next_pow2(std::max(64.0, 2.0 * degree_hint + 2.0));
  const std::uint64_t lmax = std::max<std::uint64_t>(lmin, std::uint64_t{1} << (9 + level));

  std::vector<double> ts, tw;
  gsl_fixed(gsl_integration_fixed_jacobi, K, 0.0, 1.0, static_cast<double>(m - 2), ts, tw);
  std::uint64_t offset = 0;
  for (std::size_t i = 0; i < K; ++i) {
    const double rad = std::sqrt(ts[i]);
    const std::uint64_t L = std::clamp(next_pow2(grading / (1.0 - rad)), lmin, lmax);
    Ring ring{ts[i], 0.5 * tw[i], offset, L};
    r.rings.push_back(ring);
    const double wq = ring.radial_weight * 2.0 * kPi / static_cast<double>(L);
    for (std::uint64_t q = 0; q < L; ++q) {
      const double th = 2.0 * kPi * static_cast<double>(q) / static_cast<double>(L);
      r.x.push_back(rad * std::cos(th));
      r.y.push_back(rad * std::sin(th));
      r.w.push_back(wq);
    }
    offset += L;
  }
  // Radial error proxy: Beta-integral defect of the rule itself.
  double mass = 0;
  for (const auto& ring : r.rings) mass += ring.radial_weight;
  r.error_estimate = std::abs(2.0 * kPi * mass - kPi / (m - 1));
  return r;
}

namespace {

template <class F>
std::vector<cplx> eval_nodes(const QuadratureRule& rule, F&& f) {
  std::vector<cplx> vals(rule.size());
  const auto n = static_cast<std::ptrdiff_t>(rule.size());
  std::string err;
  std::ptrdiff_t bad = -1;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      vals[i] = f(static_cast<std::size_t>(i));
    } catch (const std::exception& e) {
#pragma omp critical
      {
        if (bad < 0 || i < bad) {
          bad = i;
          err = e.what();
        }
      }
    }
  }
  if (bad >= 0) throw EvaluationError(static_cast<std::size_t>(bad), err);
  return vals;
}

}  // namespace

cplx integrate_values(const QuadratureRule& rule, const std::vector<cplx>& values) {
  if (values.size() != rule.size()) throw Error("integrate_values: size mismatch");
  std::vector<cplx> terms(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) terms[i] = rule.w[i] * values[i];
  return pairwise_sum(terms);
}

cplx integrate(const QuadratureRule& rule, const ScalarIntegrand& g) {
  return integrate_values(rule, eval_nodes(rule, [&](std::size_t i) { return g(rule.hnode(i)); }));
}

cplx integrate_disk(const QuadratureRule& rule, const DiskIntegrand& g) {
  return integrate_values(rule, eval_nodes(rule, [&](std::size_t i) { return g(rule.dnode(i)); }));
}

Eigen::MatrixXcd integrate(const QuadratureRule& rule, const MatrixIntegrand& g) {
  const std::size_t n = rule.size();
  if (n == 0) return {};
  std::vector<Eigen::MatrixXcd> vals(n);
  for (std::size_t i = 0; i < n; ++i) {
    try {
      vals[i] = rule.w[i] * g(rule.hnode(i));
    } catch (const std::exception& e) {
      throw EvaluationError(i, e.what());
    }
  }
  // Pairwise reduction in index order.
  std::size_t stride = 1;
  while (stride < n) {
    for (std::size_t i = 0; i + stride < n; i += 2 * stride) vals[i] += vals[i + stride];
    stride *= 2;
  }
  return vals[0];
}

MonteCarloEstimate monte_carlo_fundamental(const ScalarIntegrand& g, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(-0.5, 0.5);
  const double umax = 2.0 / std::sqrt(3.0);
  std::uniform_real_distribution<double> uu(0.0, umax);
  const double box = umax;  // area of the sampling box in (x, u)
  cplx sum = 0;
  double sum2 = 0;
  std::size_t acc = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    const double x = ux(rng);
    const double u = uu(rng);
    cplx v = 0;
    if (u > 0 && u * u * (1.0 - x * x) <= 1.0) {
      v = g(HPoint{x, 1.0 / u});
      ++acc;
    }
    sum += v;
    sum2 += std::norm(v);
  }
  const double n = static_cast<double>(samples);
  const cplx mean = sum / n;
  const double var = std::max(0.0, sum2 / n - std::norm(mean));
  return {box * mean, box * std::sqrt(var / n), acc};
}

RuleCache::RuleCache(std::string dir) : dir_(std::move(dir)) {
  if (dir_.empty()) {
    if (const char* env = std::getenv("BQ_CACHE_DIR")) dir_ = env;
  }
}

std::string RuleCache::key(DomainTag tag, int m, int level, int degree_hint) {
  std::ostringstream os;
  os << (tag == DomainTag::FundamentalDomain ? "F" : tag == DomainTag::FullDisk ? "D" : "S") << "_m" << m
     << "_l" << level << "_n" << degree_hint;
  return os.str();
}

QuadratureRule RuleCache::fundamental(int level) const {
  return load_or_build(DomainTag::FundamentalDomain, 0, level, 0);
}

QuadratureRule RuleCache::disk(int m, int level, int degree_hint) const {
  return load_or_build(DomainTag::FullDisk, m, level, degree_hint);
}

QuadratureRule RuleCache::load_or_build(DomainTag tag, int m, int level, int degree_hint) const {
  const std::string k = key(tag, m, level, degree_hint);
  if (std::find(keys_.begin(), keys_.end(), k) == keys_.end()) keys_.push_back(k);
  auto build = [&] {
    return tag == DomainTag::FundamentalDomain ? fundamental_rule(level) : weighted_disk_rule(m, level, degree_hint);
  };
  if (!enabled()) return build();
  namespace fs = std::filesystem;
  const fs::path path = fs::path(dir_) / (k + ".bqr");
  if (fs::exists(path)) {
    try {
      return read_rule(path.string());
    } catch (const Error&) {
      // Corrupt or stale file: rebuild below.
    }
  }
  QuadratureRule r = build();
  fs::create_directories(dir_);
  const fs::path tmp = path.string() + ".tmp";
  write_rule(r, tmp.string());
  fs::rename(tmp, path);
  return r;
}

namespace {
constexpr char kMagic[8] = {'B', 'Q', 'R', 'U', 'L', 'E', '0', '1'};

template <class T>
void put(std::ofstream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
T get(std::ifstream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw Error("read_rule: truncated file");
  return v;
}
}  // namespace

void write_rule(const QuadratureRule& r, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("write_rule: cannot open " + path);
  os.write(kMagic, 8);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(r.tag));
  put<std::int32_t>(os, r.m);
  put<std::int32_t>(os, r.level);
  put<std::int32_t>(os, r.degree_hint);
  put<double>(os, r.error_estimate);
  put<std::uint64_t>(os, r.rings.size());
  put<std::uint64_t>(os, r.size());
  for (const auto& ring : r.rings) {
    put(os, ring.t);
    put(os, ring.radial_weight);
    put(os, ring.offset);
    put(os, ring.count);
  }
  for (std::size_t i = 0; i < r.size(); ++i) {
    put(os, r.x[i]);
    put(os, r.y[i]);
    put(os, r.w[i]);
  }
  if (!os) throw Error("write_rule: write failed for " + path);
}

QuadratureRule read_rule(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("read_rule: cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0) throw Error("read_rule: bad magic in " + path);
  QuadratureRule r;
  r.tag = static_cast<DomainTag>(get<std::uint32_t>(is));
  r.m = get<std::int32_t>(is);
  r.level = get<std::int32_t>(is);
  r.degree_hint = get<std::int32_t>(is);
  r.error_estimate = get<double>(is);
  const auto nr = get<std::uint64_t>(is);
  const auto nn = get<std::uint64_t>(is);
  r.rings.resize(nr);
  for (auto& ring : r.rings) {
    ring.t = get<double>(is);
    ring.radial_weight = get<double>(is);
    ring.offset = get<std::uint64_t>(is);
    ring.count = get<std::uint64_t>(is);
  }
  r.x.resize(nn);
  r.y.resize(nn);
  r.w.resize(nn);
  for (std::size_t i = 0; i < nn; ++i) {
    r.x[i] = get<double>(is);
    r.y[i] = get<double>(is);
    r.w[i] = get<double>(is);
  }
  return r;
}

}  // namespace bq
