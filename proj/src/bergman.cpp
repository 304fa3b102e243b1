#include "bq/bergman.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numbers>

#include "bq/errors.hpp"

namespace bq {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx kI{0.0, 1.0};

// Power-series product truncated to n terms.
std::vector<cplx> series_mul(const std::vector<cplx>& a, const std::vector<cplx>& b, int n) {
  std::vector<cplx> c(n, 0.0);
  for (int i = 0; i < n && i < static_cast<int>(a.size()); ++i) {
    if (a[i] == cplx(0)) continue;
    for (int j = 0; i + j < n && j < static_cast<int>(b.size()); ++j) c[i + j] += a[i] * b[j];
  }
  return c;
}

}  // namespace

BergmanModel::BergmanModel(int weight, int truncation, ModelKind kind) : m(weight), N(truncation), model(kind) {
  if (m < 2) throw Error("BergmanModel: weight must be >= 2");
  if (N < 1) throw Error("BergmanModel: truncation must be >= 1");
  kernel_constant = (kind == ModelKind::HalfPlane) ? (m - 1) / (4 * kPi) : (m - 1) / kPi;
}

BlockModel::BlockModel(std::vector<int> w, int truncation) : weights(std::move(w)), N(truncation) {
  if (weights.empty()) throw Error("BlockModel: no weights");
  for (int m : weights) blocks.emplace_back(m, N);
}

double basis_norm(int m, int n) {
  return std::exp(0.5 * (std::lgamma(n + m) - std::lgamma(n + 1.0) - std::lgamma(m - 1.0)) - 0.5 * std::log(kPi));
}

cplx basis_eval(const BergmanModel& model, int n, const DPoint& w) {
  if (n < 0 || n >= model.N) throw Error("basis_eval: index out of range");
  return basis_norm(model.m, n) * std::pow(w.w, n);
}

Eigen::VectorXcd basis_values(int m, int N, cplx w) {
  Eigen::VectorXcd v(N);
  // |e_n|^{-2} ratio: Gamma(n+m)/n! over Gamma(n+m-1)/(n-1)! = (n+m-1)/n.
  double c = basis_norm(m, 0);
  cplx p = 1.0;
  for (int n = 0; n < N; ++n) {
    if (n > 0) c *= std::sqrt((n + m - 1.0) / n);
    v(n) = c * p;
    p *= w;
  }
  return v;
}

cplx cayley_factor(int m, const HPoint& z) {
  const cplx kappa = std::ldexp(1.0, m - 1) * std::exp(kI * (kPi * m / 4));
  return kappa * std::pow(z.z() + kI, -m);
}

cplx kernel(const BergmanModel& model, const HPoint& z, const HPoint& w) {
  const double c = (model.m - 1) / (4 * kPi);
  return c * std::pow((z.z() - std::conj(w.z())) / (2.0 * kI), -model.m);
}

cplx disk_kernel(int m, cplx w, cplx v) { return (m - 1) / kPi * std::pow(1.0 - w * std::conj(v), -m); }

EvaluationVector evaluation_vector(const BergmanModel& model, const HPoint& z) {
  EvaluationVector e;
  e.point = z;
  const cplx w = cayley(z).w;
  e.coeffs = basis_values(model.m, model.N, w).conjugate();
  if (model.model == ModelKind::HalfPlane) e.coeffs *= std::conj(cayley_factor(model.m, z));
  return e;
}

OperatorMatrix discrete_series_matrix(const BergmanModel& model, const GroupElement& g) {
  const int N = model.N, m = model.m;
  const GroupElement h = g.inverse();
  const double a = h.a(), b = h.b(), c = h.c(), d = h.d();
  // Disk form: (L f)(w) = (2i)^m (al + be w)^(-m) f(-(conj be + conj al w)/(al + be w)).
  const cplx al{b - c, a + d}, be{-b - c, a - d};
  if (std::abs(be) > 0 && std::abs(al / be) <= 1 + 1e-8)
    throw SeriesDivergence("discrete_series_matrix: expansion radius reaches the unit circle");
  // s = 1/(al + be w) as a series in w.
  std::vector<cplx> s(N);
  const cplx ratio = -be / al;
  s[0] = 1.0 / al;
  for (int j = 1; j < N; ++j) s[j] = s[j - 1] * ratio;
  const std::vector<cplx> num = {-std::conj(be), -std::conj(al)};
  const std::vector<cplx> phi = series_mul(num, s, N);
  std::vector<cplx> q(N, 0.0);
  q[0] = std::pow(2.0 * kI, m);
  for (int k = 0; k < m; ++k) q = series_mul(q, s, N);

  OperatorMatrix out;
  out.entries = Eigen::MatrixXcd::Zero(N, N);
  out.weights = {m};
  out.N = N;
  std::vector<double> nrm(N);
  for (int n = 0; n < N; ++n) nrm[n] = basis_norm(m, n);
  for (int l = 0; l < N; ++l) {
    for (int k = 0; k < N; ++k) out.entries(k, l) = q[k] * nrm[l] / nrm[k];
    if (l + 1 < N) q = series_mul(q, phi, N);
  }
  return out;
}

OperatorMatrix OperatorMatrix::adjoint() const {
  OperatorMatrix a{entries.adjoint(), domain(), N, {}};
  if (!square()) a.col_weights = weights;
  return a;
}

OperatorMatrix compose(const OperatorMatrix& A, const OperatorMatrix& B) {
  if (A.N != B.N || A.domain() != B.weights) throw SpaceMismatch("compose: range and domain differ");
  OperatorMatrix C{A.entries * B.entries, A.weights, A.N, {}};
  if (B.domain() != A.weights) C.col_weights = B.domain();
  return C;
}

OperatorMatrix operator_sum(const OperatorMatrix& A, const OperatorMatrix& B, cplx b) {
  if (A.N != B.N || A.weights != B.weights || A.domain() != B.domain())
    throw SpaceMismatch("operator_sum: spaces differ");
  OperatorMatrix C = A;
  C.entries += b * B.entries;
  return C;
}

Eigen::MatrixXd block_twist(const BlockModel& block, const HPoint& z) {
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(block.size(), block.size());
  for (int i = 0; i < block.size(); ++i) H(i, i) = std::pow(z.y, 0.5 * block.weights[i]);
  return H;
}

void write_operator(const OperatorMatrix& op, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw Error("write_operator: cannot open " + tmp);
    os.write("BQOPM002", 8);
    const std::uint64_t hdr[5] = {static_cast<std::uint64_t>(op.entries.rows()),
                                  static_cast<std::uint64_t>(op.entries.cols()), static_cast<std::uint64_t>(op.N),
                                  op.weights.size(), op.col_weights.size()};
    os.write(reinterpret_cast<const char*>(hdr), sizeof hdr);
    for (const auto* ws : {&op.weights, &op.col_weights})
      for (int wgt : *ws) {
        const std::int32_t v = wgt;
        os.write(reinterpret_cast<const char*>(&v), sizeof v);
      }
    for (Eigen::Index r = 0; r < op.entries.rows(); ++r)
      for (Eigen::Index c = 0; c < op.entries.cols(); ++c) {
        const double p[2] = {op.entries(r, c).real(), op.entries(r, c).imag()};
        os.write(reinterpret_cast<const char*>(p), sizeof p);
      }
    if (!os) throw Error("write_operator: write failed");
  }
  std::filesystem::rename(tmp, path);
}

OperatorMatrix read_operator(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("read_operator: cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, "BQOPM002", 8) != 0) throw Error("read_operator: bad magic");
  std::uint64_t hdr[5];
  is.read(reinterpret_cast<char*>(hdr), sizeof hdr);
  if (!is || hdr[3] > 1024 || hdr[4] > 1024) throw Error("read_operator: bad header");
  OperatorMatrix op;
  op.N = static_cast<int>(hdr[2]);
  op.weights.resize(hdr[3]);
  op.col_weights.resize(hdr[4]);
  for (auto* ws : {&op.weights, &op.col_weights})
    for (auto& wgt : *ws) {
      std::int32_t v;
      is.read(reinterpret_cast<char*>(&v), sizeof v);
      wgt = v;
    }
  op.entries.resize(static_cast<Eigen::Index>(hdr[0]), static_cast<Eigen::Index>(hdr[1]));
  for (Eigen::Index r = 0; r < op.entries.rows(); ++r)
    for (Eigen::Index c = 0; c < op.entries.cols(); ++c) {
      double p[2];
      is.read(reinterpret_cast<char*>(p), sizeof p);
      op.entries(r, c) = {p[0], p[1]};
    }
  if (!is) throw Error("read_operator: truncated file");
  return op;
}

std::string operator_to_json(const OperatorMatrix& op) {
  nlohmann::json j;
  j["version"] = 1;
  j["rows"] = op.entries.rows();
  j["cols"] = op.entries.cols();
  j["N"] = op.N;
  j["weights"] = op.weights;
  j["col_weights"] = op.col_weights;
  auto& data = j["data"] = nlohmann::json::array();
  for (Eigen::Index r = 0; r < op.entries.rows(); ++r)
    for (Eigen::Index c = 0; c < op.entries.cols(); ++c) {
      data.push_back(op.entries(r, c).real());
      data.push_back(op.entries(r, c).imag());
    }
  return j.dump();
}

OperatorMatrix operator_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("operator_from_json: ") + e.what());
  }
  if (j.value("version", 0) != 1) throw Error("operator_from_json: unsupported version");
  OperatorMatrix op;
  op.N = j.at("N").get<int>();
  op.weights = j.at("weights").get<std::vector<int>>();
  op.col_weights = j.value("col_weights", std::vector<int>{});
  const auto rows = j.at("rows").get<Eigen::Index>(), cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (data.size() != static_cast<std::size_t>(2 * rows * cols)) throw Error("operator_from_json: size mismatch");
  op.entries.resize(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c, k += 2) op.entries(r, c) = {data[k].get<double>(), data[k + 1].get<double>()};
  return op;
}

}  // namespace bq
