#include "bq/berezin.hpp"

#include <cmath>
#include <numbers>

#include "bq/errors.hpp"

namespace bq {
namespace {

constexpr double kPi = std::numbers::pi;

void check_shape(const OperatorMatrix& A) {
  const auto n = static_cast<Eigen::Index>(A.weights.size()) * A.N;
  if (A.weights.empty() || !A.square() || A.entries.rows() != n || A.entries.cols() != n)
    throw SpaceMismatch("operator shape does not match its weights and truncation");
}

// Two-point symbol with each block scaled by 1/|E^i_z| on the left and 1/|E^j_w| on the right.
Eigen::MatrixXcd normalized_K(const OperatorMatrix& A, const std::vector<Eigen::VectorXcd>& Ez,
                              const std::vector<Eigen::VectorXcd>& Ew) {
  const int n = static_cast<int>(A.weights.size());
  Eigen::MatrixXcd K(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      K(i, j) = Ez[i].dot(block(A, i, j) * Ew[j]) / (Ez[i].norm() * Ew[j].norm());
  return K;
}

}  // namespace

Eigen::MatrixXcd block(const OperatorMatrix& A, int i, int j) { return A.entries.block(i * A.N, j * A.N, A.N, A.N); }

std::vector<Eigen::VectorXcd> block_evaluation_vectors(const OperatorMatrix& A, const HPoint& z) {
  check_shape(A);
  std::vector<Eigen::VectorXcd> E;
  E.reserve(A.weights.size());
  for (int m : A.weights) E.push_back(evaluation_vector(BergmanModel(m, A.N), z).coeffs);
  return E;
}

Eigen::MatrixXcd symbol_S(const OperatorMatrix& A, const HPoint& z) {
  const auto E = block_evaluation_vectors(A, z);
  // H_z C^{-1/2} E^* A E C^{-1/2} H_z^* reduces to the normalized two-point form
  // because C_i^{-1/2} y^{m_i/2} = 1/|E^i_z|.
  return normalized_K(A, E, E);
}

cplx symbol_S_scalar(const OperatorMatrix& A, const HPoint& z) {
  if (A.weights.size() != 1) throw SpaceMismatch("symbol_S_scalar: operator is not scalar");
  const auto E = block_evaluation_vectors(A, z);
  return E[0].dot(A.entries * E[0]) / E[0].squaredNorm();
}

Eigen::MatrixXcd symbol_two_point(const OperatorMatrix& A, const HPoint& z, const HPoint& w) {
  const auto Ez = block_evaluation_vectors(A, z), Ew = block_evaluation_vectors(A, w);
  const int n = static_cast<int>(A.weights.size());
  Eigen::MatrixXcd K(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) K(i, j) = Ez[i].dot(block(A, i, j) * Ew[j]);
  return K;
}

Eigen::MatrixXcd symbol_Q(const OperatorMatrix& A, const HPoint& z) {
  Eigen::MatrixXcd Q = symbol_S(A, z);
  const int n = static_cast<int>(A.weights.size());
  // Q = H^{-1} S H with H = diag(y^{m_i/2}).
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) Q(i, j) *= std::pow(z.y, 0.5 * (A.weights[j] - A.weights[i]));
  return Q;
}

cplx berezin_transform(const ScalarIntegrand& f, const HPoint& z, const QuadratureRule& disk_rule) {
  if (disk_rule.tag != DomainTag::FullDisk) throw Error("berezin_transform: needs a disk rule");
  const double c = (disk_rule.m - 1) / kPi;
  return c * integrate_disk(disk_rule, [&](const DPoint& u) {
           const HPoint v = cayley_inv(u);
           return f(HPoint{z.x + z.y * v.x, z.y * v.y});
         });
}

cplx normalized_trace(const Eigen::MatrixXcd& M) { return M.trace() / static_cast<double>(M.rows()); }

cplx trace_tau(const OperatorMatrix& A, const QuadratureRule& rule) {
  check_shape(A);
  const cplx I = integrate(rule, [&](const HPoint& z) {
    return A.weights.size() == 1 ? symbol_S_scalar(A, z) : normalized_trace(symbol_S(A, z));
  });
  return I / rule.total_weight();
}

cplx trace_via_Q(const OperatorMatrix& A, const InvariantSymbol& f, const QuadratureRule& rule) {
  check_shape(A);
  const cplx I = integrate(rule, [&](const HPoint& z) { return f.at_reduced(z) * normalized_trace(symbol_Q(A, z)); });
  return I / rule.total_weight();
}

cplx trace_via_Q(const OperatorMatrix& A, const MatrixField& f, const QuadratureRule& rule) {
  check_shape(A);
  const cplx I = integrate(rule, [&](const HPoint& z) { return normalized_trace(f(z) * symbol_Q(A, z)); });
  return I / rule.total_weight();
}

Eigen::MatrixXcd block_discrete_series(const OperatorMatrix& A, const GroupElement& g) {
  check_shape(A);
  const int n = static_cast<int>(A.weights.size());
  Eigen::MatrixXcd L = Eigen::MatrixXcd::Zero(n * A.N, n * A.N);
  for (int i = 0; i < n; ++i)
    L.block(i * A.N, i * A.N, A.N, A.N) =
        discrete_series_matrix(BergmanModel(A.weights[i], A.N, ModelKind::Disk), g).entries;
  return L;
}

double covariance_check(const OperatorMatrix& A, const GroupElement& g, const HPoint& z) {
  check_shape(A);
  // The disk-model matrices represent the half-plane operators through the Cayley unitary.
  const OperatorMatrix B{block_discrete_series(A, g.inverse()) * A.entries * block_discrete_series(A, g), A.weights,
                         A.N, {}};
  const cplx J = automorphy_J(g, z);
  const cplx u = J / std::abs(J);
  const int n = static_cast<int>(A.weights.size());
  Eigen::VectorXcd D(n);
  for (int i = 0; i < n; ++i) D(i) = std::pow(u, A.weights[i]);
  const Eigen::MatrixXcd rhs = D.conjugate().asDiagonal() * symbol_S(A, mobius_apply(g, z)) * D.asDiagonal();
  return (symbol_S(B, z) - rhs).norm();
}

}  // namespace bq
