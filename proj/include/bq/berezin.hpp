// Berezin symbols, the Berezin transform and the Gamma-invariant trace.
//
// Operators act on a direct sum of truncated H_{m_i} (OperatorMatrix with
// one weight per block). Symbols are n x n matrices; the scalar case is n = 1.
// Evaluation vectors are truncated, and the constants c_i are taken from their
// truncated norms, c_i = |E^i_z|^2 y^{m_i}, so that S(I) = I holds exactly.
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "bq/bergman.hpp"
#include "bq/modforms.hpp"
#include "bq/quad.hpp"

namespace bq {

using MatrixField = std::function<Eigen::MatrixXcd(const HPoint&)>;

Eigen::MatrixXcd block(const OperatorMatrix& A, int i, int j);
// Half-plane evaluation vectors of every block at z.
std::vector<Eigen::VectorXcd> block_evaluation_vectors(const OperatorMatrix& A, const HPoint& z);

// S(A)(z) = H_z C^{-1/2} K_A(z,z) C^{-1/2} H_z^*.
Eigen::MatrixXcd symbol_S(const OperatorMatrix& A, const HPoint& z);
cplx symbol_S_scalar(const OperatorMatrix& A, const HPoint& z);
// K_A(z,w) = E_z^* A E_w, block (i,j) = (E^i_z)^* A_ij E^j_w.
Eigen::MatrixXcd symbol_two_point(const OperatorMatrix& A, const HPoint& z, const HPoint& w);
// Q(A)(z) = C^{-1/2} K_A(z,z) C^{-1/2} H_z^* H_z.
Eigen::MatrixXcd symbol_Q(const OperatorMatrix& A, const HPoint& z);

// Bf(z) = ((m-1)/pi) int_D f(phi_z(u)) (1-|u|^2)^(m-2) dA(u), phi_z(u) = x + y C^{-1}(u),
// on a weighted disk rule of weight m.
cplx berezin_transform(const ScalarIntegrand& f, const HPoint& z, const QuadratureRule& disk_rule);

// Normalized trace tr = (1/n) Tr.
cplx normalized_trace(const Eigen::MatrixXcd& M);

// tau(A) = (1/mu(F)) int_F tr S(A)(z) dmu over a FundamentalDomain rule.
cplx trace_tau(const OperatorMatrix& A, const QuadratureRule& rule);
// tau(A T_f) = (1/mu(F)) int_F tr(f(z) Q(A)(z)) dmu.
cplx trace_via_Q(const OperatorMatrix& A, const InvariantSymbol& f, const QuadratureRule& rule);
cplx trace_via_Q(const OperatorMatrix& A, const MatrixField& f, const QuadratureRule& rule);

// L(g) on every block of A's space.
Eigen::MatrixXcd block_discrete_series(const OperatorMatrix& A, const GroupElement& g);

// || S(L(g)^{-1} A L(g))(z) - D^* S(A)(gz) D ||_F with D = diag((J/|J|)^{m_i}), J = J(g,z).
double covariance_check(const OperatorMatrix& A, const GroupElement& g, const HPoint& z);

}  // namespace bq
