// Toeplitz operators P M_u P between truncated weighted Bergman spaces.
//
// Every block is assembled by one routine in the disk model. For a map
// H_{m_j} -> H_{m_i} with symbol u the entry (k, l) is
//   int_D v(w) e^{i pi (m_i - m_j)/4} zeta^{m_j - m_i} e_l(w) conj(e_k(w)) (1-|w|^2)^{(m_i+m_j)/2 - 2} dA,
// where v = y^{(m_i - m_j)/2} u is the bounded twisted symbol and
// zeta = (1-w)/|1-w|. The rule must carry weight (m_i + m_j)/2.
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "bq/berezin.hpp"
#include "bq/bergman.hpp"
#include "bq/modforms.hpp"
#include "bq/quad.hpp"

namespace bq {

using ScalarField = std::function<cplx(const HPoint&)>;

// Matrix symbol u with block weights m_i, stored through its twisted entries
// v_ij = y^{(m_i - m_j)/2} u_ij, i.e. v = H_z u H_z^{-1}. Empty entries are zero.
struct MatrixSymbol {
  std::vector<int> weights;
  std::vector<ScalarField> entries;  // row-major n x n
  std::string name;

  int size() const { return static_cast<int>(weights.size()); }
  const ScalarField& entry(int i, int j) const { return entries[static_cast<std::size_t>(i * size() + j)]; }
  Eigen::MatrixXcd twisted(const HPoint& z) const;  // v(z)
  Eigen::MatrixXcd untwisted(const HPoint& z) const;  // u(z) = H_z^{-1} v(z) H_z
};

MatrixSymbol scalar_diagonal_symbol(const InvariantSymbol& f, std::vector<int> weights);
// [[0, conj(g) y^p], [f, 0]] on weights (m, m + p) for cusp forms f, g of weight p.
MatrixSymbol cusp_pair_symbol(const QExpansion& f, const QExpansion& g, int m);
// Equivariant extension of twisted entries given on F: v_ij(z) = u^{m_j - m_i} v_ij(z*)
// with z* = gamma z and u = J(gamma, z)/|J(gamma, z)|.
MatrixSymbol extend_from_F(std::vector<int> weights, std::vector<ScalarField> on_F, std::string name = "");
// Symbol of the adjoint: v -> v^*.
MatrixSymbol adjoint_symbol(const MatrixSymbol& s);

// sup over the grid of |v(z)|_F; throws NotInLinftyH when it is not finite or exceeds `cap`.
double linfty_h_norm(const MatrixSymbol& s, const std::vector<HPoint>& grid, double cap = 1e12);

// Twisted value y^{p/2} f(z) of a weight-p cusp form.
cplx cusp_twisted(const QExpansion& f, const HPoint& z);

// Core assembly from twisted samples at the rule nodes. `direct` replaces the
// per-ring FFT by an explicit DFT of the needed frequencies.
Eigen::MatrixXcd assemble_block(int mi, int mj, int N, const QuadratureRule& rule, const std::vector<cplx>& v,
                                bool direct = false);
std::vector<cplx> sample_nodes(const QuadratureRule& rule, const ScalarField& v);

OperatorMatrix toeplitz_matrix(const InvariantSymbol& f, const BergmanModel& model, const QuadratureRule& rule);
// T_f = P_{m+p} M_f P_m : H_m -> H_{m+p}; rule weight m + p/2.
OperatorMatrix toeplitz_block(const QExpansion& f, int m, int N, const QuadratureRule& rule);
// P_m M_{conj(g) y^p} P_{m+p} : H_{m+p} -> H_m; rule weight m + p/2.
OperatorMatrix toeplitz_block_partner(const QExpansion& g, int m, int N, const QuadratureRule& rule,
                                      bool direct = false);

// Rules for every block pair come from the cache at this level with degree hint N.
OperatorMatrix matrix_toeplitz(const MatrixSymbol& s, const BlockModel& block, int level, const RuleCache& cache);

double leading_block_residual(const Eigen::MatrixXcd& A, int size);

// | T_g^* - P_m M_{conj(g) y^p} P_{m+p} |_F, the partner assembled by direct DFT.
double adjoint_formula_check(const QExpansion& g, int m, int N, const QuadratureRule& rule);
// | (T_g)^* T_f - T_{f conj(g) y^p} |_F on the leading block. `pair_rule` has weight m.
double composite_identity_check(const QExpansion& f, const QExpansion& g, int m, int N, int block,
                                const QuadratureRule& block_rule, const QuadratureRule& pair_rule);
// | T_f L_m(gamma) - L_{m+p}(gamma) T_f |_F on the leading block.
double intertwining_residual(const OperatorMatrix& Tf, const GroupElement& gamma, int block);

// Gamma-sum form of the Berezin transform at z. phi_z(v) = sum w A^* v A over
// gamma of height <= height and F-rule nodes, a_i = K_i(gamma w, z) Im(gamma w)^{m_i/2} y^{m_i/2} / sqrt(c_i).
// `v_nodes` holds v at the F-rule nodes; values at gamma w follow from the lift law.
struct BSum {
  std::vector<int> weights;
  const QuadratureRule* rule = nullptr;
  int height = 0;
  // `shells`, when given, receives the Frobenius norm of each height shell.
  Eigen::MatrixXcd apply(const std::vector<Eigen::MatrixXcd>& v_nodes, const HPoint& z,
                         std::vector<double>* shells = nullptr) const;
  // phi_z(v v^*) - phi_z(v) phi_z(v^*), smallest eigenvalue.
  double kadison_min_eig(const std::vector<Eigen::MatrixXcd>& v_nodes, const HPoint& z) const;
};
std::vector<Eigen::MatrixXcd> sample_twisted(const MatrixSymbol& s, const QuadratureRule& rule);

// Bf(z) = H_z^{-1} phi_z(v) H_z at each grid point.
std::vector<Eigen::MatrixXcd> operator_B_apply(const MatrixSymbol& s, const std::vector<HPoint>& grid, int height,
                                               const QuadratureRule& rule);

struct TStarResult {
  double max_residual = 0;  // max |<T^*(A), f>_{L^2_H} - <A, T_f>_tau|
  std::vector<cplx> lhs, rhs, direct;  // direct: tau(A T_f^*) from the assembled matrices
};
// <Q(A)/(n mu), f>_{L^2_H} against tau(A T_f^*) = trace_via_Q(A, f#), f# = H^{-1}H^{*-1} f^* H^* H.
TStarResult T_star_check(const std::vector<OperatorMatrix>& ops, const std::vector<MatrixSymbol>& dict,
                         const QuadratureRule& rule, const std::vector<OperatorMatrix>& dict_ops = {});

struct DensityRung {
  int weight = 0;
  int size = 0;  // dictionary size after this rung
  double symbol_residual = 0;
  double operator_residual = 0;
  double ridge = 0;
};
struct DensityResult {
  double target_symbol_norm = 0;
  double target_operator_norm = 0;
  std::vector<DensityRung> rungs;  // rungs[0] is the empty dictionary
};
// Least-squares approximation of `target` by span{(f_i, g_j)_k} over growing
// weight sets, in L^2(F) and in the tau 2-norm of the Toeplitz operators on H_m.
DensityResult density_experiment(const std::vector<int>& weights, const InvariantSymbol& target, int m, int N,
                                 const QuadratureRule& f_rule, const QuadratureRule& disk_rule);

}  // namespace bq
