// Truncated weighted Bergman spaces H_m on the disk and the half-plane.
//
// Operators are represented in the disk model, where the monomials
//   e_n(w) = sqrt(Gamma(n+m) / (pi n! Gamma(m-1))) w^n
// are orthonormal for (1-|w|^2)^(m-2) dA. Half-plane functions are transported
// by the Cayley unitary (Uf)(z) = kappa_m (z+i)^(-m) f((z-i)/(z+i)) with
// kappa_m = 2^(m-1) e^(i pi m / 4).
#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "bq/hypgeom.hpp"

namespace bq {

enum class ModelKind { Disk, HalfPlane };

struct BergmanModel {
  int m = 2;
  int N = 1;
  ModelKind model = ModelKind::HalfPlane;
  double kernel_constant = 0;  // c_m = (m-1)/(4 pi) on the half-plane, (m-1)/pi on the disk

  BergmanModel() = default;
  BergmanModel(int weight, int truncation, ModelKind kind = ModelKind::HalfPlane);
};

struct EvaluationVector {
  HPoint point;
  Eigen::VectorXcd coeffs;  // f(z) = <f, E_z> = sum_n f_n conj(coeffs[n])
};

struct BlockModel {
  std::vector<int> weights;
  int N = 1;
  std::vector<BergmanModel> blocks;

  BlockModel() = default;
  BlockModel(std::vector<int> weights, int truncation);
  int size() const { return static_cast<int>(weights.size()); }
  int dim() const { return size() * N; }
};

// Maps the space with weights `col_weights` to the one with `weights`; an
// empty `col_weights` means the operator is square on `weights`.
struct OperatorMatrix {
  Eigen::MatrixXcd entries;
  std::vector<int> weights;  // row space, one entry per block
  int N = 0;
  std::vector<int> col_weights;

  const std::vector<int>& domain() const { return col_weights.empty() ? weights : col_weights; }
  bool square() const { return domain() == weights; }
  OperatorMatrix adjoint() const;
};

// A * B with a runtime check that B's range is A's domain (SpaceMismatch).
OperatorMatrix compose(const OperatorMatrix& A, const OperatorMatrix& B);
OperatorMatrix operator_sum(const OperatorMatrix& A, const OperatorMatrix& B, cplx b = 1.0);

double basis_norm(int m, int n);  // sqrt(Gamma(n+m) / (pi n! Gamma(m-1)))
cplx basis_eval(const BergmanModel& model, int n, const DPoint& w);
// e_0 .. e_{N-1} at w.
Eigen::VectorXcd basis_values(int m, int N, cplx w);

cplx cayley_factor(int m, const HPoint& z);  // kappa_m (z+i)^(-m)

// K_m(z,w) = c_m ((z - conj w) / (2i))^(-m).
cplx kernel(const BergmanModel& model, const HPoint& z, const HPoint& w);
// ((m-1)/pi) (1 - w conj v)^(-m).
cplx disk_kernel(int m, cplx w, cplx v);

// Coordinates of E_z(1) in the truncated basis: <f, E_z> = f(z).
EvaluationVector evaluation_vector(const BergmanModel& model, const HPoint& z);

// Matrix of L_m(g), (L_m(g)f)(z) = f(g^{-1} z) J(g^{-1}, z)^{-m}, by series
// composition in the disk coordinate. Throws SeriesDivergence when the pole of
// the pulled-back factor sits within 1e-8 of the unit circle.
OperatorMatrix discrete_series_matrix(const BergmanModel& model, const GroupElement& g);

// H_z = diag(y^{m_i/2}).
Eigen::MatrixXd block_twist(const BlockModel& block, const HPoint& z);

// Versioned interchange. Binary layout: "BQOPM002", u64 rows, u64 cols,
// u64 N, u64 n_weights, u64 n_col_weights, i32 weights..., i32 col_weights...,
// rows*cols (f64 re, f64 im) row-major.
void write_operator(const OperatorMatrix& op, const std::string& path);
OperatorMatrix read_operator(const std::string& path);
std::string operator_to_json(const OperatorMatrix& op);
OperatorMatrix operator_from_json(const std::string& text);

}  // namespace bq
