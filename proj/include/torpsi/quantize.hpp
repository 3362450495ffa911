#pragma once

// Toroidal quantization Op(a) f(x) = sum_{xi in L} e^{2 pi i x.xi} a(x, xi) f^(xi),
// its dense finite sections, symbol recovery and Hermitian functional calculus.

#include <functional>
#include <iosfwd>

#include <Eigen/Dense>

#include "torpsi/grid.hpp"
#include "torpsi/symbol.hpp"

namespace torpsi {

/// Dense matrix acting on channel-major stacked grid values.
struct DenseOperator {
  GridSpec spec;
  int channels = 1;
  Eigen::MatrixXcd matrix;
  double order = 0.0;
  bool hermitian = false;
  bool positive = false;

  DenseOperator(GridSpec spec, int channels, Eigen::MatrixXcd matrix, double order = 0.0);

  Eigen::Index rows() const { return matrix.rows(); }
  GridFunction apply(const GridFunction& f) const;

  /// The full identity on ell * G^n values.
  static DenseOperator identity(const GridSpec& spec, int channels = 1);
};

/// Tolerance used for Hermitian / nonnegativity decisions: 1e-10 max(1, scale).
double hermitian_tolerance(double scale);
/// max |M - M*| <= hermitian_tolerance(max |M|)
bool is_hermitian(const Eigen::MatrixXcd& m);

// ------------------------------------------------------------ quantization

GridFunction apply_symbol(const ScalarSymbol& a, const GridFunction& f);
GridFunction apply_symbol_serial(const ScalarSymbol& a, const GridFunction& f);
GridFunction apply_symbol(const MatrixSymbol& a, const GridFunction& f);

/// M = (a o E) E^H / G^n with E(j, xi) = e^{2 pi i x_j.xi}, xi in L.
DenseOperator materialize(const ScalarSymbol& a);
DenseOperator materialize(const MatrixSymbol& a);
/// Column-by-column assembly from apply_symbol on grid deltas.
DenseOperator materialize_serial(const ScalarSymbol& a);

/// a(x, xi) = e^{-2 pi i x.xi} (A e_xi)(x) on grid x L.
ScalarSymbol extract_symbol(const DenseOperator& op);

DenseOperator adjoint(const DenseOperator& op);
DenseOperator compose(const DenseOperator& a, const DenseOperator& b);
DenseOperator operator+(const DenseOperator& a, const DenseOperator& b);
DenseOperator operator*(Complex lambda, const DenseOperator& a);

/// Orthogonal projector onto L-band-limited grid functions (per channel).
DenseOperator band_projector(const GridSpec& spec, int channels = 1);
/// Pi_L A Pi_L
DenseOperator band_project(const DenseOperator& op);

// ------------------------------------------------------------ functional calculus

struct EigenDecomposition {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXcd eigenvectors;  // unitary, columns
};

/// Throws NotPositiveError when the matrix is not Hermitian.
EigenDecomposition hermitian_eigen(const DenseOperator& op);

/// V g(Lambda) V*, after clamping eigenvalues in [-tol, 0) to 0.  Throws
/// NotPositiveError for eigenvalues below -tol and DomainError when g is not
/// finite on the spectrum.
DenseOperator operator_function(const DenseOperator& op, const std::function<double(double)>& g);
DenseOperator operator_function(const DenseOperator& op, const EigenDecomposition& eig,
                                const std::function<double(double)>& g);
DenseOperator operator_sqrt(const DenseOperator& op);
DenseOperator operator_inverse(const DenseOperator& op);
DenseOperator operator_power(const DenseOperator& op, double p);

/// (A + A*)/2 + c I, verified nonnegative; throws NotPositiveError otherwise.
DenseOperator symmetrize_positive(const DenseOperator& op, double shift = 0.0);

// ------------------------------------------------------------ text format

/// Header "operator n G N channels order", then rows "row col Re Im".
void write_operator(std::ostream& os, const DenseOperator& op);
DenseOperator read_operator(std::istream& is);

}  // namespace torpsi
