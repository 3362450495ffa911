#include "torpsi/quantize.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "torpsi/error.hpp"

namespace torpsi {

namespace {

// E(j, k) = e^{2 pi i x_j . xi_k} for xi_k in L
Eigen::MatrixXcd exponential_matrix(const GridSpec& spec) {
  const LatticeBox lattice = spec.lattice();
  const auto tw = twiddle_table(spec.points());
  Eigen::MatrixXcd e(spec.grid_size(), lattice.size());
  for (std::size_t k = 0; k < lattice.size(); ++k) {
    const Frequency xi = lattice.point(k);
    for (std::size_t j = 0; j < spec.grid_size(); ++j) e(j, k) = tw[spec.phase_index(j, xi)];
  }
  return e;
}

void require_lattice(const ScalarSymbol& a) {
  if (!a.box().contains(a.spec().lattice()))
    throw ShapeError("symbol values do not cover the lattice L");
}

// box index of each lattice point
std::vector<std::size_t> lattice_lookup(const ScalarSymbol& a) {
  const LatticeBox lattice = a.spec().lattice();
  std::vector<std::size_t> idx(lattice.size());
  for (std::size_t k = 0; k < lattice.size(); ++k) idx[k] = a.box().index(lattice.point(k));
  return idx;
}

GridFunction apply_scalar(const ScalarSymbol& a, const GridFunction& f, bool parallel) {
  if (!(a.spec() == f.spec())) throw ShapeError("symbol and function live on different grids");
  if (f.channels() != 1) throw ShapeError("scalar symbol needs a one-channel function");
  require_lattice(a);
  const GridSpec& spec = a.spec();
  const LatticeBox lattice = spec.lattice();
  const auto tw = twiddle_table(spec.points());
  const auto lookup = lattice_lookup(a);
  const Eigen::VectorXcd fhat = forward_transform(f).coeffs();
  std::vector<Frequency> points(lattice.size());
  for (std::size_t k = 0; k < lattice.size(); ++k) points[k] = lattice.point(k);

  Eigen::VectorXcd out(spec.grid_size());
  const long long gsize = static_cast<long long>(spec.grid_size());
#pragma omp parallel for schedule(static) if (parallel)
  for (long long jj = 0; jj < gsize; ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    const auto row = a.row(j);
    Complex acc = 0.0;
    for (std::size_t k = 0; k < points.size(); ++k)
      acc += tw[spec.phase_index(j, points[k])] * row[lookup[k]] * fhat[k];
    out[jj] = acc;
  }
  return GridFunction(spec, 1, std::move(out));
}

void require_same_shape(const DenseOperator& a, const DenseOperator& b) {
  if (!(a.spec == b.spec) || a.channels != b.channels || a.rows() != b.rows())
    throw ShapeError("operators act on different spaces");
}

}  // namespace

// ---------------------------------------------------------------- DenseOperator

DenseOperator::DenseOperator(GridSpec spec_, int channels_, Eigen::MatrixXcd matrix_,
                             double order_)
    : spec(spec_), channels(channels_), matrix(std::move(matrix_)), order(order_) {
  const auto n = static_cast<Eigen::Index>(spec.grid_size()) * channels;
  if (channels < 1 || matrix.rows() != n || matrix.cols() != n)
    throw ShapeError("operator matrix must be (channels * G^n) square");
}

GridFunction DenseOperator::apply(const GridFunction& f) const {
  if (!(f.spec() == spec) || f.channels() != channels)
    throw ShapeError("function does not match the operator's space");
  return GridFunction(spec, channels, matrix * f.values());
}

DenseOperator DenseOperator::identity(const GridSpec& spec, int channels) {
  const auto n = static_cast<Eigen::Index>(spec.grid_size()) * channels;
  DenseOperator id(spec, channels, Eigen::MatrixXcd::Identity(n, n), 0.0);
  id.hermitian = true;
  id.positive = true;
  return id;
}

double hermitian_tolerance(double scale) { return 1e-10 * std::max(1.0, scale); }

bool is_hermitian(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols()) return false;
  const double scale = m.cwiseAbs().maxCoeff();
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= hermitian_tolerance(scale);
}

// ---------------------------------------------------------------- quantization

GridFunction apply_symbol(const ScalarSymbol& a, const GridFunction& f) {
  return apply_scalar(a, f, true);
}

GridFunction apply_symbol_serial(const ScalarSymbol& a, const GridFunction& f) {
  return apply_scalar(a, f, false);
}

GridFunction apply_symbol(const MatrixSymbol& a, const GridFunction& f) {
  const int l = a.size();
  if (f.channels() != l) throw ShapeError("matrix symbol size differs from channel count");
  GridFunction out(f.spec(), l);
  for (int i = 0; i < l; ++i)
    for (int j = 0; j < l; ++j)
      out.channel(i) += apply_symbol(a.entry(i, j), f.extract_channel(j)).values();
  return out;
}

DenseOperator materialize(const ScalarSymbol& a) {
  require_lattice(a);
  const GridSpec& spec = a.spec();
  const Eigen::MatrixXcd e = exponential_matrix(spec);
  const auto lookup = lattice_lookup(a);
  Eigen::MatrixXcd b(e.rows(), e.cols());
  for (Eigen::Index k = 0; k < e.cols(); ++k)
    for (Eigen::Index j = 0; j < e.rows(); ++j) b(j, k) = a.row(j)[lookup[k]] * e(j, k);
  Eigen::MatrixXcd m = b * e.adjoint();
  m /= static_cast<double>(spec.grid_size());
  return DenseOperator(spec, 1, std::move(m), a.symbol_class().order);
}

DenseOperator materialize(const MatrixSymbol& a) {
  const int l = a.size();
  const auto gsize = static_cast<Eigen::Index>(a.spec().grid_size());
  Eigen::MatrixXcd m(l * gsize, l * gsize);
  double ord = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < l; ++i)
    for (int j = 0; j < l; ++j) {
      m.block(i * gsize, j * gsize, gsize, gsize) = materialize(a.entry(i, j)).matrix;
      ord = std::max(ord, a.entry(i, j).symbol_class().order);
    }
  return DenseOperator(a.spec(), l, std::move(m), ord);
}

DenseOperator materialize_serial(const ScalarSymbol& a) {
  const GridSpec& spec = a.spec();
  const auto gsize = static_cast<Eigen::Index>(spec.grid_size());
  Eigen::MatrixXcd m(gsize, gsize);
  for (Eigen::Index c = 0; c < gsize; ++c) {
    Eigen::VectorXcd delta = Eigen::VectorXcd::Zero(gsize);
    delta[c] = 1.0;
    m.col(c) = apply_symbol_serial(a, GridFunction(spec, 1, std::move(delta))).values();
  }
  return DenseOperator(spec, 1, std::move(m), a.symbol_class().order);
}

ScalarSymbol extract_symbol(const DenseOperator& op) {
  if (op.channels != 1) throw ShapeError("symbol recovery needs a one-channel operator");
  const GridSpec& spec = op.spec;
  const Eigen::MatrixXcd e = exponential_matrix(spec);
  const Eigen::MatrixXcd ae = op.matrix * e;
  const LatticeBox lattice = spec.lattice();
  std::vector<Complex> values(spec.grid_size() * lattice.size());
  for (std::size_t j = 0; j < spec.grid_size(); ++j)
    for (std::size_t k = 0; k < lattice.size(); ++k)
      values[j * lattice.size() + k] = std::conj(e(j, k)) * ae(j, k);
  return ScalarSymbol(spec, SymbolClass{op.order, 1.0, 0.0}, lattice, std::move(values),
                      "extracted");
}

DenseOperator adjoint(const DenseOperator& op) {
  DenseOperator out(op.spec, op.channels, op.matrix.adjoint(), op.order);
  out.hermitian = op.hermitian;
  out.positive = op.positive;
  return out;
}

DenseOperator compose(const DenseOperator& a, const DenseOperator& b) {
  require_same_shape(a, b);
  return DenseOperator(a.spec, a.channels, a.matrix * b.matrix, a.order + b.order);
}

DenseOperator operator+(const DenseOperator& a, const DenseOperator& b) {
  require_same_shape(a, b);
  return DenseOperator(a.spec, a.channels, a.matrix + b.matrix, std::max(a.order, b.order));
}

DenseOperator operator*(Complex lambda, const DenseOperator& a) {
  return DenseOperator(a.spec, a.channels, lambda * a.matrix, a.order);
}

DenseOperator band_projector(const GridSpec& spec, int channels) {
  const Eigen::MatrixXcd e = exponential_matrix(spec);
  const Eigen::MatrixXcd pi = (e * e.adjoint()) / static_cast<double>(spec.grid_size());
  const auto gsize = static_cast<Eigen::Index>(spec.grid_size());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(channels * gsize, channels * gsize);
  for (int c = 0; c < channels; ++c) m.block(c * gsize, c * gsize, gsize, gsize) = pi;
  DenseOperator out(spec, channels, std::move(m), 0.0);
  out.hermitian = true;
  out.positive = true;
  return out;
}

DenseOperator band_project(const DenseOperator& op) {
  const DenseOperator pi = band_projector(op.spec, op.channels);
  DenseOperator out(op.spec, op.channels, pi.matrix * op.matrix * pi.matrix, op.order);
  out.hermitian = op.hermitian;
  return out;
}

// ---------------------------------------------------------------- functional calculus

EigenDecomposition hermitian_eigen(const DenseOperator& op) {
  if (!is_hermitian(op.matrix)) throw NotPositiveError("operator is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(op.matrix);
  if (solver.info() != Eigen::Success) throw NotPositiveError("Hermitian eigensolver failed");
  return EigenDecomposition{solver.eigenvalues(), solver.eigenvectors()};
}

DenseOperator operator_function(const DenseOperator& op, const EigenDecomposition& eig,
                                const std::function<double(double)>& g) {
  const double scale = eig.eigenvalues.cwiseAbs().maxCoeff();
  const double tol = hermitian_tolerance(scale);
  Eigen::VectorXd gl(eig.eigenvalues.size());
  bool nonneg = true;
  for (Eigen::Index i = 0; i < gl.size(); ++i) {
    double lambda = eig.eigenvalues[i];
    if (lambda < -tol) {
      std::ostringstream msg;
      msg << "operator has eigenvalue " << lambda << " below the positivity tolerance";
      throw NotPositiveError(msg.str());
    }
    if (lambda < 0.0) lambda = 0.0;
    gl[i] = g(lambda);
    if (!std::isfinite(gl[i])) {
      std::ostringstream msg;
      msg << "function is not defined at eigenvalue " << lambda;
      throw DomainError(msg.str());
    }
    nonneg = nonneg && gl[i] >= 0.0;
  }
  Eigen::MatrixXcd m = eig.eigenvectors * gl.asDiagonal() * eig.eigenvectors.adjoint();
  DenseOperator out(op.spec, op.channels, std::move(m), op.order);
  out.hermitian = true;
  out.positive = nonneg;
  return out;
}

DenseOperator operator_function(const DenseOperator& op, const std::function<double(double)>& g) {
  return operator_function(op, hermitian_eigen(op), g);
}

DenseOperator operator_sqrt(const DenseOperator& op) {
  DenseOperator out = operator_function(op, [](double x) { return std::sqrt(x); });
  out.order = op.order / 2.0;
  return out;
}

DenseOperator operator_inverse(const DenseOperator& op) {
  DenseOperator out = operator_function(op, [](double x) { return 1.0 / x; });
  out.order = -op.order;
  return out;
}

DenseOperator operator_power(const DenseOperator& op, double p) {
  DenseOperator out = operator_function(op, [p](double x) { return std::pow(x, p); });
  out.order = p * op.order;
  return out;
}

DenseOperator symmetrize_positive(const DenseOperator& op, double shift) {
  if (shift < 0.0) throw DomainError("symmetrization shift must be nonnegative");
  const auto n = op.rows();
  Eigen::MatrixXcd h = 0.5 * (op.matrix + op.matrix.adjoint());
  h += shift * Eigen::MatrixXcd::Identity(n, n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = solver.eigenvalues();
  const double tol = hermitian_tolerance(ev.cwiseAbs().maxCoeff());
  if (ev[0] < -tol) {
    std::ostringstream msg;
    msg << "symmetrized operator is indefinite (min eigenvalue " << ev[0] << " with shift "
        << shift << ")";
    throw NotPositiveError(msg.str());
  }
  DenseOperator out(op.spec, op.channels, std::move(h), op.order);
  out.hermitian = true;
  out.positive = true;
  return out;
}

}  // namespace torpsi
