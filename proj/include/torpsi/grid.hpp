#pragma once

// Discretization of the torus T^n = [0,1)^n and of its frequency lattice Z^n.
//
// A GridSpec fixes the spatial grid x_j = j / G, j in {0..G-1}^n, and the
// symmetric lattice truncation L = { xi : max_i |xi_i| <= N } with 2N+1 <= G.
// Functions are sampled on the grid; their coefficients live on L.  The
// forward transform is the grid mean
//   c(xi) = G^{-n} sum_j exp(-2 pi i x_j . xi) u(x_j),
// which makes exp(2 pi i x . xi) have a unit coefficient.

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace torpsi {

using Complex = std::complex<double>;

inline constexpr int kMaxDim = 3;

/// Fixed-capacity integer tuple for lattice points and multi-indices.
template <class Tag>
struct IntTuple {
  std::array<int, kMaxDim> v{};
  int dim = 1;

  IntTuple() = default;
  explicit IntTuple(int d) : dim(d) {}
  IntTuple(std::initializer_list<int> init) : dim(static_cast<int>(init.size())) {
    int i = 0;
    for (int c : init) v[i++] = c;
  }

  int& operator[](int i) { return v[i]; }
  int operator[](int i) const { return v[i]; }

  friend bool operator==(const IntTuple& a, const IntTuple& b) {
    if (a.dim != b.dim) return false;
    for (int i = 0; i < a.dim; ++i)
      if (a.v[i] != b.v[i]) return false;
    return true;
  }
};

struct FrequencyTag {};
struct MultiIndexTag {};

/// A point xi of the frequency lattice Z^n.
using Frequency = IntTuple<FrequencyTag>;

/// A multi-index alpha in N_0^n. Use make_multi_index to get a validated one.
using MultiIndex = IntTuple<MultiIndexTag>;

MultiIndex make_multi_index(std::initializer_list<int> components);
MultiIndex zero_multi_index(int dim);

/// |alpha| = alpha_1 + ... + alpha_n
int order(const MultiIndex& alpha);

/// xi + alpha
Frequency shifted(const Frequency& xi, const MultiIndex& alpha);

/// |xi|^2
std::int64_t norm_sq(const Frequency& xi);

/// Discrete Japanese bracket <xi> = (1 + |xi|^2)^{1/2}.
double japanese_bracket(const Frequency& xi);

/// All multi-indices of dimension `dim` with |alpha| <= max_order, graded.
std::vector<MultiIndex> multi_indices_up_to(int dim, int max_order);

/// Axis-aligned box of lattice points, lo[i] <= xi_i <= hi[i]; row-major.
class LatticeBox {
 public:
  LatticeBox() = default;
  LatticeBox(int dim, std::array<int, kMaxDim> lo, std::array<int, kMaxDim> hi);
  static LatticeBox symmetric(int dim, int radius);

  int dim() const { return dim_; }
  int lo(int axis) const { return lo_[axis]; }
  int hi(int axis) const { return hi_[axis]; }
  int extent(int axis) const { return hi_[axis] - lo_[axis] + 1; }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  bool contains(const Frequency& xi) const;
  bool contains(const LatticeBox& other) const;
  std::size_t index(const Frequency& xi) const;
  Frequency point(std::size_t index) const;

  LatticeBox intersect(const LatticeBox& other) const;

  friend bool operator==(const LatticeBox& a, const LatticeBox& b) {
    return a.dim_ == b.dim_ && a.lo_ == b.lo_ && a.hi_ == b.hi_;
  }

 private:
  int dim_ = 0;
  std::array<int, kMaxDim> lo_{};
  std::array<int, kMaxDim> hi_{};
  std::size_t size_ = 0;
};

/// Grid and lattice discretization of T^n x Z^n.
class GridSpec {
 public:
  /// Throws DomainError naming the violated invariant.
  GridSpec(int dim, int points_per_axis, int freq_cutoff);

  int dim() const { return dim_; }
  int points() const { return points_; }
  int cutoff() const { return cutoff_; }

  /// G^n
  std::size_t grid_size() const { return grid_size_; }
  /// L = [-N, N]^n
  LatticeBox lattice() const { return LatticeBox::symmetric(dim_, cutoff_); }

  /// Multi-index j of the flat (row-major) grid index.
  std::array<int, kMaxDim> grid_point(std::size_t index) const;
  /// x_j = j / G
  std::array<double, kMaxDim> coordinates(std::size_t index) const;
  /// (j . xi) mod G, the index of exp(2 pi i x_j . xi) in the twiddle table.
  int phase_index(std::size_t grid_index, const Frequency& xi) const;

  friend bool operator==(const GridSpec& a, const GridSpec& b) {
    return a.dim_ == b.dim_ && a.points_ == b.points_ && a.cutoff_ == b.cutoff_;
  }

 private:
  int dim_;
  int points_;
  int cutoff_;
  std::size_t grid_size_;
};

/// exp(2 pi i k / G) for k = 0..G-1.
std::vector<Complex> twiddle_table(int points);

/// Sampled periodic function with `channels` components, channel-major.
class GridFunction {
 public:
  GridFunction(const GridSpec& spec, int channels = 1);
  /// Throws DomainError on non-finite values, ShapeError on wrong length.
  GridFunction(const GridSpec& spec, int channels, Eigen::VectorXcd values);

  const GridSpec& spec() const { return spec_; }
  int channels() const { return channels_; }
  const Eigen::VectorXcd& values() const { return values_; }
  Eigen::VectorXcd& values() { return values_; }

  auto channel(int c) { return values_.segment(c * spec_.grid_size(), spec_.grid_size()); }
  auto channel(int c) const {
    return values_.segment(c * spec_.grid_size(), spec_.grid_size());
  }

  /// Single-channel function holding channel c.
  GridFunction extract_channel(int c) const;

  static GridFunction from_function(const GridSpec& spec,
                                    const std::function<Complex(std::span<const double>)>& fn);

 private:
  GridSpec spec_;
  int channels_;
  Eigen::VectorXcd values_;
};

/// Coefficients on the lattice L, per channel, channel-major.
class SpectralCoeffs {
 public:
  SpectralCoeffs(const GridSpec& spec, int channels = 1);
  SpectralCoeffs(const GridSpec& spec, int channels, Eigen::VectorXcd coeffs);

  const GridSpec& spec() const { return spec_; }
  int channels() const { return channels_; }
  const Eigen::VectorXcd& coeffs() const { return coeffs_; }
  Eigen::VectorXcd& coeffs() { return coeffs_; }

  Complex operator()(const Frequency& xi, int channel = 0) const;
  Complex& operator()(const Frequency& xi, int channel = 0);

 private:
  GridSpec spec_;
  int channels_;
  LatticeBox box_;
  Eigen::VectorXcd coeffs_;
};

SpectralCoeffs forward_transform(const GridFunction& u);
GridFunction inverse_transform(const SpectralCoeffs& c);

/// Truncated-lattice H^s norm; root-sum-of-squares over channels.
double sobolev_norm(const GridFunction& u, double s);
double sobolev_norm(const SpectralCoeffs& c, double s);

/// Grid-mean product sum_c mean_j u_c(x_j) conj(v_c(x_j)); conjugate-linear in v.
Complex l2_inner_product(const GridFunction& u, const GridFunction& v);

/// exp(2 pi i x . xi0) in channel `slot`, zeros in the other channels.
GridFunction make_exponential(const GridSpec& spec, const Frequency& xi0, int slot = 0,
                              int channels = 1);

/// ||u - inverse(forward(u))|| / ||u||: zero for L-band-limited data.
double band_limit_defect(const GridFunction& u);

}  // namespace torpsi
