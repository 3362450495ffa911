#include "torpsi/grid.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "detail/axis_dft.hpp"
#include "torpsi/error.hpp"

namespace torpsi {

MultiIndex make_multi_index(std::initializer_list<int> components) {
  if (components.size() == 0 || components.size() > kMaxDim)
    throw DomainError("multi-index dimension must be in 1..3");
  MultiIndex alpha(components);
  for (int i = 0; i < alpha.dim; ++i)
    if (alpha[i] < 0) throw DomainError("multi-index components must be nonnegative");
  return alpha;
}

MultiIndex zero_multi_index(int dim) { return MultiIndex(dim); }

int order(const MultiIndex& alpha) {
  int s = 0;
  for (int i = 0; i < alpha.dim; ++i) s += alpha[i];
  return s;
}

Frequency shifted(const Frequency& xi, const MultiIndex& alpha) {
  Frequency out = xi;
  for (int i = 0; i < xi.dim; ++i) out[i] += alpha[i];
  return out;
}

std::int64_t norm_sq(const Frequency& xi) {
  std::int64_t s = 0;
  for (int i = 0; i < xi.dim; ++i) s += static_cast<std::int64_t>(xi[i]) * xi[i];
  return s;
}

double japanese_bracket(const Frequency& xi) {
  return std::sqrt(1.0 + static_cast<double>(norm_sq(xi)));
}

std::vector<MultiIndex> multi_indices_up_to(int dim, int max_order) {
  std::vector<MultiIndex> out;
  for (int total = 0; total <= max_order; ++total) {
    MultiIndex alpha(dim);
    // enumerate compositions of `total` into `dim` parts
    std::function<void(int, int)> rec = [&](int axis, int remaining) {
      if (axis == dim - 1) {
        alpha[axis] = remaining;
        out.push_back(alpha);
        return;
      }
      for (int c = remaining; c >= 0; --c) {
        alpha[axis] = c;
        rec(axis + 1, remaining - c);
      }
    };
    rec(0, total);
  }
  return out;
}

// ---------------------------------------------------------------- LatticeBox

LatticeBox::LatticeBox(int dim, std::array<int, kMaxDim> lo, std::array<int, kMaxDim> hi)
    : dim_(dim), lo_(lo), hi_(hi) {
  if (dim < 1 || dim > kMaxDim) throw DomainError("lattice dimension must be in 1..3");
  for (int i = dim; i < kMaxDim; ++i) lo_[i] = hi_[i] = 0;
  size_ = 1;
  for (int i = 0; i < dim; ++i) {
    if (hi_[i] < lo_[i]) {
      size_ = 0;
      break;
    }
    size_ *= static_cast<std::size_t>(hi_[i] - lo_[i] + 1);
  }
}

LatticeBox LatticeBox::symmetric(int dim, int radius) {
  std::array<int, kMaxDim> lo{}, hi{};
  for (int i = 0; i < dim; ++i) {
    lo[i] = -radius;
    hi[i] = radius;
  }
  return LatticeBox(dim, lo, hi);
}

bool LatticeBox::contains(const Frequency& xi) const {
  for (int i = 0; i < dim_; ++i)
    if (xi[i] < lo_[i] || xi[i] > hi_[i]) return false;
  return true;
}

bool LatticeBox::contains(const LatticeBox& other) const {
  if (other.empty()) return true;
  for (int i = 0; i < dim_; ++i)
    if (other.lo_[i] < lo_[i] || other.hi_[i] > hi_[i]) return false;
  return true;
}

std::size_t LatticeBox::index(const Frequency& xi) const {
  std::size_t idx = 0;
  for (int i = 0; i < dim_; ++i)
    idx = idx * static_cast<std::size_t>(extent(i)) + static_cast<std::size_t>(xi[i] - lo_[i]);
  return idx;
}

Frequency LatticeBox::point(std::size_t index) const {
  Frequency xi(dim_);
  for (int i = dim_ - 1; i >= 0; --i) {
    const auto e = static_cast<std::size_t>(extent(i));
    xi[i] = lo_[i] + static_cast<int>(index % e);
    index /= e;
  }
  return xi;
}

LatticeBox LatticeBox::intersect(const LatticeBox& other) const {
  std::array<int, kMaxDim> lo{}, hi{};
  for (int i = 0; i < dim_; ++i) {
    lo[i] = std::max(lo_[i], other.lo_[i]);
    hi[i] = std::min(hi_[i], other.hi_[i]);
  }
  return LatticeBox(dim_, lo, hi);
}

// ---------------------------------------------------------------- GridSpec

GridSpec::GridSpec(int dim, int points_per_axis, int freq_cutoff)
    : dim_(dim), points_(points_per_axis), cutoff_(freq_cutoff) {
  if (dim < 1 || dim > kMaxDim) throw DomainError("grid dimension n must be in 1..3");
  if (points_per_axis <= 0 || points_per_axis % 2 != 0)
    throw DomainError("points per axis G must be a positive even integer");
  if (freq_cutoff <= 0) throw DomainError("frequency cutoff N must be positive");
  if (2 * freq_cutoff + 1 > points_per_axis) {
    std::ostringstream msg;
    msg << "invariant 2N+1 <= G violated (N=" << freq_cutoff << ", G=" << points_per_axis << ")";
    throw DomainError(msg.str());
  }
  grid_size_ = 1;
  for (int i = 0; i < dim; ++i) grid_size_ *= static_cast<std::size_t>(points_per_axis);
}

std::array<int, kMaxDim> GridSpec::grid_point(std::size_t index) const {
  std::array<int, kMaxDim> j{};
  for (int i = dim_ - 1; i >= 0; --i) {
    j[i] = static_cast<int>(index % static_cast<std::size_t>(points_));
    index /= static_cast<std::size_t>(points_);
  }
  return j;
}

std::array<double, kMaxDim> GridSpec::coordinates(std::size_t index) const {
  const auto j = grid_point(index);
  std::array<double, kMaxDim> x{};
  for (int i = 0; i < dim_; ++i) x[i] = static_cast<double>(j[i]) / points_;
  return x;
}

int GridSpec::phase_index(std::size_t grid_index, const Frequency& xi) const {
  const auto j = grid_point(grid_index);
  long long p = 0;
  for (int i = 0; i < dim_; ++i) p += static_cast<long long>(j[i]) * xi[i];
  p %= points_;
  if (p < 0) p += points_;
  return static_cast<int>(p);
}

std::vector<Complex> twiddle_table(int points) {
  std::vector<Complex> w(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) {
    // signed k keeps w[G-k] == conj(w[k]) bit for bit
    const int kk = k <= points / 2 ? k : k - points;
    const double theta = 2.0 * std::numbers::pi * kk / points;
    w[static_cast<std::size_t>(k)] = Complex(std::cos(theta), std::sin(theta));
  }
  // exact values at quarter turns
  w[0] = 1.0;
  if (points % 2 == 0) w[static_cast<std::size_t>(points / 2)] = -1.0;
  if (points % 4 == 0) {
    w[static_cast<std::size_t>(points / 4)] = Complex(0.0, 1.0);
    w[static_cast<std::size_t>(3 * points / 4)] = Complex(0.0, -1.0);
  }
  return w;
}

// ---------------------------------------------------------------- GridFunction

GridFunction::GridFunction(const GridSpec& spec, int channels)
    : spec_(spec),
      channels_(channels),
      values_(Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(spec.grid_size()) * channels)) {
  if (channels < 1) throw DomainError("channel count must be positive");
}

GridFunction::GridFunction(const GridSpec& spec, int channels, Eigen::VectorXcd values)
    : spec_(spec), channels_(channels), values_(std::move(values)) {
  if (channels < 1) throw DomainError("channel count must be positive");
  if (values_.size() != static_cast<Eigen::Index>(spec.grid_size()) * channels)
    throw ShapeError("grid function length does not match G^n x channels");
  if (!values_.allFinite()) throw DomainError("grid function values must be finite");
}

GridFunction GridFunction::extract_channel(int c) const {
  if (c < 0 || c >= channels_) throw ShapeError("channel index out of range");
  return GridFunction(spec_, 1, Eigen::VectorXcd(channel(c)));
}

GridFunction GridFunction::from_function(
    const GridSpec& spec, const std::function<Complex(std::span<const double>)>& fn) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(spec.grid_size()));
  for (std::size_t j = 0; j < spec.grid_size(); ++j) {
    const auto x = spec.coordinates(j);
    v[static_cast<Eigen::Index>(j)] = fn(std::span<const double>(x.data(), spec.dim()));
  }
  return GridFunction(spec, 1, std::move(v));
}

// ---------------------------------------------------------------- SpectralCoeffs

SpectralCoeffs::SpectralCoeffs(const GridSpec& spec, int channels)
    : spec_(spec),
      channels_(channels),
      box_(spec.lattice()),
      coeffs_(Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(box_.size()) * channels)) {}

SpectralCoeffs::SpectralCoeffs(const GridSpec& spec, int channels, Eigen::VectorXcd coeffs)
    : spec_(spec), channels_(channels), box_(spec.lattice()), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != static_cast<Eigen::Index>(box_.size()) * channels)
    throw ShapeError("coefficient length does not match |L| x channels");
}

Complex SpectralCoeffs::operator()(const Frequency& xi, int channel) const {
  if (!box_.contains(xi)) throw DomainError("frequency outside the lattice");
  return coeffs_[static_cast<Eigen::Index>(channel * box_.size() + box_.index(xi))];
}

Complex& SpectralCoeffs::operator()(const Frequency& xi, int channel) {
  if (!box_.contains(xi)) throw DomainError("frequency outside the lattice");
  return coeffs_[static_cast<Eigen::Index>(channel * box_.size() + box_.index(xi))];
}

// ---------------------------------------------------------------- transforms

SpectralCoeffs forward_transform(const GridFunction& u) {
  const GridSpec& spec = u.spec();
  const auto tw = twiddle_table(spec.points());
  const int count = 2 * spec.cutoff() + 1;
  const std::size_t lsize = spec.lattice().size();
  SpectralCoeffs out(spec, u.channels());
  for (int c = 0; c < u.channels(); ++c) {
    auto ch = u.channel(c);
    std::vector<Complex> data(ch.begin(), ch.end());
    auto coeffs = detail::dft_forward(std::move(data), spec.dim(), spec.points(),
                                      -spec.cutoff(), count, tw);
    for (std::size_t k = 0; k < lsize; ++k)
      out.coeffs()[static_cast<Eigen::Index>(c * lsize + k)] = coeffs[k];
  }
  return out;
}

GridFunction inverse_transform(const SpectralCoeffs& c) {
  const GridSpec& spec = c.spec();
  const auto tw = twiddle_table(spec.points());
  const int count = 2 * spec.cutoff() + 1;
  const std::size_t lsize = spec.lattice().size();
  const std::size_t gsize = spec.grid_size();
  Eigen::VectorXcd values(static_cast<Eigen::Index>(gsize) * c.channels());
  for (int ch = 0; ch < c.channels(); ++ch) {
    std::vector<Complex> data(c.coeffs().data() + ch * lsize,
                              c.coeffs().data() + (ch + 1) * lsize);
    auto samples =
        detail::dft_inverse(std::move(data), spec.dim(), spec.points(), -spec.cutoff(), count, tw);
    for (std::size_t j = 0; j < gsize; ++j)
      values[static_cast<Eigen::Index>(ch * gsize + j)] = samples[j];
  }
  return GridFunction(spec, c.channels(), std::move(values));
}

double sobolev_norm(const SpectralCoeffs& c, double s) {
  const LatticeBox box = c.spec().lattice();
  double total = 0.0;
  for (std::size_t k = 0; k < box.size(); ++k) {
    const double w = std::pow(1.0 + static_cast<double>(norm_sq(box.point(k))), s);
    for (int ch = 0; ch < c.channels(); ++ch)
      total += w * std::norm(c.coeffs()[static_cast<Eigen::Index>(ch * box.size() + k)]);
  }
  return std::sqrt(total);
}

double sobolev_norm(const GridFunction& u, double s) {
  return sobolev_norm(forward_transform(u), s);
}

Complex l2_inner_product(const GridFunction& u, const GridFunction& v) {
  if (!(u.spec() == v.spec()) || u.channels() != v.channels())
    throw ShapeError("inner product operands differ in grid or channels");
  // Eigen's dot is conjugate-linear in its first argument
  return v.values().dot(u.values()) / static_cast<double>(u.spec().grid_size());
}

GridFunction make_exponential(const GridSpec& spec, const Frequency& xi0, int slot,
                              int channels) {
  if (xi0.dim != spec.dim() || !spec.lattice().contains(xi0))
    throw DomainError("frequency outside the lattice");
  if (slot < 0 || slot >= channels) throw ShapeError("channel slot out of range");
  const auto tw = twiddle_table(spec.points());
  GridFunction out(spec, channels);
  auto ch = out.channel(slot);
  for (std::size_t j = 0; j < spec.grid_size(); ++j)
    ch[static_cast<Eigen::Index>(j)] = tw[static_cast<std::size_t>(spec.phase_index(j, xi0))];
  return out;
}

double band_limit_defect(const GridFunction& u) {
  const double norm = u.values().norm();
  if (norm == 0.0) return 0.0;
  return (u.values() - inverse_transform(forward_transform(u)).values()).norm() / norm;
}

}  // namespace torpsi
