#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "torpsi/error.hpp"
#include "torpsi/quantize.hpp"

namespace torpsi {

void write_operator(std::ostream& os, const DenseOperator& op) {
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::setprecision(17);
  os << "operator " << op.spec.dim() << ' ' << op.spec.points() << ' ' << op.spec.cutoff() << ' '
     << op.channels << ' ' << op.order << '\n';
  for (Eigen::Index r = 0; r < op.rows(); ++r)
    for (Eigen::Index c = 0; c < op.rows(); ++c)
      os << r << ' ' << c << ' ' << op.matrix(r, c).real() << ' ' << op.matrix(r, c).imag()
         << '\n';
  os.flags(flags);
  os.precision(prec);
}

DenseOperator read_operator(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ShapeError("empty operator stream");
  std::istringstream head(line);
  std::string tag;
  int n, g, cutoff, channels;
  double order;
  if (!(head >> tag >> n >> g >> cutoff >> channels >> order) || tag != "operator")
    throw ShapeError("malformed operator header: " + line);
  const GridSpec spec(n, g, cutoff);
  if (channels < 1) throw ShapeError("operator channel count must be positive");
  const auto size = static_cast<Eigen::Index>(spec.grid_size()) * channels;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(size, size);
  Eigen::Index count = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream in(line);
    Eigen::Index r, c;
    double re, im;
    if (!(in >> r >> c >> re >> im) || r < 0 || c < 0 || r >= size || c >= size)
      throw ShapeError("malformed operator row: " + line);
    m(r, c) = Complex(re, im);
    ++count;
  }
  if (count != size * size) throw ShapeError("operator rows do not fill the matrix");
  DenseOperator op(spec, channels, std::move(m), order);
  op.hermitian = is_hermitian(op.matrix);
  return op;
}

}  // namespace torpsi
