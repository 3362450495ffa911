#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "torpsi/error.hpp"
#include "torpsi/symbol.hpp"

namespace torpsi {

void write_symbol(std::ostream& os, const ScalarSymbol& a) {
  const auto& spec = a.spec();
  const auto& c = a.symbol_class();
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::setprecision(17);
  os << "symbol " << spec.dim() << ' ' << spec.points() << ' ' << spec.cutoff() << ' '
     << a.margin() << ' ' << c.order << ' ' << c.rho << ' ' << c.delta << '\n';
  for (std::size_t j = 0; j < spec.grid_size(); ++j) {
    for (std::size_t k = 0; k < a.box().size(); ++k) {
      const Frequency xi = a.box().point(k);
      os << j;
      for (int i = 0; i < spec.dim(); ++i) os << ' ' << xi[i];
      const Complex v = a.values()[j * a.box().size() + k];
      os << ' ' << v.real() << ' ' << v.imag() << '\n';
    }
  }
  os.flags(flags);
  os.precision(prec);
}

ScalarSymbol read_symbol(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ShapeError("empty symbol stream");
  std::istringstream head(line);
  std::string tag;
  int n, g, cutoff, dmax;
  double m, rho, delta;
  if (!(head >> tag >> n >> g >> cutoff >> dmax >> m >> rho >> delta) || tag != "symbol")
    throw ShapeError("malformed symbol header: " + line);
  const GridSpec spec(n, g, cutoff);
  const SymbolClass cls = SymbolClass::make(m, rho, delta);

  struct Row {
    std::size_t j;
    Frequency xi;
    Complex v;
  };
  std::vector<Row> rows;
  std::array<int, kMaxDim> lo{}, hi{};
  lo.fill(std::numeric_limits<int>::max());
  hi.fill(std::numeric_limits<int>::min());
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream in(line);
    Row r;
    r.xi = Frequency(n);
    double re, im;
    in >> r.j;
    for (int i = 0; i < n; ++i) in >> r.xi[i];
    if (!(in >> re >> im)) throw ShapeError("malformed symbol row: " + line);
    if (r.j >= spec.grid_size()) throw ShapeError("grid index out of range: " + line);
    r.v = Complex(re, im);
    for (int i = 0; i < n; ++i) {
      lo[i] = std::min(lo[i], r.xi[i]);
      hi[i] = std::max(hi[i], r.xi[i]);
    }
    rows.push_back(r);
  }
  if (rows.empty()) throw ShapeError("symbol stream has no rows");
  const LatticeBox box(n, lo, hi);
  if (rows.size() != spec.grid_size() * box.size())
    throw ShapeError("symbol rows do not fill grid x box");
  std::vector<Complex> values(rows.size());
  for (const Row& r : rows) values[r.j * box.size() + box.index(r.xi)] = r.v;
  return ScalarSymbol(spec, cls, box, std::move(values), "file");
}

}  // namespace torpsi
