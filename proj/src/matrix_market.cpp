#include <rbadapt/matrix_market.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <string>

namespace rbadapt {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

enum class Symmetry { General, Symmetric, Skew };

}  // namespace

SparseMatrix read_matrix_market(std::istream& in) {
  std::string line;
  long lineno = 0;

  if (!std::getline(in, line)) throw ParseError("empty Matrix Market stream", 1);
  ++lineno;
  std::istringstream header(line);
  std::string banner, object, layout, field, symmetry;
  header >> banner >> object >> layout >> field >> symmetry;
  if (banner != "%%MatrixMarket" || lower(object) != "matrix")
    throw ParseError("malformed Matrix Market header: '" + line + "'", lineno);
  layout = lower(layout);
  field = lower(field);
  symmetry = lower(symmetry);
  if (layout != "coordinate" && layout != "array") throw ParseError("unsupported layout '" + layout + "'", lineno);
  if (field != "real" && field != "integer" && field != "double")
    throw ParseError("unsupported field '" + field + "' (real or integer expected)", lineno);
  Symmetry sym;
  if (symmetry == "general")
    sym = Symmetry::General;
  else if (symmetry == "symmetric")
    sym = Symmetry::Symmetric;
  else if (symmetry == "skew-symmetric")
    sym = Symmetry::Skew;
  else
    throw ParseError("unsupported symmetry '" + symmetry + "'", lineno);

  // Skip comments up to the size line.
  do {
    if (!std::getline(in, line)) throw ParseError("missing size line", lineno + 1);
    ++lineno;
  } while (blank(line) || line[0] == '%');

  std::istringstream size_line(line);
  long rows = 0, cols = 0, nnz = 0;
  if (layout == "coordinate") {
    if (!(size_line >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0)
      throw ParseError("malformed size line: '" + line + "'", lineno);
  } else {
    if (!(size_line >> rows >> cols) || rows < 0 || cols < 0)
      throw ParseError("malformed size line: '" + line + "'", lineno);
    nnz = (sym == Symmetry::General) ? rows * cols : (sym == Symmetry::Symmetric ? rows * (rows + 1) / 2 : rows * (rows - 1) / 2);
  }
  if (sym != Symmetry::General && rows != cols) throw ParseError("symmetric storage requires a square matrix", lineno);

  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(sym == Symmetry::General ? nnz : 2 * nnz));
  auto add = [&](long i, long j, double v) {
    trips.emplace_back(i, j, v);
    if (i != j && sym == Symmetry::Symmetric) trips.emplace_back(j, i, v);
    if (i != j && sym == Symmetry::Skew) trips.emplace_back(j, i, -v);
  };

  long read = 0;
  long array_row = 0, array_col = 0;
  while (read < nnz) {
    if (!std::getline(in, line))
      throw ParseError("expected " + std::to_string(nnz) + " entries, found " + std::to_string(read), lineno + 1);
    ++lineno;
    if (blank(line) || line[0] == '%') continue;
    std::istringstream entry(line);
    if (layout == "coordinate") {
      long i = 0, j = 0;
      double v = 0;
      if (!(entry >> i >> j >> v)) throw ParseError("malformed entry: '" + line + "'", lineno);
      if (i < 1 || i > rows || j < 1 || j > cols)
        throw ParseError("index (" + std::to_string(i) + ", " + std::to_string(j) + ") out of range", lineno);
      if (sym != Symmetry::General && j > i) throw ParseError("entry above the diagonal in symmetric storage", lineno);
      add(i - 1, j - 1, v);
    } else {
      double v = 0;
      if (!(entry >> v)) throw ParseError("malformed entry: '" + line + "'", lineno);
      if (v != 0.0) add(array_row, array_col, v);
      // Column-major; symmetric arrays store the lower triangle only.
      ++array_row;
      if (array_row >= rows) {
        ++array_col;
        array_row = (sym == Symmetry::General) ? 0 : (sym == Symmetry::Symmetric ? array_col : array_col + 1);
      }
    }
    ++read;
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (!blank(line) && line[0] != '%')
      throw ParseError("more entries than declared (" + std::to_string(nnz) + ")", lineno);
  }

  SparseMatrix M(rows, cols);
  M.setFromTriplets(trips.begin(), trips.end());
  M.makeCompressed();
  return M;
}

SparseMatrix read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open Matrix Market file " + path.string());
  try {
    return read_matrix_market(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ":" + std::to_string(e.line()) + ": " + e.what(), e.line());
  }
}

void write_matrix_market(const SparseMatrix& matrix, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write Matrix Market file " + path.string());
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << matrix.rows() << ' ' << matrix.cols() << ' ' << matrix.nonZeros() << '\n';
  out.precision(17);
  for (Index k = 0; k < matrix.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(matrix, k); it; ++it)
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace rbadapt
