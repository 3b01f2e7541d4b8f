#include <rbadapt/csv.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

namespace rbadapt {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

namespace {

void write_meta(std::ostream& os, const CsvMetadata& meta) {
  if (meta.empty()) return;
  os << "#";
  for (const auto& [k, v] : meta) os << " " << k << "=" << v;
  os << "\n";
}

}  // namespace

std::string trace_csv(const GreedyTrace& trace, Index dimension, const CsvMetadata& meta, bool record_wall_time) {
  std::ostringstream os;
  write_meta(os, meta);
  os << "iteration";
  for (Index j = 1; j <= dimension; ++j) os << ",mu_star_" << j;
  os << ",delta_max,card_coarse,r,l_deim,n_add,n_del,wall_seconds\n";
  for (const auto& rec : trace.iterations) {
    if (rec.mu_star.size() != dimension) throw StructuralError("trace parameter dimension mismatch");
    os << rec.iteration;
    for (Index j = 0; j < dimension; ++j) os << "," << format_real(rec.mu_star[j]);
    char wall[32];
    std::snprintf(wall, sizeof wall, "%.3f", record_wall_time ? rec.wall_seconds : 0.0);
    os << "," << format_real(rec.delta_max) << "," << rec.card_coarse << "," << rec.r << "," << rec.l_deim << ","
       << rec.n_add << "," << rec.n_del << "," << wall << "\n";
  }
  return os.str();
}

void write_trace_csv(const GreedyTrace& trace, Index dimension, const std::filesystem::path& path,
                     const CsvMetadata& meta, bool record_wall_time) {
  write_file_atomic(path, trace_csv(trace, dimension, meta, record_wall_time));
}

std::string error_csv(const ParameterList& params, const Vector& epsilon, const CsvMetadata& meta) {
  if (static_cast<Index>(params.size()) != epsilon.size())
    throw StructuralError("one error value per parameter required");
  const Index d = params.empty() ? 0 : params.front().size();
  std::ostringstream os;
  write_meta(os, meta);
  os << "index";
  for (Index j = 1; j <= d; ++j) os << ",param_" << j;
  os << ",epsilon\n";
  for (std::size_t i = 0; i < params.size(); ++i) {
    os << i;
    for (Index j = 0; j < d; ++j) os << "," << format_real(params[i][j]);
    os << "," << format_real(epsilon[static_cast<Index>(i)]) << "\n";
  }
  return os.str();
}

void write_error_csv(const ParameterList& params, const Vector& epsilon, const std::filesystem::path& path,
                     const CsvMetadata& meta) {
  write_file_atomic(path, error_csv(params, epsilon, meta));
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  int lineno = 0;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::stringstream ss(line.substr(1));
      std::string kv;
      while (ss >> kv) {
        const auto eq = kv.find('=');
        if (eq != std::string::npos) table.meta.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
      }
      continue;
    }
    if (table.header.empty()) {
      table.header = split(line);
      continue;
    }
    const auto cells = split(line);
    if (cells.size() != table.header.size())
      throw ParseError(path.string() + ": expected " + std::to_string(table.header.size()) + " fields", lineno);
    std::vector<double> row;
    for (const auto& c : cells) {
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      if (c.empty() || end != c.c_str() + c.size()) throw ParseError(path.string() + ": bad number '" + c + "'", lineno);
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw ParseError(path.string() + ": missing header", lineno);
  return table;
}

ErrorTable read_error_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  if (t.header.size() < 2 || t.header.front() != "index" || t.header.back() != "epsilon")
    throw ParseError(path.string() + ": not an error table", 1);
  const Index d = static_cast<Index>(t.header.size()) - 2;
  ErrorTable out;
  out.epsilon.resize(static_cast<Index>(t.rows.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    Parameter mu(d);
    for (Index j = 0; j < d; ++j) mu[j] = t.rows[i][static_cast<std::size_t>(j + 1)];
    out.params.push_back(mu);
    out.epsilon[static_cast<Index>(i)] = t.rows[i].back();
  }
  return out;
}

}  // namespace rbadapt
