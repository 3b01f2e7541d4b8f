#pragma once

#include <rbadapt/greedy.hpp>

#include <filesystem>
#include <utility>

namespace rbadapt {

// Written as a single "# k1=v1 k2=v2 ..." line ahead of the header. Empty metadata
// writes no comment line.
using CsvMetadata = std::vector<std::pair<std::string, std::string>>;

// 17 significant digits, enough for an exact read-back.
std::string format_real(double v);

// Writes to a temporary sibling file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// iteration,mu_star_1..mu_star_d,delta_max,card_coarse,r,l_deim,n_add,n_del,wall_seconds
// wall_seconds is rounded to milliseconds; with record_wall_time = false it is 0.
std::string trace_csv(const GreedyTrace& trace, Index dimension, const CsvMetadata& meta = {},
                      bool record_wall_time = true);
void write_trace_csv(const GreedyTrace& trace, Index dimension, const std::filesystem::path& path,
                     const CsvMetadata& meta = {}, bool record_wall_time = true);

// index,param_1..param_d,epsilon
std::string error_csv(const ParameterList& params, const Vector& epsilon, const CsvMetadata& meta = {});
void write_error_csv(const ParameterList& params, const Vector& epsilon, const std::filesystem::path& path,
                     const CsvMetadata& meta = {});

struct CsvTable {
  CsvMetadata meta;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

// Parses a numeric CSV written by this module; throws ParseError with line numbers.
CsvTable read_csv(const std::filesystem::path& path);

struct ErrorTable {
  ParameterList params;
  Vector epsilon;
};
ErrorTable read_error_csv(const std::filesystem::path& path);

}  // namespace rbadapt
