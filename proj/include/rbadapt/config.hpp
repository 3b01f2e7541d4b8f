#pragma once

#include <rbadapt/greedy.hpp>
#include <rbadapt/sampling.hpp>

#include <filesystem>
#include <iosfwd>
#include <map>

namespace rbadapt {

enum class Algorithm { Standard, AdaptiveSampling, AdaptiveDeim, FullyAdaptive };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& name);

// Experiment description. File grammar:
//
//   # comment            ; comment
//   [section]
//   key = value
//
// Sections and keys are listed in the README. Unknown sections or keys are errors.
struct ExperimentConfig {
  std::string name = "run";
  std::filesystem::path source;  // file the config came from, if any

  std::string model = "burgers";
  Index n = 0;  // 0 selects the model default
  Index K = 0;  // 0 selects the model default
  double final_time = 0.0;  // thermal only; 0 selects the default
  std::filesystem::path model_path;  // thermal matrix directory

  Algorithm algorithm = Algorithm::FullyAdaptive;
  GreedyConfig greedy;

  SamplingSpec coarse{SamplingMode::Random, 1, 10, {}};
  SamplingSpec fine{SamplingMode::Random, 2, 300, {}};
  SamplingSpec test{SamplingMode::Random, 3, 100, {}};

  std::filesystem::path output_dir = "out";
  bool record_wall_time = true;  // false writes 0 so trace files are reproducible byte for byte

  // key=value lines in a fixed order; hash() is FNV-1a over this text.
  std::string canonical() const;
  std::uint64_t hash() const;
  std::string hash_hex() const;

  // Checks ranges and, for file-backed models, that the matrix files exist.
  void validate() const;
};

ExperimentConfig parse_config(std::istream& in, const std::string& origin = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace rbadapt
