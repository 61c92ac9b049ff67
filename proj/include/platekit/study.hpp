#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "platekit/analysis.hpp"

namespace platekit {

struct StudyConfig {
  std::string problem;               // p1 | p2
  std::vector<std::string> methods;  // fq, lsfq, morley, bpt, dpv, dpvc0
  std::string mesh_type = "structured";
  std::uint64_t seed = 1;
  std::vector<double> betas = {100.0};
  std::vector<int> levels;
  std::string output_dir = "study_out";

  /// Strict parse: unknown keys are hard errors.
  static StudyConfig from_json_file(const std::string& path);
  static StudyConfig from_json_text(const std::string& text);
  void validate() const;
};

struct StudyResult {
  std::vector<ErrorReport> reports;
  std::vector<std::string> files;
};

/// Runs every (method, beta) combination in a worker pool, writes one CSV per
/// combination plus figure row subsets under output_dir/figures when the
/// combinations a figure needs are present.
StudyResult run_study(const StudyConfig& config);

}  // namespace platekit
