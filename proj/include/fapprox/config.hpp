#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fapprox/discretization.hpp"
#include "fapprox/forms.hpp"

namespace fapprox {

/// Raised for malformed or schema-violating configs; the message names the
/// offending key path, or the line and column of a syntax error.
class ConfigError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

struct SolverConfig {
  int cells = 64;
  int gauss_order = 4;
  double mu_cap = 1280.0;
  double tol = 1e-11;
  int max_iter = 200;
  int substeps = 4;
  std::string method = "at";
};

struct StudyConfig {
  std::vector<int> ladder = {8, 16, 32, 64, 128, 256};
  int batch_size = 20;
  std::uint64_t seed = 20240611;
  std::string method = "at";
};

struct VerifyConfig {
  std::vector<int> affine_ladder = {4, 8, 16, 32, 64};
  int pair_samples = 200;
  double contour_angle = 0.0;  ///< 0 picks the default inside the admissible range
  double radius_cap = 50.0;
  int contour_points = 0;      ///< 0 picks the default from the angle
  std::vector<double> contour_times = {0.01, 1.0};
  std::vector<double> mu_ladder = {0.0, 10.0, 100.0, 1000.0};
};

struct ProblemConfig {
  SpacePairPtr space;
  FormPath form;
  double gamma = 0.0;
  double horizon = 1.0;
  TimeFunction f;
  Vector u0;
  SolverConfig solver;
  StudyConfig study;
  VerifyConfig verify;
  std::string form_family;
};

/// Parses a config document. Unknown keys are errors.
ProblemConfig parse_config(const std::string& text, const std::string& base_dir = ".");

/// Reads and parses a config file; relative table paths resolve against its directory.
ProblemConfig load_config(const std::string& path);

}  // namespace fapprox
