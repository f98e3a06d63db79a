#pragma once

#include "jumpdiff/cirjump.hpp"
#include "jumpdiff/numgen.hpp"
#include "jumpdiff/sim.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace jd {

/// Test function selector: `x` (identity, scalar), `bump`, or `zero`.
struct FunctionSpec {
  std::string kind = "bump";
  double center = 1.0;
  double radius = 0.5;
  double amplitude = 1.0;
  int order = 3;

  TestFunction build() const;
  bool operator==(const FunctionSpec&) const = default;
};

inline const std::vector<std::string> kCheckTypes = {
    "identity_density", "density_mass",  "reweighted_expectation", "martingale", "girsanov",
    "killing_compensator", "supermartingale", "positivity", "ratio_bounds", "entropy_positivity",
    "transform_consistency"};

/// One entry of the check list. Zero `paths` means the suite default.
struct CheckSpec {
  std::string type;
  std::string label;
  std::size_t paths = 0;
  double t = 1.0;
  double z = 3.0;
  /// auto | oracle | q-simulation | both
  std::string target = "auto";
  std::vector<FunctionSpec> functions;
  /// P or Q (martingale, killing_compensator).
  std::string side = "P";
  std::vector<double> times;
  bool survivors_only = false;
  double d0 = 1.0;
  std::size_t samples = 1000000;
  std::size_t points = 100;
  /// Added to the target after it is computed. Harness self-test only.
  double target_shift = 0.0;
};

struct RunConfig {
  std::uint64_t seed = 1;
  int threads = 1;
  std::string output = "out";

  /// cirjump | cdc-demo
  std::string family = "cirjump";
  CirJumpParams cir;

  /// cirjump | identity (family cirjump); h-bump | identity (family cdc-demo)
  std::string change = "cirjump";
  int n = 100;
  FunctionSpec h{"bump", 1.0, 1.0, 0.3, 3};

  SimConfig sim;
  bool fit_epsilon = false;
  std::size_t fit_paths = 0;

  std::size_t paths = 10000;
  std::vector<CheckSpec> checks;

  std::size_t dump_paths = 10;
  std::size_t plot_paths = 10000;
  int plot_points = 21;
  int histogram_bins = 40;

  std::vector<int> scan_levels{2, 4, 8, 16, 32, 64};
  int scan_points = 2001;

  std::size_t cdc_points = 20;
  std::size_t cdc_paths = 100;
};

/// Every problem found in a config, in document order.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

/// Parses and validates YAML config text. Throws ConfigError listing all
/// syntax errors (with line and column), unknown keys, type errors and
/// constraint violations.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

}  // namespace jd
