#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lowsnr/spectra.hpp"

namespace lowsnr::cli {

enum class Command { Validate, Phi, Predict, Capacity, Scheme, Simulate, Mi, Sweep };
enum class OutputFormat { Csv, Json };

std::string to_string(Command c);

/// Exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitIo = 3;

struct ModelSpec {
  std::string kind = "memoryless";  // memoryless | ar1 | bandlimited | table | line
  std::complex<double> a{0.0, 0.0};
  double lambda_c = 0.5;
  std::string table;
  std::vector<double> mass;
  std::vector<double> line_freq;
  std::string residual;  // kind of the residual for `line`
};

struct RunConfig {
  Command command = Command::Capacity;
  ModelSpec model;
  std::uint64_t seed = 0;
  OutputFormat format = OutputFormat::Json;
  std::optional<std::string> out;

  // predict
  double delta2 = 1.0;
  std::optional<std::size_t> past;  // nullopt = infinite
  // phi
  std::string method = "integral";
  double tol = 1e-7;
  // scheme / simulate / mi
  std::size_t b = 1;
  double alpha = 1.0;
  double amplitude = 1.0;
  double sigma2 = 1.0;
  std::size_t n = 1000;
  std::size_t samples = 200'000;
  std::size_t workers = 4;
  // sweep
  std::vector<std::size_t> b_list;
  std::vector<double> alpha_list;
  std::vector<double> snr_list;
  bool mc = false;

  /// Every resolved key with its string value, echoed into reports.
  std::map<std::string, std::string> resolved;
};

/// Thrown by parse_config for -h/--help; carries the usage text.
struct HelpRequested {
  std::string text;
};

/// Flags override `--config` file keys; unknown keys, keys that do not apply
/// to the command and out-of-range values throw Error(UsageError).
RunConfig parse_config(const std::vector<std::string>& args);

/// Flat `key=value` lines with `#` comments.
std::map<std::string, std::string> read_config_file(const std::string& path);

FadingModel build_model(const ModelSpec& spec);

/// Runs the command, writing its report to `out`; diagnostics go to `err`.
int execute(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Entry point behind main(): parse, open the output, execute, map errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lowsnr::cli
