#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace spw::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  ///< numeric failure, or validate found a difference
inline constexpr int kExitUsage = 2;

enum class Format { csv, json };

/// Everything a command needs. Paths equal to "-" (or empty for outputs
/// that are optional) select standard output or disable the output.
struct RunConfig {
  std::string command;
  std::size_t m = 0;
  std::size_t n = 0;
  std::vector<double> spikes;
  std::size_t draws = 1;
  std::optional<std::size_t> top;
  std::uint64_t seed = 1;
  std::size_t threads = 0;
  std::string out = "-";
  Format format = Format::csv;

  // sample
  std::string svg_prefix;
  std::vector<std::string> stats{"1"};
  std::size_t bins = 50;
  std::string means_out;
  std::string dump_h;
  std::string dump_format = "triplet";

  // validate
  double threshold = 0.01;
  std::int64_t inject_df_shift = 0;

  // bench
  std::vector<std::size_t> grid;
  bool coupled = false;
  std::size_t reps = 3;
  std::vector<std::string> methods{"efficient", "dense"};

  // fit
  std::string target;
  std::vector<double> init;
  std::size_t batch = 2000;
  std::size_t max_iters = 100;
  bool fresh_noise = false;
};

/// Table of per-draw singular values, optional histograms, means and a dump
/// of the first H.
int cmd_sample(const RunConfig& config, std::ostream& out, std::ostream& err);

/// KS comparison of the efficient and dense samplers on the top and bottom
/// nonzero singular values. Returns 0 when every p-value exceeds the
/// threshold and 1 otherwise.
int cmd_validate(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Timing table over a grid of m values for both methods.
int cmd_bench(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Spike fit against a target file of descending mean singular values.
int cmd_fit(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses arguments (without the program name) and dispatches. Maps
/// argument and parameter errors to exit code 2 and numerical failures to 1.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace spw::cli
