#pragma once

// Command-line front end.  `pushd check FILE` runs one problem and prints an
// HWMCC-style status block; `pushd bench DIR` runs every .aag file in a
// directory under several engine configurations in worker processes.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "pushd/aiger.hpp"
#include "pushd/ic3.hpp"

namespace pushd::cli {

inline constexpr int kExitUnknown = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUnsafe = 10;
inline constexpr int kExitSafe = 20;

/// `args` excludes the program name.
int run_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string format_witness(const aiger::Trace& trace, std::size_t property = 0);
std::string format_safe(std::size_t property = 0);
/// One clause per line, signed variable numbers, "0"-terminated.
std::string format_invariant(std::span<const Clause> phi);

std::string stats_json(const ic3::Stats& s);
std::string stats_text(const ic3::Stats& s);

/// A named engine configuration as used by the bench driver.
struct ModeSpec {
  std::string label;  // none, iteration, triggered, triggered+wdm
  ic3::Mode mode = ic3::Mode::triggered;
  bool wdm = false;
};
std::optional<ModeSpec> parse_mode_spec(std::string_view label);
std::vector<ModeSpec> all_mode_specs();

struct BenchOptions {
  std::filesystem::path dir;
  std::vector<ModeSpec> modes = all_mode_specs();
  std::size_t max_frames = 1000;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  double timeout_seconds = 0;  // per run, 0 = none
};

struct BenchRow {
  std::string file;
  std::string mode;
  std::string verdict;  // safe, unsafe, unknown, timeout, error
  double seconds = 0;
  std::uint64_t sat_calls = 0;
  std::size_t frames = 0;
  std::string detail;  // error text or resource-out reason
};

struct BenchModeSummary {
  std::string mode;
  std::size_t solved = 0;
  std::uint64_t sat_calls = 0;
  std::size_t frames = 0;
};

struct BenchTable {
  std::vector<BenchRow> rows;  // sorted by file, then mode order
  std::vector<BenchModeSummary> summary;
  std::vector<std::string> inconsistent;  // files with both safe and unsafe verdicts
};

BenchTable run_bench(const BenchOptions& opts);
std::string bench_json(const BenchTable& t);
std::string bench_text(const BenchTable& t);

}  // namespace pushd::cli
