#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace maip {

/// A batch of solver runs over a grid of population sizes and horizons,
/// either on generated policing benchmarks or on one loaded domain file.
struct ExperimentSpec {
  enum class Mode { Exact, Naive, Both };

  std::vector<int> ns = {2};        // benchmark population sizes
  std::vector<int> horizons = {2};
  Mode mode = Mode::Exact;
  double gamma = 0.9;
  int samples = 0;  // > 0 samples observation branches; 0 expands exactly
  std::uint64_t seed = 0;
  double prune_eps = 0.0;
  long long naive_guard = 1'000'000;

  // Benchmark-generation knobs (ignored when domain_path is set).
  bool reactive = false;
  double frame_mix = 0.5;

  std::string domain_path;  // solve this domain instead of generated ones
  bool parallel = false;    // run grid cells concurrently
};

/// One solver run.  `refused` marks naive runs declined by the enumeration
/// guard; they carry a note and are omitted from CSV output.
struct ResultRow {
  int n = 0;
  int h = 0;
  std::string mode;  // "exact", "sampled", or "naive"
  double seconds = 0.0;
  double value = 0.0;
  long long nodes = 0;
  std::size_t trie_peak = 0;
  bool has_delta = false;
  double delta = 0.0;  // |exact - naive| when both engines ran the cell
  bool refused = false;
  std::string note;
  std::string policy_text;
};

/// Runs the full grid; rows are ordered by (n, horizon, engine) regardless of
/// parallelism.  Naive-guard refusals become `refused` rows instead of errors.
std::vector<ResultRow> run_experiments(const ExperimentSpec& spec);

/// CSV with header n,h,mode,seconds,value,nodes,trie_peak and an extra
/// `delta` column when any row carries one.  Refused rows are skipped.
std::string results_csv(std::span<const ResultRow> rows);
void write_csv(std::span<const ResultRow> rows, const std::string& path);

/// Two-column "n seconds" listing of the non-naive rows, for scaling plots.
std::string plot_data(std::span<const ResultRow> rows);
void write_plot_data(std::span<const ResultRow> rows, const std::string& path);

}  // namespace maip
