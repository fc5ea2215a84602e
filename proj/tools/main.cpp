#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "maip/bench.hpp"
#include "maip/common.hpp"
#include "maip/domain_io.hpp"
#include "maip/protest.hpp"

namespace {

std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw maip::ValidationError(what + ": '" + item + "' is not an integer");
    }
  }
  if (out.empty()) throw maip::ValidationError(what + ": empty list");
  return out;
}

/// Sweep grids look like "2,3,4,5x2,3": population sizes, then horizons.
void parse_sweep(const std::string& text, std::vector<int>& ns,
                 std::vector<int>& hs) {
  const auto split = text.find('x');
  if (split == std::string::npos)
    throw maip::ValidationError(
        "--sweep expects 'N1,N2,...xH1,H2,...' (missing 'x')");
  ns = parse_int_list(text.substr(0, split), "--sweep population sizes");
  hs = parse_int_list(text.substr(split + 1), "--sweep horizons");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Anonymity-factored planner for settings with many modeled agents: "
      "solves generated policing benchmarks or domain JSON files and reports "
      "results as CSV."};

  std::string domain_path, out_path, emit_path, plot_path, policy_path;
  std::string mode_str = "exact", sweep;
  int protest_n = 2, horizon = 2, samples = 0;
  double gamma = 0.9, prune = 0.0, frame_mix = 0.5;
  std::uint64_t seed = 0;
  bool reactive = false, parallel = false;

  app.add_option("--domain", domain_path,
                 "Solve this domain JSON file instead of a generated benchmark");
  app.add_option("--protest-n", protest_n, "Benchmark population size")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--horizon", horizon, "Planning horizon")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--gamma", gamma, "Discount factor")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--samples", samples,
                 "Observation samples per action (0 expands exactly)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--seed", seed, "Sampling seed");
  app.add_option("--mode", mode_str, "Solver engine(s) to run")
      ->check(CLI::IsMember({"exact", "naive", "both"}));
  app.add_option("--sweep", sweep,
                 "Grid 'N1,N2,...xH1,H2,...' of population sizes and horizons");
  app.add_option("--out", out_path, "Also write the CSV to this file");
  app.add_option("--emit-domain", emit_path,
                 "Write the generated benchmark domain JSON here and exit");
  app.add_option("--plot-data", plot_path,
                 "Write 'n seconds' scaling data to this file");
  app.add_option("--prune", prune,
                 "Drop configuration-distribution mass below this threshold")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--policy-out", policy_path,
                 "Write the computed policy (first non-naive run) here");
  app.add_flag("--protest-reactive", reactive,
               "Give benchmark protestors flag-reactive two-node controllers");
  app.add_option("--frame-mix", frame_mix,
                 "Fraction of the benchmark population that is peaceful")
      ->check(CLI::Range(0.0, 1.0));
  app.add_flag("--parallel", parallel, "Run grid cells concurrently");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!emit_path.empty()) {
      if (domain_path.empty()) {
        maip::ProtestParams params;
        params.n = protest_n;
        params.reactive = reactive;
        params.frame_mix = frame_mix;
        maip::save_domain(maip::build_protest_domain(params), emit_path);
      } else {
        maip::save_domain(maip::load_domain(domain_path), emit_path);
      }
      std::cout << "wrote " << emit_path << "\n";
      return 0;
    }

    maip::ExperimentSpec spec;
    spec.mode = mode_str == "naive"  ? maip::ExperimentSpec::Mode::Naive
                : mode_str == "both" ? maip::ExperimentSpec::Mode::Both
                                     : maip::ExperimentSpec::Mode::Exact;
    spec.gamma = gamma;
    spec.samples = samples;
    spec.seed = seed;
    spec.prune_eps = prune;
    spec.reactive = reactive;
    spec.frame_mix = frame_mix;
    spec.domain_path = domain_path;
    spec.parallel = parallel;
    if (!sweep.empty())
      parse_sweep(sweep, spec.ns, spec.horizons);
    else {
      spec.ns = {protest_n};
      spec.horizons = {horizon};
    }

    const auto rows = maip::run_experiments(spec);
    for (const auto& row : rows)
      if (row.refused)
        std::cerr << "refused: n=" << row.n << " h=" << row.h << " mode=naive: "
                  << row.note << "\n";

    std::cout << maip::results_csv(rows);
    if (!out_path.empty()) maip::write_csv(rows, out_path);
    if (!plot_path.empty()) maip::write_plot_data(rows, plot_path);
    if (!policy_path.empty()) {
      const maip::ResultRow* chosen = nullptr;
      for (const auto& row : rows)
        if (!row.refused && row.mode != "naive") {
          chosen = &row;
          break;
        }
      if (chosen == nullptr)
        for (const auto& row : rows)
          if (!row.refused) {
            chosen = &row;
            break;
          }
      if (chosen == nullptr)
        throw maip::ValidationError("no completed run to take a policy from");
      std::ofstream out(policy_path);
      if (!out)
        throw maip::ValidationError("cannot open " + policy_path +
                                    " for writing");
      out << chosen->policy_text;
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
