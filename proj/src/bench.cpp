#include "maip/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <optional>

#include "maip/belief.hpp"
#include "maip/domain_io.hpp"
#include "maip/planner.hpp"
#include "maip/protest.hpp"

namespace maip {

namespace {

struct Cell {
  int n = 0;
  int h = 0;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

std::vector<ResultRow> run_cell(const ExperimentSpec& spec,
                                const Domain* loaded, Cell cell) {
  Domain generated;
  const Domain* dom = loaded;
  if (dom == nullptr) {
    ProtestParams params;
    params.n = cell.n;
    params.reactive = spec.reactive;
    params.frame_mix = spec.frame_mix;
    generated = build_protest_domain(params);
    dom = &generated;
  }
  const FactoredBelief b0 = make_initial_belief(*dom);

  SolveOptions opt;
  opt.horizon = cell.h;
  opt.gamma = spec.gamma;
  opt.samples = std::max(1, spec.samples);
  opt.seed = spec.seed;
  opt.naive_guard = spec.naive_guard;
  opt.prune_eps = spec.prune_eps;

  std::vector<ResultRow> rows;
  const bool sampled = spec.samples > 0;

  if (spec.mode != ExperimentSpec::Mode::Naive) {
    const auto start = std::chrono::steady_clock::now();
    SolveResult r =
        sampled ? solve_sampled(b0, *dom, opt) : solve_exact(b0, *dom, opt);
    ResultRow row;
    row.n = dom->pop.n;
    row.h = cell.h;
    row.mode = sampled ? "sampled" : "exact";
    row.seconds = seconds_since(start);
    row.value = r.value;
    row.nodes = r.nodes_expanded;
    row.trie_peak = r.trie_peak;
    row.policy_text = r.policy.to_text(*dom);
    rows.push_back(std::move(row));
  }

  if (spec.mode != ExperimentSpec::Mode::Exact) {
    ResultRow row;
    row.n = dom->pop.n;
    row.h = cell.h;
    row.mode = "naive";
    try {
      const auto start = std::chrono::steady_clock::now();
      SolveResult r = naive_solve(b0, *dom, opt);
      row.seconds = seconds_since(start);
      row.value = r.value;
      row.nodes = r.nodes_expanded;
      row.trie_peak = r.trie_peak;
      row.policy_text = r.policy.to_text(*dom);
    } catch (const GuardError& e) {
      row.refused = true;
      row.note = e.what();
    }
    rows.push_back(std::move(row));
  }

  if (spec.mode == ExperimentSpec::Mode::Both && rows.size() == 2 &&
      !rows[1].refused) {
    const double delta = std::abs(rows[0].value - rows[1].value);
    for (ResultRow& r : rows) {
      r.has_delta = true;
      r.delta = delta;
    }
  }
  return rows;
}

}  // namespace

std::vector<ResultRow> run_experiments(const ExperimentSpec& spec) {
  if (spec.horizons.empty())
    throw ValidationError("experiment spec has no horizons");
  if (spec.domain_path.empty() && spec.ns.empty())
    throw ValidationError("experiment spec has no population sizes");

  std::optional<Domain> loaded;
  if (!spec.domain_path.empty()) loaded = load_domain(spec.domain_path);
  const Domain* base = loaded ? &*loaded : nullptr;

  std::vector<Cell> cells;
  if (base != nullptr) {
    for (int h : spec.horizons) cells.push_back({base->pop.n, h});
  } else {
    for (int n : spec.ns)
      for (int h : spec.horizons) cells.push_back({n, h});
  }

  std::vector<std::vector<ResultRow>> per_cell(cells.size());
  if (spec.parallel && cells.size() > 1) {
    std::vector<std::future<std::vector<ResultRow>>> futures;
    futures.reserve(cells.size());
    for (const Cell& c : cells)
      futures.push_back(std::async(std::launch::async, run_cell, std::cref(spec),
                                   base, c));
    for (size_t i = 0; i < futures.size(); ++i) per_cell[i] = futures[i].get();
  } else {
    for (size_t i = 0; i < cells.size(); ++i)
      per_cell[i] = run_cell(spec, base, cells[i]);
  }

  std::vector<ResultRow> rows;
  for (auto& group : per_cell)
    for (ResultRow& r : group) rows.push_back(std::move(r));
  return rows;
}

std::string results_csv(std::span<const ResultRow> rows) {
  bool any_delta = false;
  for (const ResultRow& r : rows) any_delta = any_delta || r.has_delta;

  std::string out = "n,h,mode,seconds,value,nodes,trie_peak";
  if (any_delta) out += ",delta";
  out += '\n';

  char buf[320];
  for (const ResultRow& r : rows) {
    if (r.refused) continue;
    std::snprintf(buf, sizeof buf, "%d,%d,%s,%.6f,%.17g,%lld,%zu", r.n, r.h,
                  r.mode.c_str(), r.seconds, r.value, r.nodes, r.trie_peak);
    out += buf;
    if (any_delta) {
      if (r.has_delta) {
        std::snprintf(buf, sizeof buf, ",%.17g", r.delta);
        out += buf;
      } else {
        out += ',';
      }
    }
    out += '\n';
  }
  return out;
}

void write_csv(std::span<const ResultRow> rows, const std::string& path) {
  std::ofstream file(path);
  if (!file) throw ValidationError("cannot open " + path + " for writing");
  file << results_csv(rows);
  if (!file) throw ValidationError("failed writing " + path);
}

std::string plot_data(std::span<const ResultRow> rows) {
  std::string out = "# n seconds\n";
  char buf[96];
  for (const ResultRow& r : rows) {
    if (r.refused || r.mode == "naive") continue;
    std::snprintf(buf, sizeof buf, "%d %.6f\n", r.n, r.seconds);
    out += buf;
  }
  return out;
}

void write_plot_data(std::span<const ResultRow> rows, const std::string& path) {
  std::ofstream file(path);
  if (!file) throw ValidationError("cannot open " + path + " for writing");
  file << plot_data(rows);
  if (!file) throw ValidationError("failed writing " + path);
}

}  // namespace maip
