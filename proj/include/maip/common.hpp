#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace maip {

/// Tolerance for stored probability rows (FSC rows, dynamics rows, beliefs on load).
inline constexpr double kRowSumTol = 1e-12;
/// Tolerance for derived probability sums (posteriors, observation likelihoods).
inline constexpr double kBeliefSumTol = 1e-9;

/// Structural or numeric validation failure (bad sizes, unnormalized rows, dangling ids).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Lookup of an undeclared node/action/observation/context component.
struct LookupError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

/// Conditioning on an observation (or model transition) of probability zero.
struct ZeroEvidenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A size guard refused to start an enumeration that would not terminate in
/// reasonable time.  The message carries the offending size estimate.
struct GuardError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Accumulates human-readable validation issues instead of throwing on the
/// first problem, so callers can report everything at once.
struct ValidationReport {
  std::vector<std::string> issues;

  bool ok() const { return issues.empty(); }
  void add(std::string issue) { issues.push_back(std::move(issue)); }
  void merge(const ValidationReport& other) {
    issues.insert(issues.end(), other.issues.begin(), other.issues.end());
  }
  std::string to_string() const {
    std::string out;
    for (const auto& s : issues) {
      out += s;
      out += '\n';
    }
    return out;
  }
  /// Throws ValidationError listing every issue if any were recorded.
  void require(const std::string& what) const {
    if (!ok()) throw ValidationError(what + ":\n" + to_string());
  }
};

inline double sum(std::span<const double> xs) {
  double t = 0.0;
  for (double x : xs) t += x;
  return t;
}

inline bool is_distribution(std::span<const double> row, double tol = kRowSumTol) {
  double t = 0.0;
  for (double x : row) {
    if (x < 0.0) return false;
    t += x;
  }
  return t > 1.0 - tol && t < 1.0 + tol;
}

/// splitmix64 step; used to derive per-node RNG streams from (seed, path).
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t mix64(std::uint64_t seed, std::uint64_t salt) {
  return mix64(seed ^ mix64(salt));
}

}  // namespace maip
