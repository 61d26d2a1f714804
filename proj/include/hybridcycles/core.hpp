#pragma once

// Shared scalar/vector helpers, error types, and the env-controlled logger.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

namespace hybridcycles {

/// Dense state vector in model units.
using State = std::vector<double>;

/// An iterative routine failed to converge, a trajectory blew up, or a
/// requested solution does not exist within the given budget.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Sampled checks contradict a structural assumption of the model
/// (degenerate guard gradient, Zeno-like accumulation, off-grid snap, ...).
class HypothesisError : public std::runtime_error {
 public:
  explicit HypothesisError(const std::string& msg) : std::runtime_error(msg) {}
};

inline double dot(const State& a, const State& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const State& a) { return std::sqrt(dot(a, a)); }

inline double dist(const State& a, const State& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dist: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline bool all_finite(const State& a) {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

/// z-component of the planar cross product a x b.
inline double cross_z(const State& a, const State& b) {
  if (a.size() != 2 || b.size() != 2)
    throw std::invalid_argument("cross_z: planar vectors required");
  return a[0] * b[1] - a[1] * b[0];
}

/// Determinant of a small dense matrix given as columns, by LU with
/// partial pivoting. Sizes stay tiny (state dimension), so no BLAS.
inline double det_columns(std::vector<State> cols) {
  const std::size_t n = cols.size();
  for (const State& c : cols)
    if (c.size() != n) throw std::invalid_argument("det_columns: not square");
  double det = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t j = k + 1; j < n; ++j)
      if (std::fabs(cols[j][k]) > std::fabs(cols[piv][k])) piv = j;
    if (piv != k) {
      std::swap(cols[piv], cols[k]);
      det = -det;
    }
    const double p = cols[k][k];
    if (p == 0.0) return 0.0;
    det *= p;
    for (std::size_t j = k + 1; j < n; ++j) {
      const double m = cols[j][k] / p;
      for (std::size_t i = k; i < n; ++i) cols[j][i] -= m * cols[k][i];
    }
  }
  return det;
}

enum class LogLevel { off = 0, error = 1, warn = 2, info = 3, debug = 4 };

/// Level parsed once from HYBRID_CYCLES_LOG (off|error|warn|info|debug).
inline LogLevel log_level() {
  static const LogLevel lvl = [] {
    const char* env = std::getenv("HYBRID_CYCLES_LOG");
    if (!env) return LogLevel::warn;
    const std::string v(env);
    if (v == "off") return LogLevel::off;
    if (v == "error") return LogLevel::error;
    if (v == "warn") return LogLevel::warn;
    if (v == "info") return LogLevel::info;
    if (v == "debug") return LogLevel::debug;
    return LogLevel::warn;
  }();
  return lvl;
}

inline void log_msg(LogLevel lvl, const std::string& msg) {
  static const char* names[] = {"off", "error", "warn", "info", "debug"};
  if (static_cast<int>(lvl) <= static_cast<int>(log_level()) &&
      lvl != LogLevel::off)
    std::fprintf(stderr, "[hybridcycles:%s] %s\n",
                 names[static_cast<int>(lvl)], msg.c_str());
}

inline void log_warn(const std::string& msg) { log_msg(LogLevel::warn, msg); }
inline void log_info(const std::string& msg) { log_msg(LogLevel::info, msg); }

}  // namespace hybridcycles
