// Part of fairwell, a library for robust fair welfare and malfare objectives.
// MIT licensed; see LICENSE in the repository root.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace fairwell {

using Vec = std::vector<double>;
using Mat = std::vector<std::vector<double>>;

/// Domain errors: inputs outside an operation's mathematical domain
/// (dimension mismatch, negative sentiment, off-simplex weights, ...).
class domain_error : public std::invalid_argument {
 public:
  explicit domain_error(const std::string& what) : std::invalid_argument(what) {}
};

/// An iterative method failed to reach its tolerance within its iteration cap.
class convergence_error : public std::runtime_error {
 public:
  explicit convergence_error(const std::string& what) : std::runtime_error(what) {}
};

enum class Sense { Utility, Disutility };

/// Per-group utility or disutility values.
struct SentimentVector {
  Vec values;
  Sense sense = Sense::Utility;

  std::size_t size() const { return values.size(); }
};

/// A point intended to lie on the probability simplex.
using WeightVector = Vec;

// Fixed tolerances for simplex membership; documented so error behavior is
// reproducible across platforms.
inline constexpr double kSimplexSumTol = 1e-9;
inline constexpr double kSimplexEntryTol = -1e-12;

inline bool on_simplex(const WeightVector& w,
                       double sum_tol = kSimplexSumTol,
                       double entry_tol = kSimplexEntryTol) {
  if (w.empty()) return false;
  double sum = 0.0;
  for (double x : w) {
    if (!std::isfinite(x) || x < entry_tol) return false;
    sum += x;
  }
  return std::abs(sum - 1.0) <= sum_tol;
}

inline void require_simplex(const WeightVector& w, const char* who) {
  if (!on_simplex(w)) throw domain_error(std::string(who) + ": weight vector off the simplex");
}

inline void require_same_size(std::size_t a, std::size_t b, const char* who) {
  if (a != b) throw domain_error(std::string(who) + ": dimension mismatch");
}

inline void require_nonnegative(const Vec& s, const char* who) {
  for (double x : s) {
    if (!std::isfinite(x)) throw domain_error(std::string(who) + ": non-finite sentiment");
    if (x < 0.0) throw domain_error(std::string(who) + ": negative sentiment");
  }
}

/// Exponent of the power-mean family as a tagged extended real, so that
/// the infinite cases never enter floating arithmetic.
struct Power {
  enum class Kind { NegInf, Finite, PosInf };
  Kind kind = Kind::Finite;
  double value = 1.0;  // meaningful only when kind == Finite

  static Power neg_inf() { return {Kind::NegInf, 0.0}; }
  static Power pos_inf() { return {Kind::PosInf, 0.0}; }
  static Power finite(double p) {
    if (!std::isfinite(p)) throw domain_error("Power: finite exponent required");
    return {Kind::Finite, p};
  }

  bool is_finite() const { return kind == Kind::Finite; }
  bool is_neg_inf() const { return kind == Kind::NegInf; }
  bool is_pos_inf() const { return kind == Kind::PosInf; }

  // Total order NegInf < finite < PosInf; used for welfare/malfare validity.
  bool leq(double q) const { return kind == Kind::NegInf || (is_finite() && value <= q); }
  bool geq(double q) const { return kind == Kind::PosInf || (is_finite() && value >= q); }

  friend bool operator==(const Power& a, const Power& b) {
    if (a.kind != b.kind) return false;
    return a.kind != Kind::Finite || a.value == b.value;
  }
};

/// Indices of s sorted by value; stable, so ties keep original index order.
inline std::vector<std::size_t> sorted_indices(const Vec& s, bool ascending) {
  std::vector<std::size_t> idx(s.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return ascending ? s[a] < s[b] : s[a] > s[b];
  });
  return idx;
}

/// First index attaining the minimum (lowest index on ties).
inline std::size_t argmin_index(const Vec& s) {
  return static_cast<std::size_t>(std::min_element(s.begin(), s.end()) - s.begin());
}

/// First index attaining the maximum (lowest index on ties).
inline std::size_t argmax_index(const Vec& s) {
  return static_cast<std::size_t>(std::max_element(s.begin(), s.end()) - s.begin());
}

inline double dot(const Vec& a, const Vec& b) {
  double r = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) r += a[i] * b[i];
  return r;
}

inline double range_of(const Vec& s) {
  if (s.empty()) return 0.0;
  auto [lo, hi] = std::minmax_element(s.begin(), s.end());
  return *hi - *lo;
}

inline double norm_l1(const Vec& a) {
  double r = 0.0;
  for (double x : a) r += std::abs(x);
  return r;
}

inline double norm_l2(const Vec& a) {
  double r = 0.0;
  for (double x : a) r += x * x;
  return std::sqrt(r);
}

inline double norm_linf(const Vec& a) {
  double r = 0.0;
  for (double x : a) r = std::max(r, std::abs(x));
  return r;
}

inline Vec sub(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

/// Euclidean projection onto the scaled simplex {w >= 0, sum w = total} by
/// the sort-then-threshold method; exact up to floating rounding.
inline WeightVector project_scaled_simplex(const Vec& v, double total) {
  const std::size_t g = v.size();
  if (g == 0) throw domain_error("project_simplex: empty vector");
  for (double x : v) {
    if (!std::isfinite(x)) throw domain_error("project_simplex: non-finite entry");
  }
  Vec u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double tau = 0.0;
  std::size_t rho = 0;
  for (std::size_t j = 0; j < g; ++j) {
    cumulative += u[j];
    const double candidate = (cumulative - total) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0.0) {
      rho = j + 1;
      tau = candidate;
    }
  }
  (void)rho;
  WeightVector w(g);
  for (std::size_t i = 0; i < g; ++i) w[i] = std::max(0.0, v[i] - tau);
  return w;
}

/// Euclidean projection onto the probability simplex.
inline WeightVector project_simplex(const Vec& v) { return project_scaled_simplex(v, 1.0); }

}  // namespace fairwell
