// Part of fairwell, a library for robust fair welfare and malfare objectives.
// MIT licensed; see LICENSE in the repository root.
//
// Divisible-good allocation instances over g agents and k goods with
// capacity constraints: utility models, closed-form inversions between
// utility space and allocation space, reachable-utility descriptions, and a
// maximin solve built on the robust objective machinery.

#pragma once

#include <optional>

#include "fairwell/solvers.hpp"

namespace fairwell {

struct LinearSingle {
  Vec p;  // per-agent rates, one good
};

struct SqrtSingle {
  Vec p;
};

struct LinearMulti {
  Mat P;  // g x k rates
};

/// Saturating log utility: S_i = ln(1 + sum_j P_ij * min(C_ij, theta_ij)).
/// An absent cap entry means the good never saturates for that agent.
struct LogSaturating {
  Mat P;
  std::vector<std::vector<std::optional<double>>> C;
};

using UtilityModel = std::variant<LinearSingle, SqrtSingle, LinearMulti, LogSaturating>;

/// Linear condition on the flattened (row-major) allocation matrix.
struct ThetaConstraint {
  Vec coeffs;  // length g*k
  double bound = 0.0;
  bool equality = false;
};

struct AllocationInstance {
  std::size_t g = 0;
  std::size_t k = 0;
  Vec capacities;  // per good, > 0
  UtilityModel model;
  std::vector<ThetaConstraint> extra;  // LinearMulti only
  std::optional<Mat> feasible_point;   // declared when the zero allocation violates extra
};

struct Allocation {
  Mat theta;  // g x k, nonnegative
};

namespace detail {

inline Vec flatten(const Mat& m) {
  Vec out;
  for (const auto& row : m) out.insert(out.end(), row.begin(), row.end());
  return out;
}

inline Mat unflatten(const Vec& v, std::size_t g, std::size_t k) {
  Mat m(g, Vec(k, 0.0));
  for (std::size_t i = 0; i < g; ++i) {
    for (std::size_t j = 0; j < k; ++j) m[i][j] = v[i * k + j];
  }
  return m;
}

inline void check_rates(const Vec& p, std::size_t g) {
  if (p.size() != g) throw domain_error("allocation: rate vector size mismatch");
  for (double x : p) {
    if (!std::isfinite(x) || x < 0.0) throw domain_error("allocation: rates must be >= 0");
  }
}

inline void check_rate_matrix(const Mat& P, std::size_t g, std::size_t k) {
  if (P.size() != g) throw domain_error("allocation: rate matrix row count mismatch");
  for (const auto& row : P) {
    if (row.size() != k) throw domain_error("allocation: rate matrix column count mismatch");
    for (double x : row) {
      if (!std::isfinite(x) || x < 0.0) throw domain_error("allocation: rates must be >= 0");
    }
  }
}

}  // namespace detail

inline bool allocation_feasible(const AllocationInstance& inst, const Mat& theta,
                                double tol = 1e-9) {
  if (theta.size() != inst.g) return false;
  for (const auto& row : theta) {
    if (row.size() != inst.k) return false;
    for (double x : row) {
      if (!std::isfinite(x) || x < -tol) return false;
    }
  }
  for (std::size_t j = 0; j < inst.k; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < inst.g; ++i) sum += theta[i][j];
    if (sum > inst.capacities[j] + tol) return false;
  }
  const Vec flat = detail::flatten(theta);
  for (const auto& c : inst.extra) {
    const double v = dot(c.coeffs, flat);
    if (c.equality ? std::abs(v - c.bound) > tol : v > c.bound + tol) return false;
  }
  return true;
}

inline void validate_instance(const AllocationInstance& inst) {
  if (inst.g == 0 || inst.k == 0) throw domain_error("allocation: empty instance");
  if (inst.capacities.size() != inst.k) {
    throw domain_error("allocation: capacity count must match goods");
  }
  for (double c : inst.capacities) {
    if (!std::isfinite(c) || c <= 0.0) throw domain_error("allocation: capacities must be > 0");
  }
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearSingle> || std::is_same_v<T, SqrtSingle>) {
          if (inst.k != 1) throw domain_error("allocation: single-good model requires k = 1");
          detail::check_rates(m.p, inst.g);
        } else if constexpr (std::is_same_v<T, LinearMulti>) {
          detail::check_rate_matrix(m.P, inst.g, inst.k);
        } else {
          detail::check_rate_matrix(m.P, inst.g, inst.k);
          if (m.C.size() != inst.g) throw domain_error("allocation: cap matrix size mismatch");
          for (const auto& row : m.C) {
            if (row.size() != inst.k) throw domain_error("allocation: cap matrix size mismatch");
            for (const auto& c : row) {
              if (c && (!std::isfinite(*c) || *c < 0.0)) {
                throw domain_error("allocation: unit caps must be >= 0");
              }
            }
          }
        }
      },
      inst.model);
  if (!inst.extra.empty() && !std::holds_alternative<LinearMulti>(inst.model)) {
    throw domain_error("allocation: extra constraints are only supported with LinearMulti");
  }
  for (const auto& c : inst.extra) {
    if (c.coeffs.size() != inst.g * inst.k) {
      throw domain_error("allocation: constraint coefficient size mismatch");
    }
  }
  const Mat zero(inst.g, Vec(inst.k, 0.0));
  if (!allocation_feasible(inst, inst.feasible_point ? *inst.feasible_point : zero)) {
    throw domain_error("allocation: no feasible starting point (declare one explicitly)");
  }
}

/// Evaluates the instance's utility model at a feasible allocation.
inline SentimentVector utilities(const AllocationInstance& inst, const Allocation& alloc) {
  if (!allocation_feasible(inst, alloc.theta, 1e-7)) {
    throw domain_error("utilities: infeasible allocation");
  }
  Vec s(inst.g, 0.0);
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearSingle>) {
          for (std::size_t i = 0; i < inst.g; ++i) s[i] = alloc.theta[i][0] * m.p[i];
        } else if constexpr (std::is_same_v<T, SqrtSingle>) {
          for (std::size_t i = 0; i < inst.g; ++i) {
            s[i] = (std::sqrt(1.0 + 2.0 * alloc.theta[i][0]) - 1.0) * m.p[i];
          }
        } else if constexpr (std::is_same_v<T, LinearMulti>) {
          for (std::size_t i = 0; i < inst.g; ++i) {
            for (std::size_t j = 0; j < inst.k; ++j) s[i] += m.P[i][j] * alloc.theta[i][j];
          }
        } else {
          for (std::size_t i = 0; i < inst.g; ++i) {
            double inner = 0.0;
            for (std::size_t j = 0; j < inst.k; ++j) {
              const double used = m.C[i][j] ? std::min(*m.C[i][j], alloc.theta[i][j])
                                            : alloc.theta[i][j];
              inner += m.P[i][j] * used;
            }
            s[i] = std::log1p(inner);
          }
        }
      },
      inst.model);
  return {std::move(s), Sense::Utility};
}

/// theta_i = S_i / p_i for the one-good linear model.
inline Allocation invert_single_linear(const AllocationInstance& inst,
                                       const SentimentVector& s) {
  const auto* m = std::get_if<LinearSingle>(&inst.model);
  if (m == nullptr || inst.k != 1) {
    throw domain_error("invert_single_linear: requires the one-good linear model");
  }
  require_same_size(inst.g, s.size(), "invert_single_linear");
  Mat theta(inst.g, Vec(1, 0.0));
  double total = 0.0;
  for (std::size_t i = 0; i < inst.g; ++i) {
    if (s.values[i] < 0.0) throw domain_error("invert_single_linear: negative utility target");
    if (s.values[i] == 0.0) continue;
    if (m->p[i] <= 0.0) {
      throw domain_error("invert_single_linear: zero rate with positive target");
    }
    theta[i][0] = s.values[i] / m->p[i];
    total += theta[i][0];
  }
  if (total > inst.capacities[0] + 1e-9) {
    throw domain_error("invert_single_linear: capacity exceeded");
  }
  return {std::move(theta)};
}

/// theta_i = S_i / p_i + S_i^2 / (2 p_i^2) for the one-good sqrt model.
inline Allocation invert_single_sqrt(const AllocationInstance& inst, const SentimentVector& s) {
  const auto* m = std::get_if<SqrtSingle>(&inst.model);
  if (m == nullptr || inst.k != 1) {
    throw domain_error("invert_single_sqrt: requires the one-good sqrt model");
  }
  require_same_size(inst.g, s.size(), "invert_single_sqrt");
  Mat theta(inst.g, Vec(1, 0.0));
  double total = 0.0;
  for (std::size_t i = 0; i < inst.g; ++i) {
    if (s.values[i] < 0.0) throw domain_error("invert_single_sqrt: negative utility target");
    if (s.values[i] == 0.0) continue;
    if (m->p[i] <= 0.0) {
      throw domain_error("invert_single_sqrt: zero rate with positive target");
    }
    const double r = s.values[i] / m->p[i];
    theta[i][0] = r + 0.5 * r * r;
    total += theta[i][0];
  }
  if (total > inst.capacities[0] + 1e-9) {
    throw domain_error("invert_single_sqrt: capacity exceeded");
  }
  return {std::move(theta)};
}

/// Reachable-utility descriptions: sum_i S_i / p_i <= c for the linear
/// model, the quadratic inversion sum for the sqrt model, and the vertex
/// image of the allocation polytope for the multi-good linear model.
struct UtilityHalfspace {
  Vec inverse_rates;  // coefficient of S_i
  double capacity = 0.0;
};

struct UtilityEllipsoid {
  Vec rates;
  double capacity = 0.0;

  double lhs(const Vec& s) const {
    double total = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double r = s[i] / rates[i];
      total += r + 0.5 * r * r;
    }
    return total;
  }
};

struct UtilityPolytope {
  std::vector<Vec> vertices;
};

using UtilitySetBounds = std::variant<UtilityHalfspace, UtilityEllipsoid, UtilityPolytope>;

namespace detail {

// Solves a small dense linear system in place; returns false when singular.
inline bool solve_dense(Mat a, Vec b, Vec& out) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) < 1e-11) return false;
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (std::size_t c2 = col; c2 < n; ++c2) a[r][c2] -= f * a[col][c2];
      b[r] -= f * b[col];
    }
  }
  out.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) out[i] = b[i] / a[i][i];
  return true;
}

// Enumerates vertices of the allocation polytope (nonnegativity, column
// capacities, extra constraints) by active-set combinations; dimension
// capped so the combinatorics stay small.
inline std::vector<Vec> allocation_polytope_vertices(const AllocationInstance& inst) {
  const std::size_t d = inst.g * inst.k;
  if (d > 8) {
    throw domain_error("feasible_utility_set_bounds: vertex enumeration capped at g*k <= 8");
  }
  struct Row {
    Vec a;
    double b;
  };
  std::vector<Row> required;  // equalities, always active
  std::vector<Row> optional;  // boundaries of inequalities
  for (const auto& c : inst.extra) {
    (c.equality ? required : optional).push_back({c.coeffs, c.bound});
  }
  for (std::size_t i = 0; i < inst.g; ++i) {
    for (std::size_t j = 0; j < inst.k; ++j) {
      Vec a(d, 0.0);
      a[i * inst.k + j] = 1.0;
      optional.push_back({a, 0.0});
    }
  }
  for (std::size_t j = 0; j < inst.k; ++j) {
    Vec a(d, 0.0);
    for (std::size_t i = 0; i < inst.g; ++i) a[i * inst.k + j] = 1.0;
    optional.push_back({a, inst.capacities[j]});
  }
  if (required.size() > d) return {};
  const std::size_t need = d - required.size();

  std::vector<Vec> vertices;
  std::vector<std::size_t> pick(need);
  const std::function<void(std::size_t, std::size_t)> choose = [&](std::size_t start,
                                                                   std::size_t depth) {
    if (depth == need) {
      Mat a;
      Vec b;
      for (const auto& r : required) {
        a.push_back(r.a);
        b.push_back(r.b);
      }
      for (std::size_t idx : pick) {
        a.push_back(optional[idx].a);
        b.push_back(optional[idx].b);
      }
      Vec x;
      if (!solve_dense(std::move(a), std::move(b), x)) return;
      for (double& v : x) {
        if (v < 0.0 && v > -1e-9) v = 0.0;
      }
      if (!allocation_feasible(inst, unflatten(x, inst.g, inst.k), 1e-9)) return;
      for (const auto& known : vertices) {
        double diff = 0.0;
        for (std::size_t i = 0; i < d; ++i) diff = std::max(diff, std::abs(known[i] - x[i]));
        if (diff <= 1e-9) return;
      }
      vertices.push_back(std::move(x));
      return;
    }
    for (std::size_t i = start; i < optional.size(); ++i) {
      pick[depth] = i;
      choose(i + 1, depth + 1);
    }
  };
  choose(0, 0);
  return vertices;
}

}  // namespace detail

inline UtilitySetBounds feasible_utility_set_bounds(const AllocationInstance& inst) {
  validate_instance(inst);
  if (const auto* lin = std::get_if<LinearSingle>(&inst.model)) {
    Vec inv(inst.g, 0.0);
    for (std::size_t i = 0; i < inst.g; ++i) {
      if (lin->p[i] <= 0.0) {
        throw domain_error("feasible_utility_set_bounds: zero rate has no utility range");
      }
      inv[i] = 1.0 / lin->p[i];
    }
    return UtilityHalfspace{std::move(inv), inst.capacities[0]};
  }
  if (const auto* sq = std::get_if<SqrtSingle>(&inst.model)) {
    for (double p : sq->p) {
      if (p <= 0.0) {
        throw domain_error("feasible_utility_set_bounds: zero rate has no utility range");
      }
    }
    return UtilityEllipsoid{sq->p, inst.capacities[0]};
  }
  if (std::holds_alternative<LinearMulti>(inst.model)) {
    std::vector<Vec> image;
    for (const auto& v : detail::allocation_polytope_vertices(inst)) {
      Vec s = utilities(inst, {detail::unflatten(v, inst.g, inst.k)}).values;
      bool dup = false;
      for (const auto& known : image) {
        double diff = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) {
          diff = std::max(diff, std::abs(known[i] - s[i]));
        }
        if (diff <= 1e-9) {
          dup = true;
          break;
        }
      }
      if (!dup) image.push_back(std::move(s));
    }
    return UtilityPolytope{std::move(image)};
  }
  throw domain_error("feasible_utility_set_bounds: unsupported utility model");
}

/// Differentiable view of the instance for the maximin solver. The
/// saturating model takes the left-limit subgradient at its kinks.
inline SentimentMap sentiment_map(const AllocationInstance& inst) {
  SentimentMap map;
  map.g = inst.g;
  map.theta_dim = inst.g * inst.k;
  map.eval = [inst](const Vec& flat) {
    return utilities(inst, {detail::unflatten(flat, inst.g, inst.k)}).values;
  };
  map.jacobian = [inst](const Vec& flat) {
    Mat jac(inst.g, Vec(inst.g * inst.k, 0.0));
    std::visit(
        [&](const auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, LinearSingle>) {
            for (std::size_t i = 0; i < inst.g; ++i) jac[i][i] = m.p[i];
          } else if constexpr (std::is_same_v<T, SqrtSingle>) {
            for (std::size_t i = 0; i < inst.g; ++i) {
              jac[i][i] = m.p[i] / std::sqrt(1.0 + 2.0 * std::max(0.0, flat[i]));
            }
          } else if constexpr (std::is_same_v<T, LinearMulti>) {
            for (std::size_t i = 0; i < inst.g; ++i) {
              for (std::size_t j = 0; j < inst.k; ++j) jac[i][i * inst.k + j] = m.P[i][j];
            }
          } else {
            for (std::size_t i = 0; i < inst.g; ++i) {
              double inner = 0.0;
              for (std::size_t j = 0; j < inst.k; ++j) {
                const double t = std::max(0.0, flat[i * inst.k + j]);
                inner += m.P[i][j] * (m.C[i][j] ? std::min(*m.C[i][j], t) : t);
              }
              for (std::size_t j = 0; j < inst.k; ++j) {
                const double t = std::max(0.0, flat[i * inst.k + j]);
                const bool active = !m.C[i][j] || t <= *m.C[i][j];
                jac[i][i * inst.k + j] = active ? m.P[i][j] / (1.0 + inner) : 0.0;
              }
            }
          }
        },
        inst.model);
    return jac;
  };
  return map;
}

inline FeasibleSet feasible_set(const AllocationInstance& inst) {
  FeasibleSet fs;
  const std::size_t d = inst.g * inst.k;
  fs.lo.assign(d, 0.0);
  fs.hi.assign(d, 0.0);
  for (std::size_t i = 0; i < inst.g; ++i) {
    for (std::size_t j = 0; j < inst.k; ++j) fs.hi[i * inst.k + j] = inst.capacities[j];
  }
  for (std::size_t j = 0; j < inst.k; ++j) {
    BudgetConstraint b;
    for (std::size_t i = 0; i < inst.g; ++i) b.indices.push_back(i * inst.k + j);
    b.capacity = inst.capacities[j];
    fs.budgets.push_back(std::move(b));
  }
  for (const auto& c : inst.extra) {
    if (c.equality) {
      fs.constraints.push_back({c.coeffs, c.bound});
      Vec neg = c.coeffs;
      for (double& x : neg) x = -x;
      fs.constraints.push_back({std::move(neg), -c.bound});
    } else {
      fs.constraints.push_back({c.coeffs, c.bound});
    }
  }
  return fs;
}

namespace detail {

// Closed-form utility-space optima for the one-good models. Each candidate
// returns a feasible allocation; the caller keeps whichever allocation the
// robust objective scores best.

inline std::optional<Mat> equalized_candidate(const AllocationInstance& inst) {
  const double c = inst.capacities[0];
  if (const auto* lin = std::get_if<LinearSingle>(&inst.model)) {
    double inv = 0.0;
    for (double p : lin->p) {
      if (p <= 0.0) return Mat(inst.g, Vec(1, 0.0));
      inv += 1.0 / p;
    }
    const double tau = c / inv;
    Mat theta(inst.g, Vec(1, 0.0));
    for (std::size_t i = 0; i < inst.g; ++i) theta[i][0] = tau / lin->p[i];
    return theta;
  }
  if (const auto* sq = std::get_if<SqrtSingle>(&inst.model)) {
    double a = 0.0, b = 0.0;
    for (double p : sq->p) {
      if (p <= 0.0) return Mat(inst.g, Vec(1, 0.0));
      a += 0.5 / (p * p);
      b += 1.0 / p;
    }
    const double tau = (-b + std::sqrt(b * b + 4.0 * a * c)) / (2.0 * a);
    Mat theta(inst.g, Vec(1, 0.0));
    for (std::size_t i = 0; i < inst.g; ++i) {
      const double r = tau / sq->p[i];
      theta[i][0] = r + 0.5 * r * r;
    }
    return theta;
  }
  return std::nullopt;
}

// Waterfill for sum_i w_i p_i (sqrt(1 + 2 theta_i) - 1) with optional
// per-agent floors; spends the full budget.
inline Mat sqrt_waterfill(const Vec& wp, const Vec& floors, double budget) {
  const std::size_t g = wp.size();
  if (wp[argmax_index(wp)] <= 0.0) {
    Mat theta(g, Vec(1, 0.0));
    for (std::size_t i = 0; i < g; ++i) theta[i][0] = floors[i];
    return theta;
  }
  const auto fill_at = [&](double lam) {
    Vec th(g, 0.0);
    for (std::size_t i = 0; i < g; ++i) {
      const double unc = wp[i] > 0.0 ? 0.5 * ((wp[i] / lam) * (wp[i] / lam) - 1.0) : 0.0;
      th[i] = std::max(floors[i], std::max(0.0, unc));
    }
    return th;
  };
  double lo = 1e-9, hi = 1.0;
  for (double x : wp) hi = std::max(hi, x);
  const auto total = [&](double lam) {
    const Vec th = fill_at(lam);
    double sum = 0.0;
    for (double v : th) sum += v;
    return sum;
  };
  for (int it = 0; it < 200 && total(lo) < budget; ++it) lo *= 0.5;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (total(mid) > budget ? lo : hi) = mid;
  }
  Vec th = fill_at(hi);
  // assign any residual to the strongest agent to spend the budget exactly
  double used = 0.0;
  for (double v : th) used += v;
  if (used < budget) th[argmax_index(wp)] += budget - used;
  Mat theta(g, Vec(1, 0.0));
  for (std::size_t i = 0; i < g; ++i) theta[i][0] = th[i];
  return theta;
}

inline std::optional<Mat> weighted_sum_candidate(const AllocationInstance& inst, const Vec& w) {
  const double c = inst.capacities[0];
  if (const auto* lin = std::get_if<LinearSingle>(&inst.model)) {
    Vec wp(inst.g, 0.0);
    for (std::size_t i = 0; i < inst.g; ++i) wp[i] = w[i] * lin->p[i];
    Mat theta(inst.g, Vec(1, 0.0));
    theta[argmax_index(wp)][0] = c;
    return theta;
  }
  if (const auto* sq = std::get_if<SqrtSingle>(&inst.model)) {
    Vec wp(inst.g, 0.0);
    for (std::size_t i = 0; i < inst.g; ++i) wp[i] = w[i] * sq->p[i];
    return sqrt_waterfill(wp, Vec(inst.g, 0.0), c);
  }
  return std::nullopt;
}

inline std::optional<Mat> umswf_candidate(const AllocationInstance& inst, double gamma,
                                          const Vec& w) {
  const double c = inst.capacities[0];
  if (const auto* lin = std::get_if<LinearSingle>(&inst.model)) {
    for (double p : lin->p) {
      if (p <= 0.0) return equalized_candidate(inst);
    }
    // the objective is linear in the shared floor: compare the endpoints
    Vec wp(inst.g, 0.0);
    for (std::size_t i = 0; i < inst.g; ++i) wp[i] = w[i] * lin->p[i];
    double inv = 0.0;
    for (double p : lin->p) inv += 1.0 / p;
    const double tau_max = c / inv;
    const double at_zero = gamma * c * wp[argmax_index(wp)];
    if (at_zero > tau_max) return weighted_sum_candidate(inst, w);
    return equalized_candidate(inst);
  }
  if (const auto* sq = std::get_if<SqrtSingle>(&inst.model)) {
    for (double p : sq->p) {
      if (p <= 0.0) return equalized_candidate(inst);
    }
    Vec wp(inst.g, 0.0);
    for (std::size_t i = 0; i < inst.g; ++i) wp[i] = w[i] * sq->p[i];
    const auto eq = equalized_candidate(inst);
    double tau_max = 1e300;
    for (std::size_t i = 0; i < inst.g; ++i) {
      tau_max = std::min(tau_max, (std::sqrt(1.0 + 2.0 * (*eq)[i][0]) - 1.0) * sq->p[i]);
    }
    const auto value_at = [&](double tau) {
      Vec floors(inst.g, 0.0);
      for (std::size_t i = 0; i < inst.g; ++i) {
        const double r = tau / sq->p[i];
        floors[i] = r + 0.5 * r * r;
      }
      const Mat th = sqrt_waterfill(wp, floors, c);
      double ws = 0.0, low = 1e300;
      for (std::size_t i = 0; i < inst.g; ++i) {
        const double u = (std::sqrt(1.0 + 2.0 * th[i][0]) - 1.0) * sq->p[i];
        ws += w[i] * u;
        low = std::min(low, u);
      }
      return gamma * ws + (1.0 - gamma) * low;
    };
    const auto [tau, v] = golden_section(value_at, 0.0, tau_max, true, 120);
    (void)v;
    Vec floors(inst.g, 0.0);
    for (std::size_t i = 0; i < inst.g; ++i) {
      const double r = tau / sq->p[i];
      floors[i] = r + 0.5 * r * r;
    }
    return sqrt_waterfill(wp, floors, c);
  }
  return std::nullopt;
}

inline bool strictly_increasing_model(const AllocationInstance& inst) {
  if (std::holds_alternative<LinearSingle>(inst.model) ||
      std::holds_alternative<SqrtSingle>(inst.model)) {
    return true;
  }
  if (const auto* lm = std::get_if<LinearMulti>(&inst.model)) {
    for (std::size_t j = 0; j < inst.k; ++j) {
      bool any = false;
      for (std::size_t i = 0; i < inst.g; ++i) any = any || lm->P[i][j] > 0.0;
      if (!any) return false;
    }
    return true;
  }
  return false;
}

}  // namespace detail

/// Maximin fair allocation: delegates to the robust saddle solver over the
/// instance's parameter polytope, then refines with the closed-form
/// utility-space optimum where one exists and with a capacity-saturation
/// pass for strictly increasing models.
inline SolveReport solve_allocation(const AllocationInstance& inst, const Objective& obj,
                                    const SolveConfig& cfg = {}) {
  validate_instance(inst);
  const Aggregator& base = detail::objective_base(obj);
  const WeightSet W = [&] {
    if (const auto* set = detail::objective_set(obj)) return *set;
    return WeightSet{Singleton{std::visit(
        [&](const auto& f) -> Vec {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, PowerMean>) return f.weights;
          else if constexpr (std::is_same_v<T, Gini>) return f.sorted_weights;
          else if constexpr (std::is_same_v<T, Umswf>) return f.base_weights;
          else return f.sorted_weights;
        },
        base)}};
  }();
  const ObjectiveSpec spec{RobustAggregator{base, W}, sentiment_map(inst),
                           SolveSense::MaximizeWelfare};
  const FeasibleSet fs = feasible_set(inst);
  SolveReport report = solve_maximin(spec, fs, W, cfg);

  const auto robust_at = [&](const Mat& theta) {
    return robust_inner(base, W, utilities(inst, {theta}), Direction::Minimize);
  };
  const auto consider = [&](const std::optional<Mat>& cand) {
    if (!cand || !allocation_feasible(inst, *cand, 1e-7)) return;
    const auto ev = robust_at(*cand);
    if (ev.value > report.value + 1e-15) {
      report.gap_estimate = std::max(0.0, report.gap_estimate - (ev.value - report.value));
      report.value = ev.value;
      report.theta = detail::flatten(*cand);
      report.adversary = ev.adversary;
    }
  };

  if (inst.k == 1) {
    if (std::holds_alternative<FullSimplex>(W)) {
      consider(detail::equalized_candidate(inst));
    } else if (const auto* sing = std::get_if<Singleton>(&W)) {
      if (const auto* pm = std::get_if<PowerMean>(&base)) {
        if (pm->p.is_finite() && pm->p.value == 1.0) {
          consider(detail::weighted_sum_candidate(inst, sing->w_star));
        }
        if (pm->p.is_neg_inf()) {
          bool positive = true;
          for (double x : sing->w_star) positive = positive && x > 0.0;
          if (positive) consider(detail::equalized_candidate(inst));
        }
      }
      if (const auto* um = std::get_if<Umswf>(&base)) {
        consider(detail::umswf_candidate(inst, um->gamma, sing->w_star));
      }
    }
  }

  // saturation pass: monotone utilities never lose by spending leftovers
  if (detail::strictly_increasing_model(inst) && inst.extra.empty()) {
    Mat theta = detail::unflatten(report.theta, inst.g, inst.k);
    bool changed = false;
    for (std::size_t j = 0; j < inst.k; ++j) {
      double used = 0.0;
      for (std::size_t i = 0; i < inst.g; ++i) used += theta[i][j];
      const double slack = inst.capacities[j] - used;
      if (slack <= 0.0) continue;
      std::size_t best_i = 0;
      double best_rate = -1.0;
      for (std::size_t i = 0; i < inst.g; ++i) {
        const double rate = std::visit(
            [&](const auto& m) -> double {
              using T = std::decay_t<decltype(m)>;
              if constexpr (std::is_same_v<T, LinearSingle> || std::is_same_v<T, SqrtSingle>) {
                return m.p[i];
              } else if constexpr (std::is_same_v<T, LinearMulti>) {
                return m.P[i][j];
              } else {
                return 0.0;
              }
            },
            inst.model);
        if (rate > best_rate) {
          best_rate = rate;
          best_i = i;
        }
      }
      theta[best_i][j] += slack;
      changed = true;
    }
    if (changed) {
      const auto ev = robust_at(theta);
      if (ev.value >= report.value - 1e-12) {
        report.value = std::max(report.value, ev.value);
        report.theta = detail::flatten(theta);
        report.adversary = ev.adversary;
      }
    }
  }
  return report;
}

}  // namespace fairwell
