// Part of fairwell, a library for robust fair welfare and malfare objectives.
// MIT licensed; see LICENSE in the repository root.
//
// Angel action spaces W inside the simplex and their linear best responses
// min/max_{w in W} w.s: closed forms for the classical sets, exact greedy
// mass transport for L1/Linf norm balls, and an iterative multiplier scheme
// for L2 balls. Also set geometry (membership, L1 diameter) and a
// brute-force grid oracle used by the test suites.

#pragma once

#include <functional>
#include <optional>
#include <variant>

#include "fairwell/core.hpp"

namespace fairwell {

struct Singleton {
  WeightVector w_star;
};

struct FullSimplex {
  std::size_t g = 0;
};

/// All w on the simplex with w >= gamma * w_star coordinatewise.
struct LowerBounded {
  double gamma = 0.0;
  WeightVector w_star;
};

/// All permutations of a fixed weight sequence (stored ascending).
struct PermutationOrbit {
  WeightVector sorted_weights;  // ascending
};

enum class Norm { L1, L2, Linf };

/// (base + radius ball) intersected with the simplex.
struct NormBall {
  std::variant<Singleton, LowerBounded, PermutationOrbit> base;
  Norm norm = Norm::Linf;
  double radius = 0.0;
};

using WeightSet = std::variant<Singleton, FullSimplex, LowerBounded, PermutationOrbit, NormBall>;

enum class Direction { Minimize, Maximize };

struct BestResponse {
  WeightVector w;
  double value = 0.0;
  bool exact = true;  // false only for the iterative L2 ball path
};

namespace detail {

inline void validate_base_weights(const WeightVector& w, const char* who) {
  require_simplex(w, who);
}

inline void validate(const Singleton& v) { validate_base_weights(v.w_star, "Singleton"); }

inline void validate(const FullSimplex& v) {
  if (v.g < 1) throw domain_error("FullSimplex: g must be at least 1");
}

inline void validate(const LowerBounded& v) {
  validate_base_weights(v.w_star, "LowerBounded");
  if (!(v.gamma >= 0.0 && v.gamma <= 1.0)) throw domain_error("LowerBounded: gamma outside [0,1]");
}

inline void validate(const PermutationOrbit& v) {
  validate_base_weights(v.sorted_weights, "PermutationOrbit");
  for (std::size_t i = 1; i < v.sorted_weights.size(); ++i) {
    if (v.sorted_weights[i] + 1e-12 < v.sorted_weights[i - 1]) {
      throw domain_error("PermutationOrbit: weight sequence not ascending");
    }
  }
}

inline void validate(const NormBall& v) {
  std::visit([](const auto& b) { validate(b); }, v.base);
  if (!(v.radius >= 0.0)) throw domain_error("NormBall: negative radius");
}

inline void validate_set(const WeightSet& w) {
  std::visit([](const auto& v) { validate(v); }, w);
}

}  // namespace detail

inline std::size_t dimension(const WeightSet& set) {
  return std::visit(
      [](const auto& v) -> std::size_t {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Singleton>) return v.w_star.size();
        else if constexpr (std::is_same_v<T, FullSimplex>) return v.g;
        else if constexpr (std::is_same_v<T, LowerBounded>) return v.w_star.size();
        else if constexpr (std::is_same_v<T, PermutationOrbit>) return v.sorted_weights.size();
        else {
          return std::visit([](const auto& b) -> std::size_t {
            using B = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<B, Singleton>) return b.w_star.size();
            else if constexpr (std::is_same_v<B, LowerBounded>) return b.w_star.size();
            else return b.sorted_weights.size();
          }, v.base);
        }
      },
      set);
}

namespace detail {

inline BestResponse vertex_response(const Vec& s, Direction dir) {
  const std::size_t ext = dir == Direction::Minimize ? argmin_index(s) : argmax_index(s);
  WeightVector w(s.size(), 0.0);
  w[ext] = 1.0;
  return {std::move(w), s[ext], true};
}

inline BestResponse lower_bounded_response(const LowerBounded& set, const Vec& s, Direction dir) {
  const std::size_t ext = dir == Direction::Minimize ? argmin_index(s) : argmax_index(s);
  WeightVector w(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) w[i] = set.gamma * set.w_star[i];
  w[ext] += 1.0 - set.gamma;
  return {std::move(w), 0.0, true};
}

// Sort pairing: the minimizing assignment puts the largest weights on the
// smallest sentiments (rearrangement inequality); maximizing is the reverse.
inline BestResponse orbit_response(const PermutationOrbit& set, const Vec& s, Direction dir) {
  const std::size_t g = s.size();
  const auto desc = sorted_indices(s, /*ascending=*/false);
  WeightVector w(g, 0.0);
  for (std::size_t i = 0; i < g; ++i) {
    w[desc[i]] = dir == Direction::Minimize ? set.sorted_weights[i]
                                            : set.sorted_weights[g - 1 - i];
  }
  return {std::move(w), 0.0, true};
}

// Exact LP over {max(0,c-r) <= w <= min(1,c+r), sum w = 1}: start from the
// lower bounds and fill the residual mass toward the preferred sentiments.
inline BestResponse linf_ball_response(const WeightVector& c, double r, const Vec& s,
                                       Direction dir) {
  const std::size_t g = c.size();
  WeightVector lo(g), hi(g);
  double residual = 1.0;
  for (std::size_t i = 0; i < g; ++i) {
    lo[i] = std::max(0.0, c[i] - r);
    hi[i] = std::min(1.0, c[i] + r);
    residual -= lo[i];
  }
  WeightVector w = lo;
  const auto order = sorted_indices(s, /*ascending=*/dir == Direction::Minimize);
  for (std::size_t i : order) {
    if (residual <= 0.0) break;
    const double add = std::min(hi[i] - lo[i], residual);
    w[i] += add;
    residual -= add;
  }
  return {std::move(w), 0.0, true};
}

// Exact LP over (c + L1 ball) on the simplex: a total-variation budget of
// r/2 moves mass from the least preferred coordinates to the most preferred.
inline BestResponse l1_ball_response(const WeightVector& c, double r, const Vec& s,
                                     Direction dir) {
  const std::size_t g = c.size();
  WeightVector w = c;
  double budget = r / 2.0;
  const bool minimize = dir == Direction::Minimize;
  const auto recv_order = sorted_indices(s, /*ascending=*/minimize);
  const auto donor_order = sorted_indices(s, /*ascending=*/!minimize);
  std::size_t ri = 0, di = 0;
  while (budget > 1e-15 && ri < g && di < g) {
    const std::size_t recv = recv_order[ri];
    const std::size_t donor = donor_order[di];
    if (minimize ? s[donor] <= s[recv] : s[donor] >= s[recv]) break;  // no strict gain left
    const double headroom = 1.0 - w[recv];
    if (headroom <= 1e-15) { ++ri; continue; }
    if (w[donor] <= 1e-15) { ++di; continue; }
    const double moved = std::min({budget, headroom, w[donor]});
    w[recv] += moved;
    w[donor] -= moved;
    budget -= moved;
  }
  return {std::move(w), 0.0, true};
}

// min/max s.w over (c + L2 ball(r)) on the simplex. The ball multiplier mu
// in w(mu) = simplex_project(c - s/(2 mu)) has a nonincreasing constraint
// residual, so bisection locates the boundary optimum; a short alternating
// shrink/project polish certifies feasibility within 1e-8.
inline BestResponse l2_ball_response(const WeightVector& c, double r, const Vec& s_in,
                                     Direction dir) {
  const std::size_t g = c.size();
  Vec s = s_in;
  if (dir == Direction::Maximize) {
    for (double& x : s) x = -x;
  }
  if (r <= 0.0) return {c, 0.0, false};

  // Unconstrained-over-simplex optimum: projection of c onto the face of
  // minimizing coordinates. Inside the ball means the ball is slack.
  const double s_min = *std::min_element(s.begin(), s.end());
  {
    Vec face;
    std::vector<std::size_t> face_idx;
    for (std::size_t i = 0; i < g; ++i) {
      if (s[i] == s_min) { face.push_back(c[i]); face_idx.push_back(i); }
    }
    const WeightVector face_proj = project_simplex(face);
    WeightVector w(g, 0.0);
    for (std::size_t j = 0; j < face_idx.size(); ++j) w[face_idx[j]] = face_proj[j];
    if (norm_l2(sub(w, c)) <= r) return {std::move(w), 0.0, false};
  }

  const auto point_at = [&](double mu) {
    Vec shifted(g);
    for (std::size_t i = 0; i < g; ++i) shifted[i] = c[i] - s[i] / (2.0 * mu);
    return project_simplex(shifted);
  };
  const auto residual_at = [&](const WeightVector& w) { return norm_l2(sub(w, c)) - r; };

  double mu_hi = 1.0;
  int doublings = 0;
  while (residual_at(point_at(mu_hi)) > 0.0 && doublings++ < 200) mu_hi *= 2.0;
  double mu_lo = std::min(1e-18, mu_hi / 2.0);
  WeightVector w = point_at(mu_hi);
  for (int it = 0; it < 200; ++it) {
    const double mu = 0.5 * (mu_lo + mu_hi);
    const WeightVector cand = point_at(mu);
    if (residual_at(cand) > 0.0) {
      mu_lo = mu;
    } else {
      mu_hi = mu;
      w = cand;  // keep the feasible side
    }
  }
  // Feasibility polish: shrink into the ball, reproject onto the simplex.
  for (int it = 0; it < 64; ++it) {
    const double dist = norm_l2(sub(w, c));
    if (dist <= r + 1e-12) break;
    for (std::size_t i = 0; i < g; ++i) w[i] = c[i] + (w[i] - c[i]) * (r / dist);
    w = project_simplex(w);
  }
  if (norm_l2(sub(w, c)) > r + 1e-8) {
    throw convergence_error("best_response: L2 ball iteration failed to certify feasibility");
  }
  return {std::move(w), 0.0, false};
}

inline WeightVector ball_center(const NormBall& set, const Vec& s, Direction dir) {
  return std::visit(
      [&](const auto& b) -> WeightVector {
        using B = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<B, Singleton>) return b.w_star;
        else if constexpr (std::is_same_v<B, LowerBounded>) return lower_bounded_response(b, s, dir).w;
        else return orbit_response(b, s, dir).w;
      },
      set.base);
}

// The set (LowerBounded + Linf ball) on the simplex is the polytope
// {w >= max(0, gamma w*_i - r), sum_i max(gamma w*_i, w_i - r) <= 1}.
// Greedy fill in preference order: each coordinate takes mass freely up to
// gamma w*_i + r, beyond which it draws on the shared excess budget 1-gamma.
inline BestResponse lower_bounded_linf_response(const LowerBounded& base, double r, const Vec& s,
                                                Direction dir) {
  const std::size_t g = s.size();
  WeightVector w(g);
  double residual = 1.0;
  for (std::size_t i = 0; i < g; ++i) {
    w[i] = std::max(0.0, base.gamma * base.w_star[i] - r);
    residual -= w[i];
  }
  double excess_budget = 1.0 - base.gamma;
  const auto order = sorted_indices(s, /*ascending=*/dir == Direction::Minimize);
  for (std::size_t i : order) {
    if (residual <= 0.0) break;
    const double thresh = base.gamma * base.w_star[i] + r;
    const double free_add = std::min(std::max(0.0, thresh - w[i]), residual);
    w[i] += free_add;
    residual -= free_add;
    if (residual <= 0.0) break;
    const double extra = std::min({residual, excess_budget, 1.0 - w[i]});
    if (extra > 0.0) {
      w[i] += extra;
      residual -= extra;
      excess_budget -= extra;
    }
  }
  return {std::move(w), 0.0, true};
}

// Union over the orbit's permuted centers; exact because each per-center
// greedy is exact. Guarded by g <= 8 (g! centers).
template <typename Inner>
inline BestResponse orbit_ball_enumerate(const PermutationOrbit& base, const Vec& s, Direction dir,
                                         Inner inner) {
  WeightVector center = base.sorted_weights;
  BestResponse best;
  bool first = true;
  do {
    BestResponse cand = inner(center);
    cand.value = dot(cand.w, s);
    const bool better = dir == Direction::Minimize ? cand.value < best.value
                                                   : cand.value > best.value;
    if (first || better) best = std::move(cand);
    first = false;
  } while (std::next_permutation(center.begin(), center.end()));
  return best;
}

}  // namespace detail

/// Optimal w in the set against a fixed sentiment vector under a linear
/// payoff w.s. Closed form or exact greedy everywhere except the L2 ball,
/// which is iterative (exact = false).
inline BestResponse best_response(const WeightSet& set, const Vec& s, Direction dir) {
  detail::validate_set(set);
  require_same_size(dimension(set), s.size(), "best_response");
  for (double x : s) {
    if (!std::isfinite(x)) throw domain_error("best_response: non-finite sentiment");
  }
  BestResponse br = std::visit(
      [&](const auto& v) -> BestResponse {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Singleton>) {
          return {v.w_star, 0.0, true};
        } else if constexpr (std::is_same_v<T, FullSimplex>) {
          return detail::vertex_response(s, dir);
        } else if constexpr (std::is_same_v<T, LowerBounded>) {
          return detail::lower_bounded_response(v, s, dir);
        } else if constexpr (std::is_same_v<T, PermutationOrbit>) {
          return detail::orbit_response(v, s, dir);
        } else {
          if (v.norm == Norm::Linf) {
            if (const auto* lb = std::get_if<LowerBounded>(&v.base)) {
              return detail::lower_bounded_linf_response(*lb, v.radius, s, dir);
            }
          }
          if (const auto* orb = std::get_if<PermutationOrbit>(&v.base);
              orb != nullptr && v.norm != Norm::L2 && s.size() <= 8) {
            return detail::orbit_ball_enumerate(*orb, s, dir, [&](const WeightVector& c) {
              return v.norm == Norm::Linf ? detail::linf_ball_response(c, v.radius, s, dir)
                                          : detail::l1_ball_response(c, v.radius, s, dir);
            });
          }
          const WeightVector center = detail::ball_center(v, s, dir);
          switch (v.norm) {
            case Norm::Linf: return detail::linf_ball_response(center, v.radius, s, dir);
            case Norm::L1: return detail::l1_ball_response(center, v.radius, s, dir);
            case Norm::L2: return detail::l2_ball_response(center, v.radius, s, dir);
          }
          throw domain_error("best_response: unknown norm");
        }
      },
      set);
  br.value = dot(br.w, s);
  return br;
}

inline BestResponse best_response(const WeightSet& set, const SentimentVector& s, Direction dir) {
  return best_response(set, s.values, dir);
}

namespace detail {

// Distance from a simplex point to the lower-bounded face set
// {b >= gamma w*, sum b = 1} in the Linf norm: the smallest d that both
// covers every per-coordinate deficit gamma w*_i - w_i and satisfies
// sum_i max(gamma w*_i, w_i - d) <= 1 (bisected).
inline double linf_distance_to_lower_bounded(const WeightVector& w, const LowerBounded& set) {
  double deficit = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    deficit = std::max(deficit, set.gamma * set.w_star[i] - w[i]);
  }
  const auto feasible = [&](double d) {
    double sum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      sum += std::max(set.gamma * set.w_star[i], w[i] - d);
    }
    return sum <= 1.0 + 1e-15;
  };
  double lo = 0.0, hi = 2.0;
  if (feasible(lo)) return std::max(0.0, deficit);
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return std::max(hi, deficit);
}

inline double distance_to_base(const WeightVector& w, const NormBall& set) {
  return std::visit(
      [&](const auto& b) -> double {
        using B = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<B, Singleton>) {
          const Vec d = sub(w, b.w_star);
          switch (set.norm) {
            case Norm::L1: return norm_l1(d);
            case Norm::L2: return norm_l2(d);
            case Norm::Linf: return norm_linf(d);
          }
        } else if constexpr (std::is_same_v<B, PermutationOrbit>) {
          // The nearest orbit member pairs both vectors in sorted order.
          Vec ws = w;
          std::sort(ws.begin(), ws.end());
          const Vec d = sub(ws, b.sorted_weights);
          switch (set.norm) {
            case Norm::L1: return norm_l1(d);
            case Norm::L2: return norm_l2(d);
            case Norm::Linf: return norm_linf(d);
          }
        } else {
          const LowerBounded& lb = b;
          switch (set.norm) {
            case Norm::L1: {
              double v = 0.0;
              for (std::size_t i = 0; i < w.size(); ++i) {
                v += std::max(0.0, lb.gamma * lb.w_star[i] - w[i]);
              }
              return 2.0 * v;  // raise the violators, drain the rest
            }
            case Norm::L2: {
              const double slack = 1.0 - lb.gamma;
              Vec shifted(w.size());
              for (std::size_t i = 0; i < w.size(); ++i) {
                shifted[i] = w[i] - lb.gamma * lb.w_star[i];
              }
              if (slack <= 0.0) return norm_l2(shifted);
              Vec scaled(w.size());
              for (std::size_t i = 0; i < w.size(); ++i) scaled[i] = shifted[i] / slack;
              const WeightVector proj = project_simplex(scaled);
              Vec d(w.size());
              for (std::size_t i = 0; i < w.size(); ++i) d[i] = shifted[i] - slack * proj[i];
              return norm_l2(d);
            }
            case Norm::Linf: return linf_distance_to_lower_bounded(w, lb);
          }
        }
        throw domain_error("membership: unknown norm");
      },
      set.base);
}

}  // namespace detail

/// True iff w lies in the set within tol (always requires w on the simplex).
inline bool membership(const WeightSet& set, const WeightVector& w, double tol) {
  detail::validate_set(set);
  if (dimension(set) != w.size() || !on_simplex(w)) return false;
  return std::visit(
      [&](const auto& v) -> bool {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Singleton>) {
          return norm_linf(sub(w, v.w_star)) <= tol;
        } else if constexpr (std::is_same_v<T, FullSimplex>) {
          return true;
        } else if constexpr (std::is_same_v<T, LowerBounded>) {
          for (std::size_t i = 0; i < w.size(); ++i) {
            if (w[i] < v.gamma * v.w_star[i] - tol) return false;
          }
          return true;
        } else if constexpr (std::is_same_v<T, PermutationOrbit>) {
          Vec ws = w;
          std::sort(ws.begin(), ws.end());
          return norm_linf(sub(ws, v.sorted_weights)) <= tol;
        } else {
          return detail::distance_to_base(w, v) <= v.radius + tol;
        }
      },
      set);
}

struct DiameterBound {
  double value = 0.0;
  bool exact = true;  // false for the L2 ball upper bound
};

/// sup_{u,v in W} ||u - v||_1. Exact for the polytopal variants via linear
/// optimization over sign patterns; the L2 ball gets a labeled upper bound
/// (base diameter + 2 r sqrt(g), clipped to 2).
inline DiameterBound diameter_l1(const WeightSet& set) {
  detail::validate_set(set);
  const std::size_t g = dimension(set);
  if (g <= 1) return {0.0, true};
  return std::visit(
      [&](const auto& v) -> DiameterBound {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Singleton>) {
          return {0.0, true};
        } else if constexpr (std::is_same_v<T, FullSimplex>) {
          return {2.0, true};
        } else if constexpr (std::is_same_v<T, LowerBounded>) {
          return {2.0 * (1.0 - v.gamma), true};
        } else if constexpr (std::is_same_v<T, PermutationOrbit>) {
          Vec desc = v.sorted_weights;
          std::reverse(desc.begin(), desc.end());
          return {norm_l1(sub(v.sorted_weights, desc)), true};
        } else {
          if (v.norm == Norm::L2) {
            DiameterBound base = std::visit(
                [](const auto& b) {
                  return diameter_l1(WeightSet{b});
                },
                v.base);
            const double bound = base.value + 2.0 * v.radius * std::sqrt(static_cast<double>(g));
            return {std::min(2.0, bound), false};
          }
          if (g > 16) throw domain_error("diameter_l1: sign enumeration capped at g <= 16");
          double best = 0.0;
          Vec sign(g, 1.0);
          const std::size_t patterns = std::size_t{1} << (g - 1);  // sign[0] fixed
          for (std::size_t mask = 0; mask < patterns; ++mask) {
            for (std::size_t i = 1; i < g; ++i) sign[i] = (mask >> (i - 1)) & 1 ? -1.0 : 1.0;
            const double hi = best_response(set, sign, Direction::Maximize).value;
            const double lo = best_response(set, sign, Direction::Minimize).value;
            best = std::max(best, hi - lo);
          }
          return {best, true};
        }
      },
      set);
}

namespace detail {

// Visits every point of the resolution-1/n grid on the g-simplex.
inline void for_each_composition(std::size_t g, std::size_t n,
                                 const std::function<void(const WeightVector&)>& fn) {
  WeightVector w(g, 0.0);
  std::vector<std::size_t> counts(g, 0);
  const double step = 1.0 / static_cast<double>(n);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t pos, std::size_t left) {
    if (pos + 1 == g) {
      w[pos] = static_cast<double>(left) * step;
      fn(w);
      return;
    }
    for (std::size_t c = 0; c <= left; ++c) {
      w[pos] = static_cast<double>(c) * step;
      rec(pos + 1, left - c);
    }
  };
  rec(0, n);
}

inline double grid_point_count(std::size_t g, std::size_t n) {
  double count = 1.0;  // C(n + g - 1, g - 1)
  for (std::size_t i = 1; i < g; ++i) {
    count *= static_cast<double>(n + i) / static_cast<double>(i);
  }
  return count;
}

}  // namespace detail

/// Exhaustive search over the simplex grid of the given resolution
/// intersected with the set. Test oracle; g <= 4.
inline BestResponse brute_force_best_response(const WeightSet& set, const Vec& s, Direction dir,
                                              double resolution, double membership_tol = 1e-9) {
  detail::validate_set(set);
  const std::size_t g = dimension(set);
  require_same_size(g, s.size(), "brute_force_best_response");
  if (g > 4) throw domain_error("brute_force_best_response: g capped at 4");
  if (!(resolution > 0.0 && resolution <= 1.0)) {
    throw domain_error("brute_force_best_response: resolution must be in (0,1]");
  }
  const auto n = static_cast<std::size_t>(std::llround(1.0 / resolution));
  if (detail::grid_point_count(g, n) > 2.5e7) {
    throw domain_error("brute_force_best_response: grid too large");
  }
  bool found = false;
  BestResponse best;
  detail::for_each_composition(g, n, [&](const WeightVector& w) {
    if (!membership(set, w, membership_tol)) return;
    const double value = dot(w, s);
    const bool better = dir == Direction::Minimize ? value < best.value : value > best.value;
    if (!found || better) {
      best = {w, value, true};
      found = true;
    }
  });
  if (!found) throw domain_error("brute_force_best_response: no feasible grid point");
  return best;
}

inline BestResponse brute_force_best_response(const WeightSet& set, const SentimentVector& s,
                                              Direction dir, double resolution) {
  return brute_force_best_response(set, s.values, dir, resolution);
}

}  // namespace fairwell
