// Part of fairwell, a library for robust fair welfare and malfare objectives.
// MIT licensed; see LICENSE in the repository root.
//
// Robust objective evaluation (inner adversary over a weight set) and
// maximin/minimax optimization over continuous parameter spaces by
// best-response-oracle subgradient steps with a coordinate refinement pass.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>

#include "fairwell/aggregators.hpp"
#include "fairwell/weightsets.hpp"

namespace fairwell {

/// Aggregator whose weight parameter ranges adversarially over a set.
struct RobustAggregator {
  Aggregator base;
  WeightSet set;
};

using Objective = std::variant<Aggregator, RobustAggregator>;

/// Result of an inner adversary evaluation: the extremal value, a witness
/// weight vector in the set, the subgradient of the value in S at that
/// witness, and whether the value is exact (false only for bound-style
/// evaluations and iterative L2-ball responses).
struct RobustEvaluation {
  double value = 0.0;
  WeightVector adversary;
  Vec grad_s;
  bool exact = true;
};

namespace detail {

// Golden-section search on [lo, hi]; requires unimodality, which concave
// (maximize) or convex (minimize) sections guarantee.
template <typename F>
inline std::pair<double, double> golden_section(F f, double lo, double hi, bool maximize,
                                                int iters) {
  constexpr double phi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < iters; ++it) {
    const bool keep_left = maximize ? f1 > f2 : f1 < f2;
    if (keep_left) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    }
  }
  const double xm = 0.5 * (a + b);
  return {xm, f(xm)};
}

// Power-mean specific inner evaluation. The monotone link f(z) = z^(1/p)
// (exp for p = 0) turns min/max of M_p over the set into a linear best
// response on the transformed sentiment.
inline RobustEvaluation robust_power_mean(const WeightSet& W, const Vec& s, Power p,
                                          Direction dir) {
  const std::size_t g = s.size();
  RobustEvaluation out;

  if (!p.is_finite()) {
    // Threshold method: the supported extreme only takes sentiment values,
    // and reachability of a support pattern is a linear best response.
    std::vector<double> values = s;
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    const bool inner_max = p.is_pos_inf();
    const auto mass_on = [&](const std::function<bool(double)>& in_set, Direction d) {
      Vec chi(g, 0.0);
      for (std::size_t i = 0; i < g; ++i) chi[i] = in_set(s[i]) ? 1.0 : 0.0;
      return best_response(W, chi, d);
    };
    if (dir == Direction::Maximize) std::reverse(values.begin(), values.end());
    for (double v : values) {
      BestResponse br;
      bool hit = false;
      if (inner_max && dir == Direction::Minimize) {
        br = mass_on([&](double x) { return x > v; }, Direction::Minimize);
        hit = br.value <= 1e-12;
      } else if (inner_max && dir == Direction::Maximize) {
        br = mass_on([&](double x) { return x >= v; }, Direction::Maximize);
        hit = br.value > 1e-12;
      } else if (!inner_max && dir == Direction::Minimize) {
        br = mass_on([&](double x) { return x <= v; }, Direction::Maximize);
        hit = br.value > 1e-12;
      } else {
        br = mass_on([&](double x) { return x < v; }, Direction::Minimize);
        hit = br.value <= 1e-12;
      }
      if (hit) {
        out.value = v;
        out.adversary = br.w;
        out.grad_s.assign(g, 0.0);
        for (std::size_t i = 0; i < g; ++i) {
          if (s[i] == v && out.adversary[i] > 1e-12) {
            out.grad_s[i] = 1.0;
            break;
          }
        }
        out.exact = br.exact;
        return out;
      }
    }
    throw domain_error("robust_inner: no reachable support pattern");
  }

  const double pv = p.value;
  const bool geometric = std::abs(pv) < kGeometricCutoff;

  // Zero sentiment forces the mean to 0 for p <= 0 whenever the adversary
  // can place mass there; otherwise those coordinates are dead weight.
  if (pv <= 0.0 || geometric) {
    Vec chi(g, 0.0);
    bool any_zero = false;
    for (std::size_t i = 0; i < g; ++i) {
      if (s[i] == 0.0) chi[i] = 1.0, any_zero = true;
    }
    if (any_zero) {
      if (dir == Direction::Minimize) {
        const auto br = best_response(W, chi, Direction::Maximize);
        if (br.value > 1e-12) {
          out.value = 0.0;
          out.adversary = br.w;
          out.grad_s.assign(g, 0.0);  // flat at the collapsed mean
          out.exact = br.exact;
          return out;
        }
      } else {
        const auto br = best_response(W, chi, Direction::Minimize);
        if (br.value > 1e-12) {  // every member touches a zero coordinate
          out.value = 0.0;
          out.adversary = br.w;
          out.grad_s.assign(g, 0.0);
          out.exact = br.exact;
          return out;
        }
      }
    }
  }

  // Zero coordinates past the reachability check carry (numerically) no
  // mass for any member, so their transform is chosen to repel rather than
  // distort: 0 when mass there is provably dead, a bounded repellent when
  // the adversary must be steered away from collapsing the mean.
  Vec t(g);
  Direction inner_dir = dir;
  double scale = 1.0;
  if (geometric) {
    for (std::size_t i = 0; i < g; ++i) {
      t[i] = s[i] > 0.0 ? std::log(s[i]) : -1e6;
    }
  } else {
    // Scale by the relevant extreme so s^p never overflows.
    double sc = 0.0;
    if (pv > 0.0) {
      sc = *std::max_element(s.begin(), s.end());
    } else {
      for (double x : s) {
        if (x > 0.0 && (sc == 0.0 || x < sc)) sc = x;
      }
    }
    if (sc <= 0.0) {  // all-zero sentiment
      out.value = 0.0;
      out.adversary = best_response(W, s, dir).w;
      out.grad_s.assign(g, 0.0);
      return out;
    }
    scale = sc;
    for (std::size_t i = 0; i < g; ++i) {
      if (s[i] > 0.0) {
        t[i] = std::pow(s[i] / scale, pv);
      } else {
        t[i] = pv > 0.0 ? 0.0 : (dir == Direction::Minimize ? 0.0 : 1e6);
      }
    }
    // z^(1/p) is decreasing for p < 0, so the best response flips.
    if (pv < 0.0) inner_dir = dir == Direction::Minimize ? Direction::Maximize
                                                         : Direction::Minimize;
  }

  const auto br = best_response(W, t, inner_dir);
  out.adversary = br.w;
  out.exact = br.exact;
  if (geometric) {
    out.value = std::exp(br.value);
  } else {
    out.value = br.value <= 0.0 ? 0.0 : scale * std::exp(std::log(br.value) / pv);
  }
  const bool witness_clean = [&] {
    if (!geometric && pv >= 1.0) return true;
    for (std::size_t i = 0; i < g; ++i) {
      if (out.adversary[i] > 0.0 && s[i] <= 0.0) return false;
    }
    return true;
  }();
  out.grad_s = witness_clean ? power_mean_gradient(s, out.adversary, p) : Vec(g, 0.0);
  return out;
}

// Enumerates sentiment permutations for the sorted-pairing families.
template <typename PerPermutation>
inline void for_each_permutation(std::size_t g, PerPermutation fn) {
  if (g > 7) {
    throw domain_error("robust_inner: sorted-weight families capped at g <= 7");
  }
  std::vector<std::size_t> perm(g);
  for (std::size_t i = 0; i < g; ++i) perm[i] = i;
  do {
    fn(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
}

// Maximize (or minimize) a function of w over a weight set by nested
// coordinate golden-section with membership-bisected slice intervals.
// Valid for concave (max) / convex (min) objectives; g <= 4.
inline std::pair<WeightVector, double> golden_over_set(
    const WeightSet& W, const std::function<double(const WeightVector&)>& f, Direction dir,
    const WeightVector* anchor = nullptr) {
  const std::size_t g = dimension(W);
  if (g > 4) throw domain_error("golden_over_set: capped at g <= 4");
  const bool maximize = dir == Direction::Maximize;
  const double worst = maximize ? -1e300 : 1e300;

  WeightVector best_w;
  double best_v = worst;
  const std::function<double(WeightVector&, std::size_t)> level = [&](WeightVector& w,
                                                                      std::size_t k) -> double {
    double fixed = 0.0;
    for (std::size_t i = 0; i < k; ++i) fixed += w[i];
    if (k + 1 == g) {
      w[k] = 1.0 - fixed;
      if (w[k] < -1e-12 || !membership(W, w, 1e-9)) return worst;
      const double v = f(w);
      if (maximize ? v > best_v : v < best_v) {
        best_v = v;
        best_w = w;
      }
      return v;
    }
    const auto value_at = [&](double x) {
      WeightVector local = w;
      local[k] = x;
      return level(local, k + 1);
    };
    const auto feasible_at = [&](double x) { return value_at(x) != worst; };
    // Coarse scan for the feasible window of this coordinate, then endpoint
    // bisection. Convexity of the set makes the window an interval.
    const double span = 1.0 - fixed;
    if (span < -1e-12) return worst;
    const int scan = 64;
    double a = -1.0, b = -1.0;
    const auto widen = [&](double x) {
      if (a < 0.0) {
        a = b = x;
      } else {
        a = std::min(a, x);
        b = std::max(b, x);
      }
    };
    for (int i = 0; i <= scan; ++i) {
      const double x = span * i / scan;
      if (feasible_at(x)) widen(x);
    }
    // a known member keeps thin sets from slipping through the scan
    if (anchor != nullptr && k < anchor->size()) {
      const double x = std::clamp((*anchor)[k], 0.0, std::max(span, 0.0));
      if (feasible_at(x)) widen(x);
    }
    if (a < 0.0) return worst;
    double lo_out = std::max(0.0, a - span / scan), lo_in = a;
    for (int it = 0; it < 40 && lo_in - lo_out > 1e-12; ++it) {
      const double mid = 0.5 * (lo_out + lo_in);
      (feasible_at(mid) ? lo_in : lo_out) = mid;
    }
    double hi_in = b, hi_out = std::min(span, b + span / scan);
    for (int it = 0; it < 40 && hi_out - hi_in > 1e-12; ++it) {
      const double mid = 0.5 * (hi_in + hi_out);
      (feasible_at(mid) ? hi_in : hi_out) = mid;
    }
    const auto [x, v] = golden_section(value_at, lo_in, hi_in, maximize, 60);
    WeightVector local = w;
    local[k] = x;
    level(local, k + 1);
    return v;
  };
  WeightVector scratch(g, 0.0);
  level(scratch, 0);
  if (best_w.empty()) throw domain_error("golden_over_set: no feasible point found");
  return {best_w, best_v};
}

// Sorted-pairing families (Gini, Gini power mean). The pairing equals the
// permutation extreme of M_p(S; pi w), so the inner problem interchanges
// into per-permutation power-mean evaluations in the matching direction.
// The crossing direction is exact for p = 1 (piecewise-linear concave,
// nested golden) and a sound outer bound otherwise.
inline RobustEvaluation robust_sorted_family(const WeightSet& W, const Vec& s, Power p,
                                             Sense sense, Direction dir) {
  const std::size_t g = s.size();
  const bool welfare = sense == Sense::Utility;
  // The family pairs sorted weights with sorted sentiment, which is the
  // permutation extreme in the sense's own direction regardless of which
  // side of the set is being probed.
  const Direction pairing_dir = welfare ? Direction::Minimize : Direction::Maximize;
  const bool matching = pairing_dir == dir;

  if (const auto* orb = std::get_if<PermutationOrbit>(&W)) {
    // the value depends on w only through its multiset of entries, so it is
    // constant across the orbit and both directions coincide
    RobustEvaluation out;
    const SentimentVector sv{s, sense};
    if (p.is_finite() && p.value == 1.0) {
      const Gini fam{orb->sorted_weights, sense};
      out.value = gini(sv, fam);
      out.grad_s = gradient(fam, sv);
    } else {
      const GiniPowerMean fam{p, orb->sorted_weights, sense};
      out.value = gini_power_mean(sv, fam);
      out.grad_s = gradient(fam, sv);
    }
    out.adversary = orb->sorted_weights;
    out.exact = true;
    return out;
  }

  if (matching || std::holds_alternative<Singleton>(W)) {
    RobustEvaluation best;
    bool first = true;
    for_each_permutation(g, [&](const std::vector<std::size_t>& perm) {
      Vec sp(g);
      for (std::size_t k = 0; k < g; ++k) sp[k] = s[perm[k]];
      RobustEvaluation cand = robust_power_mean(W, sp, p, dir);
      const bool better = pairing_dir == Direction::Minimize ? cand.value < best.value
                                                             : cand.value > best.value;
      if (first || better) {
        Vec grad(g, 0.0);
        for (std::size_t k = 0; k < g; ++k) grad[perm[k]] = cand.grad_s[k];
        best = std::move(cand);
        best.grad_s = std::move(grad);
        if (std::holds_alternative<Singleton>(W)) best.exact = true;
        first = false;
      }
    });
    if (std::holds_alternative<Singleton>(W)) {
      // a singleton's cross direction coincides with its matching one
      best.adversary = std::get<Singleton>(W).w_star;
    }
    return best;
  }

  // Crossing direction. p = 1 over a convex set: nested golden-section on
  // the exact sorted-pairing value (concave for welfare, convex for
  // malfare). Orbit-centered balls are unions, not convex, so they fall
  // through to the outer bound.
  const bool convex_set =
      std::holds_alternative<FullSimplex>(W) || std::holds_alternative<LowerBounded>(W) ||
      (std::holds_alternative<NormBall>(W) &&
       !std::holds_alternative<PermutationOrbit>(std::get<NormBall>(W).base));
  if (p.is_finite() && p.value == 1.0 && g <= 4 && convex_set) {
    const auto pairing = [&](const WeightVector& w) {
      Vec ws = w;
      std::sort(ws.begin(), ws.end());
      const Gini a{ws, sense};
      return gini({s, sense}, a);
    };
    const WeightVector anchor = best_response(W, s, Direction::Minimize).w;
    auto [w, v] = golden_over_set(W, pairing, dir, &anchor);
    RobustEvaluation out;
    out.value = v;
    out.adversary = std::move(w);
    out.grad_s = gradient(Gini{[&] {
                            Vec ws = out.adversary;
                            std::sort(ws.begin(), ws.end());
                            return ws;
                          }(),
                          sense},
                          {s, sense});
    out.exact = true;
    return out;
  }

  // Sound outer bound: extremizing the per-permutation power mean over the
  // set and then over permutations brackets the sorted-pairing extreme.
  RobustEvaluation best;
  bool first = true;
  for_each_permutation(g, [&](const std::vector<std::size_t>& perm) {
    Vec sp(g);
    for (std::size_t k = 0; k < g; ++k) sp[k] = s[perm[k]];
    RobustEvaluation cand = robust_power_mean(W, sp, p, dir);
    // The bound tightens toward the true extreme: min over permutations of
    // the set maximum (Maximize) or max of the set minimum (Minimize).
    const bool better = dir == Direction::Maximize ? cand.value < best.value
                                                   : cand.value > best.value;
    if (first || better) {
      Vec grad(g, 0.0);
      for (std::size_t k = 0; k < g; ++k) grad[perm[k]] = cand.grad_s[k];
      best = std::move(cand);
      best.grad_s = std::move(grad);
      first = false;
    }
  });
  best.exact = false;
  return best;
}

}  // namespace detail

/// Extremal value of the aggregator over the weight set (the weight
/// parameter of the family is replaced by the adversary's choice), with the
/// witness and the envelope subgradient in S.
inline RobustEvaluation robust_inner(const Aggregator& base, const WeightSet& W,
                                     const SentimentVector& s, Direction dir) {
  detail::validate_set(W);
  require_same_size(dimension(W), s.size(), "robust_inner");
  require_nonnegative(s.values, "robust_inner");
  return std::visit(
      [&](const auto& f) -> RobustEvaluation {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, PowerMean>) {
          if (s.sense == Sense::Utility && !f.p.leq(1.0)) {
            throw domain_error("robust_inner: power mean with p > 1 is not a welfare function");
          }
          if (s.sense == Sense::Disutility && !f.p.geq(1.0)) {
            throw domain_error("robust_inner: power mean with p < 1 is not a malfare function");
          }
          return detail::robust_power_mean(W, s.values, f.p, dir);
        } else if constexpr (std::is_same_v<T, Gini>) {
          if (s.sense != f.sense) {
            throw domain_error("robust_inner: sentiment sense does not match aggregator");
          }
          return detail::robust_sorted_family(W, s.values, Power::finite(1.0), f.sense, dir);
        } else if constexpr (std::is_same_v<T, Umswf>) {
          const double ext = s.sense == Sense::Utility
                                 ? *std::min_element(s.values.begin(), s.values.end())
                                 : *std::max_element(s.values.begin(), s.values.end());
          const auto br = best_response(W, s.values, dir);
          RobustEvaluation out;
          out.value = f.gamma * br.value + (1.0 - f.gamma) * ext;
          out.adversary = br.w;
          out.exact = br.exact;
          out.grad_s.assign(s.size(), 0.0);
          for (std::size_t i = 0; i < s.size(); ++i) out.grad_s[i] = f.gamma * out.adversary[i];
          const std::size_t xi = s.sense == Sense::Utility ? argmin_index(s.values)
                                                           : argmax_index(s.values);
          out.grad_s[xi] += 1.0 - f.gamma;
          return out;
        } else {
          if (f.sense == Sense::Utility && !f.p.leq(1.0)) {
            throw domain_error("robust_inner: welfare form requires p <= 1");
          }
          if (f.sense == Sense::Disutility && !f.p.geq(1.0)) {
            throw domain_error("robust_inner: malfare form requires p >= 1");
          }
          if (s.sense != f.sense) {
            throw domain_error("robust_inner: sentiment sense does not match aggregator");
          }
          return detail::robust_sorted_family(W, s.values, f.p, f.sense, dir);
        }
      },
      base);
}

/// Same family with its weight parameter replaced by a specific member.
inline Aggregator with_weights(const Aggregator& base, const WeightVector& w) {
  return std::visit(
      [&](const auto& f) -> Aggregator {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, PowerMean>) {
          return PowerMean{f.p, w};
        } else if constexpr (std::is_same_v<T, Gini>) {
          Vec ws = w;
          std::sort(ws.begin(), ws.end());
          return Gini{ws, f.sense};
        } else if constexpr (std::is_same_v<T, Umswf>) {
          return Umswf{f.gamma, w};
        } else {
          Vec ws = w;
          std::sort(ws.begin(), ws.end());
          return GiniPowerMean{f.p, ws, f.sense};
        }
      },
      base);
}

/// Value of an objective at a sentiment vector: plain aggregators evaluate
/// directly; robust aggregators take the adversarial extreme matching the
/// sense (infimum for welfare, supremum for malfare).
inline double objective_value(const Objective& obj, const SentimentVector& s) {
  if (const auto* a = std::get_if<Aggregator>(&obj)) return aggregate(*a, s);
  const auto& r = std::get<RobustAggregator>(obj);
  const Direction dir = s.sense == Sense::Utility ? Direction::Minimize : Direction::Maximize;
  return robust_inner(r.base, r.set, s, dir).value;
}

/// Differentiable map theta -> S(theta) with an explicit Jacobian.
struct SentimentMap {
  std::size_t theta_dim = 0;
  std::size_t g = 0;
  std::function<Vec(const Vec&)> eval;
  std::function<Mat(const Vec&)> jacobian;  // g rows, theta_dim columns
};

enum class SolveSense { MaximizeWelfare, MinimizeMalfare };

struct ObjectiveSpec {
  Objective objective;
  SentimentMap map;
  SolveSense sense = SolveSense::MaximizeWelfare;
};

struct BudgetConstraint {
  std::vector<std::size_t> indices;
  double capacity = 0.0;
};

struct LinearConstraint {
  Vec coeffs;
  double bound = 0.0;  // coeffs . x <= bound
};

/// Box plus capacity budgets plus optional extra halfspaces, with Euclidean
/// projection by exact box/budget steps composed cyclically.
struct FeasibleSet {
  Vec lo, hi;
  std::vector<BudgetConstraint> budgets;
  std::vector<LinearConstraint> constraints;

  std::size_t dim() const { return lo.size(); }

  bool contains(const Vec& x, double tol = 1e-7) const {
    if (x.size() != lo.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
    }
    for (const auto& b : budgets) {
      double sum = 0.0;
      for (std::size_t i : b.indices) sum += x[i];
      if (sum > b.capacity + tol) return false;
    }
    for (const auto& c : constraints) {
      if (dot(c.coeffs, x) > c.bound + tol) return false;
    }
    return true;
  }

  double l2_diameter() const {
    double d = 0.0;
    for (std::size_t i = 0; i < lo.size(); ++i) d += (hi[i] - lo[i]) * (hi[i] - lo[i]);
    return std::sqrt(d);
  }

  Vec project(Vec x) const {
    const auto clamp_box = [&](Vec& v) {
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::clamp(v[i], lo[i], hi[i]);
    };
    for (int cycle = 0; cycle < 200; ++cycle) {
      for (const auto& b : budgets) {
        // a shift by tau with box clamping is the exact joint projection,
        // provided it sees the raw coordinates rather than pre-clamped ones
        double clamped = 0.0;
        for (std::size_t i : b.indices) clamped += std::clamp(x[i], lo[i], hi[i]);
        if (clamped <= b.capacity + 1e-12) continue;
        double tlo = 0.0, thi = 1e-12;
        for (std::size_t i : b.indices) thi = std::max(thi, x[i] - lo[i]);
        for (int it = 0; it < 100; ++it) {
          const double tau = 0.5 * (tlo + thi);
          double s2 = 0.0;
          for (std::size_t i : b.indices) s2 += std::clamp(x[i] - tau, lo[i], hi[i]);
          (s2 > b.capacity ? tlo : thi) = tau;
        }
        for (std::size_t i : b.indices) x[i] = std::clamp(x[i] - thi, lo[i], hi[i]);
      }
      for (const auto& c : constraints) {
        const double v = dot(c.coeffs, x) - c.bound;
        if (v <= 1e-12) continue;
        const double nn = dot(c.coeffs, c.coeffs);
        if (nn <= 0.0) continue;
        for (std::size_t i = 0; i < x.size(); ++i) x[i] -= v / nn * c.coeffs[i];
      }
      clamp_box(x);
      if (contains(x, 1e-9)) return x;
    }
    if (!contains(x, 1e-7)) {
      throw convergence_error("solve_maximin: projection failed to reach the feasible set");
    }
    return x;
  }
};

struct StepSchedule {
  enum class Kind { Constant, InverseSqrt };
  Kind kind = Kind::InverseSqrt;
  double eta = 0.0;  // 0 picks range(S) * diameter / sqrt(maxIters)

  static StepSchedule constant(double eta) { return {Kind::Constant, eta}; }
  static StepSchedule inverse_sqrt(double eta0 = 0.0) { return {Kind::InverseSqrt, eta0}; }
};

enum class InnerOracle { ClosedForm, GradientAscent };

struct SolveConfig {
  std::size_t max_iters = 2000;
  StepSchedule step = StepSchedule::inverse_sqrt();
  double tolerance = 1e-6;
  InnerOracle inner = InnerOracle::ClosedForm;
  std::size_t inner_steps = 64;
  std::uint64_t seed = 0;
  std::size_t restarts = 1;
  bool record_trace = false;
};

struct TracePoint {
  std::size_t iter = 0;
  double value = 0.0;
  double gap = 0.0;
  double step = 0.0;
};

struct SolveReport {
  Vec theta;
  WeightVector adversary;
  double value = 0.0;
  double gap_estimate = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<TracePoint> trace;
};

namespace detail {

inline const WeightSet* objective_set(const Objective& obj) {
  const auto* r = std::get_if<RobustAggregator>(&obj);
  return r == nullptr ? nullptr : &r->set;
}

inline const Aggregator& objective_base(const Objective& obj) {
  if (const auto* a = std::get_if<Aggregator>(&obj)) return *a;
  return std::get<RobustAggregator>(obj).base;
}

inline Sense sense_of(SolveSense s) {
  return s == SolveSense::MaximizeWelfare ? Sense::Utility : Sense::Disutility;
}

}  // namespace detail

/// Danskin-style subgradient of theta -> extremal_w M(S(theta); w): the
/// aggregator gradient at the inner witness, chained through the Jacobian.
inline Vec envelope_subgradient(const ObjectiveSpec& obj, const Vec& theta, const WeightSet& W) {
  const Vec s = obj.map.eval(theta);
  const SentimentVector sv{s, detail::sense_of(obj.sense)};
  const Direction dir = obj.sense == SolveSense::MaximizeWelfare ? Direction::Minimize
                                                                 : Direction::Maximize;
  const Vec grad_s = robust_inner(detail::objective_base(obj.objective), W, sv, dir).grad_s;
  const Mat jac = obj.map.jacobian(theta);
  Vec grad_theta(obj.map.theta_dim, 0.0);
  for (std::size_t i = 0; i < obj.map.g; ++i) {
    for (std::size_t j = 0; j < obj.map.theta_dim; ++j) {
      grad_theta[j] += grad_s[i] * jac[i][j];
    }
  }
  return grad_theta;
}

namespace detail {

// Upper bound of the free range of coordinate k given fixed earlier
// coordinates, assuming every later coordinate can sit at its lower bound.
inline double coordinate_cap(const FeasibleSet& fs, const Vec& x, std::size_t k) {
  double cap = fs.hi[k];
  for (const auto& b : fs.budgets) {
    bool involves = false;
    double used = 0.0;
    for (std::size_t i : b.indices) {
      if (i == k) involves = true;
      else if (i < k) used += x[i];
      else used += fs.lo[i];
    }
    if (involves) cap = std::min(cap, b.capacity - used);
  }
  return cap;
}

// Nested coordinate golden-section over a box/budget feasible set. Valid for
// jointly concave (max) or convex (min) objectives; dimensions <= 3.
inline std::pair<Vec, double> refine_over_feasible(const FeasibleSet& fs,
                                                   const std::function<double(const Vec&)>& f,
                                                   bool maximize) {
  const std::size_t d = fs.dim();
  Vec x = fs.lo;
  double best_v = maximize ? -1e300 : 1e300;
  Vec best_x = fs.project(fs.lo);
  const int iter_budget[3] = {80, 60, 48};
  const std::function<double(Vec&, std::size_t)> level = [&](Vec& pt, std::size_t k) -> double {
    if (k == d) {
      const double v = f(pt);
      if (maximize ? v > best_v : v < best_v) {
        best_v = v;
        best_x = pt;
      }
      return v;
    }
    const double lo = fs.lo[k];
    const double hi = std::max(lo, coordinate_cap(fs, pt, k));
    const auto value_at = [&](double xv) {
      Vec local = pt;
      local[k] = xv;
      return level(local, k + 1);
    };
    if (hi - lo < 1e-14) return value_at(lo);
    const auto [xv, v] = golden_section(value_at, lo, hi,
                                        maximize, iter_budget[std::min<std::size_t>(k, 2)]);
    Vec local = pt;
    local[k] = xv;
    level(local, k + 1);
    return v;
  };
  level(x, 0);
  return {best_x, best_v};
}

}  // namespace detail

/// Approximate saddle point of the robust objective over the feasible set:
/// projected subgradient on theta against the exact inner adversary, then a
/// nested coordinate refinement for low dimensions. The reported gap is the
/// duality gap against the averaged adversary's best response.
inline SolveReport solve_maximin(const ObjectiveSpec& obj, const FeasibleSet& feasible,
                                 const WeightSet& W_in, const SolveConfig& cfg) {
  if (cfg.max_iters == 0 || cfg.tolerance <= 0.0) {
    throw domain_error("solve_maximin: iterations and tolerance must be positive");
  }
  if (cfg.step.kind == StepSchedule::Kind::Constant && cfg.step.eta <= 0.0) {
    throw domain_error("solve_maximin: constant step requires a positive size");
  }
  const WeightSet* from_obj = detail::objective_set(obj.objective);
  if (from_obj != nullptr && dimension(*from_obj) != dimension(W_in)) {
    throw domain_error("solve_maximin: objective weight set conflicts with the provided one");
  }
  const WeightSet& W = from_obj != nullptr ? *from_obj : W_in;
  const Aggregator& base = detail::objective_base(obj.objective);
  const bool welfare = obj.sense == SolveSense::MaximizeWelfare;
  const Direction inner_dir = welfare ? Direction::Minimize : Direction::Maximize;
  const Sense sense = detail::sense_of(obj.sense);

  const auto robust_at = [&](const Vec& theta) {
    return robust_inner(base, W, {obj.map.eval(theta), sense}, inner_dir);
  };
  const auto value_at = [&](const Vec& theta) { return robust_at(theta).value; };

  // Curvature contract probe: welfare objectives must be concave along
  // segments, malfare convex. Persistent violations abort the solve.
  int violations = 0;
  const auto probe_segment = [&](const Vec& a, const Vec& b) {
    Vec mid(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) mid[i] = 0.5 * (a[i] + b[i]);
    const double va = value_at(a), vb = value_at(b), vm = value_at(mid);
    const double slack = 1e-8 * (1.0 + std::abs(va) + std::abs(vb));
    const bool bad = welfare ? vm + slack < 0.5 * (va + vb) : vm - slack > 0.5 * (va + vb);
    if (bad && ++violations >= 3) {
      throw domain_error("solve_maximin: curvature contract violation along probe segments");
    }
  };

  SolveReport best_report;
  bool have_report = false;

  for (std::size_t restart = 0; restart < std::max<std::size_t>(1, cfg.restarts); ++restart) {
    std::mt19937_64 gen(cfg.seed + 0x9e3779b97f4a7c15ULL * restart);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const auto random_feasible = [&] {
      Vec x(feasible.dim());
      for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = feasible.lo[i] + U(gen) * (feasible.hi[i] - feasible.lo[i]);
      }
      return feasible.project(std::move(x));
    };
    Vec theta = random_feasible();
    probe_segment(theta, random_feasible());

    RobustEvaluation cur = robust_at(theta);
    Vec best_theta = theta;
    double best_value = cur.value;
    WeightVector adv_sum = cur.adversary;
    std::size_t adv_count = 1;

    double eta0 = cfg.step.eta;
    if (eta0 <= 0.0) {
      const double rng = range_of(obj.map.eval(theta));
      eta0 = std::max(rng, 1e-3) * std::max(feasible.l2_diameter(), 1e-6) /
             std::sqrt(static_cast<double>(cfg.max_iters));
    }

    SolveReport report;
    report.trace.reserve(cfg.record_trace ? cfg.max_iters : 0);
    std::size_t it = 0;
    Vec prev_theta = theta;
    for (it = 1; it <= cfg.max_iters; ++it) {
      const Vec grad = envelope_subgradient(obj, theta, W);
      const double eta = cfg.step.kind == StepSchedule::Kind::Constant
                             ? cfg.step.eta
                             : eta0 / std::sqrt(static_cast<double>(it));
      Vec next(theta.size());
      for (std::size_t i = 0; i < theta.size(); ++i) {
        next[i] = theta[i] + (welfare ? eta : -eta) * grad[i];
      }
      next = feasible.project(std::move(next));
      prev_theta = theta;
      theta = std::move(next);
      cur = robust_at(theta);
      for (std::size_t i = 0; i < adv_sum.size(); ++i) adv_sum[i] += cur.adversary[i];
      ++adv_count;
      const bool improved = welfare ? cur.value > best_value : cur.value < best_value;
      if (improved) {
        best_value = cur.value;
        best_theta = theta;
      }
      const double succ_gap = std::abs(cur.value - best_value);
      if (cfg.record_trace) report.trace.push_back({it, cur.value, succ_gap, eta});
      if (it % 64 == 0) probe_segment(random_feasible(), random_feasible());
      if (it > 16 && succ_gap <= cfg.tolerance * 1e-3 &&
          norm_l2(sub(theta, prev_theta)) <= 1e-14) {
        break;  // projected fixed point
      }
    }

    // Low-dimensional polish: the curvature contract makes the robust value
    // unimodal per coordinate, so nested golden-section reaches far past
    // subgradient accuracy.
    if (feasible.dim() <= 3 && feasible.constraints.empty()) {
      const auto [rx, rv] = detail::refine_over_feasible(feasible, value_at, welfare);
      if (welfare ? rv > best_value : rv < best_value) {
        best_value = rv;
        best_theta = rx;
      }
    }

    // Dual estimate: best response of the averaged adversary, optimized a
    // short way from the incumbent.
    WeightVector adv_avg(adv_sum.size());
    for (std::size_t i = 0; i < adv_sum.size(); ++i) {
      adv_avg[i] = adv_sum[i] / static_cast<double>(adv_count);
    }
    adv_avg = project_simplex(adv_avg);
    double dual = best_value;
    {
      const Aggregator fixed = with_weights(base, adv_avg);
      const auto fixed_val = [&](const Vec& th) {
        return aggregate(fixed, {obj.map.eval(th), sense});
      };
      Vec th = best_theta;
      double fv = fixed_val(th);
      dual = fv;
      for (std::size_t k = 1; k <= 64; ++k) {
        const Vec s = obj.map.eval(th);
        const Vec gs = gradient(fixed, {s, sense});
        const Mat jac = obj.map.jacobian(th);
        Vec gt(obj.map.theta_dim, 0.0);
        for (std::size_t i = 0; i < obj.map.g; ++i) {
          for (std::size_t j = 0; j < obj.map.theta_dim; ++j) gt[j] += gs[i] * jac[i][j];
        }
        const double eta = eta0 / std::sqrt(static_cast<double>(k));
        for (std::size_t j = 0; j < th.size(); ++j) {
          th[j] += (welfare ? eta : -eta) * gt[j];
        }
        th = feasible.project(std::move(th));
        fv = fixed_val(th);
        if (welfare ? fv > dual : fv < dual) dual = fv;
      }
      if (feasible.dim() <= 3 && feasible.constraints.empty()) {
        const auto [rx, rv] = detail::refine_over_feasible(feasible, fixed_val, welfare);
        (void)rx;
        if (welfare ? rv > dual : rv < dual) dual = rv;
      }
    }

    report.theta = best_theta;
    report.adversary = robust_at(best_theta).adversary;
    report.value = best_value;
    report.gap_estimate = std::max(0.0, welfare ? dual - best_value : best_value - dual);
    report.iterations = it > cfg.max_iters ? cfg.max_iters : it;
    report.converged = report.gap_estimate <= cfg.tolerance;

    const bool better = !have_report ||
                        (welfare ? report.value > best_report.value
                                 : report.value < best_report.value);
    if (better) best_report = std::move(report);
    have_report = true;
  }
  return best_report;
}

}  // namespace fairwell
