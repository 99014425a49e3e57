#pragma once

// Interval, continuity, and sample-size calculators layered on the robust
// evaluators: worst-case/best-case sandwiches over a weight set, weight-set
// gap bounds, Holder/Lipschitz certificates for robust power means with an
// empirical stress check, generalization intervals from per-group error
// bounds, and the resulting sample-complexity estimate.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fairwell/solvers.hpp"

namespace fairwell {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// (inf, sup) of the aggregator over w in W at fixed sentiments. Both
/// endpoints are attained by feasible adversary weights; sorted-pairing
/// families may widen the far endpoint to a sound outer bound.
inline Interval sandwich(const SentimentVector& s, const Aggregator& agg, const WeightSet& W) {
  return {robust_inner(agg, W, s, Direction::Minimize).value,
          robust_inner(agg, W, s, Direction::Maximize).value};
}

/// Upper bound on how far any two members of W can move a weighted sum of
/// sentiments spanning the given range: Range(S) * Diam_1(W).
inline double robust_gap_bound(double s_range, const WeightSet& W) {
  if (!(s_range >= 0.0)) throw domain_error("robust_gap_bound: range must be nonnegative");
  return s_range * diameter_l1(W).value;
}

enum class HolderNorm { L1, L2, Linf, SelfReferential };

inline const char* holder_norm_name(HolderNorm n) {
  switch (n) {
    case HolderNorm::L1: return "l1";
    case HolderNorm::L2: return "l2";
    case HolderNorm::Linf: return "linf";
    default: return "self";
  }
}

/// |M(S) - M(S')| <= lambda * ||S - S'||^alpha on [0, r]^g. alpha = 1 is a
/// Lipschitz certificate. branch names the rule that produced it.
struct HolderCertificate {
  double lambda = 0.0;
  double alpha = 1.0;
  HolderNorm norm = HolderNorm::Linf;
  std::string branch;
};

struct HolderReport {
  HolderCertificate best;
  std::vector<HolderCertificate> applicable;
};

namespace detail {

struct CoordinateBounds {
  double w_min = 0.0;
  double w_max = 1.0;
};

/// Outer bounds on the coordinates seen across the set: w_min lower-bounds
/// the infimum and w_max upper-bounds the supremum, so certificates built
/// from them stay sound. Exact for the polytopal variants; balls clip the
/// base bounds by the radius.
inline CoordinateBounds coordinate_bounds(const WeightSet& set) {
  const std::size_t g = dimension(set);
  if (g == 1) return {1.0, 1.0};
  return std::visit(
      [&](const auto& v) -> CoordinateBounds {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Singleton>) {
          return {*std::min_element(v.w_star.begin(), v.w_star.end()),
                  *std::max_element(v.w_star.begin(), v.w_star.end())};
        } else if constexpr (std::is_same_v<T, FullSimplex>) {
          return {0.0, 1.0};
        } else if constexpr (std::is_same_v<T, LowerBounded>) {
          const double lo = *std::min_element(v.w_star.begin(), v.w_star.end());
          const double hi = *std::max_element(v.w_star.begin(), v.w_star.end());
          return {v.gamma * lo, std::min(1.0, v.gamma * hi + (1.0 - v.gamma))};
        } else if constexpr (std::is_same_v<T, PermutationOrbit>) {
          return {*std::min_element(v.sorted_weights.begin(), v.sorted_weights.end()),
                  *std::max_element(v.sorted_weights.begin(), v.sorted_weights.end())};
        } else {
          const CoordinateBounds base = std::visit(
              [](const auto& b) { return coordinate_bounds(WeightSet{b}); }, v.base);
          return {std::max(0.0, base.w_min - v.radius),
                  std::min(1.0, base.w_max + v.radius)};
        }
      },
      set);
}

inline int holder_norm_rank(HolderNorm n) {
  switch (n) {
    case HolderNorm::SelfReferential: return 0;
    case HolderNorm::Linf: return 1;
    case HolderNorm::L2: return 2;
    default: return 3;
  }
}

/// Preference order: larger exponent first (stronger near the optimum on a
/// bounded domain), then smaller constant, then the pointwise-smaller norm.
inline bool tighter_certificate(const HolderCertificate& a, const HolderCertificate& b) {
  if (a.alpha != b.alpha) return a.alpha > b.alpha;
  if (a.lambda != b.lambda) return a.lambda < b.lambda;
  return holder_norm_rank(a.norm) < holder_norm_rank(b.norm);
}

}  // namespace detail

/// Continuity certificates for the robust power mean with exponent p over W
/// on sentiment domain [0, r]^g. Emits every applicable rule and the
/// tightest one; throws when no rule applies (weight floor of zero with a
/// nonpositive exponent).
inline HolderReport holder_certificate(const Power& p, const WeightSet& W, double r) {
  if (!(r > 0.0)) throw domain_error("holder_certificate: sentiment range must be positive");
  const detail::CoordinateBounds cb = detail::coordinate_bounds(W);

  HolderReport report;
  auto emit = [&](double lambda, double alpha, HolderNorm norm, const char* branch) {
    report.applicable.push_back({lambda, alpha, norm, branch});
  };

  if (p.geq(1.0)) {
    emit(1.0, 1.0, HolderNorm::Linf, "sup_contraction");
    if (p.is_finite() && p.value == 1.0) emit(cb.w_max, 1.0, HolderNorm::L1, "weighted_sum");
  }
  if (p.leq(0.0) && !(p.is_finite() && p.value == 0.0) && cb.w_min > 0.0) {
    const double lambda =
        p.is_neg_inf() ? 1.0 : std::pow(cb.w_min, -1.0 / std::abs(p.value));
    emit(lambda, 1.0, HolderNorm::Linf, "weight_floor_root");
  }
  if (p.is_finite() && p.value > 0.0 && p.value < 1.0) {
    emit(std::pow(r, 1.0 - p.value) / p.value, p.value, HolderNorm::Linf, "fractional_power");
  }
  if (p.leq(1.0) && cb.w_min > 0.0) {
    emit(std::pow(r, 1.0 - cb.w_min), cb.w_min, HolderNorm::Linf, "weight_floor_exponent");
  }

  if (report.applicable.empty())
    throw domain_error("holder_certificate: no rule applies (zero weight floor)");
  report.best = *std::min_element(report.applicable.begin(), report.applicable.end(),
                                  detail::tighter_certificate);
  return report;
}

namespace detail {

/// Welfare families are evaluated at their worst case (infimum over W) and
/// malfare families at theirs (supremum).
inline Sense natural_sense(const Aggregator& agg) {
  return std::visit(
      [](const auto& v) -> Sense {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, PowerMean>) {
          return v.p.leq(1.0) ? Sense::Utility : Sense::Disutility;
        } else if constexpr (std::is_same_v<T, Umswf>) {
          return Sense::Utility;
        } else {
          return v.sense;
        }
      },
      agg);
}

inline double holder_norm_value(HolderNorm norm, const Vec& delta, const Aggregator& agg,
                                const WeightSet& W, Sense sense, Direction dir) {
  switch (norm) {
    case HolderNorm::L1: {
      double t = 0.0;
      for (double d : delta) t += std::abs(d);
      return t;
    }
    case HolderNorm::L2: {
      double t = 0.0;
      for (double d : delta) t += d * d;
      return std::sqrt(t);
    }
    case HolderNorm::Linf: {
      double t = 0.0;
      for (double d : delta) t = std::max(t, std::abs(d));
      return t;
    }
    default: {
      Vec abs_delta(delta.size());
      for (std::size_t i = 0; i < delta.size(); ++i) abs_delta[i] = std::abs(delta[i]);
      return robust_inner(agg, W, {abs_delta, sense}, dir).value;
    }
  }
}

}  // namespace detail

struct HolderCheck {
  bool passed = true;
  double max_ratio = 0.0;
};

/// Randomized stress test of a certificate: samples sentiment pairs in
/// [0, r]^g and compares the robust value difference against the certified
/// bound. max_ratio is the largest observed difference-to-bound ratio.
inline HolderCheck holder_empirical_check(const Aggregator& agg, const WeightSet& W,
                                          const HolderCertificate& cert, int trials, double r,
                                          std::uint64_t seed) {
  if (trials < 1) throw domain_error("holder_empirical_check: trials must be positive");
  if (!(r > 0.0)) throw domain_error("holder_empirical_check: range must be positive");
  const std::size_t g = dimension(W);
  const Sense sense = detail::natural_sense(agg);
  const Direction dir =
      sense == Sense::Utility ? Direction::Minimize : Direction::Maximize;

  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> coord(0.0, r);
  HolderCheck out;
  for (int trial = 0; trial < trials; ++trial) {
    Vec a(g), b(g), delta(g);
    for (std::size_t i = 0; i < g; ++i) {
      a[i] = coord(gen);
      b[i] = coord(gen);
      delta[i] = a[i] - b[i];
    }
    const double va = robust_inner(agg, W, {a, sense}, dir).value;
    const double vb = robust_inner(agg, W, {b, sense}, dir).value;
    const double lhs = std::abs(va - vb);
    const double nrm = detail::holder_norm_value(cert.norm, delta, agg, W, sense, dir);
    const double rhs = cert.lambda * std::pow(nrm, cert.alpha);
    if (rhs <= 0.0) {
      if (lhs > 1e-12) out.passed = false;
      continue;
    }
    const double ratio = lhs / rhs;
    out.max_ratio = std::max(out.max_ratio, ratio);
    if (lhs > rhs * (1.0 + 1e-9) + 1e-12) out.passed = false;
  }
  return out;
}

/// Value interval for the true sentiments given empirical values and
/// per-group error radii: evaluates the objective at the clipped lower and
/// raised upper sentiment vectors. Sound for every implemented aggregator
/// since all are coordinatewise monotone.
inline Interval generalization_sandwich(const SentimentVector& s_hat, const Vec& eps,
                                        const Objective& obj) {
  require_same_size(s_hat.size(), eps.size(), "generalization_sandwich");
  for (double e : eps) {
    if (!(e >= 0.0)) throw domain_error("generalization_sandwich: error radii must be nonnegative");
  }
  Vec lo(s_hat.size()), hi(s_hat.size());
  for (std::size_t i = 0; i < s_hat.size(); ++i) {
    lo[i] = std::max(0.0, s_hat.values[i] - eps[i]);
    hi[i] = s_hat.values[i] + eps[i];
  }
  return {objective_value(obj, {lo, s_hat.sense}), objective_value(obj, {hi, s_hat.sense})};
}

/// Inputs for the sample-size bound: a continuity certificate, per-group
/// variance proxies v, the tail count t of the per-group deviation bound,
/// and the target accuracy and confidence.
struct SampleComplexityQuery {
  double lambda = 1.0;
  double alpha = 1.0;
  HolderNorm norm = HolderNorm::Linf;
  Vec v;
  std::int64_t t = 1;
  double delta = 0.05;
  double epsilon = 0.1;
  std::int64_t m0 = 1;
};

/// max(m0, ceil((lambda/eps)^(2/alpha) * ||i -> sqrt(v_i)||^2 * ln(t g / delta)))
/// with the norm taken from the certificate.
inline std::int64_t sample_complexity(const SampleComplexityQuery& q) {
  if (!(q.lambda > 0.0)) throw domain_error("sample_complexity: lambda must be positive");
  if (!(q.alpha > 0.0) || q.alpha > 1.0)
    throw domain_error("sample_complexity: alpha must lie in (0, 1]");
  if (q.v.empty()) throw domain_error("sample_complexity: variance proxies missing");
  for (double vi : q.v) {
    if (!(vi > 0.0)) throw domain_error("sample_complexity: variance proxies must be positive");
  }
  if (q.t < 1) throw domain_error("sample_complexity: tail count must be positive");
  if (!(q.delta > 0.0) || q.delta >= 1.0)
    throw domain_error("sample_complexity: delta must lie in (0, 1)");
  if (!(q.epsilon > 0.0)) throw domain_error("sample_complexity: epsilon must be positive");
  if (q.m0 < 1) throw domain_error("sample_complexity: minimum sample size must be positive");

  const double g = static_cast<double>(q.v.size());
  double norm_sq = 0.0;
  switch (q.norm) {
    case HolderNorm::L1: {
      double t = 0.0;
      for (double vi : q.v) t += std::sqrt(vi);
      norm_sq = t * t;
      break;
    }
    case HolderNorm::L2:
      for (double vi : q.v) norm_sq += vi;
      break;
    case HolderNorm::Linf:
      for (double vi : q.v) norm_sq = std::max(norm_sq, vi);
      break;
    default:
      throw domain_error("sample_complexity: self-referential norms need an explicit aggregator");
  }

  const double bound = std::pow(q.lambda / q.epsilon, 2.0 / q.alpha) * norm_sq *
                       std::log(static_cast<double>(q.t) * g / q.delta);
  if (!std::isfinite(bound) || bound > 9.0e18)
    throw domain_error("sample_complexity: bound exceeds the integer range");
  const std::int64_t m = static_cast<std::int64_t>(std::ceil(bound));
  return std::max(q.m0, m);
}

}  // namespace fairwell
