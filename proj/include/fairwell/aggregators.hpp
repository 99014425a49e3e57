// Part of fairwell, a library for robust fair welfare and malfare objectives.
// MIT licensed; see LICENSE in the repository root.
//
// Welfare and malfare aggregator families over per-group sentiment:
// weighted power means, generalized Gini, utilitarian-maximin (UMSWF),
// and the sorted-pairing Gini power mean, plus their (sub)gradients.

#pragma once

#include <variant>

#include "fairwell/core.hpp"

namespace fairwell {

struct PowerMean {
  Power p;
  WeightVector weights;
};

/// Generalized Gini. Weights are stored ascending; the welfare form pairs
/// them ascending against descending-sorted sentiment, the malfare form
/// pairs them descending against descending-sorted sentiment.
struct Gini {
  WeightVector sorted_weights;  // ascending
  Sense sense = Sense::Utility;
};

/// Utilitarian-maximin: gamma * (w_star . S) + (1 - gamma) * extreme(S).
struct Umswf {
  double gamma = 0.0;
  WeightVector base_weights;
};

/// Sorted-pairing power mean: sentiment sorted ascending, paired with the
/// weight sequence descending for welfare (p <= 1) or ascending for malfare
/// (p >= 1), then fed to the weighted power mean.
struct GiniPowerMean {
  Power p;
  WeightVector sorted_weights;  // ascending
  Sense sense = Sense::Utility;
};

using Aggregator = std::variant<PowerMean, Gini, Umswf, GiniPowerMean>;

namespace detail {

// |p| below this routes to the geometric-mean branch; the direct formula
// cancels catastrophically near p = 0.
inline constexpr double kGeometricCutoff = 1e-8;

inline void require_ascending(const WeightVector& w, const char* who) {
  for (std::size_t i = 1; i < w.size(); ++i) {
    if (w[i] + 1e-12 < w[i - 1]) {
      throw domain_error(std::string(who) + ": weight sequence not ascending");
    }
  }
}

// Extreme of s over coordinates with positive weight. Zero-weight groups are
// absent from the limit mean, so they cannot decide it.
inline double supported_extreme(const Vec& s, const WeightVector& w, bool want_min) {
  bool seen = false;
  double best = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (w[i] <= 0.0) continue;
    if (!seen || (want_min ? s[i] < best : s[i] > best)) best = s[i], seen = true;
  }
  if (!seen) throw domain_error("power_mean: all weights are zero");
  return best;
}

inline double geometric_mean(const Vec& s, const WeightVector& w) {
  double log_sum = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (w[i] <= 0.0) continue;  // 0 * ln(0) := 0
    if (s[i] == 0.0) return 0.0;
    log_sum += w[i] * std::log(s[i]);
  }
  return std::exp(log_sum);
}

// (sum_i w_i s_i^p)^(1/p) for finite p != 0, evaluated against the supported
// extreme as scale so that very large |p| neither overflows nor underflows.
inline double finite_power_mean(const Vec& s, const WeightVector& w, double p) {
  if (p == 1.0) {  // exact linear case, no rescaling noise
    double v = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) v += w[i] * s[i];
    return v;
  }
  if (p <= 0.0) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (w[i] > 0.0 && s[i] == 0.0) return 0.0;  // limit convention
    }
  }
  const double scale = supported_extreme(s, w, /*want_min=*/p < 0.0);
  if (scale == 0.0) return 0.0;  // p > 0 with the relevant coordinates all zero
  double sum = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (w[i] <= 0.0) continue;
    sum += w[i] * std::pow(s[i] / scale, p);
  }
  return scale * std::exp(std::log(sum) / p);
}

}  // namespace detail

/// Weighted power mean M_p(S; w). Finite p != 0 gives (sum w_i S_i^p)^(1/p),
/// p = 0 the weighted geometric mean, p = -inf/+inf the min/max over
/// coordinates with positive weight. For p <= 0 a zero coordinate with
/// positive weight evaluates to 0 (the limiting value).
inline double power_mean(const Vec& s, const WeightVector& w, Power p) {
  require_same_size(s.size(), w.size(), "power_mean");
  require_nonnegative(s, "power_mean");
  require_simplex(w, "power_mean");
  switch (p.kind) {
    case Power::Kind::NegInf: return detail::supported_extreme(s, w, true);
    case Power::Kind::PosInf: return detail::supported_extreme(s, w, false);
    case Power::Kind::Finite: break;
  }
  if (std::abs(p.value) < detail::kGeometricCutoff) return detail::geometric_mean(s, w);
  return detail::finite_power_mean(s, w, p.value);
}

inline double power_mean(const SentimentVector& s, const WeightVector& w, Power p) {
  return power_mean(s.values, w, p);
}

/// Generalized Gini value: weights paired against descending-sorted
/// sentiment, ascending for welfare and descending for malfare. Sorting is
/// stable, so ties keep original index order.
inline double gini(const SentimentVector& s, const Gini& a) {
  require_same_size(s.size(), a.sorted_weights.size(), "gini");
  require_simplex(a.sorted_weights, "gini");
  detail::require_ascending(a.sorted_weights, "gini");
  if (s.sense != a.sense) throw domain_error("gini: sentiment sense does not match aggregator");
  const auto desc = sorted_indices(s.values, /*ascending=*/false);
  const std::size_t g = s.size();
  double v = 0.0;
  for (std::size_t i = 0; i < g; ++i) {
    const double wi = a.sense == Sense::Utility ? a.sorted_weights[i]
                                                : a.sorted_weights[g - 1 - i];
    v += wi * s.values[desc[i]];
  }
  return v;
}

/// Utilitarian-maximin social welfare: gamma * (w_star . S) plus
/// (1 - gamma) * min S for utility (max S for disutility).
inline double umswf(const SentimentVector& s, double gamma, const WeightVector& w_star) {
  require_same_size(s.size(), w_star.size(), "umswf");
  require_simplex(w_star, "umswf");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw domain_error("umswf: gamma outside [0,1]");
  const double ext = s.sense == Sense::Utility
                         ? *std::min_element(s.values.begin(), s.values.end())
                         : *std::max_element(s.values.begin(), s.values.end());
  return gamma * dot(w_star, s.values) + (1.0 - gamma) * ext;
}

namespace detail {

// Pairing used by the Gini power mean: sentiment ascending, weights
// descending for welfare and ascending for malfare.
inline void gini_power_pairing(const SentimentVector& s, const GiniPowerMean& a,
                               Vec& s_sorted, Vec& w_paired,
                               std::vector<std::size_t>& asc) {
  asc = sorted_indices(s.values, /*ascending=*/true);
  const std::size_t g = s.size();
  s_sorted.resize(g);
  w_paired.resize(g);
  for (std::size_t i = 0; i < g; ++i) {
    s_sorted[i] = s.values[asc[i]];
    w_paired[i] = a.sense == Sense::Utility ? a.sorted_weights[g - 1 - i]
                                            : a.sorted_weights[i];
  }
}

}  // namespace detail

/// Gini power mean: the weighted power mean of ascending-sorted sentiment
/// paired with the weight sequence per the family's sense.
inline double gini_power_mean(const SentimentVector& s, const GiniPowerMean& a) {
  require_same_size(s.size(), a.sorted_weights.size(), "gini_power_mean");
  require_simplex(a.sorted_weights, "gini_power_mean");
  detail::require_ascending(a.sorted_weights, "gini_power_mean");
  if (s.sense != a.sense) {
    throw domain_error("gini_power_mean: sentiment sense does not match aggregator");
  }
  if (a.sense == Sense::Utility && !a.p.leq(1.0)) {
    throw domain_error("gini_power_mean: welfare form requires p <= 1");
  }
  if (a.sense == Sense::Disutility && !a.p.geq(1.0)) {
    throw domain_error("gini_power_mean: malfare form requires p >= 1");
  }
  Vec s_sorted, w_paired;
  std::vector<std::size_t> asc;
  detail::gini_power_pairing(s, a, s_sorted, w_paired, asc);
  return power_mean(s_sorted, w_paired, a.p);
}

/// Evaluate any aggregator family on a sentiment vector. Enforces welfare
/// validity (utility requires p <= 1) and malfare validity (disutility
/// requires p >= 1) for the power-mean families.
inline double aggregate(const Aggregator& a, const SentimentVector& s) {
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, PowerMean>) {
          if (s.sense == Sense::Utility && !f.p.leq(1.0)) {
            throw domain_error("aggregate: power mean with p > 1 is not a welfare function");
          }
          if (s.sense == Sense::Disutility && !f.p.geq(1.0)) {
            throw domain_error("aggregate: power mean with p < 1 is not a malfare function");
          }
          return power_mean(s, f.weights, f.p);
        } else if constexpr (std::is_same_v<T, Gini>) {
          return gini(s, f);
        } else if constexpr (std::is_same_v<T, Umswf>) {
          return umswf(s, f.gamma, f.base_weights);
        } else {
          return gini_power_mean(s, f);
        }
      },
      a);
}

namespace detail {

// d/dS_i of the weighted power mean at fixed weights. Requires S > 0 when
// p <= 0; for infinite p this is the indicator of the first extremal
// coordinate among those with positive weight.
inline Vec power_mean_gradient(const Vec& s, const WeightVector& w, Power p) {
  const std::size_t g = s.size();
  Vec grad(g, 0.0);
  if (!p.is_finite()) {
    const bool want_min = p.is_neg_inf();
    const double ext = supported_extreme(s, w, want_min);
    for (std::size_t i = 0; i < g; ++i) {
      if (w[i] > 0.0 && s[i] == ext) {
        grad[i] = 1.0;
        break;
      }
    }
    return grad;
  }
  const double pv = p.value;
  if (pv <= 0.0) {
    for (std::size_t i = 0; i < g; ++i) {
      if (w[i] > 0.0 && s[i] <= 0.0) {
        throw domain_error("gradient: zero sentiment with p <= 0");
      }
    }
  }
  if (std::abs(pv) < kGeometricCutoff) {
    const double m = geometric_mean(s, w);
    for (std::size_t i = 0; i < g; ++i) grad[i] = w[i] > 0.0 ? m * w[i] / s[i] : 0.0;
    return grad;
  }
  if (pv == 1.0) return w;
  const double m = finite_power_mean(s, w, pv);
  for (std::size_t i = 0; i < g; ++i) {
    if (w[i] <= 0.0) continue;
    grad[i] = w[i] * std::pow(s[i], pv - 1.0) * std::pow(m, 1.0 - pv);
  }
  return grad;
}

}  // namespace detail

/// (Sub)gradient of an aggregator with respect to sentiment. Sorted families
/// differentiate the fixed stable-sort pairing at S, which is a valid
/// subgradient; extreme-value cases select the first extremal coordinate.
inline Vec gradient(const Aggregator& a, const SentimentVector& s) {
  return std::visit(
      [&](const auto& f) -> Vec {
        using T = std::decay_t<decltype(f)>;
        const std::size_t g = s.size();
        if constexpr (std::is_same_v<T, PowerMean>) {
          require_same_size(g, f.weights.size(), "gradient");
          require_nonnegative(s.values, "gradient");
          require_simplex(f.weights, "gradient");
          return detail::power_mean_gradient(s.values, f.weights, f.p);
        } else if constexpr (std::is_same_v<T, Gini>) {
          gini(s, f);  // validation
          const auto desc = sorted_indices(s.values, false);
          Vec grad(g, 0.0);
          for (std::size_t i = 0; i < g; ++i) {
            grad[desc[i]] = f.sense == Sense::Utility ? f.sorted_weights[i]
                                                      : f.sorted_weights[g - 1 - i];
          }
          return grad;
        } else if constexpr (std::is_same_v<T, Umswf>) {
          umswf(s, f.gamma, f.base_weights);  // validation
          Vec grad(g, 0.0);
          const std::size_t ext = s.sense == Sense::Utility ? argmin_index(s.values)
                                                            : argmax_index(s.values);
          for (std::size_t i = 0; i < g; ++i) grad[i] = f.gamma * f.base_weights[i];
          grad[ext] += 1.0 - f.gamma;
          return grad;
        } else {
          gini_power_mean(s, f);  // validation
          Vec s_sorted, w_paired;
          std::vector<std::size_t> asc;
          detail::gini_power_pairing(s, f, s_sorted, w_paired, asc);
          const Vec inner = detail::power_mean_gradient(s_sorted, w_paired, f.p);
          Vec grad(g, 0.0);
          for (std::size_t i = 0; i < g; ++i) grad[asc[i]] = inner[i];
          return grad;
        }
      },
      a);
}

}  // namespace fairwell
