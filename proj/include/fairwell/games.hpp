// Part of fairwell, a library for robust fair welfare and malfare objectives.
// MIT licensed; see LICENSE in the repository root.
//
// Two-player placement games between a world-building daemon and an angel
// choosing weights: payoff evaluation, strategic (worst case first mover)
// values, interchangeability gaps, and the coercive angel equilibrium with
// its closed-form strategies.

#pragma once

#include "fairwell/allocation.hpp"

namespace fairwell {

struct Egocentric {};

struct AggregatorPayoff {
  Aggregator m;
};

/// Payoff w . T(S) with T(u) = sgn(p) u^p, or ln(u) when p = 0. The s_min
/// floor declares the domain for p <= 0.
struct UtilityTransform {
  double p = 1.0;
  double s_min = 0.0;
};

/// General-sum payoff (w . S, M_p(S; w_star)): the daemon is self-interested,
/// the angel scores worlds by its own aggregator.
struct AltruisticAngel {
  double p = 1.0;
  WeightVector w_star;
  double s_min = 0.0;
};

using GamePayoff = std::variant<Egocentric, AggregatorPayoff, UtilityTransform, AltruisticAngel>;

using DaemonSpace = std::variant<std::vector<SentimentVector>, AllocationInstance>;

struct GameSpec {
  DaemonSpace daemon_space;
  bool hull = false;  // daemon may mix; mixtures reduce to hull points
  WeightSet angel_space;
  GamePayoff payoff;
  Sense sense = Sense::Utility;
};

namespace detail {

inline double transform_one(double u, double p, double s_min, const char* who) {
  if (p > 0.0) {
    if (u < 0.0) throw domain_error(std::string(who) + ": transform needs nonnegative values");
    return std::pow(u, p);
  }
  if (s_min <= 0.0) throw domain_error(std::string(who) + ": p <= 0 needs a positive floor");
  if (u < s_min - 1e-12) throw domain_error(std::string(who) + ": value below the floor");
  return p == 0.0 ? std::log(u) : -std::pow(u, p);
}

inline Vec transform(const Vec& s, double p, double s_min, const char* who) {
  Vec t(s.size(), 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) t[i] = transform_one(s[i], p, s_min, who);
  return t;
}

// Weighted power mean without sense validation; the altruistic angel's score
// may use any finite exponent on utilities.
inline double raw_power_mean(const Vec& s, const Vec& w, double p) {
  if (p == 0.0) {
    double acc = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (w[i] <= 0.0) continue;
      if (s[i] <= 0.0) return 0.0;
      acc += w[i] * std::log(s[i]);
    }
    return std::exp(acc);
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (w[i] <= 0.0) continue;
    if (s[i] <= 0.0) {
      if (p < 0.0) return 0.0;
      continue;
    }
    acc += w[i] * std::pow(s[i], p);
  }
  return acc <= 0.0 ? 0.0 : std::pow(acc, 1.0 / p);
}

// Distance from x to the convex hull of the points, by projected gradient on
// the mixture weights. Deterministic; accurate enough for membership tests.
inline double hull_distance(const std::vector<Vec>& pts, const Vec& x) {
  const std::size_t m = pts.size();
  if (m == 0) return std::numeric_limits<double>::infinity();
  Vec lam(m, 1.0 / static_cast<double>(m));
  double lip = 1e-12;
  for (const auto& p : pts) lip += dot(p, p);
  const double step = 1.0 / (2.0 * lip);
  Vec resid(x.size(), 0.0);
  const auto refresh = [&] {
    for (std::size_t d = 0; d < x.size(); ++d) {
      double v = -x[d];
      for (std::size_t i = 0; i < m; ++i) v += lam[i] * pts[i][d];
      resid[d] = v;
    }
  };
  for (int it = 0; it < 4000; ++it) {
    refresh();
    Vec grad(m, 0.0);
    double gnorm = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      grad[i] = 2.0 * dot(pts[i], resid);
      gnorm = std::max(gnorm, std::abs(grad[i]));
    }
    if (gnorm * step < 1e-14) break;
    for (std::size_t i = 0; i < m; ++i) lam[i] -= step * grad[i];
    lam = project_simplex(lam);
  }
  refresh();
  return std::sqrt(std::max(0.0, dot(resid, resid)));
}

// Enumerates nonnegative integer vectors of length m summing to n (or at
// most n when exact is false).
template <typename Fn>
inline void compositions(std::size_t m, std::size_t n, bool exact, Fn fn) {
  std::vector<std::size_t> parts(m, 0);
  const std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t slot,
                                                                std::size_t left) {
    if (slot + 1 == m) {
      if (exact) {
        parts[slot] = left;
        fn(parts);
        return;
      }
      for (std::size_t v = 0; v <= left; ++v) {
        parts[slot] = v;
        fn(parts);
      }
      return;
    }
    for (std::size_t v = 0; v <= left; ++v) {
      parts[slot] = v;
      rec(slot + 1, left - v);
    }
  };
  rec(0, n);
}

inline bool action_feasible(const GameSpec& G, const Vec& s) {
  if (const auto* acts = std::get_if<std::vector<SentimentVector>>(&G.daemon_space)) {
    for (const auto& a : *acts) {
      if (a.size() != s.size()) return false;
      double diff = 0.0;
      for (std::size_t i = 0; i < s.size(); ++i) diff = std::max(diff, std::abs(a.values[i] - s[i]));
      if (diff <= 1e-7) return true;
    }
    if (!G.hull) return false;
    std::vector<Vec> pts;
    for (const auto& a : *acts) pts.push_back(a.values);
    return hull_distance(pts, s) <= 1e-6;
  }
  const auto& inst = std::get<AllocationInstance>(G.daemon_space);
  for (double v : s) {
    if (v < -1e-9) return false;
  }
  if (const auto* lin = std::get_if<LinearSingle>(&inst.model)) {
    double total = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (lin->p[i] <= 0.0) {
        if (s[i] > 1e-9) return false;
        continue;
      }
      total += s[i] / lin->p[i];
    }
    return total <= inst.capacities[0] + 1e-6;
  }
  if (const auto* sq = std::get_if<SqrtSingle>(&inst.model)) {
    double total = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (sq->p[i] <= 0.0) {
        if (s[i] > 1e-9) return false;
        continue;
      }
      const double r = s[i] / sq->p[i];
      total += r + 0.5 * r * r;
    }
    return total <= inst.capacities[0] + 1e-6;
  }
  if (std::holds_alternative<LinearMulti>(inst.model)) {
    if (inst.g * inst.k > 8) return true;
    const auto bounds = feasible_utility_set_bounds(inst);
    return hull_distance(std::get<UtilityPolytope>(bounds).vertices, s) <= 1e-6;
  }
  const auto& lg = std::get<LogSaturating>(inst.model);
  for (std::size_t i = 0; i < inst.g; ++i) {
    double inner = 0.0;
    for (std::size_t j = 0; j < inst.k; ++j) {
      const double cap = lg.C[i][j] ? std::min(*lg.C[i][j], inst.capacities[j])
                                    : inst.capacities[j];
      inner += lg.P[i][j] * cap;
    }
    if (s[i] > std::log1p(inner) + 1e-6) return false;
  }
  return true;
}

}  // namespace detail

inline void validate_game(const GameSpec& G) {
  const std::size_t g = dimension(G.angel_space);
  const auto check_floor = [&](double p, double s_min) {
    if (p > 0.0) return;
    if (s_min <= 0.0) throw domain_error("validate_game: p <= 0 requires a positive floor");
    if (const auto* acts = std::get_if<std::vector<SentimentVector>>(&G.daemon_space)) {
      for (const auto& a : *acts) {
        for (double v : a.values) {
          if (v < s_min - 1e-12) {
            throw domain_error("validate_game: action below the declared floor");
          }
        }
      }
    } else {
      throw domain_error("validate_game: p <= 0 payoffs need a floored finite daemon space");
    }
  };
  if (const auto* acts = std::get_if<std::vector<SentimentVector>>(&G.daemon_space)) {
    if (acts->empty()) throw domain_error("validate_game: empty daemon space");
    for (const auto& a : *acts) {
      require_same_size(g, a.size(), "validate_game");
      if (a.sense != G.sense) throw domain_error("validate_game: action sense mismatch");
    }
  } else {
    const auto& inst = std::get<AllocationInstance>(G.daemon_space);
    validate_instance(inst);
    require_same_size(g, inst.g, "validate_game");
    if (G.sense != Sense::Utility) {
      throw domain_error("validate_game: allocation-backed games are utility games");
    }
  }
  if (const auto* tr = std::get_if<UtilityTransform>(&G.payoff)) {
    const bool ok = G.sense == Sense::Utility ? tr->p <= 1.0 : tr->p >= 1.0;
    if (!ok) throw domain_error("validate_game: transform exponent conflicts with the sense");
    check_floor(tr->p, tr->s_min);
  }
  if (const auto* alt = std::get_if<AltruisticAngel>(&G.payoff)) {
    require_same_size(g, alt->w_star.size(), "validate_game");
    require_simplex(alt->w_star, "validate_game");
    check_floor(alt->p, alt->s_min);
  }
}

/// Evaluates the payoff pair for one daemon action and one angel weight
/// vector. The first three payoff kinds are zero-sum by construction.
inline std::pair<double, double> payoff(const GameSpec& G, const SentimentVector& s,
                                        const WeightVector& w) {
  validate_game(G);
  require_same_size(s.size(), w.size(), "payoff");
  if (!membership(G.angel_space, w, 1e-7)) {
    throw domain_error("payoff: weights outside the angel action space");
  }
  if (!detail::action_feasible(G, s.values)) {
    throw domain_error("payoff: infeasible daemon action");
  }
  return std::visit(
      [&](const auto& pf) -> std::pair<double, double> {
        using T = std::decay_t<decltype(pf)>;
        if constexpr (std::is_same_v<T, Egocentric>) {
          const double v = dot(w, s.values);
          return {v, -v};
        } else if constexpr (std::is_same_v<T, AggregatorPayoff>) {
          const double v = aggregate(with_weights(pf.m, w), s);
          return {v, -v};
        } else if constexpr (std::is_same_v<T, UtilityTransform>) {
          const double v = dot(w, detail::transform(s.values, pf.p, pf.s_min, "payoff"));
          return {v, -v};
        } else {
          return {dot(w, s.values), detail::raw_power_mean(s.values, pf.w_star, pf.p)};
        }
      },
      G.payoff);
}

struct StrategicValue {
  std::size_t choice = 0;  // index into a finite daemon space
  SentimentVector action;
  BestResponse angel;
  double value = 0.0;  // payoff units
  Vec theta;           // allocation parameters when the space is continuous
};

namespace detail {

inline std::pair<double, BestResponse> worst_case_payoff(const GameSpec& G,
                                                         const SentimentVector& s) {
  const Direction dir = G.sense == Sense::Utility ? Direction::Minimize : Direction::Maximize;
  return std::visit(
      [&](const auto& pf) -> std::pair<double, BestResponse> {
        using T = std::decay_t<decltype(pf)>;
        if constexpr (std::is_same_v<T, AggregatorPayoff>) {
          const auto ev = robust_inner(pf.m, G.angel_space, s, dir);
          return {ev.value, BestResponse{ev.adversary, ev.value, ev.exact}};
        } else if constexpr (std::is_same_v<T, UtilityTransform>) {
          const Vec t = transform(s.values, pf.p, pf.s_min, "daemon_strategic_value");
          const BestResponse br = best_response(G.angel_space, t, dir);
          return {br.value, br};
        } else {
          const BestResponse br = best_response(G.angel_space, s.values, dir);
          return {br.value, br};
        }
      },
      G.payoff);
}

}  // namespace detail

/// Worst-case optimal daemon play. Finite spaces are enumerated with ties
/// resolved to the lowest index; allocation-backed spaces delegate to the
/// maximin solver and require an explicit configuration.
inline StrategicValue daemon_strategic_value(const GameSpec& G,
                                             const std::optional<SolveConfig>& cfg = {}) {
  validate_game(G);
  StrategicValue out;
  if (const auto* acts = std::get_if<std::vector<SentimentVector>>(&G.daemon_space)) {
    const bool utility = G.sense == Sense::Utility;
    bool first = true;
    for (std::size_t i = 0; i < acts->size(); ++i) {
      const auto [v, br] = detail::worst_case_payoff(G, (*acts)[i]);
      if (first || (utility ? v > out.value : v < out.value)) {
        first = false;
        out.choice = i;
        out.action = (*acts)[i];
        out.angel = br;
        out.value = v;
      }
    }
    return out;
  }
  if (!cfg) {
    throw domain_error("daemon_strategic_value: continuous daemon space needs a solver config");
  }
  const auto& inst = std::get<AllocationInstance>(G.daemon_space);
  const Vec unif(inst.g, 1.0 / static_cast<double>(inst.g));
  const Aggregator base = std::visit(
      [&](const auto& pf) -> Aggregator {
        using T = std::decay_t<decltype(pf)>;
        if constexpr (std::is_same_v<T, AggregatorPayoff>) return pf.m;
        else if constexpr (std::is_same_v<T, UtilityTransform>)
          return PowerMean{Power::finite(pf.p), unif};
        else
          return PowerMean{Power::finite(1.0), unif};
      },
      G.payoff);
  const SolveReport rep = solve_allocation(inst, RobustAggregator{base, G.angel_space}, *cfg);
  out.theta = rep.theta;
  out.action = utilities(inst, {detail::unflatten(rep.theta, inst.g, inst.k)});
  const auto [v, br] = detail::worst_case_payoff(G, out.action);
  out.angel = br;
  out.value = v;
  return out;
}

struct InterchangeReport {
  double gap = 0.0;
  bool within = false;
};

/// Compares daemon-first and angel-first values of an egocentric game. With
/// mixing disabled on a non-convex action set the orders differ and the gap
/// is the measure of that failure.
inline InterchangeReport check_interchange(const GameSpec& G, double tol) {
  validate_game(G);
  if (!std::holds_alternative<Egocentric>(G.payoff)) {
    throw domain_error("check_interchange: egocentric payoffs only");
  }
  const auto* acts = std::get_if<std::vector<SentimentVector>>(&G.daemon_space);
  if (acts == nullptr) {
    throw domain_error("check_interchange: finite daemon space required");
  }
  const bool utility = G.sense == Sense::Utility;
  const Direction inner_dir = utility ? Direction::Minimize : Direction::Maximize;
  const auto inner_value = [&](const Vec& s) {
    return best_response(G.angel_space, s, inner_dir).value;
  };
  const std::size_t m = acts->size();

  double first_mover = utility ? -1e300 : 1e300;
  const auto fold = [&](double v) {
    first_mover = utility ? std::max(first_mover, v) : std::min(first_mover, v);
  };
  for (const auto& a : *acts) fold(inner_value(a.values));
  if (G.hull && m == 2) {
    const auto along = [&](double t) {
      Vec mix(acts->front().size(), 0.0);
      for (std::size_t i = 0; i < mix.size(); ++i) {
        mix[i] = (1.0 - t) * (*acts)[0].values[i] + t * (*acts)[1].values[i];
      }
      return inner_value(mix);
    };
    fold(detail::golden_section(along, 0.0, 1.0, utility, 200).second);
  } else if (G.hull && m > 2 && m <= 4) {
    // nested golden sections over mixture coordinates; partial optima of a
    // concave (convex) hull objective stay unimodal at every level
    const int iters = m == 3 ? 80 : 48;
    std::function<double(Vec&, std::size_t, double)> level = [&](Vec& lam, std::size_t i,
                                                                 double left) -> double {
      if (i + 1 == m) {
        lam[i] = left;
        Vec mix(acts->front().size(), 0.0);
        for (std::size_t j = 0; j < m; ++j) {
          for (std::size_t d = 0; d < mix.size(); ++d) mix[d] += lam[j] * (*acts)[j].values[d];
        }
        return inner_value(mix);
      }
      const auto section = [&](double t) {
        lam[i] = t;
        return level(lam, i + 1, left - t);
      };
      return detail::golden_section(section, 0.0, left, utility, iters).second;
    };
    Vec lam(m, 0.0);
    fold(level(lam, 0, 1.0));
  } else if (G.hull && m > 4) {
    // coarse screening only; certification targets small action sets
    const std::size_t n = 16;
    detail::compositions(m, n, true, [&](const std::vector<std::size_t>& parts) {
      Vec mix(acts->front().size(), 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        const double lam = static_cast<double>(parts[i]) / static_cast<double>(n);
        for (std::size_t d = 0; d < mix.size(); ++d) mix[d] += lam * (*acts)[i].values[d];
      }
      fold(inner_value(mix));
    });
  }

  // angel first: the daemon then best-responds with a pure action
  const auto daemon_reply = [&](const WeightVector& w) {
    double best = utility ? -1e300 : 1e300;
    for (const auto& a : *acts) {
      const double v = dot(w, a.values);
      best = utility ? std::max(best, v) : std::min(best, v);
    }
    return best;
  };
  double second_mover = 0.0;
  if (const auto* sing = std::get_if<Singleton>(&G.angel_space)) {
    second_mover = daemon_reply(sing->w_star);
  } else if (const auto* orb = std::get_if<PermutationOrbit>(&G.angel_space)) {
    double best = utility ? 1e300 : -1e300;
    detail::for_each_permutation(orb->sorted_weights.size(),
                                 [&](const std::vector<std::size_t>& perm) {
                                   WeightVector w(perm.size());
                                   for (std::size_t i = 0; i < perm.size(); ++i) {
                                     w[i] = orb->sorted_weights[perm[i]];
                                   }
                                   const double v = daemon_reply(w);
                                   best = utility ? std::min(best, v) : std::max(best, v);
                                 });
    second_mover = best;
  } else {
    if (const auto* ball = std::get_if<NormBall>(&G.angel_space)) {
      if (std::holds_alternative<PermutationOrbit>(ball->base)) {
        throw domain_error("check_interchange: orbit-centered balls are not supported");
      }
    }
    const WeightVector anchor = best_response(G.angel_space, acts->front().values, inner_dir).w;
    second_mover = detail::golden_over_set(G.angel_space, daemon_reply, inner_dir, &anchor).second;
  }

  InterchangeReport rep;
  rep.gap = std::abs(first_mover - second_mover);
  rep.within = rep.gap <= tol;
  return rep;
}

/// Closed-form coercive angel strategy. Degenerate all-zero scores fall back
/// to the angel's own weights.
inline WeightVector altruistic_angel_strategy(double p, const WeightVector& w_star, const Vec& s,
                                              double s_min) {
  require_same_size(w_star.size(), s.size(), "altruistic_angel_strategy");
  require_simplex(w_star, "altruistic_angel_strategy");
  const std::size_t g = s.size();
  Vec score(g, 0.0);
  if (p > 0.0) {
    bool zero_pole = false;
    for (double v : s) {
      if (v < 0.0) throw domain_error("altruistic_angel_strategy: negative sentiment");
      zero_pole = zero_pole || (v <= 0.0 && p < 1.0);
    }
    if (zero_pole) {
      // the score diverges on zero coordinates; take the limiting weights
      for (std::size_t i = 0; i < g; ++i) score[i] = s[i] <= 0.0 ? w_star[i] : 0.0;
    } else {
      for (std::size_t i = 0; i < g; ++i) score[i] = w_star[i] * std::pow(s[i], p - 1.0);
    }
  } else {
    if (s_min <= 0.0) throw domain_error("altruistic_angel_strategy: p <= 0 needs a floor");
    for (double v : s) {
      if (v < s_min - 1e-12) throw domain_error("altruistic_angel_strategy: value below floor");
    }
    for (std::size_t i = 0; i < g; ++i) {
      if (p == 0.0) {
        const double r = s[i] / s_min;
        score[i] = w_star[i] * std::log(r) / r;
      } else {
        const double r = s_min / s[i];
        score[i] = w_star[i] * (r - std::pow(r, 1.0 - p));
      }
    }
  }
  double total = 0.0;
  for (double v : score) total += v;
  if (!(total > 0.0) || !std::isfinite(total)) return w_star;
  for (double& v : score) v /= total;
  return score;
}

/// Serializable angel strategy descriptor: a fixed vector, the equilibrium
/// closed form, or a generic power-proportional rule for perturbation tests.
struct AngelStrategy {
  enum class Kind { Fixed, Equilibrium, PowerProportional };
  Kind kind = Kind::Equilibrium;
  WeightVector w_star;
  double p = 1.0;         // Equilibrium: the angel's aggregator exponent
  double exponent = 0.0;  // PowerProportional: w_i proportional to w_star_i s_i^exponent
  double s_min = 0.0;
};

inline WeightVector angel_play(const AngelStrategy& st, const Vec& s) {
  switch (st.kind) {
    case AngelStrategy::Kind::Fixed:
      return st.w_star;
    case AngelStrategy::Kind::Equilibrium:
      return altruistic_angel_strategy(st.p, st.w_star, s, st.s_min);
    case AngelStrategy::Kind::PowerProportional: {
      require_same_size(st.w_star.size(), s.size(), "angel_play");
      Vec score(s.size(), 0.0);
      for (std::size_t i = 0; i < s.size(); ++i) {
        score[i] = s[i] > 0.0 ? st.w_star[i] * std::pow(s[i], st.exponent)
                              : (st.exponent == 0.0 ? st.w_star[i] : 0.0);
      }
      double total = 0.0;
      for (double v : score) total += v;
      if (!(total > 0.0) || !std::isfinite(total)) return st.w_star;
      for (double& v : score) v /= total;
      return score;
    }
  }
  throw domain_error("angel_play: unknown strategy kind");
}

struct StrategyProfile {
  std::size_t daemon_choice = 0;                 // index into a finite daemon space
  std::optional<SentimentVector> daemon_action;  // explicit action for continuous spaces
  AngelStrategy angel;
};

struct EquilibriumReport {
  bool equilibrium = false;
  double daemon_improvement = 0.0;
  double angel_gap = 0.0;
};

/// Searches a discretization of the daemon space for a profitable deviation
/// against the fixed angel strategy, and for any world the angel would score
/// higher than the profile's.
inline EquilibriumReport verify_equilibrium(const GameSpec& G, const StrategyProfile& profile,
                                            double grid_step = 1e-2, double tol = 1e-9) {
  validate_game(G);
  const auto* alt = std::get_if<AltruisticAngel>(&G.payoff);
  if (alt == nullptr) {
    throw domain_error("verify_equilibrium: requires the altruistic-angel payoff");
  }
  std::vector<Vec> candidates;
  if (const auto* acts = std::get_if<std::vector<SentimentVector>>(&G.daemon_space)) {
    for (const auto& a : *acts) candidates.push_back(a.values);
  } else {
    const auto& inst = std::get<AllocationInstance>(G.daemon_space);
    if (inst.k != 1) {
      throw domain_error("verify_equilibrium: grid search supports one-good instances only");
    }
    const double c = inst.capacities[0];
    const auto steps = static_cast<std::size_t>(std::max(1.0, std::round(c / grid_step)));
    detail::compositions(inst.g, steps, false, [&](const std::vector<std::size_t>& parts) {
      Mat theta(inst.g, Vec(1, 0.0));
      for (std::size_t i = 0; i < inst.g; ++i) {
        theta[i][0] = c * static_cast<double>(parts[i]) / static_cast<double>(steps);
      }
      candidates.push_back(utilities(inst, {theta}).values);
    });
  }
  Vec s0;
  if (profile.daemon_action) {
    s0 = profile.daemon_action->values;
    if (!detail::action_feasible(G, s0)) {
      throw domain_error("verify_equilibrium: profile action infeasible");
    }
  } else {
    if (profile.daemon_choice >= candidates.size()) {
      throw domain_error("verify_equilibrium: daemon choice out of range");
    }
    s0 = candidates[profile.daemon_choice];
  }
  const bool utility = G.sense == Sense::Utility;
  const auto daemon_payoff = [&](const Vec& s) { return dot(angel_play(profile.angel, s), s); };
  const auto angel_payoff = [&](const Vec& s) {
    return detail::raw_power_mean(s, alt->w_star, alt->p);
  };
  const double base_daemon = daemon_payoff(s0);
  const double base_angel = angel_payoff(s0);
  EquilibriumReport rep;
  for (const auto& s : candidates) {
    const double dd = utility ? daemon_payoff(s) - base_daemon : base_daemon - daemon_payoff(s);
    const double da = utility ? angel_payoff(s) - base_angel : base_angel - angel_payoff(s);
    rep.daemon_improvement = std::max(rep.daemon_improvement, dd);
    rep.angel_gap = std::max(rep.angel_gap, da);
  }
  rep.equilibrium = rep.daemon_improvement <= tol && rep.angel_gap <= tol;
  return rep;
}

}  // namespace fairwell
