#pragma once

// JSON instance and report plumbing for the command line driver. Readers
// are strict: unknown fields, missing fields, and wrong types are schema
// errors, so fixture files stay exact. Exponents serialize as numbers or
// the strings "-inf" / "+inf".

#include <cstdint>
#include <cstdio>
#include <initializer_list>
#include <string>
#include <string_view>

#include <json.hpp>

#include "fairwell/allocation.hpp"
#include "fairwell/bounds.hpp"
#include "fairwell/games.hpp"

namespace fairwell {

using Json = nlohmann::ordered_json;

/// Structural problem in an instance file. Distinct from domain_error so the
/// driver can map the two to different exit codes.
struct schema_error : std::runtime_error {
  explicit schema_error(const std::string& what) : std::runtime_error(what) {}
};

inline std::string fnv1a_digest(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string("fnv1a:") + buf;
}

namespace ser {

inline const Json& require_field(const Json& j, const char* key, const char* who) {
  if (!j.is_object()) throw schema_error(std::string(who) + ": expected an object");
  const auto it = j.find(key);
  if (it == j.end())
    throw schema_error(std::string(who) + ": missing field '" + key + "'");
  return *it;
}

inline void reject_unknown(const Json& j, std::initializer_list<std::string_view> allowed,
                           const char* who) {
  if (!j.is_object()) throw schema_error(std::string(who) + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (std::string_view k : allowed) known = known || k == key;
    if (!known) throw schema_error(std::string(who) + ": unknown field '" + key + "'");
  }
}

inline double read_number(const Json& j, const char* who) {
  if (!j.is_number()) throw schema_error(std::string(who) + ": expected a number");
  return j.get<double>();
}

inline std::int64_t read_integer(const Json& j, const char* who) {
  if (!j.is_number_integer()) throw schema_error(std::string(who) + ": expected an integer");
  return j.get<std::int64_t>();
}

inline std::size_t read_count(const Json& j, const char* who) {
  const std::int64_t n = read_integer(j, who);
  if (n < 1) throw schema_error(std::string(who) + ": expected a positive integer");
  return static_cast<std::size_t>(n);
}

inline bool read_bool(const Json& j, const char* who) {
  if (!j.is_boolean()) throw schema_error(std::string(who) + ": expected a boolean");
  return j.get<bool>();
}

inline std::string read_string(const Json& j, const char* who) {
  if (!j.is_string()) throw schema_error(std::string(who) + ": expected a string");
  return j.get<std::string>();
}

inline Vec read_vec(const Json& j, const char* who) {
  if (!j.is_array()) throw schema_error(std::string(who) + ": expected an array of numbers");
  Vec out;
  out.reserve(j.size());
  for (const auto& x : j) out.push_back(read_number(x, who));
  return out;
}

inline Mat read_mat(const Json& j, const char* who) {
  if (!j.is_array()) throw schema_error(std::string(who) + ": expected an array of rows");
  Mat out;
  out.reserve(j.size());
  for (const auto& row : j) out.push_back(read_vec(row, who));
  return out;
}

inline Power read_power(const Json& j, const char* who) {
  if (j.is_number()) return Power::finite(j.get<double>());
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "-inf") return Power::neg_inf();
    if (s == "+inf") return Power::pos_inf();
  }
  throw schema_error(std::string(who) + ": exponent must be a number, \"-inf\", or \"+inf\"");
}

inline Json write_power(const Power& p) {
  if (p.is_neg_inf()) return "-inf";
  if (p.is_pos_inf()) return "+inf";
  return p.value;
}

inline Sense read_sense(const Json& j, const char* who) {
  const std::string s = read_string(j, who);
  if (s == "utility") return Sense::Utility;
  if (s == "disutility") return Sense::Disutility;
  throw schema_error(std::string(who) + ": sense must be \"utility\" or \"disutility\"");
}

inline const char* write_sense(Sense s) {
  return s == Sense::Utility ? "utility" : "disutility";
}

inline SentimentVector read_sentiments(const Json& j, const char* who) {
  reject_unknown(j, {"values", "sense"}, who);
  return {read_vec(require_field(j, "values", who), who),
          read_sense(require_field(j, "sense", who), who)};
}

inline Json write_sentiments(const SentimentVector& s) {
  return Json{{"values", s.values}, {"sense", write_sense(s.sense)}};
}

inline Aggregator read_aggregator(const Json& j, const char* who) {
  const std::string family = read_string(require_field(j, "family", who), who);
  if (family == "power_mean") {
    reject_unknown(j, {"family", "p", "weights"}, who);
    return PowerMean{read_power(require_field(j, "p", who), who),
                     read_vec(require_field(j, "weights", who), who)};
  }
  if (family == "gini") {
    reject_unknown(j, {"family", "sorted_weights", "sense"}, who);
    return Gini{read_vec(require_field(j, "sorted_weights", who), who),
                read_sense(require_field(j, "sense", who), who)};
  }
  if (family == "umswf") {
    reject_unknown(j, {"family", "gamma", "base_weights"}, who);
    return Umswf{read_number(require_field(j, "gamma", who), who),
                 read_vec(require_field(j, "base_weights", who), who)};
  }
  if (family == "gini_power_mean") {
    reject_unknown(j, {"family", "p", "sorted_weights", "sense"}, who);
    return GiniPowerMean{read_power(require_field(j, "p", who), who),
                         read_vec(require_field(j, "sorted_weights", who), who),
                         read_sense(require_field(j, "sense", who), who)};
  }
  throw schema_error(std::string(who) + ": unknown aggregator family '" + family + "'");
}

inline Json write_aggregator(const Aggregator& agg) {
  return std::visit(
      [](const auto& f) -> Json {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, PowerMean>) {
          return Json{{"family", "power_mean"}, {"p", write_power(f.p)}, {"weights", f.weights}};
        } else if constexpr (std::is_same_v<T, Gini>) {
          return Json{{"family", "gini"},
                      {"sorted_weights", f.sorted_weights},
                      {"sense", write_sense(f.sense)}};
        } else if constexpr (std::is_same_v<T, Umswf>) {
          return Json{{"family", "umswf"}, {"gamma", f.gamma}, {"base_weights", f.base_weights}};
        } else {
          return Json{{"family", "gini_power_mean"},
                      {"p", write_power(f.p)},
                      {"sorted_weights", f.sorted_weights},
                      {"sense", write_sense(f.sense)}};
        }
      },
      agg);
}

inline Norm read_ball_norm(const Json& j, const char* who) {
  const std::string s = read_string(j, who);
  if (s == "l1") return Norm::L1;
  if (s == "l2") return Norm::L2;
  if (s == "linf") return Norm::Linf;
  throw schema_error(std::string(who) + ": norm must be \"l1\", \"l2\", or \"linf\"");
}

inline const char* write_ball_norm(Norm n) {
  switch (n) {
    case Norm::L1: return "l1";
    case Norm::L2: return "l2";
    default: return "linf";
  }
}

inline WeightSet read_weight_set(const Json& j, const char* who) {
  const std::string set = read_string(require_field(j, "set", who), who);
  if (set == "singleton") {
    reject_unknown(j, {"set", "w_star"}, who);
    return Singleton{read_vec(require_field(j, "w_star", who), who)};
  }
  if (set == "full_simplex") {
    reject_unknown(j, {"set", "g"}, who);
    return FullSimplex{read_count(require_field(j, "g", who), who)};
  }
  if (set == "lower_bounded") {
    reject_unknown(j, {"set", "gamma", "w_star"}, who);
    return LowerBounded{read_number(require_field(j, "gamma", who), who),
                        read_vec(require_field(j, "w_star", who), who)};
  }
  if (set == "permutation_orbit") {
    reject_unknown(j, {"set", "sorted_weights"}, who);
    return PermutationOrbit{read_vec(require_field(j, "sorted_weights", who), who)};
  }
  if (set == "norm_ball") {
    reject_unknown(j, {"set", "base", "norm", "radius"}, who);
    const WeightSet base = read_weight_set(require_field(j, "base", who), who);
    NormBall ball;
    if (const auto* s1 = std::get_if<Singleton>(&base)) {
      ball.base = *s1;
    } else if (const auto* lb = std::get_if<LowerBounded>(&base)) {
      ball.base = *lb;
    } else if (const auto* po = std::get_if<PermutationOrbit>(&base)) {
      ball.base = *po;
    } else {
      throw schema_error(std::string(who) +
                         ": norm_ball base must be singleton, lower_bounded, or "
                         "permutation_orbit");
    }
    ball.norm = read_ball_norm(require_field(j, "norm", who), who);
    ball.radius = read_number(require_field(j, "radius", who), who);
    return ball;
  }
  throw schema_error(std::string(who) + ": unknown weight set '" + set + "'");
}

inline Json write_weight_set(const WeightSet& W) {
  return std::visit(
      [](const auto& v) -> Json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Singleton>) {
          return Json{{"set", "singleton"}, {"w_star", v.w_star}};
        } else if constexpr (std::is_same_v<T, FullSimplex>) {
          return Json{{"set", "full_simplex"}, {"g", v.g}};
        } else if constexpr (std::is_same_v<T, LowerBounded>) {
          return Json{{"set", "lower_bounded"}, {"gamma", v.gamma}, {"w_star", v.w_star}};
        } else if constexpr (std::is_same_v<T, PermutationOrbit>) {
          return Json{{"set", "permutation_orbit"}, {"sorted_weights", v.sorted_weights}};
        } else {
          const Json base = std::visit(
              [](const auto& b) { return write_weight_set(WeightSet{b}); }, v.base);
          return Json{{"set", "norm_ball"},
                      {"base", base},
                      {"norm", write_ball_norm(v.norm)},
                      {"radius", v.radius}};
        }
      },
      W);
}

inline HolderNorm read_holder_norm(const Json& j, const char* who) {
  const std::string s = read_string(j, who);
  if (s == "l1") return HolderNorm::L1;
  if (s == "l2") return HolderNorm::L2;
  if (s == "linf") return HolderNorm::Linf;
  if (s == "self") return HolderNorm::SelfReferential;
  throw schema_error(std::string(who) + ": norm must be \"l1\", \"l2\", \"linf\", or \"self\"");
}

inline HolderCertificate read_certificate(const Json& j, const char* who) {
  reject_unknown(j, {"lambda", "alpha", "norm", "branch"}, who);
  HolderCertificate cert;
  cert.lambda = read_number(require_field(j, "lambda", who), who);
  cert.alpha = read_number(require_field(j, "alpha", who), who);
  cert.norm = read_holder_norm(require_field(j, "norm", who), who);
  if (j.contains("branch")) cert.branch = read_string(j.at("branch"), who);
  return cert;
}

inline Json write_certificate(const HolderCertificate& cert) {
  return Json{{"lambda", cert.lambda},
              {"alpha", cert.alpha},
              {"norm", holder_norm_name(cert.norm)},
              {"branch", cert.branch}};
}

inline UtilityModel read_model(const Json& j, const char* who) {
  const std::string model = read_string(require_field(j, "model", who), who);
  if (model == "linear_single") {
    reject_unknown(j, {"model", "p"}, who);
    return LinearSingle{read_vec(require_field(j, "p", who), who)};
  }
  if (model == "sqrt_single") {
    reject_unknown(j, {"model", "p"}, who);
    return SqrtSingle{read_vec(require_field(j, "p", who), who)};
  }
  if (model == "linear_multi") {
    reject_unknown(j, {"model", "P"}, who);
    return LinearMulti{read_mat(require_field(j, "P", who), who)};
  }
  if (model == "log_saturating") {
    reject_unknown(j, {"model", "P", "C"}, who);
    LogSaturating ls;
    ls.P = read_mat(require_field(j, "P", who), who);
    const Json& caps = require_field(j, "C", who);
    if (!caps.is_array()) throw schema_error(std::string(who) + ": C must be an array of rows");
    for (const auto& row : caps) {
      if (!row.is_array())
        throw schema_error(std::string(who) + ": C must be an array of rows");
      std::vector<std::optional<double>> out_row;
      for (const auto& cell : row) {
        if (cell.is_null()) {
          out_row.push_back(std::nullopt);
        } else {
          out_row.push_back(read_number(cell, who));
        }
      }
      ls.C.push_back(std::move(out_row));
    }
    return ls;
  }
  throw schema_error(std::string(who) + ": unknown utility model '" + model + "'");
}

inline ThetaConstraint read_constraint(const Json& j, const char* who) {
  reject_unknown(j, {"coeffs", "bound", "equality"}, who);
  ThetaConstraint c;
  c.coeffs = read_vec(require_field(j, "coeffs", who), who);
  c.bound = read_number(require_field(j, "bound", who), who);
  if (j.contains("equality")) c.equality = read_bool(j.at("equality"), who);
  return c;
}

inline AllocationInstance read_allocation(const Json& j, const char* who) {
  reject_unknown(j, {"g", "k", "capacities", "model", "extra", "feasible_point"}, who);
  AllocationInstance inst;
  inst.g = read_count(require_field(j, "g", who), who);
  inst.k = read_count(require_field(j, "k", who), who);
  inst.capacities = read_vec(require_field(j, "capacities", who), who);
  inst.model = read_model(require_field(j, "model", who), who);
  if (j.contains("extra")) {
    const Json& extra = j.at("extra");
    if (!extra.is_array())
      throw schema_error(std::string(who) + ": extra must be an array of constraints");
    for (const auto& c : extra) inst.extra.push_back(read_constraint(c, who));
  }
  if (j.contains("feasible_point")) inst.feasible_point = read_mat(j.at("feasible_point"), who);
  return inst;
}

inline Objective read_objective(const Json& j, const char* who) {
  reject_unknown(j, {"aggregator", "weight_set"}, who);
  Aggregator base = read_aggregator(require_field(j, "aggregator", who), who);
  if (j.contains("weight_set"))
    return RobustAggregator{std::move(base), read_weight_set(j.at("weight_set"), who)};
  return base;
}

inline GamePayoff read_payoff(const Json& j, const char* who) {
  const std::string payoff = read_string(require_field(j, "payoff", who), who);
  if (payoff == "egocentric") {
    reject_unknown(j, {"payoff"}, who);
    return Egocentric{};
  }
  if (payoff == "aggregator") {
    reject_unknown(j, {"payoff", "aggregator"}, who);
    return AggregatorPayoff{read_aggregator(require_field(j, "aggregator", who), who)};
  }
  if (payoff == "utility_transform") {
    reject_unknown(j, {"payoff", "p", "s_min"}, who);
    UtilityTransform t;
    t.p = read_number(require_field(j, "p", who), who);
    if (j.contains("s_min")) t.s_min = read_number(j.at("s_min"), who);
    return t;
  }
  if (payoff == "altruistic_angel") {
    reject_unknown(j, {"payoff", "p", "w_star", "s_min"}, who);
    AltruisticAngel a;
    a.p = read_number(require_field(j, "p", who), who);
    a.w_star = read_vec(require_field(j, "w_star", who), who);
    if (j.contains("s_min")) a.s_min = read_number(j.at("s_min"), who);
    return a;
  }
  throw schema_error(std::string(who) + ": unknown payoff '" + payoff + "'");
}

inline GameSpec read_game(const Json& j, const char* who) {
  reject_unknown(j, {"daemon_space", "angel_space", "payoff", "sense"}, who);
  GameSpec G;
  G.sense = read_sense(require_field(j, "sense", who), who);
  const Json& space = require_field(j, "daemon_space", who);
  if (space.contains("actions")) {
    reject_unknown(space, {"actions", "hull"}, who);
    const Json& acts = space.at("actions");
    if (!acts.is_array())
      throw schema_error(std::string(who) + ": actions must be an array of vectors");
    std::vector<SentimentVector> actions;
    for (const auto& a : acts) actions.push_back({read_vec(a, who), G.sense});
    G.daemon_space = std::move(actions);
    if (space.contains("hull")) G.hull = read_bool(space.at("hull"), who);
  } else {
    reject_unknown(space, {"allocation"}, who);
    G.daemon_space = read_allocation(require_field(space, "allocation", who), who);
  }
  G.angel_space = read_weight_set(require_field(j, "angel_space", who), who);
  G.payoff = read_payoff(require_field(j, "payoff", who), who);
  return G;
}

inline AngelStrategy read_angel_strategy(const Json& j, const char* who) {
  reject_unknown(j, {"kind", "w_star", "p", "exponent", "s_min"}, who);
  AngelStrategy st;
  const std::string kind = read_string(require_field(j, "kind", who), who);
  if (kind == "fixed") {
    st.kind = AngelStrategy::Kind::Fixed;
  } else if (kind == "equilibrium") {
    st.kind = AngelStrategy::Kind::Equilibrium;
  } else if (kind == "power_proportional") {
    st.kind = AngelStrategy::Kind::PowerProportional;
  } else {
    throw schema_error(std::string(who) + ": unknown strategy kind '" + kind + "'");
  }
  st.w_star = read_vec(require_field(j, "w_star", who), who);
  if (j.contains("p")) st.p = read_number(j.at("p"), who);
  if (j.contains("exponent")) st.exponent = read_number(j.at("exponent"), who);
  if (j.contains("s_min")) st.s_min = read_number(j.at("s_min"), who);
  return st;
}

inline StrategyProfile read_profile(const Json& j, Sense sense, const char* who) {
  reject_unknown(j, {"daemon_choice", "daemon_action", "angel"}, who);
  StrategyProfile profile;
  if (j.contains("daemon_choice")) {
    const std::int64_t c = read_integer(j.at("daemon_choice"), who);
    if (c < 0) throw schema_error(std::string(who) + ": daemon_choice must be nonnegative");
    profile.daemon_choice = static_cast<std::size_t>(c);
  }
  if (j.contains("daemon_action"))
    profile.daemon_action = SentimentVector{read_vec(j.at("daemon_action"), who), sense};
  profile.angel = read_angel_strategy(require_field(j, "angel", who), who);
  return profile;
}

inline SampleComplexityQuery read_sample_query(const Json& j, const char* who) {
  reject_unknown(j, {"lambda", "alpha", "norm", "v", "t", "delta", "epsilon", "m0"}, who);
  SampleComplexityQuery q;
  q.lambda = read_number(require_field(j, "lambda", who), who);
  q.alpha = read_number(require_field(j, "alpha", who), who);
  q.norm = read_holder_norm(require_field(j, "norm", who), who);
  q.v = read_vec(require_field(j, "v", who), who);
  q.t = read_integer(require_field(j, "t", who), who);
  q.delta = read_number(require_field(j, "delta", who), who);
  q.epsilon = read_number(require_field(j, "epsilon", who), who);
  q.m0 = read_integer(require_field(j, "m0", who), who);
  return q;
}

}  // namespace ser

struct InstanceFile {
  std::string kind;
  Json body;
};

/// Envelope check: version "1", a known kind, and an object body.
inline InstanceFile parse_instance(const Json& root) {
  ser::reject_unknown(root, {"version", "kind", "body"}, "instance");
  const std::string version =
      ser::read_string(ser::require_field(root, "version", "instance"), "instance");
  if (version != "1") throw schema_error("instance: unsupported version '" + version + "'");
  const std::string kind =
      ser::read_string(ser::require_field(root, "kind", "instance"), "instance");
  const bool known = kind == "aggregate" || kind == "adversary" || kind == "allocation" ||
                     kind == "game" || kind == "bounds" || kind == "sample_complexity";
  if (!known) throw schema_error("instance: unknown kind '" + kind + "'");
  const Json& body = ser::require_field(root, "body", "instance");
  if (!body.is_object()) throw schema_error("instance: body must be an object");
  return {kind, body};
}

}  // namespace fairwell
