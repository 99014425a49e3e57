#include <catch2/catch_amalgamated.hpp>

#include "fairwell/serialization.hpp"

using namespace fairwell;

namespace {

Json reparse(const Json& j) { return Json::parse(j.dump()); }

}  // namespace

TEST_CASE("aggregators and weight sets round trip through JSON", "[serialization]") {
  const std::vector<Aggregator> aggs = {
      PowerMean{Power::finite(0.5), {0.3, 0.7}},
      PowerMean{Power::neg_inf(), {0.5, 0.5}},
      PowerMean{Power::pos_inf(), {0.5, 0.5}},
      Gini{{0.4, 0.6}, Sense::Utility},
      Umswf{0.25, {0.2, 0.8}},
      GiniPowerMean{Power::finite(2.0), {0.4, 0.6}, Sense::Disutility}};
  for (const auto& agg : aggs) {
    const Json j = ser::write_aggregator(agg);
    const Aggregator back = ser::read_aggregator(reparse(j), "test");
    REQUIRE(ser::write_aggregator(back) == j);
  }

  const std::vector<WeightSet> sets = {
      Singleton{{0.3, 0.7}},
      FullSimplex{3},
      LowerBounded{0.5, {0.5, 0.5}},
      PermutationOrbit{{0.2, 0.3, 0.5}},
      NormBall{Singleton{{0.25, 0.25, 0.5}}, Norm::Linf, 0.2},
      NormBall{LowerBounded{0.4, {0.5, 0.5}}, Norm::L1, 0.1},
      NormBall{PermutationOrbit{{0.3, 0.7}}, Norm::L2, 0.05}};
  for (const auto& W : sets) {
    const Json j = ser::write_weight_set(W);
    const WeightSet back = ser::read_weight_set(reparse(j), "test");
    REQUIRE(ser::write_weight_set(back) == j);
  }

  const SentimentVector s{{1.0, 2.5}, Sense::Disutility};
  REQUIRE(ser::write_sentiments(ser::read_sentiments(
              reparse(ser::write_sentiments(s)), "test")) == ser::write_sentiments(s));
}

TEST_CASE("exponents accept numbers and signed infinity strings", "[serialization]") {
  REQUIRE(ser::read_power(Json(1.5), "test") == Power::finite(1.5));
  REQUIRE(ser::read_power(Json("-inf"), "test") == Power::neg_inf());
  REQUIRE(ser::read_power(Json("+inf"), "test") == Power::pos_inf());
  REQUIRE(ser::write_power(Power::neg_inf()) == Json("-inf"));
  REQUIRE(ser::write_power(Power::finite(0.5)) == Json(0.5));
  REQUIRE_THROWS_AS(ser::read_power(Json("inf"), "test"), schema_error);
  REQUIRE_THROWS_AS(ser::read_power(Json(true), "test"), schema_error);
}

TEST_CASE("strict schemas reject malformed bodies", "[serialization]") {
  const Json ok = {{"family", "power_mean"}, {"p", 1.0}, {"weights", {0.5, 0.5}}};
  REQUIRE_NOTHROW(ser::read_aggregator(ok, "test"));

  Json extra = ok;
  extra["note"] = "hi";
  REQUIRE_THROWS_AS(ser::read_aggregator(extra, "test"), schema_error);

  Json missing = ok;
  missing.erase("weights");
  REQUIRE_THROWS_AS(ser::read_aggregator(missing, "test"), schema_error);

  Json wrong_type = ok;
  wrong_type["weights"] = "not an array";
  REQUIRE_THROWS_AS(ser::read_aggregator(wrong_type, "test"), schema_error);

  Json bad_family = ok;
  bad_family["family"] = "median";
  REQUIRE_THROWS_AS(ser::read_aggregator(bad_family, "test"), schema_error);

  REQUIRE_THROWS_AS(
      ser::read_sense(Json("neutral"), "test"), schema_error);
  REQUIRE_THROWS_AS(
      ser::read_weight_set({{"set", "norm_ball"},
                            {"base", {{"set", "full_simplex"}, {"g", 2}}},
                            {"norm", "l2"},
                            {"radius", 0.1}},
                           "test"),
      schema_error);
  REQUIRE_THROWS_AS(ser::read_weight_set({{"set", "cube"}}, "test"), schema_error);
  REQUIRE_THROWS_AS(ser::read_holder_norm(Json("l3"), "test"), schema_error);
  REQUIRE_THROWS_AS(ser::read_vec(Json{1.0, "x"}, "test"), schema_error);
  REQUIRE_THROWS_AS(ser::read_count(Json(0), "test"), schema_error);
  REQUIRE_THROWS_AS(ser::read_count(Json(2.5), "test"), schema_error);
}

TEST_CASE("instance envelopes pin version and kind", "[serialization]") {
  const Json good = {{"version", "1"}, {"kind", "aggregate"}, {"body", Json::object()}};
  const InstanceFile inst = parse_instance(good);
  REQUIRE(inst.kind == "aggregate");

  Json stale = good;
  stale["version"] = "2";
  REQUIRE_THROWS_AS(parse_instance(stale), schema_error);

  Json odd_kind = good;
  odd_kind["kind"] = "simulate";
  REQUIRE_THROWS_AS(parse_instance(odd_kind), schema_error);

  Json extra = good;
  extra["comment"] = "x";
  REQUIRE_THROWS_AS(parse_instance(extra), schema_error);

  Json scalar_body = good;
  scalar_body["body"] = 7;
  REQUIRE_THROWS_AS(parse_instance(scalar_body), schema_error);
}

TEST_CASE("allocation and game bodies parse their full shape", "[serialization]") {
  const Json inst_json = {
      {"g", 2},
      {"k", 2},
      {"capacities", {1.0, 2.0}},
      {"model",
       {{"model", "log_saturating"},
        {"P", {{1.0, 0.5}, {0.25, 2.0}}},
        {"C", {{1.0, nullptr}, {nullptr, 0.5}}}}},
      {"extra", {{{"coeffs", {1.0, 0.0, 0.0, 1.0}}, {"bound", 1.5}}}},
      {"feasible_point", {{0.1, 0.2}, {0.3, 0.4}}}};
  const AllocationInstance inst = ser::read_allocation(inst_json, "test");
  REQUIRE(inst.g == 2);
  REQUIRE(inst.k == 2);
  const auto& ls = std::get<LogSaturating>(inst.model);
  REQUIRE(ls.C[0][0].has_value());
  REQUIRE_FALSE(ls.C[0][1].has_value());
  REQUIRE(inst.extra.size() == 1);
  REQUIRE_FALSE(inst.extra[0].equality);
  REQUIRE(inst.feasible_point.has_value());

  const Objective plain = ser::read_objective(
      {{"aggregator", {{"family", "power_mean"}, {"p", 1.0}, {"weights", {0.5, 0.5}}}}},
      "test");
  REQUIRE(std::holds_alternative<Aggregator>(plain));
  const Objective robust = ser::read_objective(
      {{"aggregator", {{"family", "power_mean"}, {"p", 1.0}, {"weights", {0.5, 0.5}}}},
       {"weight_set", {{"set", "full_simplex"}, {"g", 2}}}},
      "test");
  REQUIRE(std::holds_alternative<RobustAggregator>(robust));

  const Json game_json = {
      {"daemon_space", {{"actions", {{1.0, 3.0}, {2.0, 2.0}}}, {"hull", true}}},
      {"angel_space", {{"set", "full_simplex"}, {"g", 2}}},
      {"payoff", {{"payoff", "egocentric"}}},
      {"sense", "utility"}};
  const GameSpec G = ser::read_game(game_json, "test");
  REQUIRE(G.hull);
  const auto& acts = std::get<std::vector<SentimentVector>>(G.daemon_space);
  REQUIRE(acts.size() == 2);
  REQUIRE(acts[0].sense == Sense::Utility);

  const StrategyProfile profile = ser::read_profile(
      {{"daemon_action", {1.0, 1.0}},
       {"angel", {{"kind", "equilibrium"}, {"w_star", {0.5, 0.5}}, {"p", 0.5}}}},
      Sense::Utility, "test");
  REQUIRE(profile.daemon_action.has_value());
  REQUIRE(profile.angel.kind == AngelStrategy::Kind::Equilibrium);
  REQUIRE_THROWS_AS(
      ser::read_profile({{"angel", {{"kind", "psychic"}, {"w_star", {0.5, 0.5}}}}},
                        Sense::Utility, "test"),
      schema_error);

  const SampleComplexityQuery q = ser::read_sample_query(
      {{"lambda", 1.0},
       {"alpha", 1.0},
       {"norm", "linf"},
       {"v", {1.0, 1.0}},
       {"t", 2},
       {"delta", 0.05},
       {"epsilon", 0.1},
       {"m0", 1}},
      "test");
  REQUIRE(sample_complexity(q) == 439);
}

TEST_CASE("input digests are stable", "[serialization]") {
  REQUIRE(fnv1a_digest("") == "fnv1a:cbf29ce484222325");
  REQUIRE(fnv1a_digest("a") == "fnv1a:af63dc4c8601ec8c");
  REQUIRE(fnv1a_digest("fairwell") != fnv1a_digest("fairwells"));
}
