#include <catch2/catch_amalgamated.hpp>

#include "fairwell/games.hpp"
#include "oracles.hpp"

using namespace fairwell;

namespace {

SentimentVector util(Vec v) { return {std::move(v), Sense::Utility}; }
SentimentVector disutil(Vec v) { return {std::move(v), Sense::Disutility}; }

Vec uniform(std::size_t g) { return Vec(g, 1.0 / static_cast<double>(g)); }

Vec center(std::size_t g) { return g == 2 ? Vec{0.4, 0.6} : Vec{0.2, 0.3, 0.5}; }

GameSpec finite_game(std::vector<SentimentVector> acts, WeightSet W, GamePayoff pf,
                     Sense sense = Sense::Utility, bool hull = false) {
  GameSpec G;
  G.daemon_space = std::move(acts);
  G.hull = hull;
  G.angel_space = std::move(W);
  G.payoff = std::move(pf);
  G.sense = sense;
  return G;
}

AllocationInstance budget_space(Vec rates, double c) {
  AllocationInstance inst;
  inst.g = rates.size();
  inst.k = 1;
  inst.capacities = {c};
  inst.model = LinearSingle{std::move(rates)};
  return inst;
}

}  // namespace

TEST_CASE("payoffs are zero-sum and match their closed forms", "[games]") {
  const auto ego = finite_game({util({1.0, 2.0})}, FullSimplex{2}, Egocentric{});
  const auto [d1, a1] = payoff(ego, util({1.0, 2.0}), {0.5, 0.5});
  REQUIRE(d1 == Catch::Approx(1.5).margin(1e-12));
  REQUIRE(a1 == Catch::Approx(-1.5).margin(1e-12));
  REQUIRE(d1 + a1 == 0.0);

  const auto trans = finite_game({disutil({1.0, 2.0})}, FullSimplex{2},
                                 UtilityTransform{2.0, 0.0}, Sense::Disutility);
  const auto [d2, a2] = payoff(trans, disutil({1.0, 2.0}), {0.5, 0.5});
  REQUIRE(d2 == Catch::Approx(2.5).margin(1e-12));
  REQUIRE(d2 + a2 == 0.0);

  const auto alt = finite_game({util({2.0, 4.0})}, FullSimplex{2},
                               AltruisticAngel{1.0, uniform(2), 0.0});
  const auto [d3, a3] = payoff(alt, util({2.0, 4.0}), {1.0, 0.0});
  REQUIRE(d3 == Catch::Approx(2.0).margin(1e-12));
  REQUIRE(a3 == Catch::Approx(3.0).margin(1e-12));

  auto gen = oracle::rng(51);
  const std::vector<GamePayoff> kinds = {
      Egocentric{}, AggregatorPayoff{PowerMean{Power::finite(0.5), uniform(2)}},
      AggregatorPayoff{Gini{Vec{0.4, 0.6}, Sense::Utility}}, UtilityTransform{0.5, 0.0}};
  for (int rep = 0; rep < 25; ++rep) {
    const Vec s = oracle::random_vector(gen, 2, 0.5, 3.0);
    const Vec w = oracle::random_simplex(gen, 2);
    for (const auto& pf : kinds) {
      const auto G = finite_game({util(s)}, FullSimplex{2}, pf);
      const auto [p1, p2] = payoff(G, util(s), w);
      REQUIRE(p1 + p2 == 0.0);
    }
  }

  const auto hullg = finite_game({util({1.0, 3.0}), util({3.0, 1.0})}, FullSimplex{2},
                                 Egocentric{}, Sense::Utility, true);
  REQUIRE(payoff(hullg, util({2.0, 2.0}), {0.5, 0.5}).first == Catch::Approx(2.0).margin(1e-9));
  REQUIRE_THROWS_AS(payoff(ego, util({9.0, 9.0}), {0.5, 0.5}), domain_error);
  const auto narrow = finite_game({util({1.0, 2.0})}, LowerBounded{0.5, uniform(2)},
                                  Egocentric{});
  REQUIRE_THROWS_AS(payoff(narrow, util({1.0, 2.0}), {0.2, 0.8}), domain_error);
}

TEST_CASE("strategic daemons pick worst-case optimal actions", "[games]") {
  const auto a = daemon_strategic_value(
      finite_game({util({1.0, 1.0}), util({0.0, 3.0})}, FullSimplex{2}, Egocentric{}));
  REQUIRE(a.choice == 0);
  REQUIRE(a.value == Catch::Approx(1.0).margin(1e-12));

  const auto b = daemon_strategic_value(
      finite_game({util({1.0, 3.0}), util({2.0, 2.0})}, Singleton{uniform(2)}, Egocentric{}));
  REQUIRE(b.choice == 0);
  REQUIRE(b.value == Catch::Approx(2.0).margin(1e-12));

  const auto c = daemon_strategic_value(finite_game(
      {util({1.0, 3.0}), util({2.0, 2.0})}, LowerBounded{0.5, uniform(2)}, Egocentric{}));
  REQUIRE(c.choice == 1);
  REQUIRE(c.value == Catch::Approx(2.0).margin(1e-12));

  const auto d = daemon_strategic_value(finite_game(
      {disutil({1.0, 3.0}), disutil({2.0, 2.0})}, FullSimplex{2}, Egocentric{},
      Sense::Disutility));
  REQUIRE(d.choice == 1);
  REQUIRE(d.value == Catch::Approx(2.0).margin(1e-12));

  // a strict monotone utility transform never changes the chosen world
  auto gen = oracle::rng(52);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t g = rep % 2 == 0 ? 2 : 3;
    std::vector<SentimentVector> acts;
    for (int i = 0; i < 4; ++i) acts.push_back(util(oracle::random_vector(gen, g, 0.5, 3.0)));
    const WeightSet W = rep % 3 == 0 ? WeightSet{LowerBounded{0.4, center(g)}}
                                     : WeightSet{FullSimplex{g}};
    const double p = rep % 2 == 0 ? 0.5 : 0.0;
    const auto via_transform = daemon_strategic_value(
        finite_game(acts, W, UtilityTransform{p, 0.25}));
    const auto via_aggregator = daemon_strategic_value(
        finite_game(acts, W, AggregatorPayoff{PowerMean{Power::finite(p), uniform(g)}}));
    CAPTURE(rep, g, p);
    REQUIRE(via_transform.choice == via_aggregator.choice);
  }
  for (int rep = 0; rep < 25; ++rep) {
    std::vector<SentimentVector> acts;
    for (int i = 0; i < 4; ++i) acts.push_back(disutil(oracle::random_vector(gen, 2, 0.5, 3.0)));
    const auto via_transform = daemon_strategic_value(
        finite_game(acts, FullSimplex{2}, UtilityTransform{2.0, 0.0}, Sense::Disutility));
    const auto via_aggregator = daemon_strategic_value(
        finite_game(acts, FullSimplex{2},
                    AggregatorPayoff{PowerMean{Power::finite(2.0), uniform(2)}},
                    Sense::Disutility));
    REQUIRE(via_transform.choice == via_aggregator.choice);
  }
}

TEST_CASE("interchange gaps vanish on convex games and expose nonconvex ones", "[games]") {
  const auto segment = finite_game({util({1.0, 3.0}), util({3.0, 1.0})}, FullSimplex{2},
                                   Egocentric{}, Sense::Utility, true);
  const auto seg_rep = check_interchange(segment, 1e-6);
  REQUIRE(seg_rep.gap <= 1e-6);
  REQUIRE(seg_rep.within);

  const auto split = finite_game({util({0.0, 3.0}), util({3.0, 0.0})}, FullSimplex{2},
                                 Egocentric{}, Sense::Utility, false);
  const auto split_rep = check_interchange(split, 1e-6);
  REQUIRE(split_rep.gap == Catch::Approx(1.5).margin(1e-9));
  REQUIRE_FALSE(split_rep.within);

  auto gen = oracle::rng(53);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t g = rep % 2 == 0 ? 2 : 3;
    std::vector<SentimentVector> acts = {util(oracle::random_vector(gen, g, 0.5, 3.0)),
                                         util(oracle::random_vector(gen, g, 0.5, 3.0))};
    const WeightSet W = rep % 3 == 0 ? WeightSet{LowerBounded{0.4, center(g)}}
                                     : WeightSet{FullSimplex{g}};
    const auto G = finite_game(acts, W, Egocentric{}, Sense::Utility, true);
    CAPTURE(rep, g);
    REQUIRE(check_interchange(G, 1e-6).gap <= 1e-6);

    const auto sing = finite_game(acts, Singleton{center(g)}, Egocentric{});
    REQUIRE(check_interchange(sing, 1e-12).gap <= 1e-12);
  }

  const auto dis = finite_game({disutil({1.0, 3.0}), disutil({3.0, 1.0})}, FullSimplex{2},
                               Egocentric{}, Sense::Disutility, true);
  REQUIRE(check_interchange(dis, 1e-6).gap <= 1e-6);

  const auto orbit = finite_game({util({1.0, 3.0}), util({2.5, 1.5})},
                                 PermutationOrbit{{0.3, 0.7}}, Egocentric{});
  const auto orb_rep = check_interchange(orbit, 1.0);
  REQUIRE(orb_rep.gap >= 0.0);

  const auto agg = finite_game({util({1.0, 3.0})}, FullSimplex{2},
                               AggregatorPayoff{PowerMean{Power::finite(0.5), uniform(2)}});
  REQUIRE_THROWS_AS(check_interchange(agg, 1e-6), domain_error);
}

TEST_CASE("coercive angel strategies stay on the simplex and match closed forms", "[games]") {
  REQUIRE(altruistic_angel_strategy(1.0, {0.3, 0.7}, {5.0, 0.25}, 0.0) ==
          WeightVector{0.3, 0.7});

  const auto quad = altruistic_angel_strategy(2.0, uniform(2), {1.0, 3.0}, 0.0);
  REQUIRE(quad[0] == Catch::Approx(0.25).margin(1e-12));
  REQUIRE(quad[1] == Catch::Approx(0.75).margin(1e-12));

  // degenerate scores at the floor fall back to the angel's own weights
  REQUIRE(altruistic_angel_strategy(0.0, {0.3, 0.7}, {1.0, 1.0}, 1.0) ==
          WeightVector{0.3, 0.7});

  const double e = std::exp(1.0);
  const auto log_w = altruistic_angel_strategy(0.0, uniform(2), {e, e * e}, 1.0);
  REQUIRE(log_w[0] == Catch::Approx(e / (e + 2.0)).margin(1e-12));
  REQUIRE(log_w[1] == Catch::Approx(2.0 / (e + 2.0)).margin(1e-12));

  const auto neg = altruistic_angel_strategy(-1.0, uniform(2), {0.5, 1.0}, 0.5);
  REQUIRE(neg[0] == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(neg[1] == Catch::Approx(1.0).margin(1e-12));

  auto gen = oracle::rng(54);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t g = rep % 2 == 0 ? 2 : 3;
    const Vec w_star = oracle::random_simplex(gen, g, 0.05);
    const Vec s = oracle::random_vector(gen, g, 0.5, 4.0);
    for (double p : {-1.0, 0.0, 0.5, 1.0, 2.0}) {
      const auto w = altruistic_angel_strategy(p, w_star, s, 0.5);
      double sum = 0.0;
      for (double x : w) {
        REQUIRE(x >= 0.0);
        sum += x;
      }
      REQUIRE(sum == Catch::Approx(1.0).margin(1e-12));
    }
  }

  REQUIRE_THROWS_AS(altruistic_angel_strategy(0.0, uniform(2), {0.5, 2.0}, 1.0), domain_error);
  REQUIRE_THROWS_AS(altruistic_angel_strategy(-1.0, uniform(2), {1.0, 2.0}, 0.0), domain_error);
}

TEST_CASE("equilibrium checks accept constructed profiles and flag perturbations", "[games]") {
  GameSpec G;
  G.daemon_space = budget_space({1.0, 1.0}, 2.0);
  G.angel_space = FullSimplex{2};
  G.sense = Sense::Utility;

  const auto run = [&](double p, Vec w_star, Vec claimed, AngelStrategy st) {
    G.payoff = AltruisticAngel{p, w_star, 0.0};
    StrategyProfile profile;
    profile.daemon_action = SentimentVector{std::move(claimed), Sense::Utility};
    profile.angel = std::move(st);
    return verify_equilibrium(G, profile, 1e-2, 1e-6);
  };
  const auto equilibrium_for = [&](double p) {
    AngelStrategy st;
    st.kind = AngelStrategy::Kind::Equilibrium;
    st.w_star = uniform(2);
    st.p = p;
    return st;
  };

  const auto flat = run(1.0, uniform(2), {1.0, 1.0}, equilibrium_for(1.0));
  REQUIRE(flat.equilibrium);
  REQUIRE(flat.daemon_improvement <= 1e-6);
  const auto conc = run(0.5, uniform(2), {1.0, 1.0}, equilibrium_for(0.5));
  REQUIRE(conc.equilibrium);
  REQUIRE(conc.daemon_improvement <= 1e-6);
  const auto convex = run(2.0, uniform(2), {2.0, 0.0}, equilibrium_for(2.0));
  REQUIRE(convex.equilibrium);
  REQUIRE(convex.daemon_improvement <= 1e-6);

  AngelStrategy perturbed;
  perturbed.kind = AngelStrategy::Kind::PowerProportional;
  perturbed.w_star = uniform(2);
  perturbed.exponent = 0.5;
  const auto broken = run(0.5, uniform(2), {1.0, 1.0}, perturbed);
  REQUIRE_FALSE(broken.equilibrium);
  REQUIRE(broken.daemon_improvement > 1e-3);

  // simplex normalization shifts the best response off the aggregator argmax
  // once the weights are asymmetric, so the normalized closed form is only
  // certified as an equilibrium for uniform base weights
  AngelStrategy skew_eq;
  skew_eq.kind = AngelStrategy::Kind::Equilibrium;
  skew_eq.w_star = {0.3, 0.7};
  skew_eq.p = 0.5;
  const Vec skew_opt = {2.0 * 0.09 / 0.58, 2.0 * 0.49 / 0.58};
  const auto skew = run(0.5, {0.3, 0.7}, skew_opt, skew_eq);
  REQUIRE(skew.angel_gap <= 1e-6);
  REQUIRE(skew.daemon_improvement > 1e-3);
  REQUIRE_FALSE(skew.equilibrium);

  // on a fixed linear-value family the best response is the aggregator argmax
  GameSpec F;
  F.daemon_space = std::vector<SentimentVector>{util({1.0, 3.0}), util({2.0, 2.0}),
                                                util({3.0, 1.0}), util({0.5, 3.5})};
  F.angel_space = FullSimplex{2};
  F.payoff = AltruisticAngel{2.0, uniform(2), 0.0};
  StrategyProfile fp;
  fp.angel = equilibrium_for(2.0);
  fp.daemon_choice = 3;
  const auto aligned = verify_equilibrium(F, fp, 1e-2, 1e-9);
  REQUIRE(aligned.equilibrium);
  fp.daemon_choice = 0;
  const auto misaligned = verify_equilibrium(F, fp, 1e-2, 1e-9);
  REQUIRE(misaligned.daemon_improvement > 1e-3);

  GameSpec E = F;
  E.payoff = Egocentric{};
  REQUIRE_THROWS_AS(verify_equilibrium(E, fp, 1e-2, 1e-9), domain_error);
}

TEST_CASE("mixing never beats a pure daemon under concave aggregators", "[games]") {
  auto gen = oracle::rng(55);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t g = rep % 2 == 0 ? 2 : 3;
    const Vec a = oracle::random_vector(gen, g, 0.5, 3.0);
    const Vec b = oracle::random_vector(gen, g, 0.5, 3.0);
    const double t = unit(gen);
    Vec mix(g, 0.0);
    for (std::size_t i = 0; i < g; ++i) mix[i] = t * a[i] + (1.0 - t) * b[i];
    const double p = rep % 3 == 0 ? 0.5 : rep % 3 == 1 ? 0.0 : -1.0;
    const WeightSet W = rep % 2 == 0 ? WeightSet{FullSimplex{g}}
                                     : WeightSet{LowerBounded{0.4, center(g)}};
    GameSpec G = finite_game({util(a), util(b)}, W,
                             AggregatorPayoff{PowerMean{Power::finite(p), uniform(g)}},
                             Sense::Utility, true);
    const double va = detail::worst_case_payoff(G, util(a)).first;
    const double vb = detail::worst_case_payoff(G, util(b)).first;
    const double vm = detail::worst_case_payoff(G, util(mix)).first;
    CAPTURE(rep, g, p, t);
    REQUIRE(vm >= t * va + (1.0 - t) * vb - 1e-10);
  }
}

TEST_CASE("game validation rejects malformed specs", "[games]") {
  REQUIRE_THROWS_AS(validate_game(finite_game({}, FullSimplex{2}, Egocentric{})), domain_error);
  REQUIRE_THROWS_AS(
      validate_game(finite_game({util({1.0, 2.0, 3.0})}, FullSimplex{2}, Egocentric{})),
      domain_error);
  REQUIRE_THROWS_AS(validate_game(finite_game({disutil({1.0, 2.0})}, FullSimplex{2},
                                              Egocentric{}, Sense::Utility)),
                    domain_error);
  REQUIRE_THROWS_AS(validate_game(finite_game({util({1.0, 2.0})}, FullSimplex{2},
                                              UtilityTransform{0.0, 0.0})),
                    domain_error);
  REQUIRE_THROWS_AS(validate_game(finite_game({util({0.5, 2.0})}, FullSimplex{2},
                                              UtilityTransform{0.0, 1.0})),
                    domain_error);
  REQUIRE_THROWS_AS(validate_game(finite_game({util({1.0, 2.0})}, FullSimplex{2},
                                              UtilityTransform{2.0, 0.0})),
                    domain_error);

  GameSpec cont;
  cont.daemon_space = budget_space({1.0, 2.0}, 10.0);
  cont.angel_space = FullSimplex{2};
  cont.payoff = Egocentric{};
  REQUIRE_THROWS_AS(daemon_strategic_value(cont), domain_error);

  GameSpec floored = cont;
  floored.payoff = UtilityTransform{-1.0, 0.5};
  REQUIRE_THROWS_AS(validate_game(floored), domain_error);

  SolveConfig cfg;
  cfg.seed = 3;
  const auto rep = daemon_strategic_value(cont, cfg);
  REQUIRE(rep.value == Catch::Approx(20.0 / 3.0).margin(1e-3));
  REQUIRE(rep.action.values[0] == Catch::Approx(20.0 / 3.0).margin(1e-2));
  REQUIRE(rep.action.values[1] == Catch::Approx(20.0 / 3.0).margin(1e-2));
  REQUIRE(membership(cont.angel_space, rep.angel.w, 1e-6));
}
