#include <catch2/catch_amalgamated.hpp>

#include "fairwell/bounds.hpp"
#include "oracles.hpp"

using namespace fairwell;

namespace {

Vec uniform(std::size_t g) { return Vec(g, 1.0 / static_cast<double>(g)); }

Aggregator mean_p(double p, std::size_t g) {
  return PowerMean{Power::finite(p), uniform(g)};
}

Aggregator egalitarian(std::size_t g) { return PowerMean{Power::neg_inf(), uniform(g)}; }

}  // namespace

TEST_CASE("sandwich brackets every member of the weight set", "[bounds]") {
  const SentimentVector s{{1.0, 3.0}, Sense::Utility};

  const auto point = sandwich(s, PowerMean{Power::finite(1.0), {0.3, 0.7}},
                              Singleton{{0.3, 0.7}});
  REQUIRE(point.lo == Catch::Approx(2.4).margin(1e-12));
  REQUIRE(point.hi == Catch::Approx(2.4).margin(1e-12));

  const auto free = sandwich(s, mean_p(1.0, 2), FullSimplex{2});
  REQUIRE(free.lo == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(free.hi == Catch::Approx(3.0).margin(1e-12));

  const auto floored = sandwich(s, mean_p(1.0, 2), LowerBounded{0.5, uniform(2)});
  REQUIRE(floored.lo == Catch::Approx(1.5).margin(1e-9));
  REQUIRE(floored.hi == Catch::Approx(2.5).margin(1e-9));

  const double rt3 = std::sqrt(3.0);
  const auto curved = sandwich(s, mean_p(0.5, 2), LowerBounded{0.5, uniform(2)});
  REQUIRE(curved.lo == Catch::Approx(std::pow(0.75 + 0.25 * rt3, 2.0)).margin(1e-9));
  REQUIRE(curved.hi == Catch::Approx(std::pow(0.25 + 0.75 * rt3, 2.0)).margin(1e-9));

  auto gen = oracle::rng(61);
  const std::vector<WeightSet> sets = {FullSimplex{2}, LowerBounded{0.5, uniform(2)},
                                       PermutationOrbit{{0.3, 0.7}},
                                       NormBall{Singleton{{0.5, 0.5}}, Norm::L2, 0.15}};
  const std::vector<Aggregator> aggs = {mean_p(1.0, 2), mean_p(0.5, 2), mean_p(0.0, 2),
                                        egalitarian(2), Gini{{0.4, 0.6}, Sense::Utility}};
  std::uniform_real_distribution<double> shift(-0.1, 0.1);
  for (const auto& W : sets) {
    for (const auto& agg : aggs) {
      for (int rep = 0; rep < 20; ++rep) {
        const SentimentVector sv{oracle::random_vector(gen, 2, 0.2, 3.0), Sense::Utility};
        const auto iv = sandwich(sv, agg, W);
        REQUIRE(iv.lo <= iv.hi + 1e-12);
        for (int draw = 0; draw < 20; ++draw) {
          WeightVector w;
          if (std::holds_alternative<PermutationOrbit>(W)) {
            w = draw % 2 == 0 ? WeightVector{0.3, 0.7} : WeightVector{0.7, 0.3};
          } else if (std::holds_alternative<NormBall>(W)) {
            w = project_simplex({0.5 + shift(gen), 0.5 + shift(gen)});
          } else {
            w = oracle::random_simplex(gen, 2);
            if (std::holds_alternative<LowerBounded>(W)) {
              for (double& x : w) x = 0.25 + 0.5 * x;
            }
          }
          if (!membership(W, w, 1e-9)) continue;
          const double val = aggregate(with_weights(agg, w), sv);
          REQUIRE(val >= iv.lo - 1e-9);
          REQUIRE(val <= iv.hi + 1e-9);
        }
      }
    }
  }
}

TEST_CASE("gap bound dominates the sandwich width", "[bounds]") {
  REQUIRE(robust_gap_bound(5.0, Singleton{{0.3, 0.7}}) == 0.0);
  REQUIRE(robust_gap_bound(2.0, FullSimplex{3}) == Catch::Approx(4.0).margin(1e-12));
  REQUIRE(robust_gap_bound(1.0, LowerBounded{0.5, uniform(2)}) ==
          Catch::Approx(1.0).margin(1e-12));
  REQUIRE(robust_gap_bound(1.0, PermutationOrbit{{0.3, 0.7}}) ==
          Catch::Approx(0.8).margin(1e-12));
  REQUIRE_THROWS_AS(robust_gap_bound(-0.1, FullSimplex{2}), domain_error);

  auto gen = oracle::rng(62);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t g = rep % 2 == 0 ? 2 : 3;
    const std::vector<WeightSet> sets = {FullSimplex{g}, LowerBounded{0.3, uniform(g)},
                                         Singleton{oracle::random_simplex(gen, g)},
                                         PermutationOrbit{g == 2 ? Vec{0.2, 0.8}
                                                                 : Vec{0.2, 0.3, 0.5}}};
    const Vec s = oracle::random_vector(gen, g, 0.0, 4.0);
    const double range = *std::max_element(s.begin(), s.end()) -
                         *std::min_element(s.begin(), s.end());
    for (const auto& W : sets) {
      const auto iv = sandwich({s, Sense::Utility}, mean_p(1.0, g), W);
      CAPTURE(rep, g, W.index());
      REQUIRE(iv.hi - iv.lo <= robust_gap_bound(range, W) + 1e-9);
    }
  }
}

TEST_CASE("continuity certificates match the closed-form table", "[bounds]") {
  const auto lin = holder_certificate(Power::finite(1.0), Singleton{{0.3, 0.7}}, 1.0);
  REQUIRE(lin.best.lambda == Catch::Approx(0.7).margin(1e-12));
  REQUIRE(lin.best.alpha == 1.0);
  REQUIRE(lin.best.norm == HolderNorm::L1);
  REQUIRE(lin.best.branch == "weighted_sum");
  REQUIRE(std::any_of(lin.applicable.begin(), lin.applicable.end(), [](const auto& c) {
    return c.branch == "sup_contraction" && c.lambda == 1.0 && c.norm == HolderNorm::Linf;
  }));

  const auto harmonic = holder_certificate(Power::finite(-1.0), Singleton{{0.25, 0.75}}, 1.0);
  REQUIRE(harmonic.best.lambda == Catch::Approx(4.0).margin(1e-12));
  REQUIRE(harmonic.best.alpha == 1.0);
  REQUIRE(harmonic.best.norm == HolderNorm::Linf);
  REQUIRE(harmonic.best.branch == "weight_floor_root");

  const auto half = holder_certificate(Power::finite(0.5), FullSimplex{2}, 1.0);
  REQUIRE(half.best.lambda == Catch::Approx(2.0).margin(1e-12));
  REQUIRE(half.best.alpha == Catch::Approx(0.5).margin(1e-12));
  REQUIRE(half.best.branch == "fractional_power");

  REQUIRE(holder_certificate(Power::finite(2.0), FullSimplex{2}, 1.0).best.lambda == 1.0);
  REQUIRE(holder_certificate(Power::pos_inf(), FullSimplex{4}, 3.0).best.norm ==
          HolderNorm::Linf);

  const auto geo = holder_certificate(Power::finite(0.0), LowerBounded{0.5, uniform(2)}, 2.0);
  REQUIRE(geo.best.lambda == Catch::Approx(std::pow(2.0, 0.75)).margin(1e-12));
  REQUIRE(geo.best.alpha == Catch::Approx(0.25).margin(1e-12));
  REQUIRE(geo.best.branch == "weight_floor_exponent");

  const auto worst = holder_certificate(Power::neg_inf(), Singleton{{0.25, 0.75}}, 1.0);
  REQUIRE(worst.best.lambda == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(worst.best.alpha == 1.0);

  const auto ball =
      holder_certificate(Power::finite(-1.0),
                         NormBall{Singleton{{0.4, 0.6}}, Norm::Linf, 0.1}, 1.0);
  REQUIRE(ball.best.lambda == Catch::Approx(1.0 / 0.3).margin(1e-12));

  REQUIRE_THROWS_AS(holder_certificate(Power::finite(-1.0), FullSimplex{2}, 1.0),
                    domain_error);
  REQUIRE_THROWS_AS(holder_certificate(Power::finite(0.0), FullSimplex{2}, 1.0),
                    domain_error);
  REQUIRE_THROWS_AS(holder_certificate(Power::finite(1.0), FullSimplex{2}, 0.0),
                    domain_error);

  for (const auto& cert : lin.applicable) {
    REQUIRE(cert.alpha > 0.0);
    REQUIRE(cert.alpha <= 1.0);
  }
}

TEST_CASE("certificates survive randomized stress", "[bounds]") {
  const auto lin = holder_certificate(Power::finite(1.0), Singleton{{0.3, 0.7}}, 1.0);
  const auto lin_check = holder_empirical_check(PowerMean{Power::finite(1.0), uniform(2)},
                                                Singleton{{0.3, 0.7}}, lin.best, 1000, 1.0, 7);
  REQUIRE(lin_check.passed);
  REQUIRE(lin_check.max_ratio <= 1.0 + 1e-9);
  REQUIRE(lin_check.max_ratio >= 0.9);

  // worst-case welfare over the whole simplex is the minimum, which is a
  // unit-Lipschitz map in the sup norm
  const HolderCertificate min_cert{1.0, 1.0, HolderNorm::Linf, "sup_contraction"};
  REQUIRE(holder_empirical_check(egalitarian(2), FullSimplex{2}, min_cert, 2000, 1.0, 8)
              .passed);

  const auto half = holder_certificate(Power::finite(0.5), FullSimplex{2}, 1.0);
  REQUIRE(holder_empirical_check(PowerMean{Power::finite(0.5), uniform(2)}, FullSimplex{2},
                                 half.best, 10000, 1.0, 9)
              .passed);

  const std::vector<Power> powers = {Power::neg_inf(),    Power::finite(-1.0),
                                     Power::finite(0.0),  Power::finite(0.5),
                                     Power::finite(1.0),  Power::finite(2.0),
                                     Power::pos_inf()};
  const std::vector<WeightSet> sets = {Singleton{{0.3, 0.7}}, LowerBounded{0.5, uniform(2)},
                                       PermutationOrbit{{0.3, 0.7}}};
  std::uint64_t seed = 100;
  for (const auto& p : powers) {
    for (const auto& W : sets) {
      HolderReport report;
      try {
        report = holder_certificate(p, W, 1.5);
      } catch (const domain_error&) {
        continue;
      }
      for (const auto& cert : report.applicable) {
        const auto check = holder_empirical_check(PowerMean{p, uniform(2)}, W, cert, 2000,
                                                  1.5, seed++);
        CAPTURE(cert.branch, W.index());
        REQUIRE(check.passed);
      }
    }
  }

  REQUIRE_THROWS_AS(holder_empirical_check(mean_p(1.0, 2), FullSimplex{2},
                                           HolderCertificate{1.0, 1.0, HolderNorm::L1, ""},
                                           0, 1.0, 1),
                    domain_error);
}

TEST_CASE("generalization intervals respond monotonically to error radii", "[bounds]") {
  const SentimentVector flat{{2.0, 3.0}, Sense::Utility};
  const auto exact = generalization_sandwich(flat, {0.0, 0.0}, Aggregator{mean_p(1.0, 2)});
  REQUIRE(exact.lo == Catch::Approx(2.5).margin(1e-12));
  REQUIRE(exact.hi == Catch::Approx(2.5).margin(1e-12));

  const auto egal = generalization_sandwich(flat, {1.0, 0.0}, Aggregator{egalitarian(2)});
  REQUIRE(egal.lo == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(egal.hi == Catch::Approx(3.0).margin(1e-12));

  const auto avg = generalization_sandwich({{2.0, 4.0}, Sense::Utility}, {1.0, 1.0},
                                           Aggregator{mean_p(1.0, 2)});
  REQUIRE(avg.lo == Catch::Approx(2.0).margin(1e-12));
  REQUIRE(avg.hi == Catch::Approx(4.0).margin(1e-12));

  // lower endpoint clips at zero before entering the power mean
  const auto clipped = generalization_sandwich({{0.5, 2.0}, Sense::Utility}, {1.0, 0.0},
                                               Aggregator{mean_p(0.5, 2)});
  REQUIRE(clipped.lo == Catch::Approx(0.5).margin(1e-12));

  const auto robust = generalization_sandwich(
      {{2.0, 4.0}, Sense::Utility}, {1.0, 1.0},
      Objective{RobustAggregator{mean_p(1.0, 2), FullSimplex{2}}});
  REQUIRE(robust.lo == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(robust.hi == Catch::Approx(3.0).margin(1e-12));

  auto gen = oracle::rng(63);
  std::uniform_real_distribution<double> radius(0.0, 0.4);
  const std::vector<Objective> objectives = {
      Aggregator{mean_p(1.0, 3)}, Aggregator{mean_p(0.0, 3)}, Aggregator{egalitarian(3)},
      Aggregator{Gini{{0.2, 0.3, 0.5}, Sense::Utility}},
      Objective{RobustAggregator{mean_p(1.0, 3), LowerBounded{0.4, uniform(3)}}}};
  for (int rep = 0; rep < 100; ++rep) {
    const SentimentVector sv{oracle::random_vector(gen, 3, 0.5, 3.0), Sense::Utility};
    Vec eps1(3), eps2(3);
    for (std::size_t i = 0; i < 3; ++i) {
      eps1[i] = radius(gen);
      eps2[i] = eps1[i] + radius(gen);
    }
    const auto& obj = objectives[static_cast<std::size_t>(rep) % objectives.size()];
    const auto narrow = generalization_sandwich(sv, eps1, obj);
    const auto wide = generalization_sandwich(sv, eps2, obj);
    CAPTURE(rep);
    REQUIRE(narrow.lo <= narrow.hi + 1e-12);
    REQUIRE(wide.lo <= narrow.lo + 1e-12);
    REQUIRE(narrow.hi <= wide.hi + 1e-12);
  }

  REQUIRE_THROWS_AS(generalization_sandwich(flat, {-0.1, 0.0}, Aggregator{mean_p(1.0, 2)}),
                    domain_error);
  REQUIRE_THROWS_AS(generalization_sandwich(flat, {0.1}, Aggregator{mean_p(1.0, 2)}),
                    domain_error);
}

TEST_CASE("sample complexity matches the deviation-bound formula", "[bounds]") {
  SampleComplexityQuery q;
  q.lambda = 1.0;
  q.alpha = 1.0;
  q.norm = HolderNorm::Linf;
  q.v = {1.0, 1.0};
  q.t = 2;
  q.delta = 0.05;
  q.epsilon = 0.1;
  q.m0 = 1;
  REQUIRE(sample_complexity(q) == 439);

  SampleComplexityQuery loose = q;
  loose.epsilon = 0.2;
  REQUIRE(sample_complexity(loose) == 110);

  SampleComplexityQuery clamped = q;
  clamped.m0 = 1000000;
  REQUIRE(sample_complexity(clamped) == 1000000);

  SampleComplexityQuery l1 = q;
  l1.norm = HolderNorm::L1;
  REQUIRE(sample_complexity(l1) == 1753);
  SampleComplexityQuery l2 = q;
  l2.norm = HolderNorm::L2;
  REQUIRE(sample_complexity(l2) == 877);

  SampleComplexityQuery rooted = q;
  rooted.alpha = 0.5;
  REQUIRE(sample_complexity(rooted) == 43821);

  auto gen = oracle::rng(64);
  std::uniform_real_distribution<double> unit(0.2, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    SampleComplexityQuery base;
    base.lambda = unit(gen) + 0.5;
    base.alpha = rep % 2 == 0 ? 1.0 : 0.5 + 0.5 * unit(gen);
    base.norm = rep % 2 == 0 ? HolderNorm::Linf : HolderNorm::L2;
    base.v = {unit(gen), unit(gen) + 1.0};
    base.t = 1 + rep % 4;
    base.delta = 0.02 + 0.1 * unit(gen);
    base.epsilon = 0.05 + 0.2 * unit(gen);
    base.m0 = 1;
    const auto reference = sample_complexity(base);

    SampleComplexityQuery widened = base;
    widened.epsilon *= 1.5;
    REQUIRE(sample_complexity(widened) <= reference);
    SampleComplexityQuery laxer = base;
    laxer.delta = std::min(0.9, base.delta * 2.0);
    REQUIRE(sample_complexity(laxer) <= reference);
    SampleComplexityQuery steeper = base;
    steeper.lambda *= 1.5;
    REQUIRE(sample_complexity(steeper) >= reference);
    SampleComplexityQuery heavier = base;
    heavier.t += 5;
    REQUIRE(sample_complexity(heavier) >= reference);
    SampleComplexityQuery noisier = base;
    noisier.v[0] *= 2.0;
    REQUIRE(sample_complexity(noisier) >= reference);
    SampleComplexityQuery grouped = base;
    grouped.v.push_back(0.1);
    REQUIRE(sample_complexity(grouped) >= reference);
  }

  SampleComplexityQuery bad = q;
  bad.delta = 1.0;
  REQUIRE_THROWS_AS(sample_complexity(bad), domain_error);
  bad = q;
  bad.epsilon = 0.0;
  REQUIRE_THROWS_AS(sample_complexity(bad), domain_error);
  bad = q;
  bad.lambda = 0.0;
  REQUIRE_THROWS_AS(sample_complexity(bad), domain_error);
  bad = q;
  bad.v.clear();
  REQUIRE_THROWS_AS(sample_complexity(bad), domain_error);
  bad = q;
  bad.norm = HolderNorm::SelfReferential;
  REQUIRE_THROWS_AS(sample_complexity(bad), domain_error);
}
