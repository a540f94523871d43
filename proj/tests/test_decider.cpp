#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "splitplace/decider.hpp"

using namespace splitplace;

namespace {

WorkloadOutcome outcome(double rt, double sla, double acc) {
  return WorkloadOutcome{rt, sla, acc, SplitDecision::Layer, "app"};
}

ApplicationProfile profile(const std::string& name, double prior_s) {
  auto p = make_uniform_profile(name, prior_s * 1000.0, 4, 4, 0.92, 0.88, 1000.0);
  return p;
}

}  // namespace

TEST_CASE("reward_of") {
  CHECK(reward_of(outcome(5, 10, 0.9107)) == doctest::Approx(0.95535).epsilon(1e-12));
  CHECK(reward_of(outcome(11, 10, 0.8)) == doctest::Approx(0.40).epsilon(1e-12));
  // RT == SLA counts as met
  CHECK(reward_of(outcome(10, 10, 0.0)) == 0.5);
}

TEST_CASE("aggregate_reward") {
  const std::vector<WorkloadOutcome> two{outcome(5, 10, 0.9), outcome(12, 10, 0.8)};
  CHECK(aggregate_reward(two) == doctest::Approx(0.675).epsilon(1e-12));
  const std::vector<WorkloadOutcome> one{outcome(1, 2, 1.0)};
  CHECK(aggregate_reward(one) == 1.0);
  CHECK_THROWS_WITH_AS(aggregate_reward({}), doctest::Contains("empty workload set"),
                       std::invalid_argument);
}

TEST_CASE("reward stays in [0,1] and aggregate is the arithmetic mean") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<WorkloadOutcome> os;
    double sum = 0.0;
    for (int i = 0; i < 1 + trial % 17; ++i) {
      os.push_back(outcome(u(rng) * 10, u(rng) * 10 + 1e-9, u(rng)));
      const double r = reward_of(os.back());
      CHECK(r >= 0.0);
      CHECK(r <= 1.0);
      sum += r;
    }
    CHECK(aggregate_reward(os) == sum / static_cast<double>(os.size()));
  }
}

TEST_CASE("ema_update") {
  EmaEstimator e(0.1);
  e.seed_prior("a", 10.0);
  e.update("a", 1.0);  // first observation replaces the prior
  CHECK(e.value("a") == 1.0);

  EmaEstimator f(0.1);
  f.update("a", 10.0);
  f = ema_update(f, "a", 20.0);
  CHECK(f.value("a") == doctest::Approx(11.0).epsilon(1e-15));
  f = ema_update(f, "a", 11.0);
  CHECK(f.value("a") == doctest::Approx(11.0).epsilon(1e-15));

  EmaEstimator g(0.1);
  CHECK_FALSE(g.initialized("b"));
  g.update("b", 7.5);
  CHECK(g.initialized("b"));
  CHECK(g.value("b") == 7.5);

  CHECK_THROWS_AS(g.update("b", 0.0), std::invalid_argument);
  CHECK_THROWS_AS(g.update("b", -1.0), std::invalid_argument);
  CHECK_THROWS_AS(EmaEstimator(0.0), std::invalid_argument);
  CHECK_THROWS_AS(EmaEstimator(1.5), std::invalid_argument);
}

TEST_CASE("EMA stays between the smallest and largest of prior and observations") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.01, 50.0);
  for (int trial = 0; trial < 100; ++trial) {
    EmaEstimator e(0.05 + 0.9 * u(rng) / 50.0);
    const double prior = u(rng);
    e.seed_prior("a", prior);
    double lo = prior, hi = prior;
    for (int i = 0; i < 50; ++i) {
      const double obs = u(rng);
      e.update("a", obs);
      lo = std::min(lo, obs);
      hi = std::max(hi, obs);
      CHECK(e.value("a") >= lo);
      CHECK(e.value("a") <= hi);
      CHECK(e.value("a") > 0.0);
    }
  }
}

TEST_CASE("context_of") {
  EmaEstimator e;
  e.seed_prior("app", 12.0);
  CHECK(context_of(e, Workload{0, 0, "app", 10.0}) == Context::Tight);
  CHECK(context_of(e, Workload{0, 0, "app", 12.0}) == Context::Loose);
  EmaEstimator f;
  f.seed_prior("app", 5.0);
  CHECK(context_of(f, Workload{0, 0, "app", 10.0}) == Context::Loose);
  CHECK_THROWS_AS(context_of(f, Workload{0, 0, "other", 10.0}), std::out_of_range);
}

TEST_CASE("select_arm") {
  BanditState b;
  CHECK(select_arm(b, Context::Tight) == SplitDecision::Layer);

  b.at(Context::Tight, SplitDecision::Semantic) = {3, 0.9};
  b.total_pulls[0] = 3;
  CHECK(select_arm(b, Context::Tight) == SplitDecision::Layer);

  BanditState c;
  c.exploration = std::sqrt(2.0);
  c.at(Context::Loose, SplitDecision::Layer) = {1, 0.4};
  c.at(Context::Loose, SplitDecision::Semantic) = {1, 0.9};
  c.total_pulls[1] = 2;
  // Hand-computed: both bonuses are sqrt(2) * sqrt(ln 2) = 1.17741; 1.57741 < 2.07741.
  CHECK(select_arm(c, Context::Loose) == SplitDecision::Semantic);

  // Exact tie goes to Layer.
  BanditState d;
  d.at(Context::Tight, SplitDecision::Layer) = {2, 0.5};
  d.at(Context::Tight, SplitDecision::Semantic) = {2, 0.5};
  d.total_pulls[0] = 4;
  CHECK(select_arm(d, Context::Tight) == SplitDecision::Layer);

  // Untried Semantic arm is pulled once Layer has been tried.
  BanditState e;
  e.at(Context::Tight, SplitDecision::Layer) = {1, 1.0};
  e.total_pulls[0] = 1;
  CHECK(select_arm(e, Context::Tight) == SplitDecision::Semantic);
}

TEST_CASE("update_arm") {
  BanditState b;
  b = update_arm(b, Context::Tight, SplitDecision::Layer, 0.95);
  CHECK(b.at(Context::Tight, SplitDecision::Layer).pulls == 1);
  CHECK(b.at(Context::Tight, SplitDecision::Layer).mean_reward == doctest::Approx(0.95));
  b = update_arm(b, Context::Tight, SplitDecision::Layer, 0.40);
  CHECK(b.at(Context::Tight, SplitDecision::Layer).pulls == 2);
  CHECK(b.at(Context::Tight, SplitDecision::Layer).mean_reward == doctest::Approx(0.675));
  CHECK(b.total_pulls[index_of(Context::Tight)] == 2);
  CHECK(b.total_pulls[index_of(Context::Loose)] == 0);
  CHECK(b.at(Context::Loose, SplitDecision::Layer) == ArmStats{});

  CHECK_THROWS_AS(update_arm(b, Context::Tight, SplitDecision::Layer, 1.01), std::invalid_argument);
  CHECK_THROWS_AS(update_arm(b, Context::Tight, SplitDecision::Layer, -0.01),
                  std::invalid_argument);
}

TEST_CASE("updates in one context never touch the other") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  BanditState b;
  for (int i = 0; i < 500; ++i) {
    const Context ctx = rng() % 2 ? Context::Tight : Context::Loose;
    const Context other = ctx == Context::Tight ? Context::Loose : Context::Tight;
    const auto before_arms = b.arms[index_of(other)];
    const auto before_total = b.total_pulls[index_of(other)];
    update_arm_in_place(b, ctx, rng() % 2 ? SplitDecision::Layer : SplitDecision::Semantic, u(rng));
    CHECK(b.arms[index_of(other)] == before_arms);
    CHECK(b.total_pulls[index_of(other)] == before_total);
    for (auto c : {Context::Tight, Context::Loose}) {
      CHECK(b.total_pulls[index_of(c)] ==
            b.at(c, SplitDecision::Layer).pulls + b.at(c, SplitDecision::Semantic).pulls);
      for (auto a : {SplitDecision::Layer, SplitDecision::Semantic}) {
        CHECK(b.at(c, a).mean_reward >= 0.0);
        CHECK(b.at(c, a).mean_reward <= 1.0);
      }
    }
  }
}

TEST_CASE("UCB1 concentrates on the better Bernoulli arm") {
  int good_seeds = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution layer(0.2), semantic(0.8);
    BanditState b;
    int semantic_pulls = 0;
    for (int t = 0; t < 1000; ++t) {
      const auto arm = select_arm(b, Context::Tight);
      const double r = arm == SplitDecision::Layer ? layer(rng) : semantic(rng);
      if (arm == SplitDecision::Semantic) ++semantic_pulls;
      update_arm_in_place(b, Context::Tight, arm, r);
    }
    if (semantic_pulls > 900) ++good_seeds;
  }
  CHECK(good_seeds >= 95);
}

TEST_CASE("fresh decider explores Layer first and rejects unknown apps") {
  Decider d({profile("app", 5.0)});
  CHECK(d.decide(Workload{0, 0, "app", 1.0}) == SplitDecision::Layer);
  CHECK(d.decide(Workload{1, 0, "app", 10.0}) == SplitDecision::Layer);
  CHECK_THROWS_AS(d.decide(Workload{2, 0, "nope", 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(d.decide(Workload{0, 0, "app", 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(d.feedback(99, outcome(1, 1, 1)), std::out_of_range);
}

TEST_CASE("decider seeds E_a from the profile prior") {
  Decider d({profile("app", 5.0)});
  CHECK(d.estimates().value("app") == doctest::Approx(5.0));
  CHECK_FALSE(d.estimates().initialized("app"));
}

TEST_CASE("feedback routes reward to the deciding context and updates E_a on Layer") {
  Decider d({profile("app", 5.0)}, DeciderOptions{0.5, std::sqrt(2.0)});
  const Workload tight{0, 0, "app", 2.0};
  REQUIRE(d.decide(tight) == SplitDecision::Layer);
  d.feedback(0, WorkloadOutcome{8.0, 2.0, 0.92, SplitDecision::Layer, "app"});
  CHECK(d.bandits().at(Context::Tight, SplitDecision::Layer).pulls == 1);
  CHECK(d.bandits().at(Context::Tight, SplitDecision::Layer).mean_reward == doctest::Approx(0.46));
  CHECK(d.bandits().total_pulls[index_of(Context::Loose)] == 0);
  CHECK(d.estimates().value("app") == 8.0);

  const Workload tight2{1, 0, "app", 2.0};
  REQUIRE(d.decide(tight2) == SplitDecision::Semantic);
  d.feedback(1, WorkloadOutcome{1.0, 2.0, 0.88, SplitDecision::Semantic, "app"});
  // Semantic outcomes never move E_a.
  CHECK(d.estimates().value("app") == 8.0);
  CHECK(d.pending() == 0);
}

TEST_CASE("Tight workloads converge to Semantic when Layer misses and Semantic meets") {
  Decider d({profile("app", 5.0)});
  int semantic_late = 0;
  for (WorkloadId id = 0; id < 1000; ++id) {
    const Workload w{id, 0, "app", 3.0};
    const auto arm = d.decide(w);
    if (id >= 500 && arm == SplitDecision::Semantic) ++semantic_late;
    const double rt = arm == SplitDecision::Layer ? 6.0 : 1.5;
    d.feedback(id, WorkloadOutcome{rt, 3.0, arm == SplitDecision::Layer ? 0.92 : 0.88, arm, "app"});
  }
  CHECK(semantic_late > 450);
}

TEST_CASE("identical decider state and workload give identical decisions") {
  std::mt19937_64 rng(9);
  Decider a({profile("app", 5.0)});
  for (WorkloadId id = 0; id < 200; ++id) {
    const Workload w{id, 0, "app", 1.0 + static_cast<double>(rng() % 100) / 10.0};
    const auto arm = a.decide(w);
    a.feedback(id, WorkloadOutcome{static_cast<double>(rng() % 80) / 10.0 + 0.1, w.sla_s,
                                   arm == SplitDecision::Layer ? 0.92 : 0.88, arm, "app"});
    Decider copy = a;
    const Workload probe{10000 + id, 0, "app", 4.0};
    CHECK(copy.decide(probe) == Decider(a).decide(probe));
  }
}

TEST_CASE("frozen decider acts greedily and stops learning") {
  Decider d({profile("app", 5.0)});
  auto& b = d.mutable_bandits();
  b.at(Context::Tight, SplitDecision::Layer) = {10, 0.4};
  b.at(Context::Tight, SplitDecision::Semantic) = {10, 0.9};
  b.at(Context::Loose, SplitDecision::Layer) = {10, 0.95};
  b.at(Context::Loose, SplitDecision::Semantic) = {10, 0.93};
  b.total_pulls = {20, 20};
  d.set_frozen(true);
  const BanditState before = d.bandits();
  CHECK(d.decide(Workload{0, 0, "app", 1.0}) == SplitDecision::Semantic);
  CHECK(d.decide(Workload{1, 0, "app", 50.0}) == SplitDecision::Layer);
  d.feedback(0, WorkloadOutcome{9.0, 1.0, 0.88, SplitDecision::Semantic, "app"});
  d.feedback(1, WorkloadOutcome{9.0, 50.0, 0.92, SplitDecision::Layer, "app"});
  CHECK(d.bandits() == before);
}
