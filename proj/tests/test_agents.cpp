#include "doctest.h"

#include <cmath>
#include <random>

#include "acoca/agents.hpp"

using namespace acoca;

namespace {

AgentConfig small(AgentKind k) {
  AgentConfig c;
  c.kind = k;
  c.hidden = {16, 8};
  c.seed = 3;
  return c;
}

StateVector state_of(double x) {
  StateVector s;
  for (std::size_t i = 0; i < kStateSize; ++i) s.values[i] = x * static_cast<double>(i % 4) / 4.0;
  return s;
}

DecisionContext ctx_for(const Id& id) {
  DecisionContext c;
  c.item_id = id;
  c.avg_cl = 50;
  return c;
}

RewardEvent reward_for(const Decision& d, double ret) {
  RewardEvent ev;
  ev.decision_id = d.id;
  ev.cached = d.action.cache;
  ev.access_count = 1;
  ev.ret_samples = {ret};
  return ev;
}

}  // namespace

TEST_SUITE("agents") {
  TEST_CASE("reward for actions without accesses") {
    RewardEvent ev;
    ev.cached = true;
    CHECK(compute_reward(ev) == kCachedNoAccessReward);
    CHECK(compute_reward(ev) == -10.0);
    ev.cached = false;
    CHECK(compute_reward(ev) == 5.0);
  }

  TEST_CASE("reward averages the return samples") {
    RewardEvent ev;
    ev.cached = true;
    ev.access_count = 3;
    ev.ret_samples = {0.2, 0.4, 0.9};
    CHECK(compute_reward(ev) == doctest::Approx(0.5));
    ev.cached = false;
    ev.expected_ret = 0.1;
    CHECK(compute_reward(ev) == doctest::Approx(0.4));
  }

  TEST_CASE("value mapping") {
    CHECK(map_value_to_action(0.75, 50, 5) == Action::Cache(25));
    CHECK(map_value_to_action(1.0, 50, 5) == Action::Cache(50));
    CHECK(map_value_to_action(0.3, 50, 5) == Action::NotCache(2));
    CHECK(map_value_to_action(0.5, 50, 5) == Action::NotCache(0));
    CHECK(map_value_to_action(0.0, 50, 5) == Action::NotCache(5));
    CHECK(map_value_to_action(1.7, 50, 5) == Action::Cache(50));
  }

  TEST_CASE("continuous action mapping") {
    CHECK(map_continuous_action(2.5, 5, 10) == Action::Cache(12.5));
    CHECK(map_continuous_action(-3.2, 5, 10) == Action::NotCache(4));
    CHECK(map_continuous_action(-3.0, 5, 10) == Action::NotCache(3));
    CHECK(map_continuous_action(0.0, 5, 10) == Action::NotCache(0));
    CHECK(map_continuous_action(20, 5, 10) == Action::Cache(50));
    CHECK(map_continuous_action(-20, 5, 10) == Action::NotCache(10));
  }

  TEST_CASE("epsilon moves toward exploration when rewards are poor") {
    ExplorationState s;
    CHECK(adapt_epsilon(s, 0.2) == doctest::Approx(0.505));
    CHECK(adapt_epsilon(s, 3.0) == doctest::Approx(0.5));
    s.epsilon = 0.949;
    CHECK(adapt_epsilon(s, 0) == 0.95);
    s.epsilon = 0.003;
    CHECK(adapt_epsilon(s, 5) == 0.001);
  }

  TEST_CASE("delta grows with learning and decays to its floor") {
    ExplorationState s;
    CHECK(adapt_delta(s, false) == doctest::Approx(0.995));
    CHECK(adapt_delta(s, true) == doctest::Approx(1.0));
    s.delta = 0.502;
    CHECK(adapt_delta(s, false) == kDeltaFloor);
    CHECK(adapt_delta(s, false) == kDeltaFloor);
  }

  TEST_CASE("MFU picks the most frequent, then the most recent") {
    std::mt19937_64 rng(1);
    const std::vector<MfuCandidate> c = {{"a", 3, 1}, {"b", 5, 0}, {"c", 5, 2}};
    CHECK(explore_mfu(c, rng, 1.0) == Id("c"));
    CHECK_FALSE(explore_mfu(c, rng, 0.0).has_value());
    CHECK_FALSE(explore_mfu({}, rng, 1.0).has_value());
  }

  TEST_CASE("statistical baseline caches when the expected saving beats refresh cost") {
    StatParams p;
    p.expected_ar_mid = 0.5;
    p.lambda = 2;
    p.window_seconds = 5;
    p.delay_penalty = 0.5;
    p.p_delay_uncached = 0.4;
    p.retrieval_cost = 0.1;
    p.expected_hit_rate = 0.6;
    p.residual_lifetime = 10;
    // 5 accesses * 0.3 saving * 0.6 - 0.1 * 0.5
    CHECK(stat_baseline_benefit(p) == doctest::Approx(0.85));
    CHECK(stat_baseline_decide(p) == Action::Cache(25));
    p.expected_hit_rate = 0;
    CHECK(stat_baseline_decide(p) == Action::NotCache(1));
    StatBaselineAgent a(small(AgentKind::StatBaseline));
    DecisionContext ctx = ctx_for("x");
    ctx.stat = p;
    CHECK_FALSE(a.decide(state_of(1), ctx, 0).action.cache);
  }

  TEST_CASE("td target") {
    CHECK(td_target(1.0, 0.9, 2.0, false) == doctest::Approx(2.8));
    CHECK(td_target(1.0, 0.9, 2.0, true) == 1.0);
  }

  TEST_CASE("config validation") {
    AgentConfig c = small(AgentKind::DDPG);
    c.gamma = 1.5;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = small(AgentKind::DDPG);
    c.exploration.delta = 0.2;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = small(AgentKind::DDPG);
    c.exploration.epsilon = 0.99;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  }

  TEST_CASE("DDPG learns once per cycle and only with a full minibatch") {
    AgentConfig cfg = small(AgentKind::DDPG);
    cfg.cycle_learn = 4;
    cfg.theta_batch = 2;
    cfg.exploration_enabled = false;
    DdpgAgent a(cfg);
    const auto d1 = a.decide(state_of(1), ctx_for("x"), 0);
    a.on_reward(d1, reward_for(d1, 0.5), state_of(2), false);
    for (int i = 0; i < 3; ++i) a.decide(state_of(1), ctx_for("x"), 0);
    CHECK(a.counters().learning_steps == 0);  // one transition held
    a.on_reward(d1, reward_for(d1, 0.5), state_of(2), false);
    for (int i = 0; i < 4; ++i) a.decide(state_of(1), ctx_for("x"), 0);
    CHECK(a.counters().learning_steps == 1);
    a.exploration().delta = 2.4;
    for (int i = 0; i < 4; ++i) a.decide(state_of(1), ctx_for("x"), 0);
    CHECK(a.counters().learning_steps == 3);
    CHECK(a.replay().size() == 2);
  }

  TEST_CASE("DDPG critic targets use the target networks") {
    AgentConfig cfg = small(AgentKind::DDPG);
    cfg.gamma = 0.8;
    DdpgAgent a(cfg);
    std::vector<Transition> batch(3);
    for (int j = 0; j < 3; ++j) {
      batch[j].next_state = Vec::Constant(kStateSize, 0.1 * (j + 1));
      batch[j].reward = j - 1.0;
      batch[j].terminal = j == 2;
    }
    const auto y = a.q_targets(batch);
    for (int j = 0; j < 3; ++j) {
      const double u = a.target_actor().forward(batch[j].next_state)(0);
      Vec z(kStateSize + 1);
      z.head(kStateSize) = batch[j].next_state;
      z(kStateSize) = u;
      const double q = a.target_critic().forward(z)(0);
      const double expect = batch[j].terminal ? batch[j].reward : batch[j].reward + 0.8 * q;
      CHECK(y[j] == doctest::Approx(expect).epsilon(1e-12));
    }
  }

  TEST_CASE("DDPG actions stay within the long horizon") {
    DdpgAgent a(small(AgentKind::DDPG));
    for (int i = 0; i < 20; ++i) CHECK(std::abs(a.action_of(state_of(i), 10)) <= 10.0);
  }

  TEST_CASE("actor-critic shifts probability toward rewarded actions") {
    AgentConfig cfg = small(AgentKind::ActorCritic);
    cfg.alpha = 1e-2;
    cfg.beta = 1e-2;
    cfg.exploration_enabled = false;
    ActorCriticAgent a(cfg);
    const StateVector s = state_of(1);
    const double before = a.cache_probability(s);
    Decision d;
    d.state = s;
    d.action = Action::Cache(10);
    RewardEvent ev;
    ev.cached = true;
    ev.access_count = 1;
    ev.ret_samples = {5.0};
    for (int i = 0; i < 30; ++i) a.on_reward(d, ev, s, true);
    CHECK(a.cache_probability(s) > before);
    CHECK(a.counters().learning_steps == 30);
  }

  TEST_CASE("identical seeds give identical decisions") {
    for (auto k : {AgentKind::ActorCritic, AgentKind::DDPG}) {
      auto a = make_agent(small(k));
      auto b = make_agent(small(k));
      for (int i = 0; i < 30; ++i) {
        const auto da = a->decide(state_of(i * 0.1), ctx_for("x" + std::to_string(i % 5)), i);
        const auto db = b->decide(state_of(i * 0.1), ctx_for("x" + std::to_string(i % 5)), i);
        CHECK(da.action == db.action);
        CHECK(da.explored == db.explored);
      }
    }
  }

  TEST_CASE("checkpoints restore networks and exploration state") {
    DdpgAgent a(small(AgentKind::DDPG));
    a.exploration().epsilon = 0.3;
    AgentConfig other = small(AgentKind::DDPG);
    other.seed = 99;
    DdpgAgent b(other);
    b.load_checkpoint_json(a.checkpoint_json());
    CHECK(b.actor() == a.actor());
    CHECK(b.target_critic() == a.target_critic());
    CHECK(b.exploration().epsilon == 0.3);
    StatBaselineAgent s(small(AgentKind::StatBaseline));
    CHECK_THROWS_AS(s.load_checkpoint_json(a.checkpoint_json()), std::invalid_argument);
  }

  TEST_CASE("exploration caches the most frequent uncached item") {
    AgentConfig cfg = small(AgentKind::DDPG);
    cfg.exploration.epsilon = 0.95;
    cfg.exploration.epsilon_max = 0.95;
    auto a = make_agent(cfg);
    int explored = 0;
    for (int i = 0; i < 200; ++i) {
      DecisionContext c = ctx_for("hot");
      c.recent_frequency = 100;
      const auto d = a->decide(state_of(0), c, i);
      if (d.explored) {
        ++explored;
        CHECK(d.action == Action::Cache(50));
      }
    }
    CHECK(a->counters().explored == static_cast<std::uint64_t>(explored));
  }
}
