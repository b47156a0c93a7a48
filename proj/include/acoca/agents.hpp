#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "acoca/neural.hpp"
#include "acoca/stats.hpp"

namespace acoca {

enum class AgentKind { StatBaseline, ActorCritic, DDPG };

const char* to_string(AgentKind k);
AgentKind agent_kind_from_string(const std::string& s);

struct Action {
  bool cache = false;
  Seconds cl = 0;  // cached lifetime when cache
  int dt = 0;      // delay in windows when not cache

  static Action Cache(Seconds cl) { return {true, cl, 0}; }
  static Action NotCache(int dt) { return {false, 0, dt}; }
  bool operator==(const Action&) const = default;
};

struct Decision {
  std::uint64_t id = 0;
  Id item_id;
  Action action;
  Seconds decided_at = 0;
  StateVector state;
  double raw_output = 0;  // v for the actor-critic agent, a for DDPG
  bool explored = false;
};

enum class RewardTrigger { PrematureEviction, CLElapsed, DTElapsed, RetListFull, EndOfRun };

const char* to_string(RewardTrigger t);

struct RewardEvent {
  std::uint64_t decision_id = 0;
  RewardTrigger trigger = RewardTrigger::CLElapsed;
  bool cached = false;  // the decision was a cache action
  int access_count = 0;
  std::vector<double> ret_samples;
  double expected_ret = 0;
};

inline constexpr double kCachedNoAccessReward = -10.0;
inline constexpr double kNotCachedNoAccessReward = 5.0;

double compute_reward(const RewardEvent& event);

struct ExplorationState {
  double epsilon = 0.5;
  double zeta = 0.005;
  double epsilon_min = 0.001;
  double epsilon_max = 0.95;
  double reward_threshold = 1.0;
  double delta = 1.0;
  double omega = 0.005;
};

double adapt_epsilon(ExplorationState& s, double mean_recent_reward);
// Raw delta never drops below 0.5, which still rounds to one minibatch step.
inline constexpr double kDeltaFloor = 0.5;
double adapt_delta(ExplorationState& s, bool learning_cycle_occurred);

struct MfuCandidate {
  Id item_id;
  double frequency = 0;
  Seconds last_seen = 0;
};
std::optional<Id> explore_mfu(const std::vector<MfuCandidate>& candidates, std::mt19937_64& rng,
                              double epsilon);

Action map_value_to_action(double v, Seconds avg_cl, int mid);
Action map_continuous_action(double a, Seconds window_seconds, int long_windows);

struct StatParams {
  double expected_ar_mid = 0;
  double lambda = 0;
  Seconds window_seconds = 5;
  double delay_penalty = 0;
  double p_delay_uncached = 0;
  double retrieval_cost = 0;
  double expected_hit_rate = 0;
  Seconds residual_lifetime = kInfinite;
  int mid = 5;
};
double stat_baseline_benefit(const StatParams& p);
Action stat_baseline_decide(const StatParams& p);

double td_target(double reward, double gamma, double next_value, bool terminal);

struct AgentConfig {
  AgentKind kind = AgentKind::ActorCritic;
  double gamma = 0.9;
  double alpha = 1e-4;
  double beta = 1e-3;
  double tau = 1e-3;
  int theta_batch = 16;
  int cycle_learn = 20;
  std::size_t replay_capacity = 100;
  std::vector<int> hidden = {512, 256};
  bool exploration_enabled = true;
  ExplorationState exploration;
  std::size_t mfu_candidates = 16;
  FeatureScales scales;
  std::uint64_t seed = 1;

  void validate() const;
};

struct DecisionContext {
  Id item_id;
  Seconds avg_cl = 50;
  double recent_frequency = 0;
  WindowConfig windows;
  StatParams stat;
};

struct AgentCounters {
  std::uint64_t decisions = 0;
  std::uint64_t explored = 0;
  std::uint64_t rewards = 0;
  std::uint64_t learning_steps = 0;
  double reward_sum = 0;
};

class Agent {
public:
  explicit Agent(AgentConfig cfg);
  virtual ~Agent() = default;

  AgentKind kind() const { return cfg_.kind; }
  const AgentConfig& config() const { return cfg_; }

  Decision decide(const StateVector& state, const DecisionContext& ctx, Seconds now);
  // Computes the reward, learns, and returns the reward.
  double on_reward(const Decision& d, const RewardEvent& ev, const StateVector& next_state,
                   bool terminal);
  void on_window_roll();

  ExplorationState& exploration() { return cfg_.exploration; }
  const ExplorationState& exploration() const { return cfg_.exploration; }
  const AgentCounters& counters() const { return counters_; }

  virtual std::string checkpoint_json() const;
  virtual void load_checkpoint_json(const std::string& text);
  virtual std::unique_ptr<Agent> clone() const = 0;

protected:
  struct Raw {
    Action action;
    double output = 0;
  };
  virtual Raw raw_decide(const StateVector& state, const DecisionContext& ctx) = 0;
  virtual void learn(const Decision& d, double reward, const StateVector& next_state,
                     bool terminal) = 0;
  virtual bool explores() const { return cfg_.exploration_enabled; }
  void after_decision();
  Vec input(const StateVector& s) const;

  AgentConfig cfg_;
  std::mt19937_64 rng_;
  AgentCounters counters_;
  bool learned_this_window_ = false;
  std::uint64_t next_decision_id_ = 1;
  std::deque<MfuCandidate> recent_not_cached_;
  std::vector<double> rewards_since_adapt_;
};

class StatBaselineAgent final : public Agent {
public:
  explicit StatBaselineAgent(AgentConfig cfg);
  std::unique_ptr<Agent> clone() const override;

protected:
  Raw raw_decide(const StateVector& state, const DecisionContext& ctx) override;
  void learn(const Decision&, double, const StateVector&, bool) override {}
  bool explores() const override { return false; }
};

class ActorCriticAgent final : public Agent {
public:
  explicit ActorCriticAgent(AgentConfig cfg);
  std::unique_ptr<Agent> clone() const override;

  const Network& actor() const { return actor_; }
  const Network& critic() const { return critic_; }
  Network& actor_mut() { return actor_; }
  double cache_probability(const StateVector& s) const;
  std::string checkpoint_json() const override;
  void load_checkpoint_json(const std::string& text) override;

protected:
  Raw raw_decide(const StateVector& state, const DecisionContext& ctx) override;
  void learn(const Decision& d, double reward, const StateVector& next_state, bool terminal) override;

private:
  Network actor_, critic_;
  Adam actor_opt_, critic_opt_;
};

class DdpgAgent final : public Agent {
public:
  explicit DdpgAgent(AgentConfig cfg);
  std::unique_ptr<Agent> clone() const override;

  const Network& actor() const { return actor_; }
  const Network& critic() const { return critic_; }
  const Network& target_actor() const { return target_actor_; }
  const Network& target_critic() const { return target_critic_; }
  const ReplayBuffer& replay() const { return replay_; }
  // Action in windows, within [-long, long].
  double action_of(const StateVector& s, int long_windows) const;
  // y = r + gamma * Q'(s', q'(s')) for each transition.
  std::vector<double> q_targets(const std::vector<Transition>& batch) const;
  std::string checkpoint_json() const override;
  void load_checkpoint_json(const std::string& text) override;

protected:
  Raw raw_decide(const StateVector& state, const DecisionContext& ctx) override;
  void learn(const Decision& d, double reward, const StateVector& next_state, bool terminal) override;

private:
  void learning_cycle();
  void minibatch_step();

  Network actor_, critic_, target_actor_, target_critic_;
  Adam actor_opt_, critic_opt_;
  ReplayBuffer replay_;
  std::uint64_t decisions_since_learn_ = 0;
  int long_windows_ = 10;
  Seconds window_seconds_ = 5;
};

std::unique_ptr<Agent> make_agent(const AgentConfig& cfg);

}  // namespace acoca
