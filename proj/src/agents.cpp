#include "acoca/agents.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

namespace acoca {

const char* to_string(AgentKind k) {
  switch (k) {
    case AgentKind::StatBaseline: return "stat";
    case AgentKind::ActorCritic: return "acagn";
    case AgentKind::DDPG: return "ddpg";
  }
  return "stat";
}

AgentKind agent_kind_from_string(const std::string& s) {
  if (s == "stat") return AgentKind::StatBaseline;
  if (s == "acagn") return AgentKind::ActorCritic;
  if (s == "ddpg") return AgentKind::DDPG;
  throw std::invalid_argument("unknown agent kind: " + s);
}

const char* to_string(RewardTrigger t) {
  switch (t) {
    case RewardTrigger::PrematureEviction: return "premature_eviction";
    case RewardTrigger::CLElapsed: return "cl_elapsed";
    case RewardTrigger::DTElapsed: return "dt_elapsed";
    case RewardTrigger::RetListFull: return "ret_list_full";
    case RewardTrigger::EndOfRun: return "end_of_run";
  }
  return "cl_elapsed";
}

double compute_reward(const RewardEvent& ev) {
  if (ev.cached) {
    if (ev.access_count <= 0 || ev.ret_samples.empty()) return kCachedNoAccessReward;
    return std::accumulate(ev.ret_samples.begin(), ev.ret_samples.end(), 0.0) /
           static_cast<double>(ev.ret_samples.size());
  }
  if (ev.access_count <= 0 || ev.ret_samples.empty()) return kNotCachedNoAccessReward;
  double sum = 0;
  for (double r : ev.ret_samples) sum += r - ev.expected_ret;
  return sum / static_cast<double>(ev.ret_samples.size());
}

double adapt_epsilon(ExplorationState& s, double mean_recent_reward) {
  const double step = mean_recent_reward < s.reward_threshold ? s.zeta : -s.zeta;
  s.epsilon = std::clamp(s.epsilon + step, s.epsilon_min, s.epsilon_max);
  return s.epsilon;
}

double adapt_delta(ExplorationState& s, bool learning_cycle_occurred) {
  s.delta = std::max(kDeltaFloor, s.delta + (learning_cycle_occurred ? s.omega : -s.omega));
  return s.delta;
}

std::optional<Id> explore_mfu(const std::vector<MfuCandidate>& candidates, std::mt19937_64& rng,
                              double epsilon) {
  if (candidates.empty() || !(epsilon > 0)) return std::nullopt;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (!(u(rng) < epsilon)) return std::nullopt;
  const MfuCandidate* best = &candidates.front();
  for (const auto& c : candidates)
    if (c.frequency > best->frequency ||
        (c.frequency == best->frequency && c.last_seen > best->last_seen))
      best = &c;
  return best->item_id;
}

namespace {
// Guards ceil() against representation error, e.g. 0.2*5/0.5 = 2.0000000000000004.
int ceil_windows(double x) { return static_cast<int>(std::ceil(x - 1e-9)); }
}  // namespace

Action map_value_to_action(double v, Seconds avg_cl, int mid) {
  v = std::clamp(v, 0.0, 1.0);
  if (v > 0.5) return Action::Cache((v - 0.5) * avg_cl / 0.5);
  return Action::NotCache(std::max(0, ceil_windows((0.5 - v) * mid / 0.5)));
}

Action map_continuous_action(double a, Seconds window_seconds, int long_windows) {
  a = std::clamp(a, -static_cast<double>(long_windows), static_cast<double>(long_windows));
  if (a > 0) return Action::Cache(a * window_seconds);
  return Action::NotCache(std::max(0, ceil_windows(-a)));
}

double stat_baseline_benefit(const StatParams& p) {
  const double accesses = p.expected_ar_mid * p.lambda * p.window_seconds;
  const double hit_saving = p.delay_penalty * p.p_delay_uncached + p.retrieval_cost;
  double refreshes = 0;
  if (!is_infinite(p.residual_lifetime))
    refreshes = p.residual_lifetime > 0 ? std::min(1.0, p.window_seconds / p.residual_lifetime) : 1.0;
  return accesses * hit_saving * p.expected_hit_rate - p.retrieval_cost * refreshes;
}

Action stat_baseline_decide(const StatParams& p) {
  if (stat_baseline_benefit(p) > 0) return Action::Cache(p.mid * p.window_seconds);
  return Action::NotCache(1);
}

double td_target(double reward, double gamma, double next_value, bool terminal) {
  return terminal ? reward : reward + gamma * next_value;
}

void AgentConfig::validate() const {
  if (!(gamma >= 0 && gamma <= 1)) throw std::invalid_argument("agent.gamma must be in [0,1]");
  if (!(alpha >= 0) || !(beta >= 0)) throw std::invalid_argument("learning rates must be >= 0");
  if (!(tau >= 0 && tau <= 1)) throw std::invalid_argument("agent.tau must be in [0,1]");
  if (theta_batch < 1) throw std::invalid_argument("agent.theta_batch must be >= 1");
  if (cycle_learn < 1) throw std::invalid_argument("agent.cycle_learn must be >= 1");
  if (replay_capacity < 1) throw std::invalid_argument("agent.replay_capacity must be >= 1");
  const auto& e = exploration;
  if (!(e.epsilon_min >= 0 && e.epsilon_min <= e.epsilon_max && e.epsilon_max <= 1))
    throw std::invalid_argument("exploration bounds must satisfy 0 <= min <= max <= 1");
  if (!(e.epsilon >= e.epsilon_min && e.epsilon <= e.epsilon_max))
    throw std::invalid_argument("exploration.epsilon must lie within its bounds");
  if (!(e.zeta >= 0 && e.omega >= 0)) throw std::invalid_argument("exploration steps must be >= 0");
  if (!(e.delta >= kDeltaFloor)) throw std::invalid_argument("exploration.delta must be >= 0.5");
  for (int h : hidden)
    if (h < 1) throw std::invalid_argument("hidden layer sizes must be >= 1");
}

Agent::Agent(AgentConfig cfg) : cfg_(std::move(cfg)), rng_(cfg_.seed) { cfg_.validate(); }

Vec Agent::input(const StateVector& s) const {
  const auto n = s.normalized(cfg_.scales);
  return Eigen::Map<const Vec>(n.data(), static_cast<Eigen::Index>(n.size()));
}

Decision Agent::decide(const StateVector& state, const DecisionContext& ctx, Seconds now) {
  Decision d;
  d.id = next_decision_id_++;
  d.item_id = ctx.item_id;
  d.decided_at = now;
  d.state = state;
  const Raw raw = raw_decide(state, ctx);
  d.action = raw.action;
  d.raw_output = raw.output;
  if (!d.action.cache && explores()) {
    std::vector<MfuCandidate> cands(recent_not_cached_.begin(), recent_not_cached_.end());
    std::erase_if(cands, [&](const MfuCandidate& c) { return c.item_id == ctx.item_id; });
    cands.push_back({ctx.item_id, ctx.recent_frequency, now});
    if (auto pick = explore_mfu(cands, rng_, cfg_.exploration.epsilon); pick && *pick == ctx.item_id) {
      d.action = Action::Cache(ctx.avg_cl);
      d.explored = true;
    }
  }
  std::erase_if(recent_not_cached_, [&](const MfuCandidate& c) { return c.item_id == ctx.item_id; });
  if (!d.action.cache) {
    recent_not_cached_.push_back({ctx.item_id, ctx.recent_frequency, now});
    while (recent_not_cached_.size() > cfg_.mfu_candidates) recent_not_cached_.pop_front();
  }
  ++counters_.decisions;
  counters_.explored += d.explored;
  after_decision();
  return d;
}

void Agent::after_decision() {
  if (!explores()) return;
  if (counters_.decisions % static_cast<std::uint64_t>(cfg_.cycle_learn) != 0) return;
  if (rewards_since_adapt_.empty()) return;
  const double mean = std::accumulate(rewards_since_adapt_.begin(), rewards_since_adapt_.end(), 0.0) /
                      static_cast<double>(rewards_since_adapt_.size());
  adapt_epsilon(cfg_.exploration, mean);
  rewards_since_adapt_.clear();
}

double Agent::on_reward(const Decision& d, const RewardEvent& ev, const StateVector& next_state,
                        bool terminal) {
  const double r = compute_reward(ev);
  ++counters_.rewards;
  counters_.reward_sum += r;
  rewards_since_adapt_.push_back(r);
  learn(d, r, next_state, terminal);
  return r;
}

void Agent::on_window_roll() {
  if (kind() != AgentKind::StatBaseline) adapt_delta(cfg_.exploration, learned_this_window_);
  learned_this_window_ = false;
}

std::string Agent::checkpoint_json() const {
  nlohmann::json j;
  j["kind"] = to_string(kind());
  j["epsilon"] = cfg_.exploration.epsilon;
  j["delta"] = cfg_.exploration.delta;
  return j.dump();
}

void Agent::load_checkpoint_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (j.at("kind").get<std::string>() != to_string(kind()))
    throw std::invalid_argument("checkpoint is for a different agent kind");
  cfg_.exploration.epsilon = std::clamp(j.at("epsilon").get<double>(), cfg_.exploration.epsilon_min,
                                        cfg_.exploration.epsilon_max);
  cfg_.exploration.delta = std::max(kDeltaFloor, j.at("delta").get<double>());
}

namespace {
AgentConfig with_kind(AgentConfig cfg, AgentKind k) {
  cfg.kind = k;
  return cfg;
}
}  // namespace

StatBaselineAgent::StatBaselineAgent(AgentConfig cfg)
    : Agent(with_kind(std::move(cfg), AgentKind::StatBaseline)) {}

std::unique_ptr<Agent> StatBaselineAgent::clone() const {
  return std::make_unique<StatBaselineAgent>(*this);
}

Agent::Raw StatBaselineAgent::raw_decide(const StateVector&, const DecisionContext& ctx) {
  return {stat_baseline_decide(ctx.stat), stat_baseline_benefit(ctx.stat)};
}

namespace {

std::vector<int> layers(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> s{in};
  s.insert(s.end(), hidden.begin(), hidden.end());
  s.push_back(out);
  return s;
}

void merge_networks(nlohmann::json& j, const std::vector<std::pair<const char*, const Network*>>& nets) {
  for (const auto& [name, n] : nets) j[name] = nlohmann::json::parse(n->to_json());
}

}  // namespace

ActorCriticAgent::ActorCriticAgent(AgentConfig cfg)
    : Agent(with_kind(std::move(cfg), AgentKind::ActorCritic)),
      actor_(layers(static_cast<int>(kStateSize), cfg_.hidden, 2), Activation::Softmax, rng_),
      critic_(layers(static_cast<int>(kStateSize), cfg_.hidden, 1), Activation::Linear, rng_),
      actor_opt_(actor_, cfg_.alpha),
      critic_opt_(critic_, cfg_.beta) {}

std::unique_ptr<Agent> ActorCriticAgent::clone() const {
  return std::make_unique<ActorCriticAgent>(*this);
}

double ActorCriticAgent::cache_probability(const StateVector& s) const {
  return actor_.forward(input(s))(1);
}

Agent::Raw ActorCriticAgent::raw_decide(const StateVector& state, const DecisionContext& ctx) {
  const double v = cache_probability(state);
  return {map_value_to_action(v, ctx.avg_cl, ctx.windows.mid), v};
}

void ActorCriticAgent::learn(const Decision& d, double reward, const StateVector& next_state,
                             bool terminal) {
  const Vec x = input(d.state);
  const double v = critic_.forward(x)(0);
  const double v_next = terminal ? 0.0 : critic_.forward(input(next_state))(0);
  const double target = td_target(reward, cfg_.gamma, v_next, terminal);
  const double advantage = target - v;

  Mat y(1, 1);
  y(0, 0) = target;
  train_step(critic_, critic_opt_, x, y);

  const Vec p = actor_.forward(x);
  Mat dz = advantage * p;
  dz(d.action.cache ? 1 : 0, 0) -= advantage;
  actor_opt_.step(actor_, actor_.backward(x, dz, nullptr, true));
  ++counters_.learning_steps;
  learned_this_window_ = true;
}

std::string ActorCriticAgent::checkpoint_json() const {
  auto j = nlohmann::json::parse(Agent::checkpoint_json());
  merge_networks(j, {{"actor", &actor_}, {"critic", &critic_}});
  return j.dump();
}

void ActorCriticAgent::load_checkpoint_json(const std::string& text) {
  Agent::load_checkpoint_json(text);
  const auto j = nlohmann::json::parse(text);
  Network a = Network::from_json(j.at("actor").dump());
  Network c = Network::from_json(j.at("critic").dump());
  if (!a.same_shape(actor_) || !c.same_shape(critic_))
    throw ShapeMismatch("checkpoint network shape mismatch");
  actor_ = std::move(a);
  critic_ = std::move(c);
  actor_opt_ = Adam(actor_, cfg_.alpha);
  critic_opt_ = Adam(critic_, cfg_.beta);
}

DdpgAgent::DdpgAgent(AgentConfig cfg)
    : Agent(with_kind(std::move(cfg), AgentKind::DDPG)),
      actor_(layers(static_cast<int>(kStateSize), cfg_.hidden, 1), Activation::Tanh, rng_),
      critic_(layers(static_cast<int>(kStateSize) + 1, cfg_.hidden, 1), Activation::Linear, rng_),
      target_actor_(actor_),
      target_critic_(critic_),
      actor_opt_(actor_, cfg_.alpha),
      critic_opt_(critic_, cfg_.beta),
      replay_(cfg_.replay_capacity) {}

std::unique_ptr<Agent> DdpgAgent::clone() const { return std::make_unique<DdpgAgent>(*this); }

double DdpgAgent::action_of(const StateVector& s, int long_windows) const {
  return long_windows * actor_.forward(input(s))(0);
}

Agent::Raw DdpgAgent::raw_decide(const StateVector& state, const DecisionContext& ctx) {
  long_windows_ = ctx.windows.long_;
  window_seconds_ = ctx.windows.window_seconds;
  const double a = action_of(state, ctx.windows.long_);
  Raw raw{map_continuous_action(a, ctx.windows.window_seconds, ctx.windows.long_), a};
  if (++decisions_since_learn_ >= static_cast<std::uint64_t>(cfg_.cycle_learn)) {
    decisions_since_learn_ = 0;
    learning_cycle();
  }
  return raw;
}

void DdpgAgent::learn(const Decision& d, double reward, const StateVector& next_state,
                      bool terminal) {
  const double windows = d.action.cache ? d.action.cl / window_seconds_
                                        : -static_cast<double>(d.action.dt);
  Transition t;
  t.state = input(d.state);
  t.action = std::clamp(windows / long_windows_, -1.0, 1.0);
  t.reward = reward;
  t.next_state = input(next_state);
  t.terminal = terminal;
  replay_.push(std::move(t));
}

void DdpgAgent::learning_cycle() {
  if (replay_.size() < static_cast<std::size_t>(cfg_.theta_batch)) return;
  const int steps = std::max(1, static_cast<int>(std::lround(cfg_.exploration.delta)));
  for (int i = 0; i < steps; ++i) minibatch_step();
  learned_this_window_ = true;
}

namespace {

Mat stack_inputs(const Mat& X, const Mat& U) {
  Mat Z(X.rows() + 1, X.cols());
  Z.topRows(X.rows()) = X;
  Z.bottomRows(1) = U;
  return Z;
}

}  // namespace

std::vector<double> DdpgAgent::q_targets(const std::vector<Transition>& batch) const {
  std::vector<double> y;
  y.reserve(batch.size());
  if (batch.empty()) return y;
  const Eigen::Index n = static_cast<Eigen::Index>(batch.size());
  Mat Xn(kStateSize, n);
  for (Eigen::Index j = 0; j < n; ++j) Xn.col(j) = batch[j].next_state;
  const Mat Un = target_actor_.forward_batch(Xn);
  const Mat Qn = target_critic_.forward_batch(stack_inputs(Xn, Un));
  for (Eigen::Index j = 0; j < n; ++j)
    y.push_back(td_target(batch[j].reward, cfg_.gamma, Qn(0, j), batch[j].terminal));
  return y;
}

void DdpgAgent::minibatch_step() {
  const auto batch = replay_.sample(static_cast<std::size_t>(cfg_.theta_batch), rng_);
  if (batch.empty()) return;
  const Eigen::Index n = static_cast<Eigen::Index>(batch.size());
  Mat X(kStateSize, n), U(1, n), Y(1, n);
  const auto y = q_targets(batch);
  for (Eigen::Index j = 0; j < n; ++j) {
    X.col(j) = batch[j].state;
    U(0, j) = batch[j].action;
    Y(0, j) = y[j];
  }
  train_step(critic_, critic_opt_, stack_inputs(X, U), Y);

  // Ascend Q(s, q(s)): dQ/du flows through the critic's action input.
  const Mat Upi = actor_.forward_batch(X);
  Mat dInput;
  critic_.backward(stack_inputs(X, Upi), Mat::Constant(1, n, -1.0 / static_cast<double>(n)), &dInput);
  actor_opt_.step(actor_, actor_.backward(X, dInput.bottomRows(1)));

  soft_update(target_critic_, critic_, cfg_.tau);
  soft_update(target_actor_, actor_, cfg_.tau);
  ++counters_.learning_steps;
}

std::string DdpgAgent::checkpoint_json() const {
  auto j = nlohmann::json::parse(Agent::checkpoint_json());
  merge_networks(j, {{"actor", &actor_},
                     {"critic", &critic_},
                     {"target_actor", &target_actor_},
                     {"target_critic", &target_critic_}});
  return j.dump();
}

void DdpgAgent::load_checkpoint_json(const std::string& text) {
  Agent::load_checkpoint_json(text);
  const auto j = nlohmann::json::parse(text);
  Network nets[4];
  const char* names[4] = {"actor", "critic", "target_actor", "target_critic"};
  Network* mine[4] = {&actor_, &critic_, &target_actor_, &target_critic_};
  for (int i = 0; i < 4; ++i) {
    nets[i] = Network::from_json(j.at(names[i]).dump());
    if (!nets[i].same_shape(*mine[i])) throw ShapeMismatch("checkpoint network shape mismatch");
  }
  for (int i = 0; i < 4; ++i) *mine[i] = std::move(nets[i]);
  actor_opt_ = Adam(actor_, cfg_.alpha);
  critic_opt_ = Adam(critic_, cfg_.beta);
}

std::unique_ptr<Agent> make_agent(const AgentConfig& cfg) {
  switch (cfg.kind) {
    case AgentKind::StatBaseline: return std::make_unique<StatBaselineAgent>(cfg);
    case AgentKind::ActorCritic: return std::make_unique<ActorCriticAgent>(cfg);
    case AgentKind::DDPG: return std::make_unique<DdpgAgent>(cfg);
  }
  throw std::invalid_argument("unknown agent kind");
}

}  // namespace acoca
