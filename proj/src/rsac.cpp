#include "w2l/rsac.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace w2l {

using nn::Matrix;
using nn::Tape;
using nn::Var;

// ---------------------------------------------------------------------------
// Hyperparameters

SacHyper SacHyper::risk_aware() { return SacHyper{}; }

SacHyper SacHyper::risk_unaware() {
  SacHyper h;
  h.lr = 1.2e-4;
  h.gamma = 0.95;
  h.alpha = 0.25;
  h.dqn_layers = {64, 64};
  h.policy_layers = {64, 64};
  return h;
}

void SacHyper::validate() const {
  if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0,1)");
  if (!(tau_soft > 0.0 && tau_soft <= 1.0)) throw std::invalid_argument("tau must lie in (0,1]");
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be nonnegative");
  if (obs_emb < 1 || act_emb < 1 || lstm_hidden < 1) {
    throw std::invalid_argument("embedding and hidden sizes must be positive");
  }
  if (batch_episodes < 1 || buffer_capacity < 1 || updates_per_episode < 0) {
    throw std::invalid_argument("invalid batch/buffer/update counts");
  }
  if (!(distance_scale > 0.0)) throw std::invalid_argument("distance scale must be positive");
}

nlohmann::json SacHyper::to_json() const {
  return {{"lr", lr},
          {"gamma", gamma},
          {"alpha", alpha},
          {"tau_soft", tau_soft},
          {"dqn_layers", dqn_layers},
          {"policy_layers", policy_layers},
          {"obs_emb", obs_emb},
          {"act_emb", act_emb},
          {"lstm_hidden", lstm_hidden},
          {"batch_episodes", batch_episodes},
          {"buffer_capacity", buffer_capacity},
          {"updates_per_episode", updates_per_episode},
          {"distance_scale", distance_scale},
          {"primal", primal == PrimalMode::Sac ? "sac" : "score-function"}};
}

SacHyper SacHyper::from_json(const nlohmann::json& j) {
  SacHyper h;
  h.lr = j.at("lr");
  h.gamma = j.at("gamma");
  h.alpha = j.at("alpha");
  h.tau_soft = j.at("tau_soft");
  h.dqn_layers = j.at("dqn_layers").get<std::vector<int>>();
  h.policy_layers = j.at("policy_layers").get<std::vector<int>>();
  h.obs_emb = j.at("obs_emb");
  h.act_emb = j.at("act_emb");
  h.lstm_hidden = j.at("lstm_hidden");
  h.batch_episodes = j.at("batch_episodes");
  h.buffer_capacity = j.at("buffer_capacity");
  h.updates_per_episode = j.at("updates_per_episode");
  h.distance_scale = j.at("distance_scale");
  h.primal = j.at("primal") == "sac" ? PrimalMode::Sac : PrimalMode::ScoreFunction;
  return h;
}

void encode_input(const PlannerInput& input, double distance_scale, double* obs_row,
                  double* action_row) {
  obs_row[0] = input.obs.p_hat;
  obs_row[1] = std::min(static_cast<double>(input.obs.d_hat), distance_scale) / distance_scale;
  const bool localized = input.prev_action == HighLevelAction::Localize;
  action_row[0] = localized ? 0.0 : 1.0;
  action_row[1] = localized ? 1.0 : 0.0;
}

// ---------------------------------------------------------------------------
// Replay buffer

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay buffer capacity must be positive");
}

void ReplayBuffer::add(EpisodeRecord episode) {
  auto ptr = std::make_shared<const EpisodeRecord>(std::move(episode));
  std::lock_guard lock(mutex_);
  if (episodes_.size() == capacity_) episodes_.pop_front();
  episodes_.push_back(std::move(ptr));
  ++total_added_;
}

std::vector<std::shared_ptr<const EpisodeRecord>> ReplayBuffer::sample(std::size_t n,
                                                                       Rng& rng) const {
  std::lock_guard lock(mutex_);
  if (episodes_.empty()) throw std::logic_error("sampling from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, episodes_.size() - 1);
  std::vector<std::shared_ptr<const EpisodeRecord>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(episodes_[pick(rng)]);
  return out;
}

std::size_t ReplayBuffer::size() const {
  std::lock_guard lock(mutex_);
  return episodes_.size();
}

std::uint64_t ReplayBuffer::total_added() const {
  std::lock_guard lock(mutex_);
  return total_added_;
}

// ---------------------------------------------------------------------------
// Network pieces

namespace {

nn::MlpSpec embedding_spec(int out) { return {{2, out}, nn::Activation::Relu, nn::Activation::Relu}; }

nn::MlpSpec head_spec(int in, const std::vector<int>& hidden) {
  nn::MlpSpec spec;
  spec.sizes.push_back(in);
  spec.sizes.insert(spec.sizes.end(), hidden.begin(), hidden.end());
  spec.sizes.push_back(2);
  return spec;
}

/// Time-major batch of padded episodes: row t * batch + b is step t of episode b.
struct SequenceBatch {
  int steps = 0;
  int batch = 0;
  Matrix obs;
  Matrix prev;
  Matrix taken;
  Matrix mask;
  std::vector<double> reward;
  std::vector<double> terminal;
  std::vector<char> done;
  int valid = 0;
};

SequenceBatch build_batch(std::span<const EpisodeRecord* const> episodes, const SacHyper& hyper,
                          const RewardShaper* shaper, double lambda) {
  SequenceBatch sb;
  sb.batch = static_cast<int>(episodes.size());
  for (const EpisodeRecord* ep : episodes) {
    sb.steps = std::max(sb.steps, static_cast<int>(ep->transitions.size()));
  }
  const int rows = sb.steps * sb.batch;
  sb.obs = Matrix::Zero(rows, 2);
  sb.prev = Matrix::Zero(rows, 2);
  sb.taken = Matrix::Zero(rows, 2);
  sb.mask = Matrix::Zero(rows, 1);
  sb.reward.assign(rows, 0.0);
  sb.terminal.assign(rows, 0.0);
  sb.done.assign(rows, 0);
  for (int b = 0; b < sb.batch; ++b) {
    const auto& tr = episodes[b]->transitions;
    for (int t = 0; t < static_cast<int>(tr.size()); ++t) {
      const int row = t * sb.batch + b;
      encode_input({tr[t].obs, tr[t].prev_action}, hyper.distance_scale, &sb.obs(row, 0),
                   &sb.prev(row, 0));
      sb.taken(row, static_cast<int>(tr[t].action)) = 1.0;
      sb.mask(row, 0) = 1.0;
      sb.done[row] = tr[t].done || t + 1 == static_cast<int>(tr.size());
      if (shaper != nullptr) {
        sb.reward[row] = shaper->reward(tr[t], lambda);
        sb.terminal[row] = shaper->terminal_value(tr[t], lambda);
      }
      ++sb.valid;
    }
  }
  return sb;
}

/// Embeddings + LSTM over a time-major batch; returns stacked hidden states.
Var trunk(Tape& tape, const nn::ParameterStore& store, const std::string& prefix,
          const SacHyper& hyper, const Matrix& obs, const Matrix& prev, int steps, int batch,
          const nn::LstmState& init, nn::LstmState* final_state) {
  const Var obs_e = nn::mlp_forward(tape, store, prefix + ".obs_emb", embedding_spec(hyper.obs_emb),
                                    tape.constant(obs));
  const Var act_e = nn::mlp_forward(tape, store, prefix + ".act_emb", embedding_spec(hyper.act_emb),
                                    tape.constant(prev));
  const Var z = tape.concat_cols(obs_e, act_e);
  nn::LstmVars state = nn::lstm_input(tape, init);
  std::vector<Var> hidden;
  hidden.reserve(steps);
  for (int t = 0; t < steps; ++t) {
    state = nn::lstm_step(tape, store, prefix + ".lstm", tape.slice_rows(z, t * batch, batch), state);
    hidden.push_back(state.hidden);
  }
  if (final_state != nullptr) {
    final_state->hidden = tape.value(state.hidden);
    final_state->cell = tape.value(state.cell);
  }
  return tape.concat_rows(hidden);
}

void init_trunk(nn::ParameterStore& store, const std::string& prefix, const SacHyper& hyper,
                Rng& rng) {
  nn::init_mlp(store, prefix + ".obs_emb", embedding_spec(hyper.obs_emb), rng);
  nn::init_mlp(store, prefix + ".act_emb", embedding_spec(hyper.act_emb), rng);
  nn::init_lstm(store, prefix + ".lstm", {hyper.obs_emb + hyper.act_emb, hyper.lstm_hidden}, rng);
}

std::vector<const EpisodeRecord*> nonempty(
    std::span<const std::shared_ptr<const EpisodeRecord>> batch) {
  std::vector<const EpisodeRecord*> out;
  for (const auto& ep : batch) {
    if (ep && !ep->transitions.empty()) out.push_back(ep.get());
  }
  return out;
}

}  // namespace

std::array<double, 2> actor_logits(const nn::ParameterStore& actor, const SacHyper& hyper,
                                   const nn::LstmState& state, const PlannerInput& input,
                                   nn::LstmState* next_state) {
  Matrix obs(1, 2);
  Matrix prev(1, 2);
  encode_input(input, hyper.distance_scale, obs.data(), prev.data());
  Tape tape(false);
  const Var h = trunk(tape, actor, "actor", hyper, obs, prev, 1, 1, state, next_state);
  const Var logits = nn::mlp_forward(tape, actor, "actor.policy",
                                     head_spec(hyper.lstm_hidden, hyper.policy_layers), h);
  const Matrix& v = tape.value(logits);
  return {v(0, 0), v(0, 1)};
}

ActionChoice choose_from_logits(const std::array<double, 2>& logits, SelectMode mode, Rng& rng) {
  if (!std::isfinite(logits[0]) || !std::isfinite(logits[1])) {
    throw nn::ContractViolation("non-finite actor logits");
  }
  ActionChoice choice;
  const double m = std::max(logits[0], logits[1]);
  const double lse = m + std::log(std::exp(logits[0] - m) + std::exp(logits[1] - m));
  const std::array<double, 2> logp{logits[0] - lse, logits[1] - lse};
  choice.probs = {std::exp(logp[0]), std::exp(logp[1])};
  int index = 0;
  if (mode == SelectMode::Greedy) {
    index = logits[1] > logits[0] ? 1 : 0;
  } else {
    index = uniform01(rng) < choice.probs[0] ? 0 : 1;
  }
  choice.action = static_cast<HighLevelAction>(index);
  choice.log_prob = logp[index];
  return choice;
}

ActionChoice select_action(const nn::ParameterStore& actor, const SacHyper& hyper,
                           const nn::LstmState& state, const PlannerInput& input, SelectMode mode,
                           Rng& rng) {
  nn::LstmState next;
  const auto logits = actor_logits(actor, hyper, state, input, &next);
  ActionChoice choice = choose_from_logits(logits, mode, rng);
  choice.state = std::move(next);
  return choice;
}

// ---------------------------------------------------------------------------
// Agent

SacAgent::SacAgent(const SacHyper& hyper, std::uint64_t seed)
    : hyper_(hyper),
      actor_(std::make_shared<nn::ParameterStore>()),
      actor_opt_({hyper.lr}),
      critic_opt_({hyper.lr}) {
  hyper_.validate();
  Rng rng(seed);
  init_trunk(*actor_, "actor", hyper_, rng);
  nn::init_mlp(*actor_, "actor.policy", head_spec(hyper_.lstm_hidden, hyper_.policy_layers), rng);
  init_trunk(critic_, "critic", hyper_, rng);
  nn::init_mlp(critic_, "critic.q1", head_spec(hyper_.lstm_hidden, hyper_.dqn_layers), rng);
  nn::init_mlp(critic_, "critic.q2", head_spec(hyper_.lstm_hidden, hyper_.dqn_layers), rng);
  critic_target_ = critic_;
}

UpdateDiagnostics SacAgent::update_step(
    std::span<const std::shared_ptr<const EpisodeRecord>> batch, const RewardShaper& shaper,
    double lambda) {
  UpdateDiagnostics diag;
  const std::vector<const EpisodeRecord*> episodes = nonempty(batch);
  if (episodes.empty()) {
    diag.skipped = true;
    return diag;
  }
  const SequenceBatch sb = build_batch(episodes, hyper_, &shaper, lambda);
  const int B = sb.batch;
  const int rows = sb.steps * B;
  const double inv_n = 1.0 / static_cast<double>(sb.valid);
  const nn::LstmState zero = nn::LstmState::zeros(B, hyper_.lstm_hidden);
  const nn::MlpSpec policy_spec = head_spec(hyper_.lstm_hidden, hyper_.policy_layers);
  const nn::MlpSpec q_spec = head_spec(hyper_.lstm_hidden, hyper_.dqn_layers);

  // Actor forward (kept for the actor loss).
  Tape actor_tape(true);
  const Var h_actor =
      trunk(actor_tape, *actor_, "actor", hyper_, sb.obs, sb.prev, sb.steps, B, zero, nullptr);
  const Var logp = actor_tape.log_softmax_rows(
      nn::mlp_forward(actor_tape, *actor_, "actor.policy", policy_spec, h_actor));
  const Matrix logp_v = actor_tape.value(logp);
  const Matrix pi_v = logp_v.array().exp().matrix();

  // Soft state values from the target critics.
  Matrix soft_v(rows, 1);
  {
    Tape tape(false);
    const Var h = trunk(tape, critic_target_, "critic", hyper_, sb.obs, sb.prev, sb.steps, B, zero,
                        nullptr);
    const Matrix q1 = tape.value(nn::mlp_forward(tape, critic_target_, "critic.q1", q_spec, h));
    const Matrix q2 = tape.value(nn::mlp_forward(tape, critic_target_, "critic.q2", q_spec, h));
    const Matrix qmin = q1.cwiseMin(q2);
    soft_v = (pi_v.array() * (qmin.array() - hyper_.alpha * logp_v.array())).rowwise().sum().matrix();
  }
  Matrix y = Matrix::Zero(rows, 1);
  for (int row = 0; row < rows; ++row) {
    if (sb.mask(row, 0) == 0.0) continue;
    const double next = sb.done[row] ? sb.terminal[row] : hyper_.gamma * soft_v(row + B, 0);
    y(row, 0) = sb.reward[row] + next;
  }

  // Critic step.
  Matrix qmin_online;
  {
    Tape tape(true);
    const Var h =
        trunk(tape, critic_, "critic", hyper_, sb.obs, sb.prev, sb.steps, B, zero, nullptr);
    const Var q1 = nn::mlp_forward(tape, critic_, "critic.q1", q_spec, h);
    const Var q2 = nn::mlp_forward(tape, critic_, "critic.q2", q_spec, h);
    qmin_online = tape.value(q1).cwiseMin(tape.value(q2));
    const Var target = tape.constant(y);
    const Var e1 = tape.sub(tape.row_sum(tape.mul_const(q1, sb.taken)), target);
    const Var e2 = tape.sub(tape.row_sum(tape.mul_const(q2, sb.taken)), target);
    const Var sq = tape.add(tape.square(e1), tape.square(e2));
    const Var loss = tape.scale(tape.sum(tape.mul_const(sq, sb.mask)), 0.5 * inv_n);
    diag.critic_loss = tape.value(loss)(0, 0);
    tape.backward(loss);
    critic_opt_.step(critic_);
  }

  // Actor step: E_pi[alpha * log pi - min Q].
  {
    const Var pi = actor_tape.exp(logp);
    const Var inner = actor_tape.sub(actor_tape.scale(logp, hyper_.alpha),
                                     actor_tape.constant(qmin_online));
    const Var per_row = actor_tape.row_sum(actor_tape.mul(pi, inner));
    const Var loss = actor_tape.scale(actor_tape.sum(actor_tape.mul_const(per_row, sb.mask)), inv_n);
    diag.actor_loss = actor_tape.value(loss)(0, 0);
    actor_tape.backward(loss);
    actor_opt_.step(*actor_);
  }

  soft_update(critic_, critic_target_, hyper_.tau_soft);
  ++updates_;

  double q_sum = 0.0;
  double h_sum = 0.0;
  for (int row = 0; row < rows; ++row) {
    if (sb.mask(row, 0) == 0.0) continue;
    q_sum += (pi_v.row(row).array() * qmin_online.row(row).array()).sum();
    h_sum -= (pi_v.row(row).array() * logp_v.row(row).array()).sum();
  }
  diag.mean_q = q_sum * inv_n;
  diag.mean_entropy = h_sum * inv_n;
  diag.transitions = sb.valid;
  if (!std::isfinite(diag.critic_loss) || !std::isfinite(diag.actor_loss)) {
    throw nn::ContractViolation("non-finite loss in update step");
  }
  return diag;
}

UpdateDiagnostics SacAgent::score_function_step(const EpisodeRecord& episode,
                                                const RewardShaper& shaper, double lambda) {
  UpdateDiagnostics diag;
  if (episode.transitions.empty()) {
    diag.skipped = true;
    return diag;
  }
  const EpisodeRecord* eps[] = {&episode};
  const SequenceBatch sb = build_batch(eps, hyper_, &shaper, lambda);
  const int n = sb.steps;
  Matrix returns(n, 1);
  double g = sb.terminal[n - 1];
  for (int t = n - 1; t >= 0; --t) {
    g = sb.reward[t] + (t == n - 1 ? g : hyper_.gamma * g);
    returns(t, 0) = g;
  }
  Tape tape(true);
  const nn::LstmState zero = nn::LstmState::zeros(1, hyper_.lstm_hidden);
  const Var h = trunk(tape, *actor_, "actor", hyper_, sb.obs, sb.prev, n, 1, zero, nullptr);
  const Var logp = tape.log_softmax_rows(nn::mlp_forward(
      tape, *actor_, "actor.policy", head_spec(hyper_.lstm_hidden, hyper_.policy_layers), h));
  const Var taken_logp = tape.row_sum(tape.mul_const(logp, sb.taken));
  const Var pg = tape.scale(tape.sum(tape.mul_const(taken_logp, returns)), -1.0 / n);
  const Var neg_entropy = tape.row_sum(tape.mul(tape.exp(logp), logp));
  const Var loss = tape.add(pg, tape.scale(tape.sum(neg_entropy), hyper_.alpha / n));
  diag.actor_loss = tape.value(loss)(0, 0);
  tape.backward(loss);
  actor_opt_.step(*actor_);
  ++updates_;
  diag.transitions = n;
  return diag;
}

std::pair<Matrix, Matrix> SacAgent::critic_values(const EpisodeRecord& episode, bool target) const {
  const EpisodeRecord* eps[] = {&episode};
  const SequenceBatch sb = build_batch(eps, hyper_, nullptr, 0.0);
  const nn::ParameterStore& store = target ? critic_target_ : critic_;
  const nn::MlpSpec q_spec = head_spec(hyper_.lstm_hidden, hyper_.dqn_layers);
  Tape tape(false);
  const Var h = trunk(tape, store, "critic", hyper_, sb.obs, sb.prev, sb.steps, 1,
                      nn::LstmState::zeros(1, hyper_.lstm_hidden), nullptr);
  return {tape.value(nn::mlp_forward(tape, store, "critic.q1", q_spec, h)),
          tape.value(nn::mlp_forward(tape, store, "critic.q2", q_spec, h))};
}

Matrix SacAgent::actor_log_probs(const EpisodeRecord& episode) const {
  const EpisodeRecord* eps[] = {&episode};
  const SequenceBatch sb = build_batch(eps, hyper_, nullptr, 0.0);
  Tape tape(false);
  const Var h = trunk(tape, *actor_, "actor", hyper_, sb.obs, sb.prev, sb.steps, 1,
                      nn::LstmState::zeros(1, hyper_.lstm_hidden), nullptr);
  return tape.value(tape.log_softmax_rows(nn::mlp_forward(
      tape, *actor_, "actor.policy", head_spec(hyper_.lstm_hidden, hyper_.policy_layers), h)));
}

void SacAgent::save(nn::Checkpoint& ckpt) const {
  ckpt.metadata["sac_hyper"] = hyper_.to_json();
  ckpt.metadata["updates"] = updates_;
  ckpt.stores["actor"] = *actor_;
  ckpt.stores["critic"] = critic_;
  ckpt.stores["critic_target"] = critic_target_;
}

SacAgent SacAgent::load(const nn::Checkpoint& ckpt) {
  SacAgent agent(SacHyper::from_json(ckpt.metadata.at("sac_hyper")), 0);
  *agent.actor_ = ckpt.stores.at("actor");
  agent.critic_ = ckpt.stores.at("critic");
  agent.critic_target_ = ckpt.stores.at("critic_target");
  agent.updates_ = ckpt.metadata.value("updates", 0L);
  return agent;
}

void soft_update(const nn::ParameterStore& online, nn::ParameterStore& target, double tau) {
  if (online.size() != target.size()) throw nn::ContractViolation("soft_update: store mismatch");
  for (auto& [name, e] : target) {
    const nn::Matrix& src = online.value(name);
    if (src.rows() != e.value.rows() || src.cols() != e.value.cols()) {
      throw nn::ContractViolation("soft_update: shape mismatch for " + name);
    }
    if (tau == 1.0) {
      e.value = src;
    } else {
      e.value = (1.0 - tau) * e.value + tau * src;
    }
  }
}

// ---------------------------------------------------------------------------
// Planner adapter

RecurrentPolicyPlanner::RecurrentPolicyPlanner(std::shared_ptr<const nn::ParameterStore> actor,
                                               SacHyper hyper, SelectMode mode, std::string label,
                                               std::uint64_t seed)
    : actor_(std::move(actor)),
      hyper_(std::move(hyper)),
      mode_(mode),
      label_(std::move(label)),
      rng_(seed),
      state_(nn::LstmState::zeros(1, hyper_.lstm_hidden)) {}

HighLevelAction RecurrentPolicyPlanner::decide(const PlannerInput& input) {
  last_ = select_action(*actor_, hyper_, state_, input, mode_, rng_);
  state_ = last_.state;
  return last_.action;
}

void RecurrentPolicyPlanner::reset() { state_ = nn::LstmState::zeros(1, hyper_.lstm_hidden); }

std::unique_ptr<Planner> RecurrentPolicyPlanner::clone() const {
  return std::make_unique<RecurrentPolicyPlanner>(actor_, hyper_, mode_, label_);
}

}  // namespace w2l
