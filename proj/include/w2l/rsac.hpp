#ifndef W2L_RSAC_HPP
#define W2L_RSAC_HPP

#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "w2l/checkpoint.hpp"
#include "w2l/episode.hpp"
#include "w2l/nn.hpp"
#include "w2l/policy.hpp"
#include "w2l/risk.hpp"

namespace w2l {

enum class PrimalMode {
  Sac,            // twin-critic discrete SAC on the shaped reward
  ScoreFunction,  // REINFORCE on the latest episode's shaped returns
};

struct SacHyper {
  double lr = 1e-4;
  double gamma = 0.9;
  double alpha = 0.5;
  double tau_soft = 0.005;
  std::vector<int> dqn_layers{128, 128};
  std::vector<int> policy_layers{128, 128};
  int obs_emb = 32;
  int act_emb = 8;
  int lstm_hidden = 64;
  int batch_episodes = 8;
  int buffer_capacity = 512;
  int updates_per_episode = 8;
  // d_hat enters the networks as min(d_hat, distance_scale) / distance_scale.
  double distance_scale = 32.0;
  PrimalMode primal = PrimalMode::Sac;

  /// Risk-aware learner defaults.
  static SacHyper risk_aware();
  /// Risk-unaware baseline defaults.
  static SacHyper risk_unaware();

  void validate() const;
  nlohmann::json to_json() const;
  static SacHyper from_json(const nlohmann::json& j);
};

/// Network input for one decision: [p_hat, scaled d_hat] and a one-hot previous action.
void encode_input(const PlannerInput& input, double distance_scale, double* obs_row,
                  double* action_row);

/// FIFO store of whole episodes, sampled uniformly with replacement.
/// add() and sample() may be called from different threads.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void add(EpisodeRecord episode);
  std::vector<std::shared_ptr<const EpisodeRecord>> sample(std::size_t n, Rng& rng) const;
  std::size_t size() const;
  std::size_t capacity() const { return capacity_; }
  std::uint64_t total_added() const;

 private:
  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::deque<std::shared_ptr<const EpisodeRecord>> episodes_;
  std::uint64_t total_added_ = 0;
};

enum class SelectMode { Sample, Greedy };

struct ActionChoice {
  HighLevelAction action = HighLevelAction::Move;
  nn::LstmState state;
  double log_prob = 0.0;
  std::array<double, 2> probs{0.5, 0.5};
};

/// Actor logits for one decision, advancing the recurrent state.
std::array<double, 2> actor_logits(const nn::ParameterStore& actor, const SacHyper& hyper,
                                   const nn::LstmState& state, const PlannerInput& input,
                                   nn::LstmState* next_state);

ActionChoice select_action(const nn::ParameterStore& actor, const SacHyper& hyper,
                           const nn::LstmState& state, const PlannerInput& input, SelectMode mode,
                           Rng& rng);

/// Categorical draw from two logits (numerically stable softmax).
ActionChoice choose_from_logits(const std::array<double, 2>& logits, SelectMode mode, Rng& rng);

struct UpdateDiagnostics {
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double mean_q = 0.0;
  double mean_entropy = 0.0;
  int transitions = 0;
  bool skipped = false;
};

/// Twin-critic recurrent discrete SAC with target critics.
class SacAgent {
 public:
  SacAgent(const SacHyper& hyper, std::uint64_t seed);

  const SacHyper& hyper() const { return hyper_; }
  nn::ParameterStore& actor() { return *actor_; }
  const nn::ParameterStore& actor() const { return *actor_; }
  std::shared_ptr<const nn::ParameterStore> actor_ptr() const { return actor_; }
  nn::ParameterStore& critic() { return critic_; }
  nn::ParameterStore& critic_target() { return critic_target_; }
  const nn::ParameterStore& critic() const { return critic_; }
  const nn::ParameterStore& critic_target() const { return critic_target_; }
  long update_count() const { return updates_; }

  /// One gradient step on a batch of full episodes. Each episode is unrolled
  /// from a zero recurrent state.
  UpdateDiagnostics update_step(std::span<const std::shared_ptr<const EpisodeRecord>> batch,
                                const RewardShaper& shaper, double lambda);

  /// Score-function policy step on one on-policy episode.
  UpdateDiagnostics score_function_step(const EpisodeRecord& episode, const RewardShaper& shaper,
                                        double lambda);

  /// Twin Q-values (rows = steps) for one episode, from the online or target critic.
  std::pair<nn::Matrix, nn::Matrix> critic_values(const EpisodeRecord& episode, bool target) const;
  /// Actor log-probabilities (rows = steps) for one episode.
  nn::Matrix actor_log_probs(const EpisodeRecord& episode) const;

  void save(nn::Checkpoint& ckpt) const;
  static SacAgent load(const nn::Checkpoint& ckpt);

 private:
  SacHyper hyper_;
  std::shared_ptr<nn::ParameterStore> actor_;
  nn::ParameterStore critic_;
  nn::ParameterStore critic_target_;
  nn::Adam actor_opt_;
  nn::Adam critic_opt_;
  long updates_ = 0;
};

/// target <- (1 - tau) * target + tau * online, elementwise.
void soft_update(const nn::ParameterStore& online, nn::ParameterStore& target, double tau);

/// High-level planner driven by a trained (or training) actor.
class RecurrentPolicyPlanner final : public Planner {
 public:
  RecurrentPolicyPlanner(std::shared_ptr<const nn::ParameterStore> actor, SacHyper hyper,
                         SelectMode mode, std::string label, std::uint64_t seed = 0);

  HighLevelAction decide(const PlannerInput& input) override;
  void reset() override;
  void seed(std::uint64_t seed) override { rng_.seed(seed); }
  std::unique_ptr<Planner> clone() const override;
  std::string name() const override { return label_; }

  const ActionChoice& last_choice() const { return last_; }

 private:
  std::shared_ptr<const nn::ParameterStore> actor_;
  SacHyper hyper_;
  SelectMode mode_;
  std::string label_;
  Rng rng_;
  nn::LstmState state_;
  ActionChoice last_;
};

}  // namespace w2l

#endif  // W2L_RSAC_HPP
