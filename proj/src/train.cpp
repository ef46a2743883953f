#include "w2l/train.hpp"

#include <deque>
#include <numeric>
#include <optional>
#include <ostream>
#include <stdexcept>

#include "w2l/nav.hpp"

namespace w2l {

LearnerKind parse_learner_kind(const std::string& name) {
  if (name == "riskrl" || name == "risk-aware") return LearnerKind::RiskAware;
  if (name == "baserl" || name == "risk-unaware") return LearnerKind::RiskUnaware;
  throw std::invalid_argument("unknown learner " + name);
}

const char* to_string(LearnerKind kind) {
  return kind == LearnerKind::RiskAware ? "riskrl" : "baserl";
}

TrainConfig TrainConfig::defaults(LearnerKind kind, RunConfig run) {
  TrainConfig cfg;
  cfg.kind = kind;
  if (kind == LearnerKind::RiskAware) {
    cfg.hyper = SacHyper::risk_aware();
    run.rewards = RewardWeights::risk_aware();
  } else {
    cfg.hyper = SacHyper::risk_unaware();
    run.rewards = RewardWeights::risk_unaware();
    cfg.lambda_init = 0.0;
  }
  run.risk.gamma = cfg.hyper.gamma;
  cfg.run = std::move(run);
  return cfg;
}

void TrainConfig::validate() const {
  hyper.validate();
  run.risk.validate();
  if (budget < 0) throw std::invalid_argument("training budget must be nonnegative");
  if (dual_window < 1) throw std::invalid_argument("dual window must be positive");
  if (!(lambda_init >= 0.0)) throw std::invalid_argument("initial multiplier must be nonnegative");
}

EpisodeSource grid_episode_source(const TrainConfig& cfg) {
  cfg.run.validate();
  const RunConfig run = cfg.run;
  return [run](Planner& planner, Rng& rng, int) {
    const GridMap& base = run.grid();
    if (!run.randomize) return run_episode(run, base, planner, rng).record;
    const auto [start, goal] = random_start_goal(base, run.min_separation, rng);
    return run_episode(run, base.with_start_goal(start, {goal}), planner, rng).record;
  };
}

TrainResult train(const TrainConfig& cfg, const CurveCallback& on_episode) {
  return train(cfg, grid_episode_source(cfg), on_episode);
}

TrainResult train(const TrainConfig& cfg, const EpisodeSource& source,
                  const CurveCallback& on_episode) {
  cfg.validate();
  RiskConfig risk = cfg.run.risk;
  risk.gamma = cfg.hyper.gamma;
  const bool constrained = cfg.kind == LearnerKind::RiskAware;
  const RewardShaper shaper(risk, cfg.absorbing_terminals);

  TrainResult result{SacAgent(cfg.hyper, derive_seed(cfg.run.seed, 0)), 0.0, {}};
  SacAgent& agent = result.agent;
  DualState dual{constrained ? cfg.lambda_init : 0.0, shaper.threshold()};

  ReplayBuffer buffer(static_cast<std::size_t>(cfg.hyper.buffer_capacity));
  Rng update_rng(derive_seed(cfg.run.seed, 1));
  RecurrentPolicyPlanner planner(agent.actor_ptr(), cfg.hyper, SelectMode::Sample,
                                 to_string(cfg.kind));
  std::deque<double> window;
  double window_sum = 0.0;

  for (int e = 0; e < cfg.budget; ++e) {
    Rng rollout_rng(derive_seed(cfg.run.seed, 1000 + static_cast<std::uint64_t>(e)));
    planner.seed(derive_seed(cfg.run.seed ^ 0x726f6c6c6f7574ULL, static_cast<std::uint64_t>(e)));
    EpisodeRecord episode = source(planner, rollout_rng, e);

    CurveRow row;
    row.episode = e;
    row.success = episode.succeeded();
    row.n_localize = episode.localize_count();
    row.steps = static_cast<int>(episode.transitions.size());

    UpdateDiagnostics diag;
    if (cfg.hyper.primal == PrimalMode::ScoreFunction) {
      diag = agent.score_function_step(episode, shaper, dual.lambda);
    }
    buffer.add(episode);
    if (cfg.hyper.primal == PrimalMode::Sac &&
        buffer.size() >= static_cast<std::size_t>(cfg.hyper.batch_episodes)) {
      for (int k = 0; k < cfg.hyper.updates_per_episode; ++k) {
        const auto batch =
            buffer.sample(static_cast<std::size_t>(cfg.hyper.batch_episodes), update_rng);
        diag = agent.update_step(batch, shaper, dual.lambda);
      }
    }
    row.actor_loss = diag.actor_loss;
    row.critic_loss = diag.critic_loss;

    const double u = constraint_estimate(episode, risk, cfg.estimator);
    window.push_back(u);
    window_sum += u;
    if (static_cast<int>(window.size()) > cfg.dual_window) {
      window_sum -= window.front();
      window.pop_front();
    }
    const double running = window_sum / static_cast<double>(window.size());
    if (constrained) dual = dual_update(dual, running, risk);
    row.u_estimate = u;
    row.u_running = running;
    row.lambda = dual.lambda;

    result.curve.push_back(row);
    if (on_episode) on_episode(row);
  }
  result.lambda = dual.lambda;
  return result;
}

nn::Checkpoint make_checkpoint(const TrainConfig& cfg, const TrainResult& result) {
  nn::Checkpoint ckpt;
  result.agent.save(ckpt);
  ckpt.metadata["learner"] = to_string(cfg.kind);
  ckpt.metadata["lambda"] = result.lambda;
  ckpt.metadata["episodes"] = cfg.budget;
  ckpt.metadata["seed"] = cfg.run.seed;
  ckpt.metadata["map"] = cfg.run.map_path;
  ckpt.metadata["c_hat"] = cfg.run.risk.c_hat;
  ckpt.metadata["horizon_T"] = cfg.run.risk.horizon_T;
  ckpt.metadata["threshold_mode"] = to_string(cfg.run.risk.mode);
  ckpt.metadata["estimator"] = to_string(cfg.estimator);
  ckpt.metadata["absorbing_terminals"] = cfg.absorbing_terminals;
  return ckpt;
}

std::unique_ptr<Planner> planner_from(const TrainResult& result, LearnerKind kind,
                                      SelectMode mode) {
  auto actor = std::make_shared<const nn::ParameterStore>(result.agent.actor());
  return std::make_unique<RecurrentPolicyPlanner>(std::move(actor), result.agent.hyper(), mode,
                                                  to_string(kind));
}

void write_curve_csv(std::ostream& out, const std::vector<CurveRow>& curve) {
  out << "episode,success,n_localize,lambda,U_estimate,actor_loss,critic_loss,steps,U_running\n";
  for (const CurveRow& r : curve) {
    out << r.episode << ',' << (r.success ? 1 : 0) << ',' << r.n_localize << ',' << r.lambda << ','
        << r.u_estimate << ',' << r.actor_loss << ',' << r.critic_loss << ',' << r.steps << ','
        << r.u_running << '\n';
  }
}

}  // namespace w2l
