#ifndef W2L_TESTS_GRADCHECK_HPP
#define W2L_TESTS_GRADCHECK_HPP

// Central finite-difference check of tape gradients, plus test-side rebuilds
// of the actor and critic losses from the same parameter names the agent uses.

#include <algorithm>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "w2l/nn.hpp"
#include "w2l/rsac.hpp"

namespace w2l::gradcheck {

using LossFn = std::function<nn::Var(nn::Tape&, const nn::ParameterStore&)>;

struct Report {
  double max_rel_error = 0.0;
  std::string worst;
  std::size_t checked = 0;
};

/// Compares analytic gradients with central differences (step h). Tensors
/// larger than `max_per_tensor` are probed at that many random entries.
inline Report check(nn::ParameterStore& store, const LossFn& loss_fn, Rng& rng,
                    std::size_t max_per_tensor = 64, double h = 1e-5) {
  store.zero_grad();
  {
    nn::Tape tape(true);
    tape.backward(loss_fn(tape, store));
  }
  auto eval = [&] {
    nn::Tape tape(false);
    return tape.value(loss_fn(tape, store))(0, 0);
  };
  Report report;
  for (auto& [name, entry] : store) {
    const std::size_t n = static_cast<std::size_t>(entry.value.size());
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    if (n > max_per_tensor) {
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(max_per_tensor);
    }
    for (std::size_t k : idx) {
      double& w = entry.value.data()[k];
      const double saved = w;
      w = saved + h;
      const double up = eval();
      w = saved - h;
      const double down = eval();
      w = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double err = oracle::relative_error(entry.grad.data()[k], numeric);
      ++report.checked;
      if (err > report.max_rel_error) {
        report.max_rel_error = err;
        report.worst = name + "[" + std::to_string(k) + "]";
      }
    }
  }
  store.zero_grad();
  return report;
}

/// Random time-major inputs for a recurrent network: `steps` x `batch` rows.
struct SequenceInput {
  int steps = 3;
  int batch = 2;
  nn::Matrix obs;
  nn::Matrix prev;
  nn::Matrix taken;
  nn::Matrix target;
};

inline SequenceInput random_sequence(Rng& rng, int steps = 3, int batch = 2) {
  SequenceInput in;
  in.steps = steps;
  in.batch = batch;
  const int rows = steps * batch;
  in.obs = nn::Matrix(rows, 2);
  in.prev = nn::Matrix::Zero(rows, 2);
  in.taken = nn::Matrix::Zero(rows, 2);
  in.target = nn::Matrix(rows, 1);
  for (int r = 0; r < rows; ++r) {
    in.obs(r, 0) = uniform01(rng);
    in.obs(r, 1) = uniform01(rng);
    in.prev(r, rng() % 2) = 1.0;
    in.taken(r, rng() % 2) = 1.0;
    in.target(r, 0) = 4.0 * uniform01(rng) - 2.0;
  }
  return in;
}

inline nn::MlpSpec embedding(int out) { return {{2, out}, nn::Activation::Relu, nn::Activation::Relu}; }

inline nn::MlpSpec head(int in, const std::vector<int>& hidden) {
  nn::MlpSpec spec{{in}, nn::Activation::Relu, nn::Activation::Identity};
  spec.sizes.insert(spec.sizes.end(), hidden.begin(), hidden.end());
  spec.sizes.push_back(2);
  return spec;
}

/// Embeddings, concatenation and the LSTM unrolled over the sequence.
inline nn::Var trunk(nn::Tape& tape, const nn::ParameterStore& store, const std::string& prefix,
                     const SacHyper& hyper, const SequenceInput& in) {
  const nn::Var o = nn::mlp_forward(tape, store, prefix + ".obs_emb", embedding(hyper.obs_emb),
                                    tape.constant(in.obs));
  const nn::Var a = nn::mlp_forward(tape, store, prefix + ".act_emb", embedding(hyper.act_emb),
                                    tape.constant(in.prev));
  const nn::Var z = tape.concat_cols(o, a);
  nn::LstmVars state = nn::lstm_input(tape, nn::LstmState::zeros(in.batch, hyper.lstm_hidden));
  std::vector<nn::Var> hidden;
  for (int t = 0; t < in.steps; ++t) {
    state = nn::lstm_step(tape, store, prefix + ".lstm", tape.slice_rows(z, t * in.batch, in.batch),
                          state);
    hidden.push_back(state.hidden);
  }
  return tape.concat_rows(hidden);
}

/// Discrete soft actor loss: mean over rows of sum_a pi(a) (alpha log pi(a) - q(a)).
inline LossFn actor_loss(const SacHyper& hyper, const SequenceInput& in, const nn::Matrix& q) {
  return [hyper, in, q](nn::Tape& tape, const nn::ParameterStore& store) {
    const nn::Var h = trunk(tape, store, "actor", hyper, in);
    const nn::Var logp = tape.log_softmax_rows(
        nn::mlp_forward(tape, store, "actor.policy", head(hyper.lstm_hidden, hyper.policy_layers), h));
    const nn::Var inner = tape.sub(tape.scale(logp, hyper.alpha), tape.constant(q));
    const nn::Var per_row = tape.row_sum(tape.mul(tape.exp(logp), inner));
    return tape.scale(tape.sum(per_row), 1.0 / static_cast<double>(q.rows()));
  };
}

/// Twin-critic squared error on the taken action against fixed targets.
inline LossFn critic_loss(const SacHyper& hyper, const SequenceInput& in) {
  return [hyper, in](nn::Tape& tape, const nn::ParameterStore& store) {
    const nn::Var h = trunk(tape, store, "critic", hyper, in);
    const nn::MlpSpec q_spec = head(hyper.lstm_hidden, hyper.dqn_layers);
    const nn::Var target = tape.constant(in.target);
    nn::Var total = tape.constant(nn::Matrix::Zero(1, 1));
    for (const char* q : {"critic.q1", "critic.q2"}) {
      const nn::Var qa = tape.row_sum(tape.mul_const(nn::mlp_forward(tape, store, q, q_spec, h), in.taken));
      total = tape.add(total, tape.sum(tape.square(tape.sub(qa, target))));
    }
    return tape.scale(total, 0.5 / static_cast<double>(in.target.rows()));
  };
}

}  // namespace w2l::gradcheck

#endif  // W2L_TESTS_GRADCHECK_HPP
