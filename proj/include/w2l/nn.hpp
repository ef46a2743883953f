#ifndef W2L_NN_HPP
#define W2L_NN_HPP

// Small reverse-mode autodiff substrate: a parameter store, an eager tape
// over row-major matrices (rows = batch), MLP and LSTM building blocks, and Adam.

#include <Eigen/Core>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "w2l/rng.hpp"

namespace w2l::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Thrown on shape mismatches, missing parameters and tape misuse.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ParameterStore {
 public:
  struct Entry {
    Matrix value;
    Matrix grad;
  };

  void add(const std::string& name, Matrix value);
  bool contains(const std::string& name) const { return entries_.count(name) != 0; }

  Entry& entry(const std::string& name);
  const Entry& entry(const std::string& name) const;
  Matrix& value(const std::string& name) { return entry(name).value; }
  const Matrix& value(const std::string& name) const { return entry(name).value; }
  Matrix& grad(const std::string& name) { return entry(name).grad; }

  void zero_grad();
  std::vector<std::string> names() const;
  std::size_t parameter_count() const;
  std::size_t size() const { return entries_.size(); }

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

 private:
  std::map<std::string, Entry> entries_;
};

enum class Activation { Identity, Relu, Tanh, Sigmoid };

Activation parse_activation(const std::string& name);

class Tape {
 public:
  struct Var {
    int id = -1;
  };

  /// With `record_gradients = false` the tape only evaluates; backward() throws.
  explicit Tape(bool record_gradients = true) : record_(record_gradients) {}

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix m);
  /// Gradients of a recording tape accumulate into `store`, so the store
  /// must outlive the tape and must not be shared with another writer.
  Var param(const ParameterStore& store, const std::string& name);

  const Matrix& value(Var v) const;
  std::size_t size() const { return nodes_.size(); }
  bool recording() const { return record_; }

  Var affine(Var x, Var w, Var b);
  Var activate(Var x, Activation a);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double s);
  Var mul_const(Var a, const Matrix& m);
  Var concat_cols(Var a, Var b);
  Var slice_cols(Var a, int start, int count);
  Var concat_rows(std::span<const Var> parts);
  Var slice_rows(Var a, int start, int count);
  Var log_softmax_rows(Var a);
  Var exp(Var a);
  Var square(Var a);
  Var row_sum(Var a);
  Var sum(Var a);

  /// Accumulates d(loss)/d(param) into every participating ParameterStore
  /// entry. `loss` must be 1x1. The tape is spent afterwards.
  void backward(Var loss);

 private:
  struct Node {
    Matrix value;
    const Matrix* external = nullptr;  // parameter nodes alias the store
    ParameterStore::Entry* entry = nullptr;
    Matrix grad;
    std::function<void(Tape&, const Node&)> backprop;

    const Matrix& val() const { return external ? *external : value; }
  };

  Var push(Matrix value, std::function<void(Tape&, const Node&)> backprop);
  Node& node(Var v);
  const Node& node(Var v) const;
  void accumulate(Var v, const Matrix& g);
  template <class Expr>
  void accumulate_expr(Var v, const Expr& g);

  bool record_;
  bool spent_ = false;
  std::vector<Node> nodes_;
  std::unordered_map<const ParameterStore::Entry*, int> param_nodes_;
};

using Var = Tape::Var;

struct MlpSpec {
  std::vector<int> sizes;  // input, hidden..., output
  Activation hidden = Activation::Relu;
  Activation output = Activation::Identity;
};

/// Affine layers named `<prefix>.<i>.weight` (in x out) and `<prefix>.<i>.bias`
/// (1 x out), uniform fan-in initialization.
void init_mlp(ParameterStore& store, const std::string& prefix, const MlpSpec& spec, Rng& rng);
Var mlp_forward(Tape& tape, const ParameterStore& store, const std::string& prefix, const MlpSpec& spec,
                Var x);

struct LstmSpec {
  int input = 0;
  int hidden = 0;
};

/// Gate order i, f, g, o in a single `(input + hidden) x 4*hidden` weight.
/// The forget-gate bias starts at 1.
void init_lstm(ParameterStore& store, const std::string& prefix, const LstmSpec& spec, Rng& rng);

struct LstmVars {
  Var hidden;
  Var cell;
};

struct LstmState {
  Matrix hidden;
  Matrix cell;

  static LstmState zeros(int batch, int hidden_size);
};

LstmVars lstm_step(Tape& tape, const ParameterStore& store, const std::string& prefix, Var x,
                   LstmVars state);
LstmVars lstm_input(Tape& tape, const LstmState& state);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  explicit Adam(AdamConfig config) : config_(config) {}

  /// Applies one bias-corrected Adam update from the accumulated gradients,
  /// then zeroes them.
  void step(ParameterStore& store);
  long steps() const { return t_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  long t_ = 0;
  std::map<std::string, std::pair<Matrix, Matrix>> moments_;
};

}  // namespace w2l::nn

#endif  // W2L_NN_HPP
