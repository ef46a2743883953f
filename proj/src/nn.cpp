#include "w2l/nn.hpp"

#include <cmath>

namespace w2l::nn {

namespace {

std::string shape_of(const Matrix& m) {
  return "(" + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ")";
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ContractViolation(std::string(op) + ": shape mismatch " + shape_of(a) + " vs " +
                            shape_of(b));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// ParameterStore

void ParameterStore::add(const std::string& name, Matrix value) {
  if (contains(name)) throw ContractViolation("duplicate parameter " + name);
  Entry e;
  e.grad = Matrix::Zero(value.rows(), value.cols());
  e.value = std::move(value);
  entries_.emplace(name, std::move(e));
}

ParameterStore::Entry& ParameterStore::entry(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ContractViolation("unknown parameter " + name);
  return it->second;
}

const ParameterStore::Entry& ParameterStore::entry(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ContractViolation("unknown parameter " + name);
  return it->second;
}

void ParameterStore::zero_grad() {
  for (auto& [name, e] : entries_) e.grad.setZero();
}

std::vector<std::string> ParameterStore::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [name, e] : entries_) out.push_back(name);
  return out;
}

std::size_t ParameterStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, e] : entries_) n += static_cast<std::size_t>(e.value.size());
  return n;
}

Activation parse_activation(const std::string& name) {
  if (name == "identity") return Activation::Identity;
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  if (name == "sigmoid") return Activation::Sigmoid;
  throw std::invalid_argument("unknown activation " + name);
}

// ---------------------------------------------------------------------------
// Tape

Tape::Var Tape::push(Matrix value, std::function<void(Tape&, const Node&)> backprop) {
  if (spent_) throw ContractViolation("tape already consumed by backward()");
  if (!value.allFinite()) throw ContractViolation("non-finite value produced on tape");
  Node n;
  n.value = std::move(value);
  if (record_) n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Tape::Node& Tape::node(Var v) {
  if (v.id < 0 || v.id >= static_cast<int>(nodes_.size())) {
    throw ContractViolation("variable does not belong to this tape");
  }
  return nodes_[v.id];
}

const Tape::Node& Tape::node(Var v) const {
  if (v.id < 0 || v.id >= static_cast<int>(nodes_.size())) {
    throw ContractViolation("variable does not belong to this tape");
  }
  return nodes_[v.id];
}

const Matrix& Tape::value(Var v) const { return node(v).val(); }

void Tape::accumulate(Var v, const Matrix& g) { accumulate_expr(v, g); }

template <class Expr>
void Tape::accumulate_expr(Var v, const Expr& g) {
  Node& n = nodes_[v.id];
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

Tape::Var Tape::constant(Matrix m) { return push(std::move(m), nullptr); }

Tape::Var Tape::param(const ParameterStore& store, const std::string& name) {
  if (spent_) throw ContractViolation("tape already consumed by backward()");
  const ParameterStore::Entry& e = store.entry(name);
  if (auto it = param_nodes_.find(&e); it != param_nodes_.end()) return Var{it->second};
  Node n;
  n.external = &e.value;
  if (record_) n.entry = const_cast<ParameterStore::Entry*>(&e);
  nodes_.push_back(std::move(n));
  const int id = static_cast<int>(nodes_.size()) - 1;
  param_nodes_.emplace(&e, id);
  return Var{id};
}

Tape::Var Tape::affine(Var x, Var w, Var b) {
  const Matrix& xv = value(x);
  const Matrix& wv = value(w);
  const Matrix& bv = value(b);
  if (xv.cols() != wv.rows() || bv.rows() != 1 || bv.cols() != wv.cols()) {
    throw ContractViolation("affine: shapes x" + shape_of(xv) + " W" + shape_of(wv) + " b" +
                            shape_of(bv) + " do not compose");
  }
  Matrix y = xv * wv;
  y.rowwise() += bv.row(0);
  return push(std::move(y), [x, w, b](Tape& t, const Node& self) {
    const Matrix& xv = t.value(x);
    const Matrix& wv = t.value(w);
    t.accumulate_expr(x, self.grad * wv.transpose());
    t.accumulate_expr(w, xv.transpose() * self.grad);
    t.accumulate_expr(b, self.grad.colwise().sum());
  });
}

Tape::Var Tape::activate(Var x, Activation a) {
  const Matrix& xv = value(x);
  switch (a) {
    case Activation::Identity:
      return push(xv, [x](Tape& t, const Node& self) { t.accumulate(x, self.grad); });
    case Activation::Relu:
      return push(xv.cwiseMax(0.0), [x](Tape& t, const Node& self) {
        t.accumulate_expr(x, (self.value.array() > 0.0).cast<double>().matrix().cwiseProduct(self.grad));
      });
    case Activation::Tanh:
      return push(xv.array().tanh().matrix(), [x](Tape& t, const Node& self) {
        const auto& y = self.value.array();
        t.accumulate_expr(x, (self.grad.array() * (1.0 - y * y)).matrix());
      });
    case Activation::Sigmoid: {
      Matrix y = (1.0 / (1.0 + (-xv.array()).exp())).matrix();
      return push(std::move(y), [x](Tape& t, const Node& self) {
        const auto& y = self.value.array();
        t.accumulate_expr(x, (self.grad.array() * y * (1.0 - y)).matrix());
      });
    }
  }
  throw ContractViolation("unknown activation");
}

Tape::Var Tape::add(Var a, Var b) {
  require_same_shape(value(a), value(b), "add");
  return push(value(a) + value(b), [a, b](Tape& t, const Node& self) {
    t.accumulate(a, self.grad);
    t.accumulate(b, self.grad);
  });
}

Tape::Var Tape::sub(Var a, Var b) {
  require_same_shape(value(a), value(b), "sub");
  return push(value(a) - value(b), [a, b](Tape& t, const Node& self) {
    t.accumulate(a, self.grad);
    t.accumulate_expr(b, -self.grad);
  });
}

Tape::Var Tape::mul(Var a, Var b) {
  require_same_shape(value(a), value(b), "mul");
  return push(value(a).cwiseProduct(value(b)), [a, b](Tape& t, const Node& self) {
    t.accumulate_expr(a, self.grad.cwiseProduct(t.value(b)));
    t.accumulate_expr(b, self.grad.cwiseProduct(t.value(a)));
  });
}

Tape::Var Tape::scale(Var a, double s) {
  return push(value(a) * s, [a, s](Tape& t, const Node& self) { t.accumulate_expr(a, self.grad * s); });
}

Tape::Var Tape::mul_const(Var a, const Matrix& m) {
  require_same_shape(value(a), m, "mul_const");
  return push(value(a).cwiseProduct(m), [a, m](Tape& t, const Node& self) {
    t.accumulate_expr(a, self.grad.cwiseProduct(m));
  });
}

Tape::Var Tape::concat_cols(Var a, Var b) {
  const Matrix& av = value(a);
  const Matrix& bv = value(b);
  if (av.rows() != bv.rows()) throw ContractViolation("concat_cols: row mismatch");
  Matrix y(av.rows(), av.cols() + bv.cols());
  y << av, bv;
  const int na = static_cast<int>(av.cols());
  const int nb = static_cast<int>(bv.cols());
  return push(std::move(y), [a, b, na, nb](Tape& t, const Node& self) {
    t.accumulate_expr(a, self.grad.leftCols(na));
    t.accumulate_expr(b, self.grad.rightCols(nb));
  });
}

Tape::Var Tape::slice_cols(Var a, int start, int count) {
  const Matrix& av = value(a);
  if (start < 0 || count < 0 || start + count > av.cols()) {
    throw ContractViolation("slice_cols: range outside " + shape_of(av));
  }
  const int rows = static_cast<int>(av.rows());
  const int cols = static_cast<int>(av.cols());
  return push(av.middleCols(start, count), [a, start, count, rows, cols](Tape& t, const Node& self) {
    Matrix g = Matrix::Zero(rows, cols);
    g.middleCols(start, count) = self.grad;
    t.accumulate(a, g);
  });
}

Tape::Var Tape::concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ContractViolation("concat_rows: no inputs");
  const auto cols = value(parts[0]).cols();
  Eigen::Index rows = 0;
  for (Var p : parts) {
    if (value(p).cols() != cols) throw ContractViolation("concat_rows: column mismatch");
    rows += value(p).rows();
  }
  Matrix y(rows, cols);
  std::vector<std::pair<Var, Eigen::Index>> spans;
  Eigen::Index at = 0;
  for (Var p : parts) {
    const Matrix& pv = value(p);
    y.middleRows(at, pv.rows()) = pv;
    spans.emplace_back(p, at);
    at += pv.rows();
  }
  return push(std::move(y), [spans = std::move(spans)](Tape& t, const Node& self) {
    for (const auto& [p, offset] : spans) {
      t.accumulate_expr(p, self.grad.middleRows(offset, t.value(p).rows()));
    }
  });
}

Tape::Var Tape::slice_rows(Var a, int start, int count) {
  const Matrix& av = value(a);
  if (start < 0 || count < 0 || start + count > av.rows()) {
    throw ContractViolation("slice_rows: range outside " + shape_of(av));
  }
  const int rows = static_cast<int>(av.rows());
  const int cols = static_cast<int>(av.cols());
  return push(av.middleRows(start, count), [a, start, count, rows, cols](Tape& t, const Node& self) {
    Node& target = t.nodes_[a.id];
    if (target.grad.size() == 0) target.grad = Matrix::Zero(rows, cols);
    target.grad.middleRows(start, count) += self.grad;
  });
}

Tape::Var Tape::log_softmax_rows(Var a) {
  const Matrix& av = value(a);
  Matrix y(av.rows(), av.cols());
  for (Eigen::Index r = 0; r < av.rows(); ++r) {
    const double m = av.row(r).maxCoeff();
    const double lse = m + std::log((av.row(r).array() - m).exp().sum());
    y.row(r) = av.row(r).array() - lse;
  }
  return push(std::move(y), [a](Tape& t, const Node& self) {
    const Matrix p = self.value.array().exp().matrix();
    const Eigen::VectorXd g_sum = self.grad.rowwise().sum();
    Matrix g = self.grad;
    for (Eigen::Index r = 0; r < g.rows(); ++r) g.row(r) -= p.row(r) * g_sum(r);
    t.accumulate(a, g);
  });
}

Tape::Var Tape::exp(Var a) {
  return push(value(a).array().exp().matrix(), [a](Tape& t, const Node& self) {
    t.accumulate_expr(a, self.grad.cwiseProduct(self.value));
  });
}

Tape::Var Tape::square(Var a) {
  return push(value(a).cwiseAbs2(), [a](Tape& t, const Node& self) {
    t.accumulate_expr(a, 2.0 * self.grad.cwiseProduct(t.value(a)));
  });
}

Tape::Var Tape::row_sum(Var a) {
  const int cols = static_cast<int>(value(a).cols());
  return push(value(a).rowwise().sum(), [a, cols](Tape& t, const Node& self) {
    t.accumulate_expr(a, self.grad.replicate(1, cols));
  });
}

Tape::Var Tape::sum(Var a) {
  const int rows = static_cast<int>(value(a).rows());
  const int cols = static_cast<int>(value(a).cols());
  Matrix y(1, 1);
  y(0, 0) = value(a).sum();
  return push(std::move(y), [a, rows, cols](Tape& t, const Node& self) {
    t.accumulate_expr(a, Matrix::Constant(rows, cols, self.grad(0, 0)));
  });
}

void Tape::backward(Var loss) {
  if (!record_) throw ContractViolation("backward() on a non-recording tape");
  if (spent_) throw ContractViolation("backward() called twice without a new forward pass");
  Node& root = node(loss);
  if (root.val().rows() != 1 || root.val().cols() != 1) {
    throw ContractViolation("backward() needs a scalar loss, got " + shape_of(root.val()));
  }
  root.grad = Matrix::Ones(1, 1);
  for (int i = loss.id; i >= 0; --i) {
    const Node& n = nodes_[i];
    if (n.grad.size() == 0) continue;
    if (n.entry != nullptr) {
      n.entry->grad += n.grad;
    } else if (n.backprop) {
      n.backprop(*this, n);
    }
  }
  spent_ = true;
  nodes_.clear();
  param_nodes_.clear();
}

// ---------------------------------------------------------------------------
// Layers

void init_mlp(ParameterStore& store, const std::string& prefix, const MlpSpec& spec, Rng& rng) {
  if (spec.sizes.size() < 2) throw ContractViolation("mlp " + prefix + " needs at least two sizes");
  for (std::size_t l = 0; l + 1 < spec.sizes.size(); ++l) {
    const int in = spec.sizes[l];
    const int out = spec.sizes[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> u(-bound, bound);
    Matrix w(in, out);
    Matrix b(1, out);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = u(rng);
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = u(rng);
    const std::string layer = prefix + "." + std::to_string(l);
    store.add(layer + ".weight", std::move(w));
    store.add(layer + ".bias", std::move(b));
  }
}

Var mlp_forward(Tape& tape, const ParameterStore& store, const std::string& prefix, const MlpSpec& spec,
                Var x) {
  const std::size_t layers = spec.sizes.size() - 1;
  Var h = x;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::string layer = prefix + "." + std::to_string(l);
    const Matrix& w = store.value(layer + ".weight");
    if (w.rows() != spec.sizes[l] || w.cols() != spec.sizes[l + 1]) {
      throw ContractViolation("mlp parameter " + layer + ".weight has shape " + shape_of(w));
    }
    h = tape.affine(h, tape.param(store, layer + ".weight"), tape.param(store, layer + ".bias"));
    h = tape.activate(h, l + 1 == layers ? spec.output : spec.hidden);
  }
  return h;
}

void init_lstm(ParameterStore& store, const std::string& prefix, const LstmSpec& spec, Rng& rng) {
  const int fan_in = spec.input + spec.hidden;
  const double bound = 1.0 / std::sqrt(static_cast<double>(spec.hidden));
  std::uniform_real_distribution<double> u(-bound, bound);
  Matrix w(fan_in, 4 * spec.hidden);
  Matrix b(1, 4 * spec.hidden);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = u(rng);
  for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = u(rng);
  b.middleCols(spec.hidden, spec.hidden).setConstant(1.0);
  store.add(prefix + ".weight", std::move(w));
  store.add(prefix + ".bias", std::move(b));
}

LstmState LstmState::zeros(int batch, int hidden_size) {
  return {Matrix::Zero(batch, hidden_size), Matrix::Zero(batch, hidden_size)};
}

LstmVars lstm_input(Tape& tape, const LstmState& state) {
  return {tape.constant(state.hidden), tape.constant(state.cell)};
}

LstmVars lstm_step(Tape& tape, const ParameterStore& store, const std::string& prefix, Var x,
                   LstmVars state) {
  const Matrix& w = store.value(prefix + ".weight");
  const int hidden = static_cast<int>(tape.value(state.hidden).cols());
  const auto in = tape.value(x).cols();
  if (w.rows() != in + hidden || w.cols() != 4 * hidden) {
    throw ContractViolation("lstm parameter " + prefix + ".weight has shape " + shape_of(w) +
                            ", input " + std::to_string(in) + ", hidden " + std::to_string(hidden));
  }
  const Var gates = tape.affine(tape.concat_cols(x, state.hidden), tape.param(store, prefix + ".weight"),
                                tape.param(store, prefix + ".bias"));
  const Var i = tape.activate(tape.slice_cols(gates, 0, hidden), Activation::Sigmoid);
  const Var f = tape.activate(tape.slice_cols(gates, hidden, hidden), Activation::Sigmoid);
  const Var g = tape.activate(tape.slice_cols(gates, 2 * hidden, hidden), Activation::Tanh);
  const Var o = tape.activate(tape.slice_cols(gates, 3 * hidden, hidden), Activation::Sigmoid);
  const Var cell = tape.add(tape.mul(f, state.cell), tape.mul(i, g));
  const Var h = tape.mul(o, tape.activate(cell, Activation::Tanh));
  return {h, cell};
}

// ---------------------------------------------------------------------------
// Adam

void Adam::step(ParameterStore& store) {
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (auto& [name, e] : store) {
    auto [it, inserted] = moments_.try_emplace(name);
    auto& [m, v] = it->second;
    if (inserted) {
      m = Matrix::Zero(e.value.rows(), e.value.cols());
      v = Matrix::Zero(e.value.rows(), e.value.cols());
    }
    m = config_.beta1 * m + (1.0 - config_.beta1) * e.grad;
    v = config_.beta2 * v + (1.0 - config_.beta2) * e.grad.cwiseAbs2();
    e.value.array() -=
        config_.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + config_.eps);
    e.grad.setZero();
  }
}

}  // namespace w2l::nn
