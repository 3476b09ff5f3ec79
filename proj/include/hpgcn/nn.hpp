#pragma once

#include "hpgcn/graph.hpp"
#include "hpgcn/rng.hpp"
#include "hpgcn/types.hpp"

#include <array>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace hpgcn::nn {

// Learnable matrix with its gradient and Adam state.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  Matrix adam_m;
  Matrix adam_v;
  long long adam_steps = 0;

  Parameter(std::string param_name, Matrix initial)
      : name(std::move(param_name)),
        value(std::move(initial)),
        grad(Matrix::Zero(value.rows(), value.cols())),
        adam_m(Matrix::Zero(value.rows(), value.cols())),
        adam_v(Matrix::Zero(value.rows(), value.cols())) {}

  void zero_grad() { grad.setZero(); }
};

// Glorot: uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
Matrix glorot_uniform(Index rows, Index cols, Rng& rng);

struct AdamConfig {
  Scalar lr = 0.01;
  Scalar beta1 = 0.9;
  Scalar beta2 = 0.999;
  Scalar eps = 1e-8;
};

// One bias-corrected Adam update on every parameter's accumulated gradient.
void adam_step(std::span<Parameter* const> params, const AdamConfig& cfg = {});

// Record of one forward computation over dense matrices, replayed in exact
// reverse order for backpropagation. Gradients accumulate additively at
// fan-out; after backward(), each parameter leaf adds its gradient into the
// bound Parameter::grad.
class Tape {
 public:
  struct ValueRef {
    Index id = -1;
  };

  // Leaf that never needs a gradient (inputs, fixed signals).
  ValueRef constant(Matrix v);
  // Leaf bound to a Parameter; backward() accumulates into p.grad.
  ValueRef parameter(Parameter& p);

  ValueRef matmul(ValueRef a, ValueRef b);
  ValueRef add(ValueRef a, ValueRef b);
  // bias is 1 x c, broadcast over rows of a.
  ValueRef add_bias(ValueRef a, ValueRef bias);
  ValueRef relu(ValueRef a);
  ValueRef concat_cols(std::span<const ValueRef> parts);
  // out.row(i) = a.row(rows[i])
  ValueRef row_select(ValueRef a, std::vector<Index> rows);
  // out has n_rows rows, zero except out.row(rows[i]) = a.row(i); rows must
  // be unique.
  ValueRef row_scatter(ValueRef a, std::vector<Index> rows, Index n_rows);
  // Entrywise max over same-shaped inputs; gradient routes to the first
  // argmax input.
  ValueRef max_pool(std::span<const ValueRef> parts);
  // h - D^{-1/2} W D^{-1/2} h with the graph held constant. The operator is
  // symmetric, so the pullback is the same propagation applied to the
  // upstream gradient. adj/deg must outlive the tape.
  ValueRef laplacian_propagate(ValueRef h, const SparseAdjacency& adj,
                               const DegreeVector& deg);
  // Mean over masked rows of class_weights[y] * (-log softmax(logits)[y]).
  // Labels must be 0/1 on masked rows; returns a 1x1 value.
  ValueRef weighted_softmax_cross_entropy(
      ValueRef logits, const std::vector<int>& labels,
      const std::vector<Index>& mask, const std::array<Scalar, 2>& class_weights);

  const Matrix& value(ValueRef ref) const { return node(ref).value; }
  const Matrix& grad(ValueRef ref) const { return node(ref).grad; }

  // Reverse sweep from a 1x1 loss node.
  void backward(ValueRef loss);

  Index size() const { return static_cast<Index>(nodes_.size()); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    std::function<void(Tape&)> pull;  // adds into the inputs' grads
    Parameter* bound = nullptr;
  };

  std::vector<Node> nodes_;

  Node& node(ValueRef ref) { return nodes_.at(static_cast<size_t>(ref.id)); }
  const Node& node(ValueRef ref) const {
    return nodes_.at(static_cast<size_t>(ref.id));
  }
  ValueRef push(Matrix value, std::function<void(Tape&)> pull,
                Parameter* bound = nullptr);
};

// Compares reverse-mode parameter gradients against central finite
// differences on a sampled subset of coordinates and returns the worst
// error, measured relative to max(1, |grad|, |fd|).
//
// loss_fn(true) must run forward + backward and leave gradients accumulated
// in the parameters (grad_check zeroes them first); loss_fn(false) must
// return the loss without touching gradients.
Scalar grad_check(const std::function<Scalar(bool with_grad)>& loss_fn,
                  std::span<Parameter* const> params, Scalar h = 1e-5,
                  Index samples_per_param = 24, std::uint64_t seed = 1234);

// Flat binary parameter container. Layout (little-endian):
//   magic "HPGC", u32 version = 1, u64 record count,
//   then per record: u32 name length, name bytes,
//   u64 rows, u64 cols, rows*cols f64 row-major.
void save_checkpoint(const std::filesystem::path& path,
                     std::span<const Parameter* const> params);

// Restores by name; every stored record must match a parameter and vice
// versa, with identical shapes.
void load_checkpoint(const std::filesystem::path& path,
                     std::span<Parameter* const> params);

}  // namespace hpgcn::nn
