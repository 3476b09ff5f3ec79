#include "hpgcn/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>

namespace hpgcn::nn {

Matrix glorot_uniform(Index rows, Index cols, Rng& rng) {
  const Scalar a = std::sqrt(6.0 / static_cast<Scalar>(rows + cols));
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(-a, a);
  return m;
}

void adam_step(std::span<Parameter* const> params, const AdamConfig& cfg) {
  for (Parameter* p : params) {
    p->adam_steps += 1;
    const Scalar t = static_cast<Scalar>(p->adam_steps);
    p->adam_m = cfg.beta1 * p->adam_m + (1.0 - cfg.beta1) * p->grad;
    p->adam_v = cfg.beta2 * p->adam_v +
                (1.0 - cfg.beta2) * p->grad.cwiseProduct(p->grad);
    const Scalar m_corr = 1.0 - std::pow(cfg.beta1, t);
    const Scalar v_corr = 1.0 - std::pow(cfg.beta2, t);
    p->value.array() -= cfg.lr * (p->adam_m.array() / m_corr) /
                        ((p->adam_v.array() / v_corr).sqrt() + cfg.eps);
  }
}

Tape::ValueRef Tape::push(Matrix value, std::function<void(Tape&)> pull,
                          Parameter* bound) {
  Node n;
  n.value = std::move(value);
  n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  n.pull = std::move(pull);
  n.bound = bound;
  nodes_.push_back(std::move(n));
  return ValueRef{static_cast<Index>(nodes_.size()) - 1};
}

Tape::ValueRef Tape::constant(Matrix v) { return push(std::move(v), nullptr); }

Tape::ValueRef Tape::parameter(Parameter& p) {
  return push(p.value, nullptr, &p);
}

Tape::ValueRef Tape::matmul(ValueRef a, ValueRef b) {
  const Matrix& av = value(a);
  const Matrix& bv = value(b);
  if (av.cols() != bv.rows())
    throw std::invalid_argument("matmul shape mismatch");
  return push(av * bv, [a, b, out = size()](Tape& t) {
    const Matrix& g = t.nodes_[static_cast<size_t>(out)].grad;
    t.node(a).grad.noalias() += g * t.value(b).transpose();
    t.node(b).grad.noalias() += t.value(a).transpose() * g;
  });
}

Tape::ValueRef Tape::add(ValueRef a, ValueRef b) {
  const Matrix& av = value(a);
  const Matrix& bv = value(b);
  if (av.rows() != bv.rows() || av.cols() != bv.cols())
    throw std::invalid_argument("add shape mismatch");
  return push(av + bv, [a, b, out = size()](Tape& t) {
    t.node(a).grad += t.nodes_[out].grad;
    t.node(b).grad += t.nodes_[out].grad;
  });
}

Tape::ValueRef Tape::add_bias(ValueRef a, ValueRef bias) {
  const Matrix& av = value(a);
  const Matrix& bv = value(bias);
  if (bv.rows() != 1 || bv.cols() != av.cols())
    throw std::invalid_argument("bias must be 1 x cols(a)");
  return push(av.rowwise() + bv.row(0), [a, bias, out = size()](Tape& t) {
    const Matrix& g = t.nodes_[out].grad;
    t.node(a).grad += g;
    t.node(bias).grad.row(0) += g.colwise().sum();
  });
}

Tape::ValueRef Tape::relu(ValueRef a) {
  const Matrix& av = value(a);
  return push(av.cwiseMax(0.0), [a, out = size()](Tape& t) {
    t.node(a).grad.array() +=
        t.nodes_[out].grad.array() * (t.value(a).array() > 0.0).cast<Scalar>();
  });
}

Tape::ValueRef Tape::concat_cols(std::span<const ValueRef> parts) {
  if (parts.empty()) throw std::invalid_argument("concat of nothing");
  const Index rows = value(parts[0]).rows();
  Index cols = 0;
  for (const ValueRef p : parts) {
    if (value(p).rows() != rows)
      throw std::invalid_argument("concat_cols row mismatch");
    cols += value(p).cols();
  }
  Matrix out(rows, cols);
  Index at = 0;
  for (const ValueRef p : parts) {
    out.middleCols(at, value(p).cols()) = value(p);
    at += value(p).cols();
  }
  std::vector<ValueRef> inputs(parts.begin(), parts.end());
  return push(std::move(out),
              [inputs = std::move(inputs), out = size()](Tape& t) {
                const Matrix& g = t.nodes_[out].grad;
                Index at = 0;
                for (const ValueRef p : inputs) {
                  const Index c = t.value(p).cols();
                  t.node(p).grad += g.middleCols(at, c);
                  at += c;
                }
              });
}

Tape::ValueRef Tape::row_select(ValueRef a, std::vector<Index> rows) {
  const Matrix& av = value(a);
  Matrix out(static_cast<Index>(rows.size()), av.cols());
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= av.rows())
      throw std::invalid_argument("row_select index out of range");
    out.row(static_cast<Index>(i)) = av.row(rows[i]);
  }
  return push(std::move(out),
              [a, rows = std::move(rows), out = size()](Tape& t) {
                const Matrix& g = t.nodes_[out].grad;
                for (size_t i = 0; i < rows.size(); ++i)
                  t.node(a).grad.row(rows[i]) += g.row(static_cast<Index>(i));
              });
}

Tape::ValueRef Tape::row_scatter(ValueRef a, std::vector<Index> rows,
                                 Index n_rows) {
  const Matrix& av = value(a);
  if (static_cast<Index>(rows.size()) != av.rows())
    throw std::invalid_argument("row_scatter needs one target per row");
  Matrix out = Matrix::Zero(n_rows, av.cols());
  std::vector<bool> seen(static_cast<size_t>(n_rows), false);
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= n_rows)
      throw std::invalid_argument("row_scatter index out of range");
    if (seen[static_cast<size_t>(rows[i])])
      throw std::invalid_argument("row_scatter targets must be unique");
    seen[static_cast<size_t>(rows[i])] = true;
    out.row(rows[i]) = av.row(static_cast<Index>(i));
  }
  return push(std::move(out),
              [a, rows = std::move(rows), out = size()](Tape& t) {
                const Matrix& g = t.nodes_[out].grad;
                for (size_t i = 0; i < rows.size(); ++i)
                  t.node(a).grad.row(static_cast<Index>(i)) += g.row(rows[i]);
              });
}

Tape::ValueRef Tape::max_pool(std::span<const ValueRef> parts) {
  if (parts.empty()) throw std::invalid_argument("max_pool of nothing");
  const Matrix& first = value(parts[0]);
  for (const ValueRef p : parts) {
    if (value(p).rows() != first.rows() || value(p).cols() != first.cols())
      throw std::invalid_argument("max_pool shape mismatch");
  }
  Matrix out = first;
  // first argmax wins; ties route the whole gradient to the earliest input
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> argmax =
      Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>::Zero(first.rows(),
                                                               first.cols());
  for (size_t p = 1; p < parts.size(); ++p) {
    const Matrix& v = value(parts[p]);
    for (Index i = 0; i < out.rows(); ++i)
      for (Index j = 0; j < out.cols(); ++j)
        if (v(i, j) > out(i, j)) {
          out(i, j) = v(i, j);
          argmax(i, j) = static_cast<int>(p);
        }
  }
  std::vector<ValueRef> inputs(parts.begin(), parts.end());
  return push(std::move(out),
              [inputs = std::move(inputs), argmax = std::move(argmax),
               out = size()](Tape& t) {
                const Matrix& g = t.nodes_[out].grad;
                for (Index i = 0; i < g.rows(); ++i)
                  for (Index j = 0; j < g.cols(); ++j)
                    t.node(inputs[static_cast<size_t>(argmax(i, j))])
                        .grad(i, j) += g(i, j);
              });
}

Tape::ValueRef Tape::laplacian_propagate(ValueRef h,
                                         const SparseAdjacency& adj,
                                         const DegreeVector& deg) {
  return push(hpgcn::laplacian_propagate(adj, deg, value(h)),
              [h, &adj, &deg, out = size()](Tape& t) {
                // symmetric operator: pullback is L applied to the gradient
                t.node(h).grad +=
                    hpgcn::laplacian_propagate(adj, deg, t.nodes_[out].grad);
              });
}

Tape::ValueRef Tape::weighted_softmax_cross_entropy(
    ValueRef logits, const std::vector<int>& labels,
    const std::vector<Index>& mask,
    const std::array<Scalar, 2>& class_weights) {
  const Matrix& z = value(logits);
  if (z.cols() != 2)
    throw std::invalid_argument("loss expects n x 2 logits");
  if (static_cast<Index>(labels.size()) != z.rows())
    throw std::invalid_argument("label count mismatch");
  if (mask.empty()) throw std::invalid_argument("loss mask is empty");

  Matrix probs(static_cast<Index>(mask.size()), 2);
  std::vector<int> masked_labels(mask.size());
  Scalar loss = 0.0;
  for (size_t k = 0; k < mask.size(); ++k) {
    const Index i = mask[k];
    if (i < 0 || i >= z.rows())
      throw std::invalid_argument("mask index out of range");
    const int y = labels[static_cast<size_t>(i)];
    if (y != 0 && y != 1)
      throw std::invalid_argument("masked rows must be labeled 0/1");
    masked_labels[k] = y;
    const Scalar m = std::max(z(i, 0), z(i, 1));
    const Scalar e0 = std::exp(z(i, 0) - m);
    const Scalar e1 = std::exp(z(i, 1) - m);
    const Scalar sum = e0 + e1;
    probs(static_cast<Index>(k), 0) = e0 / sum;
    probs(static_cast<Index>(k), 1) = e1 / sum;
    loss += class_weights[static_cast<size_t>(y)] *
            (m + std::log(sum) - z(i, y));
  }
  const Scalar inv_m = 1.0 / static_cast<Scalar>(mask.size());
  Matrix out(1, 1);
  out(0, 0) = loss * inv_m;
  return push(std::move(out),
              [logits, mask, masked_labels = std::move(masked_labels),
               probs = std::move(probs), class_weights, inv_m,
               out = size()](Tape& t) {
                const Scalar g =
                    t.nodes_[static_cast<size_t>(out)].grad(0, 0) * inv_m;
                for (size_t k = 0; k < mask.size(); ++k) {
                  const Index i = mask[k];
                  const int y = masked_labels[k];
                  const Scalar w = g * class_weights[static_cast<size_t>(y)];
                  t.node(logits).grad(i, 0) +=
                      w * (probs(static_cast<Index>(k), 0) - (y == 0 ? 1.0 : 0.0));
                  t.node(logits).grad(i, 1) +=
                      w * (probs(static_cast<Index>(k), 1) - (y == 1 ? 1.0 : 0.0));
                }
              });
}

void Tape::backward(ValueRef loss) {
  Node& seed = node(loss);
  if (seed.value.rows() != 1 || seed.value.cols() != 1)
    throw std::invalid_argument("backward needs a 1x1 loss");
  for (Node& n : nodes_) n.grad.setZero();
  seed.grad(0, 0) = 1.0;
  for (Index id = loss.id; id >= 0; --id) {
    if (nodes_[static_cast<size_t>(id)].pull)
      nodes_[static_cast<size_t>(id)].pull(*this);
  }
  for (Index id = 0; id <= loss.id; ++id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (n.bound != nullptr) n.bound->grad += n.grad;
  }
}

Scalar grad_check(const std::function<Scalar(bool)>& loss_fn,
                  std::span<Parameter* const> params, Scalar h,
                  Index samples_per_param, std::uint64_t seed) {
  for (Parameter* p : params) p->zero_grad();
  loss_fn(true);

  Rng rng(seed);
  Scalar worst = 0.0;
  for (Parameter* p : params) {
    const Index count = p->value.size();
    std::vector<Index> coords(static_cast<size_t>(count));
    for (Index i = 0; i < count; ++i) coords[static_cast<size_t>(i)] = i;
    if (count > samples_per_param) {
      rng.shuffle(coords);
      coords.resize(static_cast<size_t>(samples_per_param));
    }
    for (const Index c : coords) {
      Scalar* slot = p->value.data() + c;
      const Scalar original = *slot;
      *slot = original + h;
      const Scalar up = loss_fn(false);
      *slot = original - h;
      const Scalar down = loss_fn(false);
      *slot = original;
      const Scalar fd = (up - down) / (2.0 * h);
      const Scalar an = *(p->grad.data() + c);
      const Scalar err = std::abs(an - fd) /
                         std::max({1.0, std::abs(an), std::abs(fd)});
      worst = std::max(worst, err);
    }
  }
  return worst;
}

namespace {

constexpr char kMagic[4] = {'H', 'P', 'G', 'C'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_raw(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("truncated checkpoint");
  return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path,
                     std::span<const Parameter* const> params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  write_raw(out, kVersion);
  write_raw(out, static_cast<std::uint64_t>(params.size()));
  for (const Parameter* p : params) {
    write_raw(out, static_cast<std::uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    write_raw(out, static_cast<std::uint64_t>(p->value.rows()));
    write_raw(out, static_cast<std::uint64_t>(p->value.cols()));
    for (Index i = 0; i < p->value.rows(); ++i)
      for (Index j = 0; j < p->value.cols(); ++j) write_raw(out, p->value(i, j));
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void load_checkpoint(const std::filesystem::path& path,
                     std::span<Parameter* const> params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  char magic[4];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("not a parameter checkpoint: " + path.string());
  if (read_raw<std::uint32_t>(in) != kVersion)
    throw std::runtime_error("unsupported checkpoint version");
  const auto count = read_raw<std::uint64_t>(in);
  if (count != params.size())
    throw std::runtime_error("checkpoint parameter count mismatch");

  std::map<std::string, Matrix> records;
  for (std::uint64_t r = 0; r < count; ++r) {
    const auto name_len = read_raw<std::uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const auto rows = static_cast<Index>(read_raw<std::uint64_t>(in));
    const auto cols = static_cast<Index>(read_raw<std::uint64_t>(in));
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) m(i, j) = read_raw<Scalar>(in);
    records.emplace(std::move(name), std::move(m));
  }
  for (Parameter* p : params) {
    const auto it = records.find(p->name);
    if (it == records.end())
      throw std::runtime_error("checkpoint missing parameter " + p->name);
    if (it->second.rows() != p->value.rows() ||
        it->second.cols() != p->value.cols())
      throw std::runtime_error("checkpoint shape mismatch for " + p->name);
    p->value = it->second;
  }
}

}  // namespace hpgcn::nn
