#include "hpgcn/training.hpp"

#include "hpgcn/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace hpgcn {

namespace {

std::vector<Index> labeled_of_class(const std::vector<int>& labels, int cls) {
  std::vector<Index> out;
  for (size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == cls) out.push_back(static_cast<Index>(i));
  return out;
}

// floor(ratio * n); callers guard against empty results.
Index take_count(size_t n, Scalar ratio) {
  return static_cast<Index>(std::floor(ratio * static_cast<Scalar>(n)));
}

void split_group(std::vector<Index> pool, Scalar train_ratio, Rng& rng,
                 Splits& out) {
  rng.shuffle(pool);
  const Index n_train = take_count(pool.size(), train_ratio);
  const Index remaining = static_cast<Index>(pool.size()) - n_train;
  const Index n_val = remaining / 3;  // 1:2 val:test
  if (n_train < 1 || n_val < 1 || remaining - n_val < 1)
    throw std::invalid_argument(
        "split leaves a class absent from train, val, or test");
  out.train.insert(out.train.end(), pool.begin(), pool.begin() + n_train);
  out.val.insert(out.val.end(), pool.begin() + n_train,
                 pool.begin() + n_train + n_val);
  out.test.insert(out.test.end(), pool.begin() + n_train + n_val, pool.end());
}

}  // namespace

Splits make_splits(const std::vector<int>& labels, const SplitSpec& spec) {
  if (!(spec.train_ratio > 0.0 && spec.train_ratio < 1.0))
    throw std::invalid_argument("train_ratio must lie in (0, 1)");
  Rng rng(spec.seed);
  Splits out;
  if (spec.stratified) {
    for (const int cls : {kLabelNormal, kLabelAnomaly}) {
      auto pool = labeled_of_class(labels, cls);
      if (pool.empty())
        throw std::invalid_argument("a class has no labeled nodes");
      split_group(std::move(pool), spec.train_ratio, rng, out);
    }
  } else {
    std::vector<Index> pool;
    for (size_t i = 0; i < labels.size(); ++i)
      if (labels[i] != kLabelUnknown) pool.push_back(static_cast<Index>(i));
    if (pool.empty()) throw std::invalid_argument("no labeled nodes");
    split_group(std::move(pool), spec.train_ratio, rng, out);
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

Scalar f1_macro(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.empty() || y_true.size() != y_pred.size())
    throw std::invalid_argument("f1_macro needs matching non-empty labels");
  Scalar macro = 0.0;
  for (const int cls : {0, 1}) {
    Index tp = 0, fp = 0, fn = 0;
    for (size_t i = 0; i < y_true.size(); ++i) {
      const bool t = y_true[i] == cls;
      const bool p = y_pred[i] == cls;
      tp += t && p;
      fp += !t && p;
      fn += t && !p;
    }
    // no true and no predicted instances: perfect by convention
    const Scalar f1 = (tp + fp + fn) == 0
                          ? 1.0
                          : 2.0 * static_cast<Scalar>(tp) /
                                static_cast<Scalar>(2 * tp + fp + fn);
    macro += f1;
  }
  return macro / 2.0;
}

Scalar auc_roc(std::span<const int> y_true, std::span<const Scalar> scores) {
  if (y_true.size() != scores.size() || y_true.empty())
    throw std::invalid_argument("auc_roc needs matching non-empty inputs");
  const size_t n = y_true.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });

  // midranks over tie groups
  std::vector<Scalar> rank(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const Scalar mid = static_cast<Scalar>(i + j) / 2.0 + 1.0;
    for (size_t k = i; k <= j; ++k) rank[order[k]] = mid;
    i = j + 1;
  }

  Scalar pos_rank_sum = 0.0;
  size_t n_pos = 0;
  for (size_t k = 0; k < n; ++k) {
    if (y_true[k] == 1) {
      pos_rank_sum += rank[k];
      ++n_pos;
    } else if (y_true[k] != 0) {
      throw std::invalid_argument("auc_roc labels must be 0/1");
    }
  }
  const size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw std::invalid_argument("auc_roc needs both classes present");
  return (pos_rank_sum -
          static_cast<Scalar>(n_pos) * static_cast<Scalar>(n_pos + 1) / 2.0) /
         (static_cast<Scalar>(n_pos) * static_cast<Scalar>(n_neg));
}

namespace {

std::array<Scalar, 2> class_weights_for(const std::vector<int>& labels,
                                        const Splits& splits,
                                        bool weighted) {
  if (!weighted) return {1.0, 1.0};
  std::array<Scalar, 2> counts{0.0, 0.0};
  for (const Index i : splits.train)
    counts[static_cast<size_t>(labels[static_cast<size_t>(i)])] += 1.0;
  const Scalar total = counts[0] + counts[1];
  // inverse frequency: n / (2 n_c)
  return {total / (2.0 * counts[0]), total / (2.0 * counts[1])};
}

EvalResult metrics_on(const Matrix& logits, const std::vector<int>& labels,
                      std::span<const Index> nodes) {
  const Prediction pred = predict(logits);
  std::vector<int> y_true, y_pred;
  std::vector<Scalar> scores;
  for (const Index i : nodes) {
    y_true.push_back(labels[static_cast<size_t>(i)]);
    y_pred.push_back(pred.label[static_cast<size_t>(i)]);
    scores.push_back(pred.anomaly_score[i]);
  }
  return {f1_macro(y_true, y_pred), auc_roc(y_true, scores)};
}

}  // namespace

TrainReport train(const AttributedGraph& g, const GraphContext& ctx,
                  HpGcnModel& model, const Splits& splits,
                  const TrainOptions& opts) {
  using clock = std::chrono::steady_clock;
  const auto t_start = clock::now();

  const auto weights =
      class_weights_for(g.labels, splits, model.config().weighted_loss);
  auto params = model.parameters();

  TrainReport report;
  std::vector<Matrix> best_values;
  for (Index epoch = 1; epoch <= opts.epochs; ++epoch) {
    const auto t_epoch = clock::now();
    nn::Tape tape;
    auto logits = model_forward(tape, g, ctx, model);
    auto loss = tape.weighted_softmax_cross_entropy(logits, g.labels,
                                                    splits.train, weights);
    const Scalar loss_value = tape.value(loss)(0, 0);
    if (!std::isfinite(loss_value))
      throw DivergenceError("non-finite loss at epoch " +
                            std::to_string(epoch));
    for (nn::Parameter* p : params) p->zero_grad();
    tape.backward(loss);
    nn::adam_step(params, opts.adam);

    nn::Tape eval_tape;
    auto eval_logits = model_forward(eval_tape, g, ctx, model);
    const auto val =
        metrics_on(eval_tape.value(eval_logits), g.labels, splits.val);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = loss_value;
    rec.val_f1 = val.f1;
    rec.val_auc = val.auc;
    rec.seconds = std::chrono::duration<Scalar>(clock::now() - t_epoch).count();
    report.epochs.push_back(rec);

    if (report.best_epoch == 0 || val.f1 > report.best_val_f1) {
      report.best_epoch = epoch;
      report.best_val_f1 = val.f1;
      best_values.clear();
      for (const nn::Parameter* p : params) best_values.push_back(p->value);
    }
  }

  for (size_t i = 0; i < params.size(); ++i) params[i]->value = best_values[i];
  nn::Tape test_tape;
  auto test_logits = model_forward(test_tape, g, ctx, model);
  const auto test =
      metrics_on(test_tape.value(test_logits), g.labels, splits.test);
  report.test_f1_macro = test.f1;
  report.test_auc = test.auc;
  report.wall_clock_sec =
      std::chrono::duration<Scalar>(clock::now() - t_start).count();
  return report;
}

EvalResult evaluate(const AttributedGraph& g, const GraphContext& ctx,
                    HpGcnModel& model, std::span<const Index> nodes) {
  nn::Tape tape;
  auto logits = model_forward(tape, g, ctx, model);
  return metrics_on(tape.value(logits), g.labels, nodes);
}

void write_report_csv(const std::filesystem::path& path,
                      const TrainReport& report) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "epoch,loss,val_f1,val_auc\n";
  char buf[128];
  for (const EpochRecord& r : report.epochs) {
    std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g,%.17g\n",
                  static_cast<long long>(r.epoch), r.loss, r.val_f1, r.val_auc);
    out << buf;
  }
}

}  // namespace hpgcn
