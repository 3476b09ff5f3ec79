#pragma once

#include "hpgcn/model.hpp"
#include "hpgcn/types.hpp"

#include <filesystem>
#include <span>
#include <vector>

namespace hpgcn {

// Stratified train/val/test split over the labeled nodes; what the train
// ratio leaves is divided 1:2 between validation and test.
struct SplitSpec {
  Scalar train_ratio = 0.4;
  std::uint64_t seed = 11;
  bool stratified = true;
};

struct Splits {
  std::vector<Index> train;
  std::vector<Index> val;
  std::vector<Index> test;
};

Splits make_splits(const std::vector<int>& labels, const SplitSpec& spec);

// Unweighted mean of per-class F1. A class with no true and no predicted
// instances scores 1; any other zero denominator scores 0.
Scalar f1_macro(std::span<const int> y_true, std::span<const int> y_pred);

// Rank-based (Mann-Whitney) AUC with midrank tie correction.
Scalar auc_roc(std::span<const int> y_true, std::span<const Scalar> scores);

struct EpochRecord {
  Index epoch;  // 1-based
  Scalar loss;
  Scalar val_f1;
  Scalar val_auc;
  Scalar seconds;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  Index best_epoch = 0;  // epoch with the highest val F1, earliest on ties
  Scalar best_val_f1 = 0.0;
  Scalar test_f1_macro = 0.0;
  Scalar test_auc = 0.0;
  Scalar wall_clock_sec = 0.0;
};

struct TrainOptions {
  Index epochs = 100;
  nn::AdamConfig adam;  // lr 0.01
};

// Full-batch loop: loss on the train mask, per-epoch validation, best-val-F1
// parameter snapshot, final test metrics under the snapshot (which is left
// installed in the model). Inverse-frequency class weights when
// config().weighted_loss. Non-finite loss raises DivergenceError.
TrainReport train(const AttributedGraph& g, const GraphContext& ctx,
                  HpGcnModel& model, const Splits& splits,
                  const TrainOptions& opts = {});

// Evaluate the model as-is on the given labeled index set.
struct EvalResult {
  Scalar f1 = 0.0;
  Scalar auc = 0.0;
};
EvalResult evaluate(const AttributedGraph& g, const GraphContext& ctx,
                    HpGcnModel& model, std::span<const Index> nodes);

// epoch,loss,val_f1,val_auc rows; stable formatting so reruns byte-match.
void write_report_csv(const std::filesystem::path& path,
                      const TrainReport& report);

}  // namespace hpgcn
