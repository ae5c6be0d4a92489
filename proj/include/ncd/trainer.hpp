#ifndef NCD_TRAINER_HPP
#define NCD_TRAINER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ncd/dataset.hpp"
#include "ncd/matrix.hpp"

namespace ncd {

struct TrainConfig {
  double lr = 0.002;
  int epochs = 50;
  int batch_size = 32;
  std::uint64_t seed = 0;
  int h1 = 512;
  int h2 = 256;
  // Stop after this many epochs without holdout improvement; <= 0 disables
  // early stopping.
  int early_stop_patience = 5;
  // Share of the training logs carved off for the stopping metric.
  double holdout_fraction = 0.1;
};

struct EpochStats {
  int epoch = 0;          // 1-based
  double train_loss = 0;  // objective total / number of SGD logs
  double holdout_metric = 0;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
  int best_epoch = 0;  // 1-based; 0 when no epoch ran
  double best_metric = 0.0;
  // "auc" normally; "accuracy" when the holdout happens to be single-class;
  // "none" when the holdout is empty.
  std::string metric_name = "none";
};

// One trainable objective as seen by the SGD loop: per-sample gradient
// accumulation, an optional per-batch term, parameter access for Adam, and a
// projection applied after every step.
class SgdObjective {
 public:
  virtual ~SgdObjective() = default;

  virtual void zero_grads() = 0;
  // Accumulates this sample's gradient and returns its loss.
  virtual double sample_loss_grad(const ResponseLog& log) = 0;
  // Extra loss whose gradient is added once per batch (default none).
  virtual double batch_extra_loss_grad(std::size_t batch_size);
  virtual std::vector<Matrix*> params() = 0;
  virtual std::vector<const Matrix*> grads() = 0;
  // Constraint projection applied after every optimizer step.
  virtual void project() {}
  // Probability prediction for holdout scoring.
  virtual double predict_one(const ResponseLog& log) = 0;
};

// Mini-batch Adam over shuffled logs with an internal holdout for early
// stopping. Parameters are restored to the best-scoring epoch before
// returning. Throws NumericError naming the epoch and batch if the objective
// goes non-finite.
TrainHistory run_sgd(SgdObjective& objective,
                     const std::vector<ResponseLog>& train_logs,
                     const TrainConfig& cfg);

// 1 + highest student index over both halves of the split; rejects negative
// indices. Embedding tables are sized from this.
int required_students(const SplitDataset& split);

// Rejects logs whose exercise index falls outside [0, n_exercises).
void check_log_bounds(const std::vector<ResponseLog>& logs, int n_exercises);

}  // namespace ncd

#endif  // NCD_TRAINER_HPP
