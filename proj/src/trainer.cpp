#include "ncd/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ncd/adam.hpp"
#include "ncd/errors.hpp"
#include "ncd/metrics.hpp"
#include "ncd/rng.hpp"

namespace ncd {

namespace {

// Substream ids for the independent random decisions of a run.
constexpr std::uint64_t kHoldoutStream = 1;
constexpr std::uint64_t kShuffleStream = 2;

void validate(const TrainConfig& cfg) {
  if (!(cfg.lr > 0.0)) throw ValidationError("train: lr must be positive");
  if (cfg.epochs < 1) throw ValidationError("train: epochs must be >= 1");
  if (cfg.batch_size < 1)
    throw ValidationError("train: batch_size must be >= 1");
  if (cfg.h1 < 1 || cfg.h2 < 1)
    throw ValidationError("train: hidden widths must be >= 1");
  if (cfg.holdout_fraction < 0.0 || cfg.holdout_fraction >= 1.0)
    throw ValidationError("train: holdout_fraction must lie in [0,1)");
}

// Scores the holdout; AUC when both classes are present, accuracy otherwise.
double holdout_score(SgdObjective& obj,
                     const std::vector<ResponseLog>& holdout,
                     std::string& metric_name) {
  std::vector<double> pred, label;
  pred.reserve(holdout.size());
  label.reserve(holdout.size());
  for (const ResponseLog& log : holdout) {
    pred.push_back(obj.predict_one(log));
    label.push_back(log.score);
  }
  bool has_pos = false, has_neg = false;
  for (double r : label) {
    (r >= 0.5 ? has_pos : has_neg) = true;
  }
  if (has_pos && has_neg) {
    metric_name = "auc";
    return auc(pred, label);
  }
  metric_name = "accuracy";
  return accuracy(pred, label);
}

}  // namespace

double SgdObjective::batch_extra_loss_grad(std::size_t) { return 0.0; }

TrainHistory run_sgd(SgdObjective& objective,
                     const std::vector<ResponseLog>& train_logs,
                     const TrainConfig& cfg) {
  validate(cfg);
  if (train_logs.empty()) throw ValidationError("train: empty training set");

  Rng root(cfg.seed);

  // Carve the stopping holdout from the tail of a seeded permutation.
  std::vector<std::size_t> order(train_logs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng holdout_rng = root.stream(kHoldoutStream);
  holdout_rng.shuffle(order);
  auto n_holdout = static_cast<std::size_t>(
      cfg.holdout_fraction * static_cast<double>(train_logs.size()));
  if (train_logs.size() - n_holdout < 1) n_holdout = train_logs.size() - 1;
  std::vector<ResponseLog> sgd_logs, holdout;
  sgd_logs.reserve(train_logs.size() - n_holdout);
  holdout.reserve(n_holdout);
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < order.size() - n_holdout ? sgd_logs : holdout)
        .push_back(train_logs[order[i]]);
  }

  Adam adam(AdamConfig{.lr = cfg.lr},
            std::vector<const Matrix*>(objective.grads()));
  Rng shuffle_rng = root.stream(kShuffleStream);
  std::vector<std::size_t> epoch_order(sgd_logs.size());
  std::iota(epoch_order.begin(), epoch_order.end(), std::size_t{0});

  TrainHistory history;
  std::vector<Matrix> best_snapshot;
  int epochs_since_best = 0;
  const bool early_stopping = cfg.early_stop_patience > 0 && !holdout.empty();

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(epoch_order);
    double epoch_loss = 0.0;
    std::size_t cursor = 0;
    int batch_index = 0;
    while (cursor < epoch_order.size()) {
      std::size_t batch_end = std::min(
          cursor + static_cast<std::size_t>(cfg.batch_size), epoch_order.size());
      objective.zero_grads();
      double batch_loss = 0.0;
      for (std::size_t i = cursor; i < batch_end; ++i) {
        batch_loss += objective.sample_loss_grad(sgd_logs[epoch_order[i]]);
      }
      batch_loss += objective.batch_extra_loss_grad(batch_end - cursor);
      if (!std::isfinite(batch_loss)) {
        throw NumericError("training diverged: non-finite loss at epoch " +
                           std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index));
      }
      auto params = objective.params();
      adam.step(params, objective.grads());
      objective.project();
      epoch_loss += batch_loss;
      cursor = batch_end;
      ++batch_index;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = epoch_loss / static_cast<double>(sgd_logs.size());
    stats.holdout_metric = std::nan("");
    if (!holdout.empty()) {
      stats.holdout_metric =
          holdout_score(objective, holdout, history.metric_name);
      if (!std::isfinite(stats.holdout_metric)) {
        throw NumericError("training diverged: non-finite holdout metric at epoch " +
                           std::to_string(epoch));
      }
    }
    history.epochs.push_back(stats);

    bool improved;
    if (holdout.empty()) {
      improved = true;  // keep the latest parameters
    } else {
      improved = history.best_epoch == 0 ||
                 stats.holdout_metric > history.best_metric;
    }
    if (improved) {
      history.best_epoch = epoch;
      history.best_metric = stats.holdout_metric;
      best_snapshot.clear();
      for (Matrix* p : objective.params()) best_snapshot.push_back(*p);
      epochs_since_best = 0;
    } else {
      ++epochs_since_best;
      if (early_stopping && epochs_since_best >= cfg.early_stop_patience) break;
    }
  }

  auto params = objective.params();
  for (std::size_t i = 0; i < params.size(); ++i) *params[i] = best_snapshot[i];
  return history;
}

int required_students(const SplitDataset& split) {
  int max_student = -1;
  for (const auto* logs : {&split.train, &split.test}) {
    for (const ResponseLog& log : *logs) {
      max_student = std::max(max_student, log.student);
      if (log.student < 0)
        throw ValidationError("train: negative student index");
    }
  }
  return max_student + 1;
}

void check_log_bounds(const std::vector<ResponseLog>& logs, int n_exercises) {
  for (const ResponseLog& log : logs) {
    if (log.exercise < 0 || log.exercise >= n_exercises)
      throw ValidationError("train: exercise index " +
                            std::to_string(log.exercise) +
                            " outside the Q-matrix");
  }
}

}  // namespace ncd
