#ifndef NCD_BASELINES_HPP
#define NCD_BASELINES_HPP

#include <vector>

#include "ncd/dataset.hpp"
#include "ncd/matrix.hpp"
#include "ncd/trainer.hpp"

namespace ncd {

// Unidimensional item response theory: ability, difficulty, and a positive
// per-exercise discrimination.
struct IrtParams {
  Matrix theta;  // N×1
  Matrix beta;   // M×1
  Matrix a;      // M×1, projected > 0 after every optimizer step
};

// sigmoid(a_e * (theta_s - beta_e))
double irt_predict(const IrtParams& p, int s, int e);

// Multidimensional IRT driven by the Q-matrix: one ability per concept, one
// scalar difficulty per exercise.
struct MirtParams {
  Matrix theta;  // N×K
  Matrix d;      // M×1
  QMatrix q;
};

// sigmoid(Q_e · theta_s - d_e)
double mirt_predict(const MirtParams& p, int s, int e);

// Plain latent-factor matrix factorization.
struct MfParams {
  Matrix user;  // N×F
  Matrix item;  // M×F
  // Raw dot products are scores; sigmoid mode turns them into probabilities
  // (the form trained with cross-entropy).
  bool sigmoid_output = true;
};

double mf_predict(const MfParams& p, int s, int e);

// Predictor with the diagnostic network's interaction shape:
//   x = q_row ∘ (hs - hdiff) · hdisc,  y = sigmoid(sum(x))
// i.e. the gated factor interaction followed by an all-ones linear layer and
// the output sigmoid. The reductions below pick embeddings that make this
// reproduce the closed-form baselines, demonstrating that the interaction
// layer subsumes them. Embeddings are raw values, not sigmoid images, so
// unbounded abilities fit too.
struct FrameworkPredictor {
  Matrix hs;      // N×K
  Matrix hdiff;   // M×K
  Matrix hdisc;   // M×1
  Matrix q_rows;  // M×K

  double operator()(int s, int e) const;
};

// K=1, q_row=[1], hs=theta, hdiff=beta, hdisc=a: reproduces irt_predict.
FrameworkPredictor reduce_framework_to_irt(const IrtParams& p);

// hs=theta, hdisc=1, and hdiff spreading d_e uniformly over the exercise's
// concepts so that q_row · hdiff = d_e: reproduces mirt_predict. Exercises
// with no concepts cannot carry a nonzero d_e (ValidationError).
FrameworkPredictor reduce_framework_to_mirt(const MirtParams& p);

struct IrtTrainResult {
  IrtParams params;
  TrainHistory history;
};

struct MirtTrainResult {
  MirtParams params;
  TrainHistory history;
};

struct MfTrainResult {
  MfParams params;
  TrainHistory history;
};

// All three train with the shared mini-batch Adam loop (same holdout and
// early-stopping behavior as the diagnostic model). cfg.h1/h2 are unused.
IrtTrainResult train_irt(const SplitDataset& split, int n_exercises,
                         const TrainConfig& cfg);
MirtTrainResult train_mirt(const SplitDataset& split, const QMatrix& q,
                           const TrainConfig& cfg);
MfTrainResult train_mf(const SplitDataset& split, int n_exercises,
                       int latent_dim, const TrainConfig& cfg);

std::vector<double> predict_irt(const IrtParams& p,
                                const std::vector<ResponseLog>& logs);
std::vector<double> predict_mirt(const MirtParams& p,
                                 const std::vector<ResponseLog>& logs);
std::vector<double> predict_mf(const MfParams& p,
                               const std::vector<ResponseLog>& logs);

}  // namespace ncd

#endif  // NCD_BASELINES_HPP
