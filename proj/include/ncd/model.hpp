#ifndef NCD_MODEL_HPP
#define NCD_MODEL_HPP

#include <span>
#include <vector>

#include "ncd/dataset.hpp"
#include "ncd/matrix.hpp"
#include "ncd/rng.hpp"
#include "ncd/trainer.hpp"

namespace ncd {

// standard: Q-matrix rows gate the interaction and W1..3 are clamped >= 0.
// no_qmatrix: relevancies come from a free trainable matrix instead of Q.
// no_monotonicity: the positivity clamp on W1..3 is skipped.
enum class ModelVariant { standard, no_qmatrix, no_monotonicity };

// Student/exercise factor embeddings plus the two hidden interaction layers.
// A: N×K, B: M×K, D: M×1, W1: h1×K, b1: h1×1, W2: h2×h1, b2: h2×1,
// W3: 1×h2, b3: 1×1. q_free (M×K) only participates in the no_qmatrix
// variant and is empty otherwise.
struct ModelParams {
  ModelVariant variant = ModelVariant::standard;
  Matrix A, B, D;
  Matrix W1, b1, W2, b2, W3, b3;
  Matrix q_free;

  int n_students() const { return A.rows(); }
  int n_exercises() const { return B.rows(); }
  int n_concepts() const { return A.cols(); }
  int h1() const { return W1.rows(); }
  int h2() const { return W2.rows(); }

  // Xavier-initialized embeddings and weights, zero biases; the draw order
  // is fixed (A, B, D, W1, W2, W3) so a seed pins the full state.
  static ModelParams init(int n_students, int n_exercises, int n_concepts,
                          int h1, int h2, Rng& rng,
                          ModelVariant variant = ModelVariant::standard);
};

// Activations retained for the backward pass. Buffers are reused across
// calls to keep the hot loop allocation-free.
struct ForwardCache {
  int student = 0;
  int exercise = 0;
  std::vector<double> q_row, hs, hdiff, x, f1, f2;
  double hdisc = 0.0;
  double y = 0.0;
};

// y = sigmoid(W3·f2 + b3), f2 = sigmoid(W2·f1 + b2),
// f1 = sigmoid(W1·x + b1), x = q_row ∘ (h^s − h^diff) · h^disc with
// h^s = sigmoid(A[s]), h^diff = sigmoid(B[e]), h^disc = sigmoid(D[e]).
// q_row comes from the caller: binary Q rows, sigmoid(q_free), or the
// refined effective Q all use this one path.
void forward(const ModelParams& p, int student, int exercise,
             std::span<const double> q_row, ForwardCache& cache);

// Cross-entropy −(r·ln y + (1−r)·ln(1−y)) with y clipped to
// [1e-9, 1−1e-9] before the logs.
double sample_loss(double y, double r);

// Gradient tensors shaped like ModelParams, plus reusable backprop scratch.
struct ModelGrads {
  explicit ModelGrads(const ModelParams& p);
  Matrix A, B, D, W1, b1, W2, b2, W3, b3, q_free;
  void zero();

  std::vector<double> dz1, dz2, dx;  // scratch, sized h1/h2/K
};

// Accumulates the analytic cross-entropy gradients for one sample into g.
// When dq_row is non-empty (length K) it also receives ∂loss/∂q_row, the
// hook through which trainable relevancies get their gradient.
void backward(const ModelParams& p, const ForwardCache& cache, double r,
              ModelGrads& g, std::span<double> dq_row = {});

struct Sample {
  int student = 0;
  int exercise = 0;
  std::vector<double> q_row;
  double r = 0.0;
};

// Summed (not averaged) cross-entropy over the batch.
double loss_batch(const ModelParams& p, const std::vector<Sample>& batch);

// Projects W1..3 onto the non-negative orthant; embeddings and biases are
// untouched. Idempotent.
void clamp_positive(ModelParams& p);

struct TrainResult {
  ModelParams params;
  TrainHistory history;
};

// Trains on split.train with the shared SGD loop (split.test is left for the
// caller to evaluate). Dimensions come from the Q-matrix and the highest
// student index present in the split.
TrainResult train(const SplitDataset& split, const QMatrix& q,
                  const TrainConfig& cfg,
                  ModelVariant variant = ModelVariant::standard);

// Probabilities for each log. Relevancy rows follow the params' variant:
// binary Q rows normally, sigmoid(q_free) for no_qmatrix.
std::vector<double> predict(const ModelParams& p,
                            const std::vector<ResponseLog>& logs,
                            const QMatrix& q);

// Same, with caller-supplied relevancy rows (M×K), e.g. a refined Q.
std::vector<double> predict_with_rows(const ModelParams& p,
                                      const std::vector<ResponseLog>& logs,
                                      const Matrix& q_rows);

// sigmoid(A), sigmoid(B), sigmoid(D): the interpretable factors.
struct DiagnosisReport {
  Matrix proficiency;           // N×K
  Matrix knowledge_difficulty;  // M×K
  Matrix discrimination;        // M×1
};

DiagnosisReport diagnose(const ModelParams& p);

}  // namespace ncd

#endif  // NCD_MODEL_HPP
