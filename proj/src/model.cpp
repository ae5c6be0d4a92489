#include "ncd/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "ncd/errors.hpp"

namespace ncd {

namespace {

constexpr double kClip = 1e-9;
constexpr std::uint64_t kInitStream = 0;

void check_indices(const ModelParams& p, int student, int exercise) {
  if (student < 0 || student >= p.n_students())
    throw ValidationError("model: student index " + std::to_string(student) +
                          " out of range [0," +
                          std::to_string(p.n_students()) + ")");
  if (exercise < 0 || exercise >= p.n_exercises())
    throw ValidationError("model: exercise index " + std::to_string(exercise) +
                          " out of range [0," +
                          std::to_string(p.n_exercises()) + ")");
}

}  // namespace

ModelParams ModelParams::init(int n_students, int n_exercises, int n_concepts,
                              int h1, int h2, Rng& rng, ModelVariant variant) {
  if (n_students < 1 || n_exercises < 1 || n_concepts < 1)
    throw ValidationError("model: counts must be >= 1");
  if (h1 < 1 || h2 < 1)
    throw ValidationError("model: hidden widths must be >= 1");
  ModelParams p;
  p.variant = variant;
  p.A = xavier_init(n_concepts, n_students, rng);
  p.B = xavier_init(n_concepts, n_exercises, rng);
  p.D = xavier_init(1, n_exercises, rng);
  p.W1 = xavier_init(n_concepts, h1, rng);
  p.W2 = xavier_init(h1, h2, rng);
  p.W3 = xavier_init(h2, 1, rng);
  p.b1 = Matrix(h1, 1);
  p.b2 = Matrix(h2, 1);
  p.b3 = Matrix(1, 1);
  if (variant == ModelVariant::no_qmatrix) {
    p.q_free = Matrix(n_exercises, n_concepts);  // sigmoid(0) = 0.5 everywhere
  }
  return p;
}

void forward(const ModelParams& p, int student, int exercise,
             std::span<const double> q_row, ForwardCache& cache) {
  check_indices(p, student, exercise);
  const int K = p.n_concepts();
  if (static_cast<int>(q_row.size()) != K)
    throw ValidationError("model: q_row length does not match concept count");
  const int h1 = p.h1(), h2 = p.h2();

  cache.student = student;
  cache.exercise = exercise;
  cache.q_row.assign(q_row.begin(), q_row.end());
  cache.hs.resize(static_cast<std::size_t>(K));
  cache.hdiff.resize(static_cast<std::size_t>(K));
  cache.x.resize(static_cast<std::size_t>(K));
  cache.f1.resize(static_cast<std::size_t>(h1));
  cache.f2.resize(static_cast<std::size_t>(h2));

  const double* a_row = p.A.row(student);
  const double* b_row = p.B.row(exercise);
  cache.hdisc = sigmoid(p.D(exercise, 0));
  for (int k = 0; k < K; ++k) {
    cache.hs[k] = sigmoid(a_row[k]);
    cache.hdiff[k] = sigmoid(b_row[k]);
    cache.x[k] = q_row[k] * (cache.hs[k] - cache.hdiff[k]) * cache.hdisc;
  }
  for (int i = 0; i < h1; ++i) {
    cache.f1[i] = sigmoid(dot(p.W1.row_span(i), cache.x) + p.b1(i, 0));
  }
  for (int j = 0; j < h2; ++j) {
    cache.f2[j] = sigmoid(dot(p.W2.row_span(j), cache.f1) + p.b2(j, 0));
  }
  cache.y = sigmoid(dot(p.W3.row_span(0), cache.f2) + p.b3(0, 0));
}

double sample_loss(double y, double r) {
  double clipped = std::clamp(y, kClip, 1.0 - kClip);
  return -(r * std::log(clipped) + (1.0 - r) * std::log(1.0 - clipped));
}

ModelGrads::ModelGrads(const ModelParams& p)
    : A(p.A.rows(), p.A.cols()),
      B(p.B.rows(), p.B.cols()),
      D(p.D.rows(), p.D.cols()),
      W1(p.W1.rows(), p.W1.cols()),
      b1(p.b1.rows(), p.b1.cols()),
      W2(p.W2.rows(), p.W2.cols()),
      b2(p.b2.rows(), p.b2.cols()),
      W3(p.W3.rows(), p.W3.cols()),
      b3(p.b3.rows(), p.b3.cols()),
      q_free(p.q_free.rows(), p.q_free.cols()),
      dz1(static_cast<std::size_t>(p.h1())),
      dz2(static_cast<std::size_t>(p.h2())),
      dx(static_cast<std::size_t>(p.n_concepts())) {}

void ModelGrads::zero() {
  A.zero();
  B.zero();
  D.zero();
  W1.zero();
  b1.zero();
  W2.zero();
  b2.zero();
  W3.zero();
  b3.zero();
  q_free.zero();
}

void backward(const ModelParams& p, const ForwardCache& cache, double r,
              ModelGrads& g, std::span<double> dq_row) {
  const int K = p.n_concepts();
  const int h1 = p.h1(), h2 = p.h2();
  const int s = cache.student, e = cache.exercise;

  // Sigmoid output + cross-entropy: gradient at the output pre-activation.
  const double dz3 = cache.y - r;
  {
    double* w3g = g.W3.row(0);
    for (int j = 0; j < h2; ++j) w3g[j] += dz3 * cache.f2[j];
    g.b3(0, 0) += dz3;
  }
  const double* w3 = p.W3.row(0);
  for (int j = 0; j < h2; ++j) {
    g.dz2[j] = dz3 * w3[j] * cache.f2[j] * (1.0 - cache.f2[j]);
  }

  std::fill(g.dz1.begin(), g.dz1.end(), 0.0);
  for (int j = 0; j < h2; ++j) {
    const double d = g.dz2[j];
    g.b2(j, 0) += d;
    double* w2g = g.W2.row(j);
    const double* w2 = p.W2.row(j);
    if (d == 0.0) continue;
    for (int i = 0; i < h1; ++i) {
      w2g[i] += d * cache.f1[i];
      g.dz1[i] += d * w2[i];
    }
  }
  for (int i = 0; i < h1; ++i) {
    g.dz1[i] *= cache.f1[i] * (1.0 - cache.f1[i]);
  }

  std::fill(g.dx.begin(), g.dx.end(), 0.0);
  for (int i = 0; i < h1; ++i) {
    const double d = g.dz1[i];
    g.b1(i, 0) += d;
    double* w1g = g.W1.row(i);
    const double* w1 = p.W1.row(i);
    if (d == 0.0) continue;
    for (int k = 0; k < K; ++k) {
      w1g[k] += d * cache.x[k];
      g.dx[k] += d * w1[k];
    }
  }

  double* ga = g.A.row(s);
  double* gb = g.B.row(e);
  double ddisc = 0.0;
  for (int k = 0; k < K; ++k) {
    const double dxk = g.dx[k];
    const double gap = cache.hs[k] - cache.hdiff[k];
    const double gated = dxk * cache.q_row[k] * cache.hdisc;
    ga[k] += gated * cache.hs[k] * (1.0 - cache.hs[k]);
    gb[k] -= gated * cache.hdiff[k] * (1.0 - cache.hdiff[k]);
    ddisc += dxk * cache.q_row[k] * gap;
    if (!dq_row.empty()) dq_row[k] = dxk * gap * cache.hdisc;
  }
  g.D(e, 0) += ddisc * cache.hdisc * (1.0 - cache.hdisc);
}

double loss_batch(const ModelParams& p, const std::vector<Sample>& batch) {
  if (batch.empty()) throw ValidationError("loss_batch: empty batch");
  ForwardCache cache;
  double total = 0.0;
  for (const Sample& sample : batch) {
    forward(p, sample.student, sample.exercise, sample.q_row, cache);
    total += sample_loss(cache.y, sample.r);
  }
  return total;
}

void clamp_positive(ModelParams& p) {
  for (Matrix* w : {&p.W1, &p.W2, &p.W3}) {
    for (double& v : w->data()) v = std::max(0.0, v);
  }
}

namespace {

// The SGD objective for plain NeuralCDM and its two reduced variants.
class NeuralCdmObjective : public SgdObjective {
 public:
  NeuralCdmObjective(ModelParams& params, const QMatrix& q)
      : p_(params), grads_(params) {
    if (p_.variant != ModelVariant::no_qmatrix) {
      q_rows_.reserve(static_cast<std::size_t>(q.exercises()));
      for (int e = 0; e < q.exercises(); ++e) q_rows_.push_back(q.dense_row(e));
    }
    dq_row_.resize(static_cast<std::size_t>(p_.n_concepts()));
  }

  void zero_grads() override { grads_.zero(); }

  double sample_loss_grad(const ResponseLog& log) override {
    fill_q_row(log.exercise);
    forward(p_, log.student, log.exercise, row_buffer_, cache_);
    double loss = sample_loss(cache_.y, log.score);
    if (p_.variant == ModelVariant::no_qmatrix) {
      backward(p_, cache_, log.score, grads_, dq_row_);
      double* gq = grads_.q_free.row(log.exercise);
      const double* qt = p_.q_free.row(log.exercise);
      for (int k = 0; k < p_.n_concepts(); ++k) {
        double sig = sigmoid(qt[k]);
        gq[k] += dq_row_[k] * sig * (1.0 - sig);
      }
    } else {
      backward(p_, cache_, log.score, grads_);
    }
    return loss;
  }

  std::vector<Matrix*> params() override {
    std::vector<Matrix*> out{&p_.A,  &p_.B,  &p_.D,  &p_.W1, &p_.b1,
                             &p_.W2, &p_.b2, &p_.W3, &p_.b3};
    if (p_.variant == ModelVariant::no_qmatrix) out.push_back(&p_.q_free);
    return out;
  }

  std::vector<const Matrix*> grads() override {
    std::vector<const Matrix*> out{&grads_.A,  &grads_.B,  &grads_.D,
                                   &grads_.W1, &grads_.b1, &grads_.W2,
                                   &grads_.b2, &grads_.W3, &grads_.b3};
    if (p_.variant == ModelVariant::no_qmatrix) out.push_back(&grads_.q_free);
    return out;
  }

  void project() override {
    if (p_.variant != ModelVariant::no_monotonicity) clamp_positive(p_);
  }

  double predict_one(const ResponseLog& log) override {
    fill_q_row(log.exercise);
    forward(p_, log.student, log.exercise, row_buffer_, cache_);
    return cache_.y;
  }

 private:
  void fill_q_row(int exercise) {
    if (p_.variant == ModelVariant::no_qmatrix) {
      const double* qt = p_.q_free.row(exercise);
      row_buffer_.resize(static_cast<std::size_t>(p_.n_concepts()));
      for (int k = 0; k < p_.n_concepts(); ++k) row_buffer_[k] = sigmoid(qt[k]);
    } else {
      row_buffer_ = q_rows_[static_cast<std::size_t>(exercise)];
    }
  }

  ModelParams& p_;
  ModelGrads grads_;
  std::vector<std::vector<double>> q_rows_;
  std::vector<double> row_buffer_;
  std::vector<double> dq_row_;
  ForwardCache cache_;
};

}  // namespace

TrainResult train(const SplitDataset& split, const QMatrix& q,
                  const TrainConfig& cfg, ModelVariant variant) {
  if (split.train.empty()) throw ValidationError("train: empty training set");
  check_log_bounds(split.train, q.exercises());
  check_log_bounds(split.test, q.exercises());
  const int n_students = required_students(split);

  Rng init_rng = Rng(cfg.seed).stream(kInitStream);
  TrainResult result;
  result.params = ModelParams::init(n_students, q.exercises(), q.concepts(),
                                    cfg.h1, cfg.h2, init_rng, variant);
  NeuralCdmObjective objective(result.params, q);
  result.history = run_sgd(objective, split.train, cfg);
  return result;
}

namespace {

std::vector<double> predict_impl(
    const ModelParams& p, const std::vector<ResponseLog>& logs,
    const std::function<std::span<const double>(int)>& row_of) {
  std::vector<double> out;
  out.reserve(logs.size());
  ForwardCache cache;
  for (const ResponseLog& log : logs) {
    forward(p, log.student, log.exercise, row_of(log.exercise), cache);
    out.push_back(cache.y);
  }
  return out;
}

}  // namespace

std::vector<double> predict(const ModelParams& p,
                            const std::vector<ResponseLog>& logs,
                            const QMatrix& q) {
  if (p.variant == ModelVariant::no_qmatrix) {
    std::vector<double> row(static_cast<std::size_t>(p.n_concepts()));
    return predict_impl(p, logs, [&](int e) -> std::span<const double> {
      const double* qt = p.q_free.row(e);
      for (int k = 0; k < p.n_concepts(); ++k) row[k] = sigmoid(qt[k]);
      return row;
    });
  }
  if (q.concepts() != p.n_concepts())
    throw ValidationError("predict: Q-matrix concept count mismatch");
  std::vector<double> row;
  return predict_impl(p, logs, [&](int e) -> std::span<const double> {
    row = q.dense_row(e);
    return row;
  });
}

std::vector<double> predict_with_rows(const ModelParams& p,
                                      const std::vector<ResponseLog>& logs,
                                      const Matrix& q_rows) {
  if (q_rows.rows() != p.n_exercises() || q_rows.cols() != p.n_concepts())
    throw ValidationError("predict: relevancy matrix shape mismatch");
  return predict_impl(p, logs, [&](int e) -> std::span<const double> {
    return q_rows.row_span(e);
  });
}

DiagnosisReport diagnose(const ModelParams& p) {
  DiagnosisReport report;
  report.proficiency = sigmoid(p.A);
  report.knowledge_difficulty = sigmoid(p.B);
  report.discrimination = sigmoid(p.D);
  return report;
}

}  // namespace ncd
