#include "ncd/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "ncd/errors.hpp"
#include "ncd/model.hpp"
#include "ncd/rng.hpp"

namespace ncd {

namespace {

void check_index(int i, int n, const char* what) {
  if (i < 0 || i >= n)
    throw ValidationError(std::string(what) + " index out of range");
}

// Smallest discrimination the projection allows; keeps a strictly positive
// without letting Adam pin it to an exact zero.
constexpr double kMinDisc = 1e-8;

}  // namespace

double irt_predict(const IrtParams& p, int s, int e) {
  check_index(s, p.theta.rows(), "student");
  check_index(e, p.beta.rows(), "exercise");
  return sigmoid(p.a(e, 0) * (p.theta(s, 0) - p.beta(e, 0)));
}

double mirt_predict(const MirtParams& p, int s, int e) {
  check_index(s, p.theta.rows(), "student");
  check_index(e, p.d.rows(), "exercise");
  double logit = -p.d(e, 0);
  for (int k : p.q.row(e)) logit += p.theta(s, k);
  return sigmoid(logit);
}

double mf_predict(const MfParams& p, int s, int e) {
  check_index(s, p.user.rows(), "student");
  check_index(e, p.item.rows(), "exercise");
  double raw = dot(p.user.row_span(s), p.item.row_span(e));
  return p.sigmoid_output ? sigmoid(raw) : raw;
}

double FrameworkPredictor::operator()(int s, int e) const {
  check_index(s, hs.rows(), "student");
  check_index(e, hdiff.rows(), "exercise");
  double sum = 0.0;
  for (int k = 0; k < hs.cols(); ++k) {
    sum += q_rows(e, k) * (hs(s, k) - hdiff(e, k)) * hdisc(e, 0);
  }
  return sigmoid(sum);
}

FrameworkPredictor reduce_framework_to_irt(const IrtParams& p) {
  FrameworkPredictor f;
  f.hs = p.theta;
  f.hdiff = p.beta;
  f.hdisc = p.a;
  f.q_rows = Matrix(p.beta.rows(), 1);
  for (double& v : f.q_rows.data()) v = 1.0;
  return f;
}

FrameworkPredictor reduce_framework_to_mirt(const MirtParams& p) {
  const int m = p.d.rows();
  const int kk = p.theta.cols();
  FrameworkPredictor f;
  f.hs = p.theta;
  f.hdiff = Matrix(m, kk);
  f.hdisc = Matrix(m, 1);
  f.q_rows = Matrix(m, kk);
  for (int e = 0; e < m; ++e) {
    f.hdisc(e, 0) = 1.0;
    const auto& row = p.q.row(e);
    if (row.empty()) {
      if (p.d(e, 0) != 0.0) {
        throw ValidationError(
            "mirt reduction: exercise without concepts cannot carry a "
            "nonzero difficulty");
      }
      continue;
    }
    double share = p.d(e, 0) / static_cast<double>(row.size());
    for (int k : row) {
      f.q_rows(e, k) = 1.0;
      f.hdiff(e, k) = share;
    }
  }
  return f;
}

namespace {

// Shared scaffolding: each family supplies prediction and gradient rules,
// run_sgd supplies batching, holdout scoring, and snapshots.
class IrtObjective final : public SgdObjective {
 public:
  explicit IrtObjective(IrtParams& p)
      : p_(p),
        g_theta_(p.theta.rows(), 1),
        g_beta_(p.beta.rows(), 1),
        g_a_(p.a.rows(), 1) {}

  void zero_grads() override {
    for (Matrix* g : {&g_theta_, &g_beta_, &g_a_}) {
      std::fill(g->data().begin(), g->data().end(), 0.0);
    }
  }

  double sample_loss_grad(const ResponseLog& log) override {
    double y = irt_predict(p_, log.student, log.exercise);
    double dz = y - log.score;
    g_theta_(log.student, 0) += dz * p_.a(log.exercise, 0);
    g_beta_(log.exercise, 0) -= dz * p_.a(log.exercise, 0);
    g_a_(log.exercise, 0) +=
        dz * (p_.theta(log.student, 0) - p_.beta(log.exercise, 0));
    return sample_loss(y, log.score);
  }

  std::vector<Matrix*> params() override {
    return {&p_.theta, &p_.beta, &p_.a};
  }
  std::vector<const Matrix*> grads() override {
    return {&g_theta_, &g_beta_, &g_a_};
  }

  void project() override {
    for (double& v : p_.a.data()) v = std::max(kMinDisc, v);
  }

  double predict_one(const ResponseLog& log) override {
    return irt_predict(p_, log.student, log.exercise);
  }

 private:
  IrtParams& p_;
  Matrix g_theta_, g_beta_, g_a_;
};

class MirtObjective final : public SgdObjective {
 public:
  explicit MirtObjective(MirtParams& p)
      : p_(p),
        g_theta_(p.theta.rows(), p.theta.cols()),
        g_d_(p.d.rows(), 1) {}

  void zero_grads() override {
    std::fill(g_theta_.data().begin(), g_theta_.data().end(), 0.0);
    std::fill(g_d_.data().begin(), g_d_.data().end(), 0.0);
  }

  double sample_loss_grad(const ResponseLog& log) override {
    double y = mirt_predict(p_, log.student, log.exercise);
    double dz = y - log.score;
    for (int k : p_.q.row(log.exercise)) g_theta_(log.student, k) += dz;
    g_d_(log.exercise, 0) -= dz;
    return sample_loss(y, log.score);
  }

  std::vector<Matrix*> params() override { return {&p_.theta, &p_.d}; }
  std::vector<const Matrix*> grads() override { return {&g_theta_, &g_d_}; }

  double predict_one(const ResponseLog& log) override {
    return mirt_predict(p_, log.student, log.exercise);
  }

 private:
  MirtParams& p_;
  Matrix g_theta_, g_d_;
};

class MfObjective final : public SgdObjective {
 public:
  explicit MfObjective(MfParams& p)
      : p_(p),
        g_user_(p.user.rows(), p.user.cols()),
        g_item_(p.item.rows(), p.item.cols()) {}

  void zero_grads() override {
    std::fill(g_user_.data().begin(), g_user_.data().end(), 0.0);
    std::fill(g_item_.data().begin(), g_item_.data().end(), 0.0);
  }

  double sample_loss_grad(const ResponseLog& log) override {
    double y = mf_predict(p_, log.student, log.exercise);
    double dz = y - log.score;
    double* gu = g_user_.row(log.student);
    double* gi = g_item_.row(log.exercise);
    const double* u = p_.user.row(log.student);
    const double* it = p_.item.row(log.exercise);
    for (int f = 0; f < p_.user.cols(); ++f) {
      gu[f] += dz * it[f];
      gi[f] += dz * u[f];
    }
    return sample_loss(y, log.score);
  }

  std::vector<Matrix*> params() override { return {&p_.user, &p_.item}; }
  std::vector<const Matrix*> grads() override { return {&g_user_, &g_item_}; }

  double predict_one(const ResponseLog& log) override {
    return mf_predict(p_, log.student, log.exercise);
  }

 private:
  MfParams& p_;
  Matrix g_user_, g_item_;
};

void fill_normal(Matrix& m, Rng& rng, double stddev) {
  for (double& v : m.data()) v = rng.normal(0.0, stddev);
}

}  // namespace

IrtTrainResult train_irt(const SplitDataset& split, int n_exercises,
                         const TrainConfig& cfg) {
  if (split.train.empty()) throw ValidationError("train: empty training set");
  check_log_bounds(split.train, n_exercises);
  check_log_bounds(split.test, n_exercises);
  const int n_students = required_students(split);

  IrtTrainResult result;
  Rng rng = Rng(cfg.seed).stream(0);
  result.params.theta = Matrix(n_students, 1);
  result.params.beta = Matrix(n_exercises, 1);
  result.params.a = Matrix(n_exercises, 1);
  fill_normal(result.params.theta, rng, 0.1);
  fill_normal(result.params.beta, rng, 0.1);
  for (double& v : result.params.a.data()) v = 1.0;

  IrtObjective objective(result.params);
  result.history = run_sgd(objective, split.train, cfg);
  return result;
}

MirtTrainResult train_mirt(const SplitDataset& split, const QMatrix& q,
                           const TrainConfig& cfg) {
  if (split.train.empty()) throw ValidationError("train: empty training set");
  check_log_bounds(split.train, q.exercises());
  check_log_bounds(split.test, q.exercises());
  const int n_students = required_students(split);

  MirtTrainResult result;
  Rng rng = Rng(cfg.seed).stream(0);
  result.params.theta = Matrix(n_students, q.concepts());
  result.params.d = Matrix(q.exercises(), 1);
  fill_normal(result.params.theta, rng, 0.1);
  fill_normal(result.params.d, rng, 0.1);
  result.params.q = q;

  MirtObjective objective(result.params);
  result.history = run_sgd(objective, split.train, cfg);
  return result;
}

MfTrainResult train_mf(const SplitDataset& split, int n_exercises,
                       int latent_dim, const TrainConfig& cfg) {
  if (split.train.empty()) throw ValidationError("train: empty training set");
  if (latent_dim < 1) throw ValidationError("train: latent_dim must be >= 1");
  check_log_bounds(split.train, n_exercises);
  check_log_bounds(split.test, n_exercises);
  const int n_students = required_students(split);

  MfTrainResult result;
  Rng rng = Rng(cfg.seed).stream(0);
  result.params.user = Matrix(n_students, latent_dim);
  result.params.item = Matrix(n_exercises, latent_dim);
  // Random init is load-bearing here: at zero the two factors would trade
  // zero gradients forever.
  fill_normal(result.params.user, rng, 0.1);
  fill_normal(result.params.item, rng, 0.1);

  MfObjective objective(result.params);
  result.history = run_sgd(objective, split.train, cfg);
  return result;
}

namespace {

template <typename Predict>
std::vector<double> predict_all(const std::vector<ResponseLog>& logs,
                                Predict&& predict) {
  std::vector<double> out;
  out.reserve(logs.size());
  for (const ResponseLog& log : logs) {
    out.push_back(predict(log.student, log.exercise));
  }
  return out;
}

}  // namespace

std::vector<double> predict_irt(const IrtParams& p,
                                const std::vector<ResponseLog>& logs) {
  return predict_all(logs, [&](int s, int e) { return irt_predict(p, s, e); });
}

std::vector<double> predict_mirt(const MirtParams& p,
                                 const std::vector<ResponseLog>& logs) {
  return predict_all(logs,
                     [&](int s, int e) { return mirt_predict(p, s, e); });
}

std::vector<double> predict_mf(const MfParams& p,
                               const std::vector<ResponseLog>& logs) {
  return predict_all(logs, [&](int s, int e) { return mf_predict(p, s, e); });
}

}  // namespace ncd
