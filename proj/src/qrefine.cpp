#include "ncd/qrefine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <utility>

#include "ncd/csv.hpp"
#include "ncd/errors.hpp"

namespace ncd {

namespace {

void check_shapes(const RefinedQ& rq) {
  if (rq.q_tilde.rows() != rq.mask.rows() ||
      rq.q_tilde.cols() != rq.mask.cols())
    throw ValidationError("refined Q: q_tilde and mask shapes differ");
  if (!(rq.lambda > 0.0)) throw ValidationError("refined Q: lambda must be > 0");
  if (!(rq.sigma > 0.0)) throw ValidationError("refined Q: sigma must be > 0");
}

void check_dims(const QMatrix& q, const CandidateSets& cand) {
  if (static_cast<int>(cand.per_exercise.size()) != q.exercises())
    throw ValidationError("candidates: exercise count mismatch");
  for (const auto& v : cand.per_exercise) {
    for (int b : v) {
      if (b < 0 || b >= q.concepts())
        throw ValidationError("candidates: concept index out of range");
    }
  }
}

}  // namespace

CandidateSets load_candidates(Dataset& ds, const std::string& path, int k) {
  if (k < 1) throw ValidationError("candidates: k must be >= 1");
  CsvReader reader(path, "exercise_id,concept_id,rank");

  struct Entry {
    long rank;
    int concept_id;
  };
  std::vector<std::vector<Entry>> rows(
      static_cast<std::size_t>(ds.num_exercises()));
  std::vector<std::string> fields;
  long line_no = 0;
  while (reader.next(fields, line_no)) {
    if (fields.size() != 3) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": expected 3 fields, got " +
                      std::to_string(fields.size()));
    }
    auto e = ds.maps.exercises.find(fields[0]);
    if (!e) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": unknown exercise '" + fields[0] + "'");
    }
    int c = ds.maps.concepts.add_or_get(fields[1]);
    long rank = parse_csv_long(fields[2], path, line_no, "rank");
    rows[static_cast<std::size_t>(*e)].push_back({rank, c});
  }

  CandidateSets cand;
  cand.k = k;
  cand.per_exercise.resize(rows.size());
  for (std::size_t e = 0; e < rows.size(); ++e) {
    auto& entries = rows[e];
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& a, const Entry& b) {
                       return a.rank < b.rank;
                     });
    auto& out = cand.per_exercise[e];
    for (const Entry& entry : entries) {
      if (std::find(out.begin(), out.end(), entry.concept_id) != out.end()) {
        throw DataError(path + ": exercise '" +
                        ds.maps.exercises.name(static_cast<int>(e)) +
                        "' lists concept '" +
                        ds.maps.concepts.name(entry.concept_id) + "' twice");
      }
      out.push_back(entry.concept_id);
      if (static_cast<int>(out.size()) == k) break;
    }
  }

  // Candidate files may mention concepts the Q-matrix never did; widen the
  // Q-matrix's concept dimension so downstream shapes agree with the maps.
  if (ds.q.exercises() == ds.num_exercises() &&
      ds.num_concepts() > ds.q.concepts()) {
    std::vector<std::pair<int, int>> pairs;
    for (int e = 0; e < ds.q.exercises(); ++e) {
      for (int c : ds.q.row(e)) pairs.emplace_back(e, c);
    }
    ds.q = QMatrix(ds.num_exercises(), ds.num_concepts(), pairs);
  }
  return cand;
}

PartialOrderSet build_partial_orders(const QMatrix& q,
                                     const CandidateSets& cand) {
  check_dims(q, cand);
  PartialOrderSet out;
  std::vector<int> below;
  for (int i = 0; i < q.exercises(); ++i) {
    below.clear();
    for (int b : cand.per_exercise[static_cast<std::size_t>(i)]) {
      if (!q.has(i, b)) below.push_back(b);
    }
    std::sort(below.begin(), below.end());
    for (int a : q.row(i)) {  // rows are stored sorted
      for (int b : below) out.triples.push_back({i, a, b});
    }
  }
  return out;
}

Matrix build_mask(const QMatrix& q, const CandidateSets& cand) {
  check_dims(q, cand);
  Matrix mask(q.exercises(), q.concepts());
  for (int i = 0; i < q.exercises(); ++i) {
    for (int a : q.row(i)) mask(i, a) = 1.0;
    for (int b : cand.per_exercise[static_cast<std::size_t>(i)]) {
      mask(i, b) = 1.0;
    }
  }
  return mask;
}

double pairwise_logp(double qa, double qb, double lambda) {
  if (!(lambda > 0.0)) throw ValidationError("pairwise_logp: lambda must be > 0");
  if (!std::isfinite(qa) || !std::isfinite(qb))
    throw ValidationError("pairwise_logp: non-finite input");
  return log_sigmoid(lambda * (qa - qb));
}

namespace {

void check_triples(const RefinedQ& rq, const PartialOrderSet& dv) {
  for (const OrderTriple& t : dv.triples) {
    if (t.exercise < 0 || t.exercise >= rq.q_tilde.rows() || t.above < 0 ||
        t.above >= rq.q_tilde.cols() || t.below < 0 ||
        t.below >= rq.q_tilde.cols())
      throw ValidationError("partial order triple out of range");
  }
}

}  // namespace

double refine_neg_log_posterior(const RefinedQ& rq,
                                const PartialOrderSet& dv) {
  check_shapes(rq);
  check_triples(rq, dv);
  double pair_term = 0.0;
  for (const OrderTriple& t : dv.triples) {
    pair_term += pairwise_logp(rq.q_tilde(t.exercise, t.above),
                               rq.q_tilde(t.exercise, t.below), rq.lambda);
  }
  double prior = 0.0;
  for (double v : rq.q_tilde.data()) prior += v * v;
  prior /= 2.0 * rq.sigma * rq.sigma;
  return -pair_term + prior;
}

void refine_posterior_grad(const RefinedQ& rq, const PartialOrderSet& dv,
                           Matrix& grad) {
  check_shapes(rq);
  check_triples(rq, dv);
  grad = Matrix(rq.q_tilde.rows(), rq.q_tilde.cols());
  const double inv_var = 1.0 / (rq.sigma * rq.sigma);
  for (int i = 0; i < rq.q_tilde.rows(); ++i) {
    for (int j = 0; j < rq.q_tilde.cols(); ++j) {
      if (rq.mask(i, j) != 0.0) grad(i, j) = rq.q_tilde(i, j) * inv_var;
    }
  }
  for (const OrderTriple& t : dv.triples) {
    double delta = rq.lambda * (rq.q_tilde(t.exercise, t.above) -
                                rq.q_tilde(t.exercise, t.below));
    double slope = rq.lambda * sigmoid(-delta);
    grad(t.exercise, t.above) -= slope;
    grad(t.exercise, t.below) += slope;
  }
}

Matrix effective_q(const RefinedQ& rq) {
  check_shapes(rq);
  Matrix out(rq.q_tilde.rows(), rq.q_tilde.cols());
  for (int i = 0; i < out.rows(); ++i) {
    for (int j = 0; j < out.cols(); ++j) {
      if (rq.mask(i, j) != 0.0) out(i, j) = sigmoid(rq.q_tilde(i, j));
    }
  }
  return out;
}

namespace {

// Joint objective: the diagnostic network fed by sigmoid(q_tilde)∘mask rows,
// plus the refinement posterior added to every mini-batch.
class PlusObjective final : public SgdObjective {
 public:
  PlusObjective(ModelParams& params, RefinedQ& rq, PartialOrderSet orders)
      : p_(params),
        rq_(rq),
        orders_(std::move(orders)),
        grads_(params),
        qt_grad_(rq.q_tilde.rows(), rq.q_tilde.cols()) {
    row_.resize(static_cast<std::size_t>(p_.n_concepts()));
    dq_row_.resize(static_cast<std::size_t>(p_.n_concepts()));
  }

  void zero_grads() override {
    grads_.zero();
    std::fill(qt_grad_.data().begin(), qt_grad_.data().end(), 0.0);
  }

  double sample_loss_grad(const ResponseLog& log) override {
    fill_row(log.exercise);
    forward(p_, log.student, log.exercise, row_, cache_);
    double loss = sample_loss(cache_.y, log.score);
    std::fill(dq_row_.begin(), dq_row_.end(), 0.0);
    backward(p_, cache_, log.score, grads_, dq_row_);
    double* gq = qt_grad_.row(log.exercise);
    for (int j = 0; j < p_.n_concepts(); ++j) {
      double s = row_[static_cast<std::size_t>(j)];  // already masked
      gq[j] += dq_row_[static_cast<std::size_t>(j)] * s * (1.0 - s);
    }
    return loss;
  }

  // The full posterior term joins every mini-batch loss, exactly like a
  // weight-decay prior in step-wise SGD. Scaling it down to once per epoch
  // instead lets the summed cross-entropy gradients overwhelm the ranking
  // prior: labeled-above-candidate orderings then fail to hold on
  // realistically sized data.
  double batch_extra_loss_grad(std::size_t) override {
    refine_posterior_grad(rq_, orders_, posterior_grad_);
    const auto& src = posterior_grad_.data();
    auto& dst = qt_grad_.data();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] += src[i];
    return refine_neg_log_posterior(rq_, orders_);
  }

  std::vector<Matrix*> params() override {
    return {&p_.A,  &p_.B,  &p_.D,  &p_.W1, &p_.b1,
            &p_.W2, &p_.b2, &p_.W3, &p_.b3, &rq_.q_tilde};
  }

  std::vector<const Matrix*> grads() override {
    return {&grads_.A,  &grads_.B,  &grads_.D,  &grads_.W1, &grads_.b1,
            &grads_.W2, &grads_.b2, &grads_.W3, &grads_.b3, &qt_grad_};
  }

  void project() override { clamp_positive(p_); }

  double predict_one(const ResponseLog& log) override {
    fill_row(log.exercise);
    forward(p_, log.student, log.exercise, row_, cache_);
    return cache_.y;
  }

 private:
  void fill_row(int exercise) {
    const double* qt = rq_.q_tilde.row(exercise);
    const double* m = rq_.mask.row(exercise);
    for (int j = 0; j < p_.n_concepts(); ++j) {
      row_[static_cast<std::size_t>(j)] = m[j] == 0.0 ? 0.0 : sigmoid(qt[j]);
    }
  }

  ModelParams& p_;
  RefinedQ& rq_;
  PartialOrderSet orders_;
  ModelGrads grads_;
  Matrix qt_grad_;
  Matrix posterior_grad_;
  std::vector<double> row_;
  std::vector<double> dq_row_;
  ForwardCache cache_;
};

}  // namespace

TrainPlusResult train_plus(const SplitDataset& split, const QMatrix& q,
                           const CandidateSets& cand, const TrainConfig& cfg) {
  if (split.train.empty()) throw ValidationError("train: empty training set");
  check_log_bounds(split.train, q.exercises());
  check_log_bounds(split.test, q.exercises());
  const int n_students = required_students(split);

  TrainPlusResult result;
  // Stream 0 is the same init stream train() uses, so a shared seed starts
  // both trainers from identical network weights.
  Rng init_rng = Rng(cfg.seed).stream(0);
  result.params =
      ModelParams::init(n_students, q.exercises(), q.concepts(), cfg.h1,
                        cfg.h2, init_rng, ModelVariant::standard);
  result.refined.q_tilde = Matrix(q.exercises(), q.concepts());
  result.refined.mask = build_mask(q, cand);

  PlusObjective objective(result.params, result.refined,
                          build_partial_orders(q, cand));
  result.history = run_sgd(objective, split.train, cfg);
  return result;
}

void write_refined_q(const std::string& path, const RefinedQ& rq,
                     const IdMaps& maps) {
  check_shapes(rq);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out.precision(17);
  out << "exercise_id,concept_id,relevancy\n";
  for (int i = 0; i < rq.q_tilde.rows(); ++i) {
    for (int j = 0; j < rq.q_tilde.cols(); ++j) {
      if (rq.mask(i, j) == 0.0) continue;
      out << maps.exercises.name(i) << ',' << maps.concepts.name(j) << ','
          << sigmoid(rq.q_tilde(i, j)) << '\n';
    }
  }
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace ncd
