#ifndef NCD_QREFINE_HPP
#define NCD_QREFINE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ncd/dataset.hpp"
#include "ncd/matrix.hpp"
#include "ncd/model.hpp"
#include "ncd/trainer.hpp"

namespace ncd {

// Per-exercise candidate concepts proposed by some external ranker, e.g. a
// text classifier over the exercise body. Lists keep the ranker's order and
// are capped at k entries.
struct CandidateSets {
  std::vector<std::vector<int>> per_exercise;
  int k = 20;
};

// Reads `exercise_id,concept_id,rank` CSV. Rows are grouped per exercise and
// sorted by rank ascending; only the k best survive. Exercises must already
// be known to ds.maps (DataError otherwise); unseen concepts extend the map.
CandidateSets load_candidates(Dataset& ds, const std::string& path,
                              int k = 20);

// Trainable relevancy matrix layered over a possibly deficient Q-matrix.
// mask[i][j] = 1 iff concept j is labeled for exercise i or is one of its
// candidates; everywhere else q_tilde is pinned to 0 and never trained.
struct RefinedQ {
  Matrix q_tilde;  // M×K
  Matrix mask;     // M×K, entries 0 or 1
  double lambda = 0.1;
  double sigma = 1.0;
};

// Asserts that labeled concepts outrank unlabeled candidates: for each
// triple, exercise's relevancy for `above` should exceed that for `below`.
struct OrderTriple {
  int exercise = 0;
  int above = 0;
  int below = 0;
};

struct PartialOrderSet {
  std::vector<OrderTriple> triples;
};

// All (i, a, b) with Q[i][a]=1, Q[i][b]=0, b a candidate of i, in (i, a, b)
// lexicographic order.
PartialOrderSet build_partial_orders(const QMatrix& q,
                                     const CandidateSets& cand);

// Binary M×K matrix: union of the Q-matrix labels and the candidate sets.
Matrix build_mask(const QMatrix& q, const CandidateSets& cand);

// ln sigmoid(lambda * (qa - qb)): log-probability that qa outranks qb.
double pairwise_logp(double qa, double qb, double lambda);

// -[ sum over triples of pairwise_logp - sum over all entries of
// q_tilde^2 / (2 sigma^2) ]. The Gaussian prior covers every entry; masked
// ones sit at 0 and contribute nothing.
double refine_neg_log_posterior(const RefinedQ& rq, const PartialOrderSet& dv);

// Gradient of refine_neg_log_posterior w.r.t. q_tilde. Overwrites grad;
// masked-out entries get exactly 0 so they stay frozen.
void refine_posterior_grad(const RefinedQ& rq, const PartialOrderSet& dv,
                           Matrix& grad);

// sigmoid(q_tilde) zeroed where the mask is 0: the relevancy rows the
// diagnostic model consumes in place of binary Q rows.
Matrix effective_q(const RefinedQ& rq);

struct TrainPlusResult {
  ModelParams params;
  RefinedQ refined;
  TrainHistory history;
};

// Joint training: each mini-batch minimizes the diagnostic cross-entropy
// (with q_row = effective_q rows) plus the full refinement negative log
// posterior, the way a weight-decay prior joins every SGD step. W1..3 stay
// clamped non-negative as in the standard model.
TrainPlusResult train_plus(const SplitDataset& split, const QMatrix& q,
                           const CandidateSets& cand, const TrainConfig& cfg);

// Writes `exercise_id,concept_id,relevancy` rows for every masked-in entry,
// using the external IDs from maps.
void write_refined_q(const std::string& path, const RefinedQ& rq,
                     const IdMaps& maps);

}  // namespace ncd

#endif  // NCD_QREFINE_HPP
