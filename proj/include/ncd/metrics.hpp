#ifndef NCD_METRICS_HPP
#define NCD_METRICS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ncd/dataset.hpp"
#include "ncd/matrix.hpp"

namespace ncd {

struct EvalResult {
  double accuracy = 0.0;
  double rmse = 0.0;
  double auc = 0.0;
  long n = 0;
};

// Fraction of predictions whose thresholded class equals the binary label.
// A prediction equal to the threshold counts as positive.
double accuracy(std::span<const double> pred, std::span<const double> label,
                double threshold = 0.5);

double rmse(std::span<const double> pred, std::span<const double> label);

// Rank-based (Mann-Whitney) AUC with midranks for tied predictions; equals
// exhaustive pair counting with ties worth 1/2. Needs both classes present.
double auc(std::span<const double> pred, std::span<const double> label);

EvalResult evaluate(std::span<const double> pred,
                    std::span<const double> label);

struct DoaResult {
  // Per concept: agreement in [0,1], or unset when no student pair is
  // ordered on that concept.
  std::vector<std::optional<double>> per_concept;
  double mean = 0.0;  // over the set concepts only
};

// Rank consistency between diagnosed proficiency and observed performance.
// For each concept k, over ordered student pairs (a,b) with
// proficiency[a][k] > proficiency[b][k]: the pair contributes the fraction of
// concept-k exercises answered by both and scored differently where a's
// (mean) score strictly exceeds b's; pairs with no such exercise contribute
// 0. Normalizing by differing exercises makes an uninformed proficiency
// score ~0.5 instead of drifting with the tie rate. DOA(k) averages the
// contributions over those pairs.
DoaResult doa(const Matrix& proficiency, const std::vector<ResponseLog>& logs,
              const QMatrix& q);

// Uniform (0,1) proficiency matrix: the "random estimation" reference point
// for DOA comparisons.
Matrix random_proficiency_baseline(int n_students, int n_concepts,
                                   std::uint64_t seed);

}  // namespace ncd

#endif  // NCD_METRICS_HPP
