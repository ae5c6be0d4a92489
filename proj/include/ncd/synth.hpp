#ifndef NCD_SYNTH_HPP
#define NCD_SYNTH_HPP

#include <cstdint>
#include <vector>

#include "ncd/dataset.hpp"
#include "ncd/matrix.hpp"
#include "ncd/qrefine.hpp"

namespace ncd {

// Population with known ground truth: proficiencies and per-concept
// difficulties are uniform in (0.05, 0.95), each exercise picks 1..3
// concepts, and responses follow a compensatory rule
//   p = sigmoid(disc_e * mean_{k in Q_e}(theta_sk - diff_ek) * scale)
// sharpened by `scale` and then corrupted by guess/slip noise. Deliberately
// a different family than the diagnostic network, so recovering the truth is
// not self-confirmation.
struct SynthSpec {
  int n_students = 200;
  int n_exercises = 100;
  int n_concepts = 8;
  int min_concepts_per_exercise = 1;
  int max_concepts_per_exercise = 3;
  // High discrimination by default: responses are Bernoulli draws, so the
  // recoverable ordering signal shrinks quickly as disc drops.
  double disc_lo = 0.9;
  double disc_hi = 1.0;
  double guess = 0.0;
  double slip = 0.0;
  // Probability a (student, exercise) pair is answered; 1 = dense logs.
  double density = 1.0;
  double scale = 5.0;
  std::uint64_t seed = 0;
};

struct SynthResult {
  Dataset dataset;
  Matrix true_proficiency;  // N×K, entries in (0,1)
};

// The generating response probability before noise, exposed so the response
// rule itself is testable.
double synth_response_p(std::span<const double> theta_row,
                        std::span<const double> diff_row,
                        const std::vector<int>& concept_ids, double disc,
                        double scale);

SynthResult generate(const SynthSpec& spec);

struct InjectResult {
  QMatrix q_observed;
  CandidateSets candidates;
};

// Simulates a deficient labeling: each true (exercise, concept) entry is
// dropped with probability drop_rate (but a row never loses its last
// concept), and every exercise gets `spurious_per_exercise` random unlabeled
// concepts as distractors. Dropped concepts always reappear in the shuffled
// candidate list, so a refiner has the chance to win them back.
InjectResult inject_candidates(const QMatrix& q_true, double drop_rate,
                               int spurious_per_exercise, std::uint64_t seed);

}  // namespace ncd

#endif  // NCD_SYNTH_HPP
