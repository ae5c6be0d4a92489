#include "ncd/synth.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "ncd/errors.hpp"
#include "ncd/rng.hpp"

namespace ncd {

namespace {

// Substream ids: structural draws are independent, so e.g. changing the
// noise level never reshuffles the Q-matrix.
constexpr std::uint64_t kThetaStream = 0;
constexpr std::uint64_t kQStream = 1;
constexpr std::uint64_t kExerciseStream = 2;
constexpr std::uint64_t kResponseStream = 3;

void validate(const SynthSpec& s) {
  if (s.n_students < 1 || s.n_exercises < 1 || s.n_concepts < 1)
    throw ValidationError("synth: counts must be >= 1");
  if (s.min_concepts_per_exercise < 1 ||
      s.min_concepts_per_exercise > s.max_concepts_per_exercise ||
      s.max_concepts_per_exercise > s.n_concepts)
    throw ValidationError("synth: concepts-per-exercise range invalid");
  if (!(s.disc_lo > 0.0) || !(s.disc_lo <= s.disc_hi) || s.disc_hi > 1.0)
    throw ValidationError("synth: discrimination range must lie in (0,1]");
  if (s.guess < 0.0 || s.slip < 0.0 || s.guess + s.slip > 1.0)
    throw ValidationError("synth: guess/slip must be >= 0 and sum to <= 1");
  if (!(s.density > 0.0) || s.density > 1.0)
    throw ValidationError("synth: density must lie in (0,1]");
  if (!(s.scale > 0.0)) throw ValidationError("synth: scale must be > 0");
}

// min..max distinct concepts, uniformly, via a partial Fisher-Yates pass.
std::vector<int> pick_concepts(int n_concepts, int lo, int hi, Rng& rng,
                               std::vector<int>& pool) {
  int count = rng.uniform_int(lo, hi);
  for (int i = 0; i < count; ++i) {
    int j = i + static_cast<int>(rng.uniform_below(
                    static_cast<std::uint64_t>(n_concepts - i)));
    std::swap(pool[static_cast<std::size_t>(i)],
              pool[static_cast<std::size_t>(j)]);
  }
  return {pool.begin(), pool.begin() + count};
}

}  // namespace

double synth_response_p(std::span<const double> theta_row,
                        std::span<const double> diff_row,
                        const std::vector<int>& concept_ids, double disc,
                        double scale) {
  if (concept_ids.empty())
    throw ValidationError("synth: exercise with no concepts");
  double gap = 0.0;
  for (int k : concept_ids) {
    gap += theta_row[static_cast<std::size_t>(k)] -
           diff_row[static_cast<std::size_t>(k)];
  }
  gap /= static_cast<double>(concept_ids.size());
  return sigmoid(disc * gap * scale);
}

SynthResult generate(const SynthSpec& spec) {
  validate(spec);
  Rng root(spec.seed);

  SynthResult out;
  out.true_proficiency = Matrix(spec.n_students, spec.n_concepts);
  Rng theta_rng = root.stream(kThetaStream);
  for (double& v : out.true_proficiency.data()) {
    v = theta_rng.uniform(0.05, 0.95);
  }

  Dataset& ds = out.dataset;
  for (int s = 0; s < spec.n_students; ++s)
    ds.maps.students.add_or_get("s" + std::to_string(s));
  for (int e = 0; e < spec.n_exercises; ++e)
    ds.maps.exercises.add_or_get("e" + std::to_string(e));
  for (int k = 0; k < spec.n_concepts; ++k)
    ds.maps.concepts.add_or_get("k" + std::to_string(k));

  Rng q_rng = root.stream(kQStream);
  std::vector<int> pool(static_cast<std::size_t>(spec.n_concepts));
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<std::vector<int>> exercise_concepts;
  std::vector<std::pair<int, int>> pairs;
  exercise_concepts.reserve(static_cast<std::size_t>(spec.n_exercises));
  for (int e = 0; e < spec.n_exercises; ++e) {
    auto picked = pick_concepts(spec.n_concepts, spec.min_concepts_per_exercise,
                                spec.max_concepts_per_exercise, q_rng, pool);
    std::sort(picked.begin(), picked.end());
    for (int k : picked) pairs.emplace_back(e, k);
    exercise_concepts.push_back(std::move(picked));
  }
  ds.q = QMatrix(spec.n_exercises, spec.n_concepts, pairs);

  Rng exercise_rng = root.stream(kExerciseStream);
  Matrix difficulty(spec.n_exercises, spec.n_concepts);
  for (double& v : difficulty.data()) v = exercise_rng.uniform(0.05, 0.95);
  std::vector<double> disc(static_cast<std::size_t>(spec.n_exercises));
  for (double& v : disc) v = exercise_rng.uniform(spec.disc_lo, spec.disc_hi);

  Rng response_rng = root.stream(kResponseStream);
  for (int s = 0; s < spec.n_students; ++s) {
    for (int e = 0; e < spec.n_exercises; ++e) {
      if (spec.density < 1.0 && response_rng.next_double() >= spec.density)
        continue;
      double p = synth_response_p(
          out.true_proficiency.row_span(s), difficulty.row_span(e),
          exercise_concepts[static_cast<std::size_t>(e)],
          disc[static_cast<std::size_t>(e)], spec.scale);
      double p_noisy = spec.guess + (1.0 - spec.guess - spec.slip) * p;
      double score = response_rng.next_double() < p_noisy ? 1.0 : 0.0;
      ds.logs.push_back({s, e, score});
    }
  }
  return out;
}

InjectResult inject_candidates(const QMatrix& q_true, double drop_rate,
                               int spurious_per_exercise, std::uint64_t seed) {
  if (drop_rate < 0.0 || drop_rate > 1.0)
    throw ValidationError("inject_candidates: drop_rate must lie in [0,1]");
  if (spurious_per_exercise < 0)
    throw ValidationError("inject_candidates: spurious count must be >= 0");

  Rng rng(seed);
  const int m = q_true.exercises();
  const int kk = q_true.concepts();
  InjectResult out;
  out.candidates.per_exercise.resize(static_cast<std::size_t>(m));

  std::vector<std::pair<int, int>> kept;
  std::vector<int> dropped, complement;
  for (int e = 0; e < m; ++e) {
    const auto& labeled = q_true.row(e);
    dropped.clear();
    std::vector<int> survivors;
    for (int k : labeled) {
      (rng.next_double() < drop_rate ? dropped : survivors).push_back(k);
    }
    if (survivors.empty() && !labeled.empty()) {
      // Never empty a row: restore one dropped concept at random.
      std::size_t keep = static_cast<std::size_t>(
          rng.uniform_below(dropped.size()));
      survivors.push_back(dropped[keep]);
      dropped.erase(dropped.begin() + static_cast<std::ptrdiff_t>(keep));
    }
    for (int k : survivors) kept.emplace_back(e, k);

    auto& cand = out.candidates.per_exercise[static_cast<std::size_t>(e)];
    cand = dropped;
    complement.clear();
    for (int k = 0; k < kk; ++k) {
      if (!q_true.has(e, k)) complement.push_back(k);
    }
    int want = std::min<int>(spurious_per_exercise,
                             static_cast<int>(complement.size()));
    for (int i = 0; i < want; ++i) {
      int j = i + static_cast<int>(rng.uniform_below(
                      complement.size() - static_cast<std::size_t>(i)));
      std::swap(complement[static_cast<std::size_t>(i)],
                complement[static_cast<std::size_t>(j)]);
      cand.push_back(complement[static_cast<std::size_t>(i)]);
    }
    rng.shuffle(cand);
  }
  out.q_observed = QMatrix(m, kk, kept);
  // Keep the advertised cap truthful even for extreme inputs.
  for (const auto& cand : out.candidates.per_exercise) {
    out.candidates.k = std::max(out.candidates.k, static_cast<int>(cand.size()));
  }
  return out;
}

}  // namespace ncd
