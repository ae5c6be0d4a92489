#include "ncd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "ncd/errors.hpp"
#include "ncd/rng.hpp"

namespace ncd {

namespace {

void require_paired(std::span<const double> pred,
                    std::span<const double> label, const char* what) {
  if (pred.size() != label.size())
    throw ValidationError(std::string(what) + ": length mismatch");
  if (pred.empty()) throw ValidationError(std::string(what) + ": empty input");
}

bool is_positive_label(double label, const char* what) {
  if (label == 1.0) return true;
  if (label == 0.0) return false;
  throw ValidationError(std::string(what) + ": labels must be 0 or 1");
}

}  // namespace

double accuracy(std::span<const double> pred, std::span<const double> label,
                double threshold) {
  require_paired(pred, label, "accuracy");
  long correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    bool predicted = pred[i] >= threshold;
    if (predicted == is_positive_label(label[i], "accuracy")) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(pred.size());
}

double rmse(std::span<const double> pred, std::span<const double> label) {
  require_paired(pred, label, "rmse");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    double d = pred[i] - label[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(pred.size()));
}

double auc(std::span<const double> pred, std::span<const double> label) {
  require_paired(pred, label, "auc");
  const std::size_t n = pred.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return pred[a] < pred[b]; });

  double positive_rank_sum = 0.0;
  long positives = 0, negatives = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && pred[order[j]] == pred[order[i]]) ++j;
    // Midrank of the tie group [i, j); 1-based ranks.
    double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) {
      if (is_positive_label(label[order[t]], "auc")) {
        positive_rank_sum += midrank;
        ++positives;
      } else {
        ++negatives;
      }
    }
    i = j;
  }
  if (positives == 0 || negatives == 0)
    throw ValidationError("auc: needs at least one positive and one negative");
  double p = static_cast<double>(positives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) /
         (p * static_cast<double>(negatives));
}

EvalResult evaluate(std::span<const double> pred,
                    std::span<const double> label) {
  EvalResult result;
  result.accuracy = accuracy(pred, label);
  result.rmse = rmse(pred, label);
  result.auc = auc(pred, label);
  result.n = static_cast<long>(pred.size());
  return result;
}

DoaResult doa(const Matrix& proficiency, const std::vector<ResponseLog>& logs,
              const QMatrix& q) {
  const int n_students = proficiency.rows();
  const int n_concepts = proficiency.cols();
  if (q.concepts() != n_concepts)
    throw ValidationError("doa: proficiency and Q-matrix disagree on concepts");

  // Mean score per (student, exercise); repeated answers collapse to their
  // average.
  std::vector<std::unordered_map<int, std::pair<double, long>>> sums(
      static_cast<std::size_t>(n_students));
  for (const ResponseLog& log : logs) {
    if (log.student < 0 || log.student >= n_students)
      throw ValidationError("doa: student index out of range");
    auto& cell = sums[static_cast<std::size_t>(log.student)][log.exercise];
    cell.first += log.score;
    cell.second += 1;
  }
  std::vector<std::unordered_map<int, double>> mean_score(
      static_cast<std::size_t>(n_students));
  for (int s = 0; s < n_students; ++s) {
    for (auto& [e, cell] : sums[static_cast<std::size_t>(s)]) {
      mean_score[static_cast<std::size_t>(s)][e] =
          cell.first / static_cast<double>(cell.second);
    }
  }

  std::vector<std::vector<int>> exercises_of(
      static_cast<std::size_t>(n_concepts));
  for (int e = 0; e < q.exercises(); ++e) {
    for (int k : q.row(e)) exercises_of[static_cast<std::size_t>(k)].push_back(e);
  }

  DoaResult result;
  result.per_concept.assign(static_cast<std::size_t>(n_concepts), std::nullopt);
  double total = 0.0;
  long set_concepts = 0;
  for (int k = 0; k < n_concepts; ++k) {
    const auto& exercises = exercises_of[static_cast<std::size_t>(k)];
    long ordered_pairs = 0;
    double pair_sum = 0.0;
    for (int a = 0; a < n_students; ++a) {
      for (int b = 0; b < n_students; ++b) {
        if (proficiency(a, k) <= proficiency(b, k)) continue;
        ++ordered_pairs;
        long differing = 0, wins = 0;
        const auto& ma = mean_score[static_cast<std::size_t>(a)];
        const auto& mb = mean_score[static_cast<std::size_t>(b)];
        for (int e : exercises) {
          auto ita = ma.find(e);
          if (ita == ma.end()) continue;
          auto itb = mb.find(e);
          if (itb == mb.end()) continue;
          if (ita->second == itb->second) continue;
          ++differing;
          if (ita->second > itb->second) ++wins;
        }
        if (differing > 0) {
          pair_sum +=
              static_cast<double>(wins) / static_cast<double>(differing);
        }
      }
    }
    if (ordered_pairs > 0) {
      double value = pair_sum / static_cast<double>(ordered_pairs);
      result.per_concept[static_cast<std::size_t>(k)] = value;
      total += value;
      ++set_concepts;
    }
  }
  if (set_concepts == 0)
    throw ValidationError("doa: no concept has an ordered student pair");
  result.mean = total / static_cast<double>(set_concepts);
  return result;
}

Matrix random_proficiency_baseline(int n_students, int n_concepts,
                                   std::uint64_t seed) {
  if (n_students < 0 || n_concepts < 0)
    throw ValidationError("random_proficiency_baseline: negative dimension");
  Rng rng(seed);
  Matrix out(n_students, n_concepts);
  for (double& v : out.data()) v = rng.next_open01();
  return out;
}

}  // namespace ncd
