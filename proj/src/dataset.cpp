#include "ncd/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "ncd/csv.hpp"
#include "ncd/errors.hpp"
#include "ncd/rng.hpp"

namespace ncd {

namespace {

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

int IdMap::add_or_get(const std::string& name) {
  auto it = index_.find(name);
  if (it != index_.end()) return it->second;
  int id = static_cast<int>(names_.size());
  names_.push_back(name);
  index_.emplace(name, id);
  return id;
}

std::optional<int> IdMap::find(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::string& IdMap::name(int index) const {
  if (index < 0 || index >= size())
    throw ValidationError("IdMap: index out of range");
  return names_[static_cast<std::size_t>(index)];
}

QMatrix::QMatrix(int exercises, int concepts,
                 const std::vector<std::pair<int, int>>& pairs)
    : concepts_(concepts), rows_(static_cast<std::size_t>(exercises)) {
  if (exercises < 0 || concepts < 0)
    throw ValidationError("QMatrix: negative dimension");
  for (auto [e, k] : pairs) {
    if (e < 0 || e >= exercises || k < 0 || k >= concepts)
      throw ValidationError("QMatrix: entry out of range");
    rows_[static_cast<std::size_t>(e)].push_back(k);
  }
  for (auto& row : rows_) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
}

const std::vector<int>& QMatrix::row(int exercise) const {
  if (exercise < 0 || exercise >= exercises())
    throw ValidationError("QMatrix: exercise out of range");
  return rows_[static_cast<std::size_t>(exercise)];
}

bool QMatrix::has(int exercise, int concept_id) const {
  const auto& r = row(exercise);
  return std::binary_search(r.begin(), r.end(), concept_id);
}

std::vector<double> QMatrix::dense_row(int exercise) const {
  std::vector<double> out(static_cast<std::size_t>(concepts_), 0.0);
  for (int k : row(exercise)) out[static_cast<std::size_t>(k)] = 1.0;
  return out;
}

std::size_t QMatrix::entry_count() const {
  std::size_t n = 0;
  for (const auto& r : rows_) n += r.size();
  return n;
}

Dataset load_logs(const std::string& path, IdMaps maps) {
  CsvReader reader(path, "student_id,exercise_id,score");
  Dataset ds;
  ds.maps = std::move(maps);
  std::vector<std::string> fields;
  long line_no = 0;
  while (reader.next(fields, line_no)) {
    if (fields.size() != 3) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": expected 3 fields, got " +
                      std::to_string(fields.size()));
    }
    double score = parse_csv_double(fields[2], path, line_no, "score");
    if (score < 0.0 || score > 1.0) {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": score " + fields[2] + " outside [0,1]");
    }
    ResponseLog log;
    log.student = ds.maps.students.add_or_get(fields[0]);
    log.exercise = ds.maps.exercises.add_or_get(fields[1]);
    log.score = score;
    ds.logs.push_back(log);
  }
  return ds;
}

void load_qmatrix(Dataset& ds, const std::string& path) {
  CsvReader reader(path, "exercise_id,concept_id");
  std::vector<std::pair<int, int>> pairs;
  std::vector<std::string> fields;
  long line_no = 0;
  while (reader.next(fields, line_no)) {
    if (fields.size() != 2) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": expected 2 fields, got " +
                      std::to_string(fields.size()));
    }
    int e = ds.maps.exercises.add_or_get(fields[0]);
    int k = ds.maps.concepts.add_or_get(fields[1]);
    pairs.emplace_back(e, k);
  }
  ds.q = QMatrix(ds.num_exercises(), ds.num_concepts(), pairs);
  for (const ResponseLog& log : ds.logs) {
    if (ds.q.row(log.exercise).empty()) {
      throw ValidationError("exercise " + ds.maps.exercises.name(log.exercise) +
                            " has no concepts");
    }
  }
}

void write_logs(const std::string& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out.precision(17);
  out << "student_id,exercise_id,score\n";
  for (const ResponseLog& log : ds.logs) {
    out << ds.maps.students.name(log.student) << ','
        << ds.maps.exercises.name(log.exercise) << ',' << log.score << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

void write_qmatrix(const std::string& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "exercise_id,concept_id\n";
  for (int e = 0; e < ds.q.exercises(); ++e) {
    for (int k : ds.q.row(e)) {
      out << ds.maps.exercises.name(e) << ',' << ds.maps.concepts.name(k)
          << '\n';
    }
  }
  if (!out) throw DataError("write failed: " + path);
}

Dataset filter_students(const Dataset& ds, int min_logs) {
  if (min_logs < 0) throw ValidationError("filter_students: min_logs < 0");
  std::vector<long> counts(static_cast<std::size_t>(ds.num_students()), 0);
  for (const ResponseLog& log : ds.logs) ++counts[log.student];

  Dataset out;
  out.q = ds.q;
  out.maps.exercises = ds.maps.exercises;
  out.maps.concepts = ds.maps.concepts;
  std::vector<int> remap(counts.size(), -1);
  for (int s = 0; s < ds.num_students(); ++s) {
    if (counts[static_cast<std::size_t>(s)] >= min_logs) {
      remap[static_cast<std::size_t>(s)] =
          out.maps.students.add_or_get(ds.maps.students.name(s));
    }
  }
  for (const ResponseLog& log : ds.logs) {
    int dense = remap[static_cast<std::size_t>(log.student)];
    if (dense < 0) continue;
    out.logs.push_back({dense, log.exercise, log.score});
  }
  return out;
}

SplitDataset split_per_student(const Dataset& ds, double train_fraction,
                               std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ValidationError("split: train_fraction must lie in (0,1)");

  std::vector<std::vector<ResponseLog>> per_student(
      static_cast<std::size_t>(ds.num_students()));
  for (const ResponseLog& log : ds.logs)
    per_student[static_cast<std::size_t>(log.student)].push_back(log);

  SplitDataset split;
  split.seed = seed;
  Rng root(seed);
  for (int s = 0; s < ds.num_students(); ++s) {
    auto& logs = per_student[static_cast<std::size_t>(s)];
    const std::string& name = ds.maps.students.name(s);
    if (logs.size() < 2) {
      throw ValidationError("split: student " + name +
                            " has fewer than 2 logs");
    }
    // Canonical order first so the shuffle sees the same sequence no matter
    // how the input rows were arranged.
    std::sort(logs.begin(), logs.end(),
              [&](const ResponseLog& a, const ResponseLog& b) {
                const std::string& ea = ds.maps.exercises.name(a.exercise);
                const std::string& eb = ds.maps.exercises.name(b.exercise);
                if (ea != eb) return ea < eb;
                return a.score < b.score;
              });
    Rng rng = root.stream(fnv1a64(name));
    rng.shuffle(logs);

    const auto n = static_cast<long>(logs.size());
    // The subtraction guards against products like 0.7*10 landing a hair
    // above the integer they represent.
    long n_train =
        static_cast<long>(std::ceil(train_fraction * static_cast<double>(n) -
                                    1e-9));
    n_train = std::clamp(n_train, 1L, n - 1);
    for (long i = 0; i < n; ++i) {
      (i < n_train ? split.train : split.test)
          .push_back(logs[static_cast<std::size_t>(i)]);
    }
  }
  return split;
}

namespace {

// Log(i,j): per-student log counts per concept, plus the scores behind each
// cell for the repeated-score statistic.
std::vector<std::vector<std::vector<double>>> scores_by_student_concept(
    const Dataset& ds) {
  std::vector<std::vector<std::vector<double>>> cells(
      static_cast<std::size_t>(ds.num_students()),
      std::vector<std::vector<double>>(
          static_cast<std::size_t>(ds.num_concepts())));
  for (const ResponseLog& log : ds.logs) {
    for (int k : ds.q.row(log.exercise)) {
      cells[static_cast<std::size_t>(log.student)][static_cast<std::size_t>(k)]
          .push_back(log.score);
    }
  }
  return cells;
}

}  // namespace

double avg_logs_per_concept(const Dataset& ds) {
  long long total = 0;
  long long nonzero_cells = 0;
  auto cells = scores_by_student_concept(ds);
  for (const auto& row : cells) {
    for (const auto& cell : row) {
      if (cell.empty()) continue;
      total += static_cast<long long>(cell.size());
      ++nonzero_cells;
    }
  }
  if (nonzero_cells == 0) throw ValidationError("avg_logs_per_concept: no logs");
  return static_cast<double>(total) / static_cast<double>(nonzero_cells);
}

double std_scores_repeated(const Dataset& ds) {
  auto cells = scores_by_student_concept(ds);
  double student_sum = 0.0;
  long students_counted = 0;
  for (const auto& row : cells) {
    double concept_sum = 0.0;
    long concepts_counted = 0;
    for (const auto& cell : row) {
      if (cell.size() < 2) continue;
      double mean = 0.0;
      for (double v : cell) mean += v;
      mean /= static_cast<double>(cell.size());
      double var = 0.0;
      for (double v : cell) var += (v - mean) * (v - mean);
      var /= static_cast<double>(cell.size());  // population variance
      concept_sum += std::sqrt(var);
      ++concepts_counted;
    }
    if (concepts_counted == 0) continue;
    student_sum += concept_sum / static_cast<double>(concepts_counted);
    ++students_counted;
  }
  if (students_counted == 0) {
    throw ValidationError(
        "std_scores_repeated: no (student, concept) cell with more than one "
        "log");
  }
  return student_sum / static_cast<double>(students_counted);
}

DatasetStats compute_stats(const Dataset& ds) {
  DatasetStats stats;
  stats.students = ds.num_students();
  stats.exercises = ds.num_exercises();
  stats.concepts = ds.num_concepts();
  stats.logs = static_cast<long>(ds.logs.size());
  if (ds.q.exercises() > 0) {
    stats.concepts_per_exercise =
        static_cast<double>(ds.q.entry_count()) /
        static_cast<double>(ds.q.exercises());
  }
  try {
    stats.avg_logs = avg_logs_per_concept(ds);
  } catch (const ValidationError&) {
  }
  try {
    stats.std_repeated = std_scores_repeated(ds);
  } catch (const ValidationError&) {
  }
  return stats;
}

}  // namespace ncd
