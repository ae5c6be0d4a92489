#ifndef NCD_DATASET_HPP
#define NCD_DATASET_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace ncd {

// One graded interaction: student answered exercise and got a score in [0,1].
// Binary scores are the common case; partial credit is allowed.
struct ResponseLog {
  int student = 0;
  int exercise = 0;
  double score = 0.0;
};

// Bidirectional map between external string IDs and dense 0-based indices,
// assigned in order of first appearance.
class IdMap {
 public:
  int add_or_get(const std::string& name);
  std::optional<int> find(const std::string& name) const;
  const std::string& name(int index) const;
  int size() const { return static_cast<int>(names_.size()); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
};

struct IdMaps {
  IdMap students;
  IdMap exercises;
  IdMap concepts;
};

// Exercise-to-concept incidence, stored as sorted concept lists per exercise.
// Entries are strictly binary: present means 1.
class QMatrix {
 public:
  QMatrix() = default;
  QMatrix(int exercises, int concepts,
          const std::vector<std::pair<int, int>>& pairs);

  int exercises() const { return static_cast<int>(rows_.size()); }
  int concepts() const { return concepts_; }
  const std::vector<int>& row(int exercise) const;
  bool has(int exercise, int concept_id) const;
  std::vector<double> dense_row(int exercise) const;
  std::size_t entry_count() const;

 private:
  int concepts_ = 0;
  std::vector<std::vector<int>> rows_;
};

struct Dataset {
  std::vector<ResponseLog> logs;
  QMatrix q;
  IdMaps maps;

  int num_students() const { return maps.students.size(); }
  int num_exercises() const { return maps.exercises.size(); }
  int num_concepts() const { return maps.concepts.size(); }
};

struct SplitDataset {
  std::vector<ResponseLog> train;
  std::vector<ResponseLog> test;
  std::uint64_t seed = 0;
};

// Reads `student_id,exercise_id,score` CSV. Unseen IDs extend the maps in
// first-appearance order. A zero-byte file yields an empty dataset.
Dataset load_logs(const std::string& path, IdMaps maps = {});

// Reads `exercise_id,concept_id` CSV into ds.q, extending the maps with
// exercises/concepts that only the Q-matrix mentions. Duplicated pairs
// collapse to one entry. Every exercise present in ds.logs must end up with
// at least one concept.
void load_qmatrix(Dataset& ds, const std::string& path);

// Writers for the same two formats.
void write_logs(const std::string& path, const Dataset& ds);
void write_qmatrix(const std::string& path, const Dataset& ds);

// Drops students with fewer than min_logs responses and re-densifies student
// indices; exercises and concepts keep their indices.
Dataset filter_students(const Dataset& ds, int min_logs);

// Shuffles each student's logs with a generator keyed by (seed, external
// student id) and puts the first ceil(fraction*n) in train, clamped so both
// sides keep at least one log. Keying by the external id (and canonically
// ordering each student's logs first) makes the split independent of input
// row order.
SplitDataset split_per_student(const Dataset& ds, double train_fraction,
                               std::uint64_t seed);

// Average number of logs per nonzero (student, concept) cell, where a log on
// an exercise with c concepts counts once in each of the c concept cells.
double avg_logs_per_concept(const Dataset& ds);

// Mean over students of the mean population standard deviation of scores in
// (student, concept) cells holding more than one log. Students without such a
// cell are excluded; if nobody qualifies this throws.
double std_scores_repeated(const Dataset& ds);

struct DatasetStats {
  int students = 0;
  int exercises = 0;
  int concepts = 0;
  long logs = 0;
  double concepts_per_exercise = 0.0;
  std::optional<double> avg_logs = {};
  std::optional<double> std_repeated = {};
};

DatasetStats compute_stats(const Dataset& ds);

}  // namespace ncd

#endif  // NCD_DATASET_HPP
