#include "ncd/checkpoint.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ncd/errors.hpp"

namespace ncd {

namespace {

constexpr const char* kMagic = "NEURALCD v1";

void append_double(std::string& out, double v) {
  char buf[32];
  int n = std::snprintf(buf, sizeof(buf), "%.17g", v);
  out.append(buf, static_cast<std::size_t>(n));
}

void append_matrix(std::string& out, const std::string& name, const Matrix& m) {
  out += name;
  out += ' ';
  out += std::to_string(m.rows());
  out += ' ';
  out += std::to_string(m.cols());
  out += '\n';
  for (int r = 0; r < m.rows(); ++r) {
    const double* row = m.row(r);
    for (int c = 0; c < m.cols(); ++c) {
      if (c > 0) out += ' ';
      append_double(out, row[c]);
    }
    out += '\n';
  }
}

void append_ids(std::string& out, const std::string& section, const IdMap& map) {
  out += section;
  out += ' ';
  out += std::to_string(map.size());
  out += '\n';
  for (int i = 0; i < map.size(); ++i) {
    out += map.name(i);
    out += '\n';
  }
}

// Line reader that strips a trailing \r and tracks line numbers for errors.
class LineReader {
 public:
  LineReader(std::istream& in, const std::string& path) : in_(in), path_(path) {}

  bool next(std::string& line) {
    if (!std::getline(in_, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++line_no_;
    return true;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw DataError(path_ + ":" + std::to_string(line_no_) + ": " + msg);
  }

 private:
  std::istream& in_;
  std::string path_;
  long line_no_ = 0;
};

std::vector<std::string> tokens_of(const std::string& line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

int parse_count(const LineReader& rd, const std::string& tok,
                const std::string& label) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || value < 0)
    rd.fail("bad " + label + " '" + tok + "'");
  return value;
}

double parse_double(const LineReader& rd, const std::string& tok) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    rd.fail("bad float '" + tok + "'");
  return value;
}

void read_ids(LineReader& rd, int count, IdMap& map) {
  std::string line;
  for (int i = 0; i < count; ++i) {
    if (!rd.next(line)) rd.fail("truncated id list");
    if (map.add_or_get(line) != i) rd.fail("duplicate id '" + line + "'");
  }
}

Matrix read_matrix(LineReader& rd, int rows, int cols) {
  Matrix m(rows, cols);
  std::string line;
  for (int r = 0; r < rows; ++r) {
    if (!rd.next(line)) rd.fail("truncated matrix");
    auto toks = tokens_of(line);
    if (static_cast<int>(toks.size()) != cols)
      rd.fail("expected " + std::to_string(cols) + " values, got " +
              std::to_string(toks.size()));
    for (int c = 0; c < cols; ++c) m(r, c) = parse_double(rd, toks[c]);
  }
  return m;
}

void require_family(const Checkpoint& cp, const std::string& expected) {
  if (cp.family != expected)
    throw DataError("checkpoint holds a '" + cp.family + "' model, not '" +
                    expected + "'");
}

const Matrix& require_matrix(const Checkpoint& cp, const std::string& name,
                             int rows, int cols) {
  const Matrix& m = cp.matrix(name);
  if (m.rows() != rows || m.cols() != cols)
    throw DataError("checkpoint matrix '" + name + "' is " +
                    std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                    ", expected " + std::to_string(rows) + "x" +
                    std::to_string(cols));
  return m;
}

Checkpoint base_checkpoint(const std::string& family_tag, int n, int m, int k,
                           int h1, int h2, const IdMaps& maps) {
  if (maps.students.size() != n || maps.exercises.size() != m)
    throw ValidationError("checkpoint id maps do not match the model dims");
  if (k > 0 && maps.concepts.size() != k)
    throw ValidationError("checkpoint concept map does not match the model dims");
  Checkpoint cp;
  cp.family = family_tag;
  cp.n_students = n;
  cp.n_exercises = m;
  cp.n_concepts = k;
  cp.h1 = h1;
  cp.h2 = h2;
  cp.maps = maps;
  return cp;
}

void push_network(Checkpoint& cp, const ModelParams& p) {
  cp.matrices.emplace_back("A", p.A);
  cp.matrices.emplace_back("B", p.B);
  cp.matrices.emplace_back("D", p.D);
  cp.matrices.emplace_back("W1", p.W1);
  cp.matrices.emplace_back("b1", p.b1);
  cp.matrices.emplace_back("W2", p.W2);
  cp.matrices.emplace_back("b2", p.b2);
  cp.matrices.emplace_back("W3", p.W3);
  cp.matrices.emplace_back("b3", p.b3);
}

ModelParams network_from(const Checkpoint& cp) {
  ModelParams p;
  p.variant = cp.has("qfree") ? ModelVariant::no_qmatrix : ModelVariant::standard;
  const int n = cp.n_students, m = cp.n_exercises, k = cp.n_concepts;
  p.A = require_matrix(cp, "A", n, k);
  p.B = require_matrix(cp, "B", m, k);
  p.D = require_matrix(cp, "D", m, 1);
  p.W1 = require_matrix(cp, "W1", cp.h1, k);
  p.b1 = require_matrix(cp, "b1", cp.h1, 1);
  p.W2 = require_matrix(cp, "W2", cp.h2, cp.h1);
  p.b2 = require_matrix(cp, "b2", cp.h2, 1);
  p.W3 = require_matrix(cp, "W3", 1, cp.h2);
  p.b3 = require_matrix(cp, "b3", 1, 1);
  if (p.variant == ModelVariant::no_qmatrix)
    p.q_free = require_matrix(cp, "qfree", m, k);
  return p;
}

}  // namespace

bool is_known_family(const std::string& tag) {
  return tag == family::kNeuralcdm || tag == family::kNeuralcdmPlus ||
         tag == family::kIrt || tag == family::kMirt || tag == family::kMf;
}

bool Checkpoint::has(const std::string& name) const {
  for (const auto& [n, m] : matrices)
    if (n == name) return true;
  return false;
}

const Matrix& Checkpoint::matrix(const std::string& name) const {
  for (const auto& [n, m] : matrices)
    if (n == name) return m;
  std::string have;
  for (const auto& [n, m] : matrices) {
    if (!have.empty()) have += ", ";
    have += n;
  }
  throw DataError("checkpoint has no matrix '" + name + "' (has: " + have + ")");
}

void save_checkpoint(const std::string& path, const Checkpoint& cp) {
  std::string out;
  out += kMagic;
  out += '\n';
  out += "family ";
  out += cp.family;
  out += '\n';
  out += "dims " + std::to_string(cp.n_students) + ' ' +
         std::to_string(cp.n_exercises) + ' ' + std::to_string(cp.n_concepts) +
         ' ' + std::to_string(cp.h1) + ' ' + std::to_string(cp.h2) + '\n';
  append_ids(out, "students", cp.maps.students);
  append_ids(out, "exercises", cp.maps.exercises);
  if (cp.n_concepts > 0) append_ids(out, "concepts", cp.maps.concepts);
  for (const auto& [name, m] : cp.matrices) append_matrix(out, name, m);
  out += "end\n";

  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open '" + path + "' for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw DataError("failed writing '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open '" + path + "'");
  LineReader rd(f, path);
  std::string line;

  if (!rd.next(line) || line != kMagic)
    rd.fail(std::string("not a checkpoint (expected '") + kMagic + "')");

  Checkpoint cp;
  if (!rd.next(line)) rd.fail("missing family line");
  auto fam = tokens_of(line);
  if (fam.size() != 2 || fam[0] != "family") rd.fail("missing family line");
  if (!is_known_family(fam[1])) rd.fail("unknown model family '" + fam[1] + "'");
  cp.family = fam[1];

  if (!rd.next(line)) rd.fail("missing dims line");
  auto dims = tokens_of(line);
  if (dims.size() != 6 || dims[0] != "dims") rd.fail("missing dims line");
  cp.n_students = parse_count(rd, dims[1], "student count");
  cp.n_exercises = parse_count(rd, dims[2], "exercise count");
  cp.n_concepts = parse_count(rd, dims[3], "concept count");
  cp.h1 = parse_count(rd, dims[4], "hidden width");
  cp.h2 = parse_count(rd, dims[5], "hidden width");

  bool saw_end = false;
  while (rd.next(line)) {
    if (line == "end") {
      saw_end = true;
      break;
    }
    auto toks = tokens_of(line);
    if (toks.size() == 2 &&
        (toks[0] == "students" || toks[0] == "exercises" || toks[0] == "concepts")) {
      int count = parse_count(rd, toks[1], "id count");
      IdMap& map = toks[0] == "students"    ? cp.maps.students
                   : toks[0] == "exercises" ? cp.maps.exercises
                                            : cp.maps.concepts;
      if (map.size() != 0) rd.fail("duplicate section '" + toks[0] + "'");
      read_ids(rd, count, map);
    } else if (toks.size() == 3) {
      int rows = parse_count(rd, toks[1], "row count");
      int cols = parse_count(rd, toks[2], "column count");
      if (cp.has(toks[0])) rd.fail("duplicate matrix '" + toks[0] + "'");
      cp.matrices.emplace_back(toks[0], read_matrix(rd, rows, cols));
    } else {
      rd.fail("unrecognized line '" + line + "'");
    }
  }
  if (!saw_end) rd.fail("missing end marker (file truncated?)");

  if (cp.maps.students.size() != cp.n_students)
    rd.fail("student id list does not match dims");
  if (cp.maps.exercises.size() != cp.n_exercises)
    rd.fail("exercise id list does not match dims");
  if (cp.maps.concepts.size() != cp.n_concepts)
    rd.fail("concept id list does not match dims");
  return cp;
}

Checkpoint checkpoint_from_model(const ModelParams& p, const IdMaps& maps) {
  Checkpoint cp = base_checkpoint(family::kNeuralcdm, p.n_students(),
                                  p.n_exercises(), p.n_concepts(), p.h1(),
                                  p.h2(), maps);
  push_network(cp, p);
  if (p.variant == ModelVariant::no_qmatrix)
    cp.matrices.emplace_back("qfree", p.q_free);
  return cp;
}

Checkpoint checkpoint_from_plus(const ModelParams& p, const RefinedQ& rq,
                                const IdMaps& maps) {
  if (rq.q_tilde.rows() != p.n_exercises() || rq.q_tilde.cols() != p.n_concepts())
    throw ValidationError("refined Q does not match the model dims");
  Checkpoint cp = base_checkpoint(family::kNeuralcdmPlus, p.n_students(),
                                  p.n_exercises(), p.n_concepts(), p.h1(),
                                  p.h2(), maps);
  push_network(cp, p);
  cp.matrices.emplace_back("Qtilde", rq.q_tilde);
  cp.matrices.emplace_back("mask", rq.mask);
  return cp;
}

Checkpoint checkpoint_from_irt(const IrtParams& p, const IdMaps& maps) {
  Checkpoint cp = base_checkpoint(family::kIrt, p.theta.rows(), p.beta.rows(),
                                  0, 0, 0, maps);
  cp.matrices.emplace_back("theta", p.theta);
  cp.matrices.emplace_back("beta", p.beta);
  cp.matrices.emplace_back("a", p.a);
  return cp;
}

Checkpoint checkpoint_from_mirt(const MirtParams& p, const IdMaps& maps) {
  Checkpoint cp = base_checkpoint(family::kMirt, p.theta.rows(), p.d.rows(),
                                  p.theta.cols(), 0, 0, maps);
  cp.matrices.emplace_back("theta", p.theta);
  cp.matrices.emplace_back("d", p.d);
  return cp;
}

Checkpoint checkpoint_from_mf(const MfParams& p, const IdMaps& maps) {
  Checkpoint cp = base_checkpoint(family::kMf, p.user.rows(), p.item.rows(), 0,
                                  0, 0, maps);
  cp.matrices.emplace_back("user", p.user);
  cp.matrices.emplace_back("item", p.item);
  return cp;
}

ModelParams model_from_checkpoint(const Checkpoint& cp) {
  if (cp.family != family::kNeuralcdm && cp.family != family::kNeuralcdmPlus)
    throw DataError("checkpoint holds a '" + cp.family +
                    "' model, not a diagnostic network");
  return network_from(cp);
}

RefinedQ refined_from_checkpoint(const Checkpoint& cp) {
  require_family(cp, family::kNeuralcdmPlus);
  RefinedQ rq;
  rq.q_tilde = require_matrix(cp, "Qtilde", cp.n_exercises, cp.n_concepts);
  rq.mask = require_matrix(cp, "mask", cp.n_exercises, cp.n_concepts);
  return rq;
}

IrtParams irt_from_checkpoint(const Checkpoint& cp) {
  require_family(cp, family::kIrt);
  IrtParams p;
  p.theta = require_matrix(cp, "theta", cp.n_students, 1);
  p.beta = require_matrix(cp, "beta", cp.n_exercises, 1);
  p.a = require_matrix(cp, "a", cp.n_exercises, 1);
  return p;
}

MirtParams mirt_from_checkpoint(const Checkpoint& cp) {
  require_family(cp, family::kMirt);
  MirtParams p;
  p.theta = require_matrix(cp, "theta", cp.n_students, cp.n_concepts);
  p.d = require_matrix(cp, "d", cp.n_exercises, 1);
  return p;
}

MfParams mf_from_checkpoint(const Checkpoint& cp) {
  require_family(cp, family::kMf);
  const Matrix& user = cp.matrix("user");
  MfParams p;
  p.user = require_matrix(cp, "user", cp.n_students, user.cols());
  p.item = require_matrix(cp, "item", cp.n_exercises, user.cols());
  return p;
}

}  // namespace ncd
