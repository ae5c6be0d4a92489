#ifndef NCD_CHECKPOINT_HPP
#define NCD_CHECKPOINT_HPP

#include <string>
#include <utility>
#include <vector>

#include "ncd/baselines.hpp"
#include "ncd/dataset.hpp"
#include "ncd/matrix.hpp"
#include "ncd/model.hpp"
#include "ncd/qrefine.hpp"

namespace ncd {

// Model family tags as written into checkpoint files.
namespace family {
inline constexpr const char* kNeuralcdm = "neuralcdm";
inline constexpr const char* kNeuralcdmPlus = "neuralcdm+";
inline constexpr const char* kIrt = "irt";
inline constexpr const char* kMirt = "mirt";
inline constexpr const char* kMf = "mf";
}  // namespace family

bool is_known_family(const std::string& tag);

// One trained model in portable form: the family tag, the dimensions, the
// external-id maps the indices refer to, and the named parameter tensors.
//
// On disk this is a line-oriented text container:
//
//   NEURALCD v1
//   family <tag>
//   dims <N> <M> <K> <h1> <h2>
//   students <N>      followed by N id lines
//   exercises <M>     followed by M id lines
//   concepts <K>      section present only when K > 0
//   <name> <rows> <cols>   followed by <rows> lines of <cols> floats
//   ...
//   end
//
// Floats are written with 17 significant digits, so doubles round-trip
// exactly and identical models produce byte-identical files.
struct Checkpoint {
  std::string family;
  int n_students = 0;
  int n_exercises = 0;
  int n_concepts = 0;
  int h1 = 0;
  int h2 = 0;
  IdMaps maps;
  std::vector<std::pair<std::string, Matrix>> matrices;

  bool has(const std::string& name) const;
  const Matrix& matrix(const std::string& name) const;
};

void save_checkpoint(const std::string& path, const Checkpoint& cp);
Checkpoint load_checkpoint(const std::string& path);

// Assemblers: package trained parameters with the id maps they index into.
Checkpoint checkpoint_from_model(const ModelParams& p, const IdMaps& maps);
Checkpoint checkpoint_from_plus(const ModelParams& p, const RefinedQ& rq,
                                const IdMaps& maps);
Checkpoint checkpoint_from_irt(const IrtParams& p, const IdMaps& maps);
Checkpoint checkpoint_from_mirt(const MirtParams& p, const IdMaps& maps);
Checkpoint checkpoint_from_mf(const MfParams& p, const IdMaps& maps);

// Extractors: rebuild the in-memory parameter structs, validating shapes
// against the dims line. Each requires the matching family tag.
ModelParams model_from_checkpoint(const Checkpoint& cp);
RefinedQ refined_from_checkpoint(const Checkpoint& cp);
IrtParams irt_from_checkpoint(const Checkpoint& cp);
MirtParams mirt_from_checkpoint(const Checkpoint& cp);  // q left for caller
MfParams mf_from_checkpoint(const Checkpoint& cp);

}  // namespace ncd

#endif  // NCD_CHECKPOINT_HPP
