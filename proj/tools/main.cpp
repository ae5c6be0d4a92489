// Command-line front end: stats, synth, train, refine, eval, diagnose.
//
// Conventions shared by every subcommand:
//   - outputs land in --out-dir, or runs/<timestamp>-<command>/ by default;
//     the directory always receives config.txt with the resolved settings
//   - results are also printed as key=value lines for scripting
//   - exit codes: 0 ok, 2 usage or validation, 3 data error, 4 numeric
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "ncd/baselines.hpp"
#include "ncd/checkpoint.hpp"
#include "ncd/dataset.hpp"
#include "ncd/errors.hpp"
#include "ncd/metrics.hpp"
#include "ncd/model.hpp"
#include "ncd/qrefine.hpp"
#include "ncd/synth.hpp"
#include "ncd/trainer.hpp"

namespace fs = std::filesystem;
using namespace ncd;

namespace {

std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

using KvList = std::vector<std::pair<std::string, std::string>>;

void print_kv(const KvList& kv) {
  for (const auto& [k, v] : kv) std::cout << k << '=' << v << '\n';
}

void write_config(const fs::path& dir, const KvList& kv) {
  std::ofstream out(dir / "config.txt");
  if (!out) throw DataError("cannot write " + (dir / "config.txt").string());
  for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
}

// Creates and returns the output directory: the explicit one when given,
// otherwise a fresh runs/<timestamp>-<command>[-n].
fs::path make_run_dir(const std::string& explicit_dir,
                      const std::string& command) {
  if (!explicit_dir.empty()) {
    fs::create_directories(explicit_dir);
    return explicit_dir;
  }
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  localtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y%m%d-%H%M%S", &tm);
  std::string base = std::string("runs/") + stamp + "-" + command;
  std::string candidate = base;
  for (int n = 2; fs::exists(candidate); ++n)
    candidate = base + "-" + std::to_string(n);
  fs::create_directories(candidate);
  return candidate;
}

// ---------------------------------------------------------------- stats ----

struct StatsFlags {
  std::string logs, qmatrix;
  int min_logs = 0;
};

int cmd_stats(const StatsFlags& f) {
  Dataset ds = load_logs(f.logs);
  if (!f.qmatrix.empty()) load_qmatrix(ds, f.qmatrix);
  if (f.min_logs > 0) ds = filter_students(ds, f.min_logs);
  DatasetStats st = compute_stats(ds);
  KvList kv{{"students", std::to_string(st.students)},
            {"exercises", std::to_string(st.exercises)},
            {"concepts", std::to_string(st.concepts)},
            {"logs", std::to_string(st.logs)},
            {"concepts_per_exercise", fmt_g(st.concepts_per_exercise)}};
  if (st.avg_logs) kv.emplace_back("avg_logs_per_concept", fmt_g(*st.avg_logs));
  if (st.std_repeated)
    kv.emplace_back("std_scores_repeated", fmt_g(*st.std_repeated));
  print_kv(kv);
  return 0;
}

// ---------------------------------------------------------------- synth ----

struct SynthFlags {
  SynthSpec spec;
  double drop_rate = 0.0;
  int spurious = 0;
  std::uint64_t inject_seed = 0;
  std::string out_dir;
};

void write_proficiency_csv(const fs::path& path, const Matrix& prof,
                           const IdMaps& maps) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "student_id,concept_id,proficiency\n";
  for (int s = 0; s < prof.rows(); ++s)
    for (int k = 0; k < prof.cols(); ++k)
      out << maps.students.name(s) << ',' << maps.concepts.name(k) << ','
          << fmt_g(prof(s, k)) << '\n';
  if (!out) throw DataError("write failed: " + path.string());
}

void write_candidates_csv(const fs::path& path, const CandidateSets& cand,
                          const IdMaps& maps) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "exercise_id,concept_id,rank\n";
  for (std::size_t e = 0; e < cand.per_exercise.size(); ++e) {
    const auto& list = cand.per_exercise[e];
    for (std::size_t r = 0; r < list.size(); ++r)
      out << maps.exercises.name(static_cast<int>(e)) << ','
          << maps.concepts.name(list[r]) << ',' << r << '\n';
  }
  if (!out) throw DataError("write failed: " + path.string());
}

int cmd_synth(const SynthFlags& f) {
  SynthResult res = generate(f.spec);
  fs::path dir = make_run_dir(f.out_dir, "synth");

  KvList cfg{{"command", "synth"},
             {"students", std::to_string(f.spec.n_students)},
             {"exercises", std::to_string(f.spec.n_exercises)},
             {"concepts", std::to_string(f.spec.n_concepts)},
             {"min_concepts", std::to_string(f.spec.min_concepts_per_exercise)},
             {"max_concepts", std::to_string(f.spec.max_concepts_per_exercise)},
             {"disc_lo", fmt_g(f.spec.disc_lo)},
             {"disc_hi", fmt_g(f.spec.disc_hi)},
             {"guess", fmt_g(f.spec.guess)},
             {"slip", fmt_g(f.spec.slip)},
             {"density", fmt_g(f.spec.density)},
             {"scale", fmt_g(f.spec.scale)},
             {"seed", std::to_string(f.spec.seed)},
             {"drop_rate", fmt_g(f.drop_rate)},
             {"spurious", std::to_string(f.spurious)},
             {"inject_seed", std::to_string(f.inject_seed)}};
  write_config(dir, cfg);

  write_logs((dir / "logs.csv").string(), res.dataset);
  write_proficiency_csv(dir / "true_proficiency.csv", res.true_proficiency,
                        res.dataset.maps);

  if (f.drop_rate > 0.0 || f.spurious > 0) {
    // qmatrix.csv holds the corrupted labels a downstream run would see;
    // the pristine matrix moves to qmatrix_true.csv.
    InjectResult inj =
        inject_candidates(res.dataset.q, f.drop_rate, f.spurious, f.inject_seed);
    Dataset observed = res.dataset;
    observed.q = inj.q_observed;
    write_qmatrix((dir / "qmatrix.csv").string(), observed);
    write_qmatrix((dir / "qmatrix_true.csv").string(), res.dataset);
    write_candidates_csv(dir / "candidates.csv", inj.candidates,
                         res.dataset.maps);
  } else {
    write_qmatrix((dir / "qmatrix.csv").string(), res.dataset);
  }

  double positive = 0;
  for (const ResponseLog& log : res.dataset.logs) positive += log.score;
  KvList kv{{"out_dir", dir.string()},
            {"students", std::to_string(res.dataset.num_students())},
            {"exercises", std::to_string(res.dataset.num_exercises())},
            {"concepts", std::to_string(res.dataset.num_concepts())},
            {"logs", std::to_string(res.dataset.logs.size())},
            {"positive_rate",
             fmt_g(res.dataset.logs.empty()
                       ? 0.0
                       : positive / double(res.dataset.logs.size()))}};
  print_kv(kv);
  return 0;
}

// ------------------------------------------------------------ train/refine --

struct TrainFlags {
  std::string logs, qmatrix, candidates, out_dir;
  std::string model = "neuralcdm";
  std::string variant = "standard";
  TrainConfig cfg;
  double train_fraction = 0.8;
  // The per-student split needs at least one log on each side.
  int min_logs = 2;
  int latent_dim = 0;  // mf factor count; 0 means "use the concept count"
};

void write_history_csv(const fs::path& path, const TrainHistory& h) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "epoch,train_loss,holdout_auc\n";
  for (const EpochStats& e : h.epochs)
    out << e.epoch << ',' << fmt_g(e.train_loss) << ','
        << fmt_g(e.holdout_metric) << '\n';
  if (!out) throw DataError("write failed: " + path.string());
}

// Test metrics that stay printable when the labels cannot support a metric
// (single-class AUC, partial-credit accuracy): failures print as nan.
void append_eval_kv(KvList& kv, const std::string& prefix,
                    const std::vector<double>& pred,
                    const std::vector<ResponseLog>& logs) {
  std::vector<double> label;
  label.reserve(logs.size());
  for (const ResponseLog& log : logs) label.push_back(log.score);
  kv.emplace_back(prefix + "_n", std::to_string(logs.size()));
  kv.emplace_back(prefix + "_rmse", fmt_g(rmse(pred, label)));
  try {
    kv.emplace_back(prefix + "_accuracy", fmt_g(accuracy(pred, label)));
  } catch (const ValidationError&) {
    kv.emplace_back(prefix + "_accuracy", "nan");
  }
  try {
    kv.emplace_back(prefix + "_auc", fmt_g(auc(pred, label)));
  } catch (const ValidationError&) {
    kv.emplace_back(prefix + "_auc", "nan");
  }
}

int cmd_train(const TrainFlags& f, const std::string& command) {
  if (!is_known_family(f.model))
    throw UsageError("unknown model '" + f.model +
                     "' (choose neuralcdm, neuralcdm+, irt, mirt or mf)");
  const bool needs_q =
      f.model == "neuralcdm" || f.model == "neuralcdm+" || f.model == "mirt";
  if (f.model == "neuralcdm+" && f.candidates.empty())
    throw UsageError(
        "--candidates is required for neuralcdm+: the refinement stage needs "
        "per-exercise candidate concepts");
  if (needs_q && f.qmatrix.empty())
    throw UsageError("--qmatrix is required for model '" + f.model + "'");
  ModelVariant variant = ModelVariant::standard;
  if (f.variant == "no_qmatrix") {
    variant = ModelVariant::no_qmatrix;
  } else if (f.variant == "no_monotonicity") {
    variant = ModelVariant::no_monotonicity;
  } else if (f.variant != "standard") {
    throw UsageError("unknown variant '" + f.variant +
                     "' (choose standard, no_qmatrix or no_monotonicity)");
  }
  if (variant != ModelVariant::standard && f.model != "neuralcdm")
    throw UsageError("--variant only applies to the neuralcdm model");

  Dataset ds = load_logs(f.logs);
  if (!f.qmatrix.empty()) load_qmatrix(ds, f.qmatrix);
  CandidateSets cand;
  if (!f.candidates.empty()) cand = load_candidates(ds, f.candidates);
  if (f.min_logs > 0) ds = filter_students(ds, f.min_logs);
  SplitDataset split = split_per_student(ds, f.train_fraction, f.cfg.seed);

  fs::path dir = make_run_dir(f.out_dir, command);
  KvList cfg{{"command", command},
             {"logs", f.logs},
             {"qmatrix", f.qmatrix},
             {"candidates", f.candidates},
             {"model", f.model},
             {"variant", f.variant},
             {"seed", std::to_string(f.cfg.seed)},
             {"epochs", std::to_string(f.cfg.epochs)},
             {"lr", fmt_g(f.cfg.lr)},
             {"batch_size", std::to_string(f.cfg.batch_size)},
             {"h1", std::to_string(f.cfg.h1)},
             {"h2", std::to_string(f.cfg.h2)},
             {"patience", std::to_string(f.cfg.early_stop_patience)},
             {"holdout_fraction", fmt_g(f.cfg.holdout_fraction)},
             {"train_fraction", fmt_g(f.train_fraction)},
             {"min_logs", std::to_string(f.min_logs)},
             {"latent_dim", std::to_string(f.latent_dim)}};
  write_config(dir, cfg);

  {
    Dataset half = ds;
    half.logs = split.train;
    write_logs((dir / "train_logs.csv").string(), half);
    half.logs = split.test;
    write_logs((dir / "test_logs.csv").string(), half);
  }

  const int n_exercises = ds.num_exercises();
  const fs::path ckpt = dir / "checkpoint.txt";
  TrainHistory history;
  std::vector<double> test_pred;

  if (f.model == "neuralcdm") {
    TrainResult res = train(split, ds.q, f.cfg, variant);
    history = res.history;
    save_checkpoint(ckpt.string(), checkpoint_from_model(res.params, ds.maps));
    test_pred = predict(res.params, split.test, ds.q);
  } else if (f.model == "neuralcdm+") {
    TrainPlusResult res = train_plus(split, ds.q, cand, f.cfg);
    history = res.history;
    save_checkpoint(ckpt.string(),
                    checkpoint_from_plus(res.params, res.refined, ds.maps));
    write_refined_q((dir / "refined_q.csv").string(), res.refined, ds.maps);
    test_pred = predict_with_rows(res.params, split.test,
                                  effective_q(res.refined));
  } else if (f.model == "irt") {
    IrtTrainResult res = train_irt(split, n_exercises, f.cfg);
    history = res.history;
    save_checkpoint(ckpt.string(), checkpoint_from_irt(res.params, ds.maps));
    test_pred = predict_irt(res.params, split.test);
  } else if (f.model == "mirt") {
    MirtTrainResult res = train_mirt(split, ds.q, f.cfg);
    history = res.history;
    save_checkpoint(ckpt.string(), checkpoint_from_mirt(res.params, ds.maps));
    test_pred = predict_mirt(res.params, split.test);
  } else if (f.model == "mf") {
    int dim = f.latent_dim > 0 ? f.latent_dim : ds.num_concepts();
    if (dim <= 0)
      throw UsageError(
          "mf needs --latent-dim (or a --qmatrix whose concept count sets it)");
    MfTrainResult res = train_mf(split, n_exercises, dim, f.cfg);
    history = res.history;
    save_checkpoint(ckpt.string(), checkpoint_from_mf(res.params, ds.maps));
    test_pred = predict_mf(res.params, split.test);
  }

  write_history_csv(dir / "history.csv", history);

  KvList kv{{"run_dir", dir.string()},
            {"checkpoint", ckpt.string()},
            {"model", f.model},
            {"train_n", std::to_string(split.train.size())},
            {"epochs_run", std::to_string(history.epochs.size())},
            {"best_epoch", std::to_string(history.best_epoch)},
            {"holdout_metric_name", history.metric_name},
            {"best_holdout_metric", fmt_g(history.best_metric)}};
  append_eval_kv(kv, "test", test_pred, split.test);
  print_kv(kv);
  return 0;
}

// ----------------------------------------------------------------- eval ----

struct EvalFlags {
  std::string checkpoint, logs, qmatrix;
  bool doa = false;
  std::uint64_t seed = 0;
};

// Loads eval logs on top of the checkpoint's id maps so indices line up,
// then rejects ids the trained model has never seen.
Dataset load_aligned(const EvalFlags& f, const Checkpoint& cp) {
  Dataset ds = load_logs(f.logs, cp.maps);
  if (!f.qmatrix.empty()) load_qmatrix(ds, f.qmatrix);
  if (ds.num_students() > cp.n_students)
    throw DataError("logs mention a student missing from the checkpoint: '" +
                    ds.maps.students.name(cp.n_students) + "'");
  if (ds.num_exercises() > cp.n_exercises)
    throw DataError("logs mention an exercise missing from the checkpoint: '" +
                    ds.maps.exercises.name(cp.n_exercises) + "'");
  if (cp.n_concepts > 0 && ds.num_concepts() > cp.n_concepts)
    throw DataError("q-matrix mentions a concept missing from the checkpoint: '" +
                    ds.maps.concepts.name(cp.n_concepts) + "'");
  return ds;
}

int cmd_eval(const EvalFlags& f) {
  Checkpoint cp = load_checkpoint(f.checkpoint);
  const bool diagnostic =
      cp.family == family::kNeuralcdm || cp.family == family::kNeuralcdmPlus;

  if (f.doa && !diagnostic)
    throw UsageError("checkpoint family '" + cp.family +
                     "' has no concept-aligned factors; --doa needs a "
                     "neuralcdm or neuralcdm+ checkpoint");
  if (cp.family == family::kNeuralcdm || cp.family == family::kMirt) {
    if (f.qmatrix.empty())
      throw UsageError("--qmatrix is required to evaluate a '" + cp.family +
                       "' checkpoint");
  }
  if (f.doa && f.qmatrix.empty())
    throw UsageError("--doa needs --qmatrix to know which exercises touch "
                     "each concept");

  Dataset ds = load_aligned(f, cp);

  std::vector<double> pred;
  ModelParams net;
  if (diagnostic) {
    net = model_from_checkpoint(cp);
    if (cp.family == family::kNeuralcdmPlus) {
      pred = predict_with_rows(net, ds.logs,
                               effective_q(refined_from_checkpoint(cp)));
    } else {
      // The Q-matrix rows must cover every exercise in the checkpoint.
      if (ds.q.exercises() < cp.n_exercises)
        throw DataError("q-matrix does not cover the checkpoint's exercises");
      pred = predict(net, ds.logs, ds.q);
    }
  } else if (cp.family == family::kIrt) {
    pred = predict_irt(irt_from_checkpoint(cp), ds.logs);
  } else if (cp.family == family::kMirt) {
    MirtParams p = mirt_from_checkpoint(cp);
    p.q = ds.q;
    pred = predict_mirt(p, ds.logs);
  } else {
    pred = predict_mf(mf_from_checkpoint(cp), ds.logs);
  }

  KvList kv{{"checkpoint", f.checkpoint}, {"family", cp.family}};
  append_eval_kv(kv, "eval", pred, ds.logs);

  if (f.doa) {
    DiagnosisReport report = diagnose(net);
    DoaResult res = doa(report.proficiency, ds.logs, ds.q);
    int informative = 0;
    for (const auto& c : res.per_concept)
      if (c) ++informative;
    Matrix rand_prof = random_proficiency_baseline(cp.n_students,
                                                   cp.n_concepts, f.seed);
    DoaResult rand_res = doa(rand_prof, ds.logs, ds.q);
    kv.emplace_back("doa", fmt_g(res.mean));
    kv.emplace_back("doa_concepts", std::to_string(informative));
    kv.emplace_back("doa_random", fmt_g(rand_res.mean));
  }
  print_kv(kv);
  return 0;
}

// ------------------------------------------------------------- diagnose ----

struct DiagnoseFlags {
  std::string checkpoint, out_dir;
  std::vector<std::string> students, exercises;
};

std::vector<int> resolve_ids(const std::vector<std::string>& names,
                             const IdMap& map, const std::string& what) {
  std::vector<int> out;
  if (names.empty()) {
    out.resize(static_cast<std::size_t>(map.size()));
    for (int i = 0; i < map.size(); ++i) out[static_cast<std::size_t>(i)] = i;
    return out;
  }
  for (const std::string& name : names) {
    auto idx = map.find(name);
    if (!idx) {
      std::string range =
          map.size() > 0
              ? "'" + map.name(0) + "' .. '" + map.name(map.size() - 1) + "'"
              : "(none)";
      throw UsageError("unknown " + what + " id '" + name +
                       "'; the checkpoint has " + std::to_string(map.size()) +
                       " " + what + "s: " + range);
    }
    out.push_back(*idx);
  }
  return out;
}

int cmd_diagnose(const DiagnoseFlags& f) {
  Checkpoint cp = load_checkpoint(f.checkpoint);
  if (cp.family != family::kNeuralcdm && cp.family != family::kNeuralcdmPlus)
    throw UsageError("checkpoint family '" + cp.family +
                     "' has no diagnostic factors; diagnose needs a neuralcdm "
                     "or neuralcdm+ checkpoint");

  std::vector<int> students =
      resolve_ids(f.students, cp.maps.students, "student");
  std::vector<int> exercises =
      resolve_ids(f.exercises, cp.maps.exercises, "exercise");

  DiagnosisReport report = diagnose(model_from_checkpoint(cp));
  fs::path dir = make_run_dir(f.out_dir, "diagnose");
  write_config(dir, {{"command", "diagnose"},
                     {"checkpoint", f.checkpoint},
                     {"students", std::to_string(students.size())},
                     {"exercises", std::to_string(exercises.size())}});

  {
    std::ofstream out(dir / "proficiency.csv");
    if (!out) throw DataError("cannot write proficiency.csv");
    out << "student_id,concept_id,proficiency\n";
    for (int s : students)
      for (int k = 0; k < cp.n_concepts; ++k)
        out << cp.maps.students.name(s) << ',' << cp.maps.concepts.name(k)
            << ',' << fmt_g(report.proficiency(s, k)) << '\n';
  }
  {
    std::ofstream out(dir / "knowledge_difficulty.csv");
    if (!out) throw DataError("cannot write knowledge_difficulty.csv");
    out << "exercise_id,concept_id,knowledge_difficulty\n";
    for (int e : exercises)
      for (int k = 0; k < cp.n_concepts; ++k)
        out << cp.maps.exercises.name(e) << ',' << cp.maps.concepts.name(k)
            << ',' << fmt_g(report.knowledge_difficulty(e, k)) << '\n';
  }
  {
    std::ofstream out(dir / "discrimination.csv");
    if (!out) throw DataError("cannot write discrimination.csv");
    out << "exercise_id,discrimination\n";
    for (int e : exercises)
      out << cp.maps.exercises.name(e) << ','
          << fmt_g(report.discrimination(e, 0)) << '\n';
  }

  print_kv({{"out_dir", dir.string()},
            {"students", std::to_string(students.size())},
            {"exercises", std::to_string(exercises.size())},
            {"concepts", std::to_string(cp.n_concepts)}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Neural cognitive diagnosis toolkit: train diagnostic models on "
      "response logs, refine Q-matrices, and export proficiency reports"};
  app.require_subcommand(1);

  StatsFlags stats_f;
  CLI::App* stats_cmd =
      app.add_subcommand("stats", "Summarize a response-log dataset");
  stats_cmd->add_option("--logs", stats_f.logs, "Response log CSV")->required();
  stats_cmd->add_option("--qmatrix", stats_f.qmatrix,
                        "Exercise-concept label CSV");
  stats_cmd->add_option("--min-logs", stats_f.min_logs,
                        "Drop students with fewer logs (default: keep all)");

  SynthFlags synth_f;
  CLI::App* synth_cmd =
      app.add_subcommand("synth", "Generate a synthetic dataset");
  synth_cmd->add_option("--students", synth_f.spec.n_students, "Student count");
  synth_cmd->add_option("--exercises", synth_f.spec.n_exercises,
                        "Exercise count");
  synth_cmd->add_option("--concepts", synth_f.spec.n_concepts, "Concept count");
  synth_cmd->add_option("--min-concepts", synth_f.spec.min_concepts_per_exercise,
                        "Fewest concepts per exercise");
  synth_cmd->add_option("--max-concepts", synth_f.spec.max_concepts_per_exercise,
                        "Most concepts per exercise");
  synth_cmd->add_option("--disc-lo", synth_f.spec.disc_lo,
                        "Discrimination lower bound");
  synth_cmd->add_option("--disc-hi", synth_f.spec.disc_hi,
                        "Discrimination upper bound");
  synth_cmd->add_option("--guess", synth_f.spec.guess, "Guess probability");
  synth_cmd->add_option("--slip", synth_f.spec.slip, "Slip probability");
  synth_cmd->add_option("--density", synth_f.spec.density,
                        "Fraction of student-exercise pairs answered");
  synth_cmd->add_option("--scale", synth_f.spec.scale, "Logit scale");
  synth_cmd->add_option("--seed", synth_f.spec.seed, "Generator seed");
  synth_cmd->add_option("--drop-rate", synth_f.drop_rate,
                        "Also corrupt the Q-matrix: label drop probability");
  synth_cmd->add_option("--spurious", synth_f.spurious,
                        "Corruption: spurious candidate concepts per exercise");
  synth_cmd->add_option("--inject-seed", synth_f.inject_seed,
                        "Seed for the Q-matrix corruption");
  synth_cmd->add_option("--out-dir", synth_f.out_dir, "Output directory");

  auto add_train_flags = [](CLI::App* cmd, TrainFlags& f, bool with_model) {
    cmd->add_option("--logs", f.logs, "Response log CSV")->required();
    cmd->add_option("--qmatrix", f.qmatrix, "Exercise-concept label CSV");
    cmd->add_option("--candidates", f.candidates,
                    "Candidate concept CSV (exercise_id,concept_id,rank)");
    if (with_model) {
      cmd->add_option("--model", f.model,
                      "neuralcdm | neuralcdm+ | irt | mirt | mf");
      cmd->add_option("--variant", f.variant,
                      "neuralcdm ablation: standard | no_qmatrix | "
                      "no_monotonicity");
    }
    cmd->add_option("--seed", f.cfg.seed, "Training seed");
    cmd->add_option("--epochs", f.cfg.epochs, "Max epochs");
    cmd->add_option("--lr", f.cfg.lr, "Adam learning rate");
    cmd->add_option("--batch-size", f.cfg.batch_size, "Mini-batch size");
    cmd->add_option("--h1", f.cfg.h1, "First hidden width");
    cmd->add_option("--h2", f.cfg.h2, "Second hidden width");
    cmd->add_option("--patience", f.cfg.early_stop_patience,
                    "Early-stop patience in epochs (<=0 disables)");
    cmd->add_option("--holdout-fraction", f.cfg.holdout_fraction,
                    "Share of train logs held out for early stopping");
    cmd->add_option("--train-fraction", f.train_fraction,
                    "Per-student share of logs placed in train");
    cmd->add_option("--min-logs", f.min_logs,
                    "Drop students with fewer logs (default 2: the split "
                    "needs a log on each side)");
    cmd->add_option("--latent-dim", f.latent_dim,
                    "mf only: factor count (default: concept count)");
    cmd->add_option("--out-dir", f.out_dir, "Output directory");
  };

  TrainFlags train_f;
  CLI::App* train_cmd =
      app.add_subcommand("train", "Train a model and write a checkpoint");
  add_train_flags(train_cmd, train_f, true);

  TrainFlags refine_f;
  refine_f.model = "neuralcdm+";
  CLI::App* refine_cmd = app.add_subcommand(
      "refine", "Refine Q-matrix relevancies while training (neuralcdm+)");
  add_train_flags(refine_cmd, refine_f, false);

  EvalFlags eval_f;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "Score a checkpoint against response logs");
  eval_cmd->add_option("--checkpoint", eval_f.checkpoint, "Checkpoint file")
      ->required();
  eval_cmd->add_option("--logs", eval_f.logs, "Response log CSV")->required();
  eval_cmd->add_option("--qmatrix", eval_f.qmatrix,
                       "Exercise-concept label CSV");
  eval_cmd->add_flag("--doa", eval_f.doa,
                     "Also report rank agreement between diagnosed "
                     "proficiency and observed scores");
  eval_cmd->add_option("--seed", eval_f.seed,
                       "Seed for the random-proficiency DOA reference");

  DiagnoseFlags diag_f;
  CLI::App* diag_cmd = app.add_subcommand(
      "diagnose", "Export proficiency and difficulty reports from a checkpoint");
  diag_cmd->add_option("--checkpoint", diag_f.checkpoint, "Checkpoint file")
      ->required();
  diag_cmd->add_option("--students", diag_f.students,
                       "Student ids to report (default: all)")
      ->delimiter(',');
  diag_cmd->add_option("--exercises", diag_f.exercises,
                       "Exercise ids to report (default: all)")
      ->delimiter(',');
  diag_cmd->add_option("--out-dir", diag_f.out_dir, "Output directory");

  try {
    app.parse(argc, argv);
    if (*stats_cmd) return cmd_stats(stats_f);
    if (*synth_cmd) return cmd_synth(synth_f);
    if (*train_cmd) return cmd_train(train_f, "train");
    if (*refine_cmd) return cmd_train(refine_f, "refine");
    if (*eval_cmd) return cmd_eval(eval_f);
    if (*diag_cmd) return cmd_diagnose(diag_f);
    return 2;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
}
