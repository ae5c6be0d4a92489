// Release gate. Each check prints exactly one [PASS]/[FAIL]/[SKIP] line and
// the process exits with the number of failures. Tolerances, seeds, and
// training configs are pinned here on purpose: changing them is a release
// decision, not a refactor. The metric oracles are re-implemented in this
// file from their definitions so they share no code with the library.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ncd/baselines.hpp"
#include "ncd/dataset.hpp"
#include "ncd/errors.hpp"
#include "ncd/gradcheck.hpp"
#include "ncd/matrix.hpp"
#include "ncd/metrics.hpp"
#include "ncd/model.hpp"
#include "ncd/qrefine.hpp"
#include "ncd/rng.hpp"
#include "ncd/synth.hpp"
#include "ncd/trainer.hpp"

namespace fs = std::filesystem;
using namespace ncd;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string strf(const char* fmt, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  return buf;
}

bool report(bool ok, const char* name, const std::string& detail) {
  std::printf("[%s] %s: %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  return ok;
}

// --- criterion 1: analytic gradients vs central finite differences --------

bool criterion_gradients() {
  const double tol = 1e-4;
  const double budget_s = 10.0;
  const auto t0 = Clock::now();
  double worst = 0.0;

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const int n = 4, m = 6, kk = 5, hid1 = 8, hid2 = 4;
    Rng rng(seed * 31 + 7);
    ModelParams params = ModelParams::init(n, m, kk, hid1, hid2, rng);

    // Network tensors against the summed cross entropy.
    std::vector<Sample> batch;
    for (int i = 0; i < 5; ++i) {
      Sample s;
      s.student = static_cast<int>(rng.uniform_below(n));
      s.exercise = static_cast<int>(rng.uniform_below(m));
      s.q_row.resize(kk);
      for (int k = 0; k < kk; ++k) {
        s.q_row[k] = rng.next_double() < 0.4 ? 0.0 : rng.next_double();
      }
      s.r = rng.next_double() < 0.5 ? 0.0 : 1.0;
      batch.push_back(std::move(s));
    }
    ModelGrads grads(params);
    grads.zero();
    ForwardCache cache;
    for (const Sample& s : batch) {
      forward(params, s.student, s.exercise, s.q_row, cache);
      backward(params, cache, s.r, grads);
    }
    const std::vector<std::pair<Matrix ModelParams::*, Matrix ModelGrads::*>>
        tensors{{&ModelParams::A, &ModelGrads::A},
                {&ModelParams::B, &ModelGrads::B},
                {&ModelParams::D, &ModelGrads::D},
                {&ModelParams::W1, &ModelGrads::W1},
                {&ModelParams::b1, &ModelGrads::b1},
                {&ModelParams::W2, &ModelGrads::W2},
                {&ModelParams::b2, &ModelGrads::b2},
                {&ModelParams::W3, &ModelGrads::W3},
                {&ModelParams::b3, &ModelGrads::b3}};
    for (auto [pf, gf] : tensors) {
      auto f = [&](const std::vector<double>& v) {
        ModelParams local = params;
        (local.*pf).data() = v;
        return loss_batch(local, batch);
      };
      std::vector<double> numeric =
          finite_diff_grad(f, (params.*pf).data(), 1e-5);
      worst = std::max(worst, max_rel_error(numeric, (grads.*gf).data()));
    }

    // Joint refinement loss: summed cross entropy through the effective
    // relevancies plus the ranking posterior, differentiated w.r.t. the raw
    // refined entries (chain through the masked sigmoid) and w.r.t. A.
    std::vector<std::pair<int, int>> qpairs;
    std::vector<std::vector<int>> cand_rows(m);
    for (int e = 0; e < m; ++e) {
      std::vector<int> labeled;
      labeled.push_back(static_cast<int>(rng.uniform_below(kk)));
      if (rng.next_double() < 0.5) {
        int extra = static_cast<int>(rng.uniform_below(kk));
        if (extra != labeled[0]) labeled.push_back(extra);
      }
      for (int k : labeled) qpairs.emplace_back(e, k);
      std::vector<int> unlabeled;
      for (int k = 0; k < kk; ++k) {
        if (std::find(labeled.begin(), labeled.end(), k) == labeled.end()) {
          unlabeled.push_back(k);
        }
      }
      cand_rows[e].push_back(
          unlabeled[rng.uniform_below(unlabeled.size())]);
      int second = unlabeled[rng.uniform_below(unlabeled.size())];
      if (second != cand_rows[e][0]) cand_rows[e].push_back(second);
    }
    QMatrix q(m, kk, qpairs);
    CandidateSets cand;
    cand.per_exercise = cand_rows;

    RefinedQ rq;
    rq.mask = build_mask(q, cand);
    rq.q_tilde = Matrix(m, kk);
    for (int e = 0; e < m; ++e) {
      for (int k = 0; k < kk; ++k) {
        if (rq.mask(e, k) != 0.0) rq.q_tilde(e, k) = rng.uniform(-1, 1);
      }
    }
    PartialOrderSet orders = build_partial_orders(q, cand);

    struct Triple {
      int student, exercise;
      double r;
    };
    std::vector<Triple> joint_batch;
    for (int i = 0; i < 5; ++i) {
      joint_batch.push_back({static_cast<int>(rng.uniform_below(n)),
                             static_cast<int>(rng.uniform_below(m)),
                             rng.next_double() < 0.5 ? 0.0 : 1.0});
    }

    Matrix eff = effective_q(rq);
    Matrix gq(m, kk);
    refine_posterior_grad(rq, orders, gq);
    ModelGrads jg(params);
    jg.zero();
    std::vector<double> dq(kk);
    for (const Triple& t : joint_batch) {
      forward(params, t.student, t.exercise, eff.row_span(t.exercise), cache);
      std::fill(dq.begin(), dq.end(), 0.0);
      backward(params, cache, t.r, jg, dq);
      for (int k = 0; k < kk; ++k) {
        // Masked-out cells have eff = 0, so the chain vanishes there, which
        // is exactly the frozen-entry behavior of the trainer.
        gq(t.exercise, k) += dq[k] * eff(t.exercise, k) *
                             (1.0 - eff(t.exercise, k)) * rq.mask(t.exercise, k);
      }
    }

    auto joint_of = [&](const ModelParams& p, const RefinedQ& r) {
      Matrix rows = effective_q(r);
      double total = refine_neg_log_posterior(r, orders);
      ForwardCache c;
      for (const Triple& t : joint_batch) {
        forward(p, t.student, t.exercise, rows.row_span(t.exercise), c);
        total += sample_loss(c.y, t.r);
      }
      return total;
    };
    auto f_qt = [&](const std::vector<double>& v) {
      RefinedQ probe = rq;
      probe.q_tilde.data() = v;
      return joint_of(params, probe);
    };
    std::vector<double> num_qt = finite_diff_grad(f_qt, rq.q_tilde.data(), 1e-5);
    worst = std::max(worst, max_rel_error(num_qt, gq.data()));

    auto f_a = [&](const std::vector<double>& v) {
      ModelParams local = params;
      local.A.data() = v;
      return joint_of(local, rq);
    };
    std::vector<double> num_a = finite_diff_grad(f_a, params.A.data(), 1e-5);
    worst = std::max(worst, max_rel_error(num_a, jg.A.data()));
  }

  const double dt = seconds_since(t0);
  return report(worst <= tol && dt < budget_s, "criterion 1 (gradient correctness)",
                strf("max relative error %.2e (tol %.0e) over 10 seeded configs, "
                     "%.1f s (< %.0f s)",
                     worst, tol, dt, budget_s));
}

// --- criterion 2: response probability non-decreasing in proficiency ------

bool criterion_monotonicity() {
  const double floor_sens = -1e-12;
  const double budget_s = 30.0;
  const auto t0 = Clock::now();

  SynthSpec spec;
  spec.seed = 0;
  SynthResult sr = generate(spec);
  SplitDataset split = split_per_student(sr.dataset, 0.8, 0);
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.batch_size = 32;
  cfg.lr = 0.01;
  cfg.h1 = 64;
  cfg.h2 = 32;
  cfg.early_stop_patience = 0;
  cfg.holdout_fraction = 0.1;
  cfg.seed = 0;
  ModelParams p = train(split, sr.dataset.q, cfg).params;

  Rng probes(123);
  const double h = 1e-4;
  double min_sens = std::numeric_limits<double>::infinity();
  ForwardCache c;
  for (int i = 0; i < 1000; ++i) {
    const int s = static_cast<int>(probes.uniform_below(p.n_students()));
    const int e = static_cast<int>(probes.uniform_below(p.n_exercises()));
    const int k = static_cast<int>(probes.uniform_below(p.n_concepts()));
    const std::vector<double> q_row = sr.dataset.q.dense_row(e);
    const double orig = p.A(s, k);
    p.A(s, k) = orig + h;
    forward(p, s, e, q_row, c);
    const double up = c.y;
    p.A(s, k) = orig - h;
    forward(p, s, e, q_row, c);
    const double dn = c.y;
    p.A(s, k) = orig;
    min_sens = std::min(min_sens, (up - dn) / (2.0 * h));
  }

  const double dt = seconds_since(t0);
  return report(min_sens >= floor_sens && dt < budget_s,
                "criterion 2 (monotonicity)",
                strf("min dy/dA over 1000 probes %.3e (floor %.0e), "
                     "%.1f s (< %.0f s)",
                     min_sens, floor_sens, dt, budget_s));
}

// --- criterion 3: interaction layer reproduces the closed-form baselines --

bool criterion_reductions() {
  const double tol = 1e-9;
  const double budget_s = 5.0;
  const auto t0 = Clock::now();
  double worst = 0.0;
  Rng rng(99);

  for (int inst = 0; inst < 100; ++inst) {
    const int n = 1 + static_cast<int>(rng.uniform_below(5));
    const int m = 1 + static_cast<int>(rng.uniform_below(5));
    IrtParams p;
    p.theta = Matrix(n, 1);
    p.beta = Matrix(m, 1);
    p.a = Matrix(m, 1);
    for (double& v : p.theta.data()) v = rng.uniform(-3, 3);
    for (double& v : p.beta.data()) v = rng.uniform(-3, 3);
    for (double& v : p.a.data()) v = rng.uniform(0.1, 3.0);
    FrameworkPredictor fp = reduce_framework_to_irt(p);
    for (int s = 0; s < n; ++s) {
      for (int e = 0; e < m; ++e) {
        const double closed =
            sigmoid(p.a(e, 0) * (p.theta(s, 0) - p.beta(e, 0)));
        worst = std::max(worst, std::fabs(fp(s, e) - closed));
      }
    }
  }

  for (int inst = 0; inst < 100; ++inst) {
    const int n = 1 + static_cast<int>(rng.uniform_below(4));
    const int m = 1 + static_cast<int>(rng.uniform_below(4));
    const int kk = 1 + static_cast<int>(rng.uniform_below(4));
    std::vector<std::pair<int, int>> pairs;
    for (int e = 0; e < m; ++e) {
      pairs.emplace_back(e, static_cast<int>(rng.uniform_below(kk)));
      if (rng.next_double() < 0.5) {
        pairs.emplace_back(e, static_cast<int>(rng.uniform_below(kk)));
      }
    }
    MirtParams p;
    p.theta = Matrix(n, kk);
    p.d = Matrix(m, 1);
    for (double& v : p.theta.data()) v = rng.uniform(-2, 2);
    for (double& v : p.d.data()) v = rng.uniform(-2, 2);
    p.q = QMatrix(m, kk, pairs);
    FrameworkPredictor fp = reduce_framework_to_mirt(p);
    for (int s = 0; s < n; ++s) {
      for (int e = 0; e < m; ++e) {
        double z = -p.d(e, 0);
        for (int k : p.q.row(e)) z += p.theta(s, k);
        worst = std::max(worst, std::fabs(fp(s, e) - sigmoid(z)));
      }
    }
  }

  const double dt = seconds_since(t0);
  return report(worst <= tol && dt < budget_s,
                "criterion 3 (closed-form reductions)",
                strf("max |framework - closed form| %.2e (tol %.0e) over "
                     "100 + 100 instances, %.1f s (< %.0f s)",
                     worst, tol, dt, budget_s));
}

// --- criterion 4: ranking metrics vs definition-level oracles -------------

double auc_by_pairs(const std::vector<double>& pred,
                    const std::vector<double>& label) {
  long pairs = 0;
  double score = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (label[i] != 1.0) continue;
    for (std::size_t j = 0; j < pred.size(); ++j) {
      if (label[j] != 0.0) continue;
      ++pairs;
      if (pred[i] > pred[j]) {
        score += 1.0;
      } else if (pred[i] == pred[j]) {
        score += 0.5;
      }
    }
  }
  return score / static_cast<double>(pairs);
}

double doa_by_triples(const Matrix& prof, const std::vector<ResponseLog>& logs,
                      const QMatrix& q) {
  const int n = prof.rows(), kk = prof.cols();
  std::vector<std::unordered_map<int, std::pair<double, long>>> acc(n);
  for (const ResponseLog& log : logs) {
    auto& cell = acc[log.student][log.exercise];
    cell.first += log.score;
    cell.second += 1;
  }
  auto score_of = [&](int s, int e) -> std::optional<double> {
    auto it = acc[s].find(e);
    if (it == acc[s].end()) return std::nullopt;
    return it->second.first / static_cast<double>(it->second.second);
  };
  double total = 0.0;
  long concepts = 0;
  for (int k = 0; k < kk; ++k) {
    long z = 0;
    double sum = 0.0;
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        if (!(prof(a, k) > prof(b, k))) continue;
        ++z;
        long differ = 0, win = 0;
        for (int e = 0; e < q.exercises(); ++e) {
          if (!q.has(e, k)) continue;
          auto ra = score_of(a, e), rb = score_of(b, e);
          if (!ra || !rb || *ra == *rb) continue;
          ++differ;
          if (*ra > *rb) ++win;
        }
        if (differ > 0) sum += static_cast<double>(win) / differ;
      }
    }
    if (z > 0) {
      total += sum / static_cast<double>(z);
      ++concepts;
    }
  }
  return total / static_cast<double>(concepts);
}

bool criterion_metric_oracles() {
  int bad = 0;

  Rng rng(1404);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_below(19));
    std::vector<double> pred(n), label(n);
    bool has_pos = false, has_neg = false;
    for (int i = 0; i < n; ++i) {
      // Coarse prediction grid so ties actually occur.
      pred[i] = static_cast<double>(rng.uniform_below(8)) / 8.0;
      label[i] = rng.next_double() < 0.5 ? 0.0 : 1.0;
      (label[i] == 1.0 ? has_pos : has_neg) = true;
    }
    if (!has_pos) label[0] = 1.0;
    if (!has_neg) label[1] = 0.0;
    if (auc(pred, label) != auc_by_pairs(pred, label)) ++bad;
  }

  int done = 0;
  std::uint64_t sub = 0;
  while (done < 20 && sub < 1000) {
    Rng inner(1808 + sub++);
    const int n = 2 + static_cast<int>(inner.uniform_below(9));
    const int m = 1 + static_cast<int>(inner.uniform_below(10));
    const int kk = 1 + static_cast<int>(inner.uniform_below(4));
    std::vector<std::pair<int, int>> pairs;
    for (int e = 0; e < m; ++e) {
      pairs.emplace_back(e, static_cast<int>(inner.uniform_below(kk)));
      if (inner.next_double() < 0.4) {
        pairs.emplace_back(e, static_cast<int>(inner.uniform_below(kk)));
      }
    }
    QMatrix q(m, kk, pairs);
    Matrix prof(n, kk);
    for (double& v : prof.data()) {
      v = static_cast<double>(inner.uniform_below(5)) / 5.0;
    }
    std::vector<ResponseLog> logs;
    for (int s = 0; s < n; ++s) {
      for (int e = 0; e < m; ++e) {
        if (inner.next_double() < 0.3) continue;  // unanswered
        logs.push_back({s, e, inner.next_double() < 0.5 ? 0.0 : 1.0});
        if (inner.next_double() < 0.2) {
          logs.push_back({s, e, inner.next_double() < 0.5 ? 0.0 : 1.0});
        }
      }
    }
    bool any_ordered = false;
    for (int k = 0; k < kk && !any_ordered; ++k) {
      for (int a = 0; a < n && !any_ordered; ++a) {
        for (int b = 0; b < n && !any_ordered; ++b) {
          any_ordered = prof(a, k) > prof(b, k);
        }
      }
    }
    if (!any_ordered || logs.empty()) continue;
    if (doa(prof, logs, q).mean != doa_by_triples(prof, logs, q)) ++bad;
    ++done;
  }

  return report(bad == 0 && done == 20, "criterion 4 (metric oracles)",
                strf("auc vs pair enumeration (50 instances) and doa vs "
                     "triple enumeration (%d instances): %d mismatches, "
                     "exact equality",
                     done, bad));
}

// --- criterion 5: diagnosis recovery on generated populations -------------

bool criterion_synthetic_recovery() {
  const double min_margin = 0.15;
  const double per_seed_budget_s = 600.0;
  double full = 0.0, noq = 0.0, nomono = 0.0, rand_base = 0.0;
  double slowest = 0.0;

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto t0 = Clock::now();
    SynthSpec spec;
    spec.seed = seed;
    SynthResult sr = generate(spec);
    SplitDataset split = split_per_student(sr.dataset, 0.8, seed);
    TrainConfig cfg;
    cfg.epochs = 20;
    cfg.batch_size = 32;
    cfg.lr = 0.01;
    cfg.h1 = 64;
    cfg.h2 = 32;
    cfg.early_stop_patience = 0;
    cfg.holdout_fraction = 0.1;
    cfg.seed = seed;
    // Agreement is measured over the full log set: held-out logs alone are
    // too sparse to order enough student pairs per concept.
    auto doa_of = [&](const ModelParams& p) {
      return doa(diagnose(p).proficiency, sr.dataset.logs, sr.dataset.q).mean;
    };
    full += doa_of(train(split, sr.dataset.q, cfg, ModelVariant::standard).params);
    noq += doa_of(train(split, sr.dataset.q, cfg, ModelVariant::no_qmatrix).params);
    nomono +=
        doa_of(train(split, sr.dataset.q, cfg, ModelVariant::no_monotonicity).params);
    rand_base += doa(random_proficiency_baseline(sr.dataset.num_students(),
                                                 sr.dataset.num_concepts(),
                                                 seed + 1000),
                     sr.dataset.logs, sr.dataset.q)
                     .mean;
    slowest = std::max(slowest, seconds_since(t0));
  }
  full /= 5.0;
  noq /= 5.0;
  nomono /= 5.0;
  rand_base /= 5.0;

  const bool ok = full - rand_base >= min_margin && full > noq &&
                  full > nomono && slowest < per_seed_budget_s;
  return report(ok, "criterion 5 (synthetic recovery)",
                strf("mean doa: full %.3f, no-q %.3f, no-mono %.3f, random "
                     "%.3f; margin %.3f (>= %.2f) and full above both "
                     "variants; slowest seed %.1f s (< %.0f s)",
                     full, noq, nomono, rand_base, full - rand_base,
                     min_margin, slowest, per_seed_budget_s));
}

// --- criterion 6: refinement on a deficient Q-matrix ----------------------

bool criterion_qrefinement() {
  const double budget_s = 900.0;
  const auto t0 = Clock::now();

  SynthSpec spec;
  spec.seed = 0;
  SynthResult sr = generate(spec);
  InjectResult inj = inject_candidates(sr.dataset.q, 0.3, 2, 1);
  SplitDataset split = split_per_student(sr.dataset, 0.8, 0);
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.batch_size = 32;
  cfg.lr = 0.01;
  cfg.h1 = 64;
  cfg.h2 = 32;
  cfg.early_stop_patience = 5;
  cfg.holdout_fraction = 0.1;
  cfg.seed = 0;

  TrainPlusResult plus = train_plus(split, inj.q_observed, inj.candidates, cfg);
  TrainResult corr = train(split, inj.q_observed, cfg);

  PartialOrderSet orders = build_partial_orders(inj.q_observed, inj.candidates);
  long bad = 0;
  for (const OrderTriple& t : orders.triples) {
    if (!(plus.refined.q_tilde(t.exercise, t.above) >
          plus.refined.q_tilde(t.exercise, t.below))) {
      ++bad;
    }
  }

  std::vector<double> label;
  for (const ResponseLog& l : split.test) label.push_back(l.score);
  const double auc_plus = auc(
      predict_with_rows(plus.params, split.test, effective_q(plus.refined)),
      label);
  const double auc_corr =
      auc(predict(corr.params, split.test, inj.q_observed), label);

  const double dt = seconds_since(t0);
  const bool ok = bad == 0 && auc_plus >= auc_corr && dt < budget_s;
  return report(ok, "criterion 6 (q-refinement recovery)",
                strf("labeled-above-candidate triples %ld/%zu ordered; "
                     "held-out auc refined %.4f vs corrupted-q %.4f "
                     "(need >=); %.1f s (< %.0f s)",
                     static_cast<long>(orders.triples.size()) - bad,
                     orders.triples.size(), auc_plus, auc_corr, dt, budget_s));
}

// --- criterion 7: public response-log corpus reproduction -----------------

bool criterion_dataset_reproduction() {
  const double tol = 0.02;
  const double target_acc = 0.719, target_rmse = 0.439, target_auc = 0.749;

  const char* env = std::getenv("NCD_ASSIST_DIR");
  const fs::path dir = env != nullptr ? fs::path(env) : fs::path("data/assist");
  const fs::path logs_path = dir / "logs.csv";
  const fs::path q_path = dir / "qmatrix.csv";
  if (!fs::exists(logs_path) || !fs::exists(q_path)) {
    std::printf("[SKIP] criterion 7 (dataset reproduction): no export at %s "
                "(set NCD_ASSIST_DIR to override); criteria 1-6 constitute "
                "acceptance\n",
                dir.string().c_str());
    std::fflush(stdout);
    return true;
  }

  Dataset ds = load_logs(logs_path.string());
  load_qmatrix(ds, q_path.string());
  Dataset kept = filter_students(ds, 15);

  double acc = 0.0, rm = 0.0, au = 0.0;
  for (std::uint64_t fold = 0; fold < 5; ++fold) {
    SplitDataset split = split_per_student(kept, 0.8, fold);
    TrainConfig cfg;
    cfg.epochs = 30;
    cfg.batch_size = 32;
    cfg.lr = 0.002;
    cfg.h1 = 512;
    cfg.h2 = 256;
    cfg.early_stop_patience = 5;
    cfg.holdout_fraction = 0.1;
    cfg.seed = fold;
    TrainResult tr = train(split, kept.q, cfg);
    std::vector<double> label;
    for (const ResponseLog& l : split.test) label.push_back(l.score);
    EvalResult ev = evaluate(predict(tr.params, split.test, kept.q), label);
    acc += ev.accuracy;
    rm += ev.rmse;
    au += ev.auc;
  }
  acc /= 5.0;
  rm /= 5.0;
  au /= 5.0;

  const bool ok = std::fabs(acc - target_acc) <= tol &&
                  std::fabs(rm - target_rmse) <= tol &&
                  std::fabs(au - target_auc) <= tol;
  return report(ok, "criterion 7 (dataset reproduction)",
                strf("5-fold means accuracy %.3f (target %.3f), rmse %.3f "
                     "(target %.3f), auc %.3f (target %.3f), tol %.2f",
                     acc, target_acc, rm, target_rmse, au, target_auc, tol));
}

// --- criterion 8: byte-identical rerun through the real CLI ---------------

struct RunOut {
  int code = -1;
  std::string out;
};

RunOut run_cli(const std::string& args) {
  const std::string cmd = std::string(NCD_CLI_PATH) + " " + args + " 2>&1";
  RunOut r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[512];
  while (fgets(buf, sizeof buf, pipe) != nullptr) r.out += buf;
  const int status = pclose(pipe);
  if (WIFEXITED(status)) r.code = WEXITSTATUS(status);
  return r;
}

bool criterion_determinism() {
  const fs::path ws =
      fs::temp_directory_path() / ("ncd_accept_" + std::to_string(getpid()));
  fs::create_directories(ws);
  const std::string data = (ws / "data").string();

  RunOut gen = run_cli("synth --students 30 --exercises 20 --concepts 3 "
                       "--seed 6 --out-dir " + data);
  const std::string train_args =
      "train --logs " + data + "/logs.csv --qmatrix " + data +
      "/qmatrix.csv --model neuralcdm --epochs 4 --h1 16 --h2 8 --lr 0.01 "
      "--batch-size 32 --seed 2 --out-dir ";
  RunOut r1 = run_cli(train_args + (ws / "r1").string());
  RunOut r2 = run_cli(train_args + (ws / "r2").string());

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string c1 = slurp(ws / "r1" / "checkpoint.txt");
  const std::string c2 = slurp(ws / "r2" / "checkpoint.txt");
  fs::remove_all(ws);

  const bool ran = gen.code == 0 && r1.code == 0 && r2.code == 0;
  const bool ok = ran && !c1.empty() && c1 == c2;
  return report(ok, "criterion 8 (determinism)",
                ok ? strf("identical train rerun produced a byte-identical "
                          "checkpoint (%zu bytes)",
                          c1.size())
                   : strf("cli exit codes %d/%d/%d, checkpoints %s", gen.code,
                          r1.code, r2.code,
                          c1 == c2 ? "equal" : "differ or missing"));
}

template <typename F>
int guarded(const char* name, F&& f) {
  try {
    return f() ? 0 : 1;
  } catch (const std::exception& e) {
    std::printf("[FAIL] %s: unexpected exception: %s\n", name, e.what());
    std::fflush(stdout);
    return 1;
  }
}

}  // namespace

int main() {
  int failures = 0;
  failures += guarded("criterion 1 (gradient correctness)", criterion_gradients);
  failures += guarded("criterion 2 (monotonicity)", criterion_monotonicity);
  failures += guarded("criterion 3 (closed-form reductions)", criterion_reductions);
  failures += guarded("criterion 4 (metric oracles)", criterion_metric_oracles);
  failures += guarded("criterion 5 (synthetic recovery)", criterion_synthetic_recovery);
  failures += guarded("criterion 6 (q-refinement recovery)", criterion_qrefinement);
  failures += guarded("criterion 7 (dataset reproduction)", criterion_dataset_reproduction);
  failures += guarded("criterion 8 (determinism)", criterion_determinism);
  std::printf("%d of 8 criteria failing\n", failures);
  return failures;
}
