// End-to-end acceptance run. Prints one PASS/FAIL line per criterion;
// the exit status is non-zero only when a hard criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "kge/evaluation.h"
#include "kge/loss.h"
#include "kge/model.h"
#include "kge/ranker.h"
#include "kge/synthetic.h"
#include "kge/trainer.h"
#include "oracles.h"

namespace fs = std::filesystem;
using namespace kge;
using V = std::vector<double>;

namespace {

// Tolerances and thresholds.
constexpr double kGradTolerance = 1e-4;
constexpr std::size_t kGradDim = 8;
constexpr int kGradInstances = 20;
constexpr double kGradBudgetSeconds = 60;
constexpr double kAnchorTolerance = 1e-6;
constexpr double kChanceLow = 0.005, kChanceHigh = 0.015;
constexpr std::size_t kChanceMinPositives = 2000;
constexpr double kUserItemFloor = 0.40;
constexpr double kCrossingGap = 0.15;
constexpr double kParityTolerance = 0.05;
constexpr double kLossFamilyGap = 0.10;
constexpr int kOracleCases = 100;
constexpr double kAttentionFloor = 0.75;
constexpr double kShuffledLow = 0.45, kShuffledHigh = 0.55;
constexpr double kDirectSlack = 0.01;
constexpr int kFinetuneSeeds = 5;
constexpr double kPlantedBudgetSeconds = 15 * 60;
constexpr double kFinetuneBudgetSeconds = 10 * 60;

constexpr std::size_t kEvalNegatives = 999;
constexpr std::size_t kHoldout = 1000;
constexpr std::uint64_t kSeed = 1;

const std::vector<std::string> kUserItem{"user-click-item", "user-checkout-item"};
const std::string kCrossing = "user-follow-user";
const std::vector<std::string> kNonAnchor{"advertiser-create-ad", "ad-contain-item"};

int hard_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail,
            bool soft = false) {
  const char* tag = pass ? "PASS" : (soft ? "FLAG" : "FAIL");
  std::printf("[%s] criterion %d %s%s: %s\n", tag, id, name.c_str(),
              soft ? " (soft)" : "", detail.c_str());
  std::fflush(stdout);
  if (!pass && !soft) ++hard_failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------- gradients

V to_v(ConstVec x) { return V(x.begin(), x.end()); }

double score_oracle(const ModelSpec& spec, const V& m, const V& tr, const V& h, const V& t,
                    bool anchor_head) {
  auto d = [&](const V& a, const V& b) {
    return spec.distance == Distance::kCosine ? oracle::cosine(a, b) : oracle::neg_l2(a, b);
  };
  auto plus = [](V a, const V& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
  };
  switch (spec.kind) {
    case ModelKind::kTransE:
      return d(plus(h, tr), t);
    case ModelKind::kTransR:
      if (spec.translation == TranslationSide::kHead) {
        return d(oracle::affine(m, h, &tr), oracle::affine(m, t));
      }
      return d(oracle::affine(m, h), oracle::affine(m, t, &tr));
    case ModelKind::kTransRA:
      if (anchor_head) return d(h, oracle::affine(m, t, &tr));
      return d(oracle::affine(m, h), oracle::affine(m, t, &tr));
  }
  return 0;
}

struct ScoreCase {
  const char* name;
  ModelKind kind;
  TranslationSide side;
  bool anchor_head;
};

const ScoreCase kScoreCases[] = {
    {"TransE", ModelKind::kTransE, TranslationSide::kTail, false},
    {"TransR/tail", ModelKind::kTransR, TranslationSide::kTail, false},
    {"TransR/head", ModelKind::kTransR, TranslationSide::kHead, false},
    {"TransRA/anchor-head", ModelKind::kTransRA, TranslationSide::kTail, true},
    {"TransRA/other-head", ModelKind::kTransRA, TranslationSide::kTail, false},
};

double worst_score_gradient_error(std::mt19937_64& rng) {
  double worst = 0;
  for (const auto& sc : kScoreCases) {
    for (auto dist : {Distance::kCosine, Distance::kL2}) {
      ModelSpec spec;
      spec.kind = sc.kind;
      spec.translation = sc.side;
      spec.distance = dist;
      spec.dim = kGradDim;
      for (int i = 0; i < kGradInstances; ++i) {
        RelationParams rp = RelationParams::identity(kGradDim);
        for (auto& v : rp.projection.values) v += std::normal_distribution<>(0, 0.3)(rng);
        rp.translation = oracle::random_vector(rng, kGradDim, 0.3);
        const V h = oracle::random_vector(rng, kGradDim);
        const V t = oracle::random_vector(rng, kGradDim);
        const V& m = rp.projection.values;
        const V& tr = rp.translation;
        const auto g = score_gradients(spec, rp, h, t, sc.anchor_head);
        const bool ah = sc.anchor_head;
        const auto nh = oracle::numeric_gradient(
            [&](const V& x) { return score_oracle(spec, m, tr, x, t, ah); }, h);
        const auto nt = oracle::numeric_gradient(
            [&](const V& x) { return score_oracle(spec, m, tr, h, x, ah); }, t);
        const auto nm = oracle::numeric_gradient(
            [&](const V& x) { return score_oracle(spec, x, tr, h, t, ah); }, m);
        const auto ntr = oracle::numeric_gradient(
            [&](const V& x) { return score_oracle(spec, m, x, h, t, ah); }, tr);
        worst = std::max({worst, oracle::max_relative_error(g.head, nh),
                          oracle::max_relative_error(g.tail, nt),
                          oracle::max_relative_error(g.relation.projection.values, nm),
                          oracle::max_relative_error(g.relation.translation, ntr)});
      }
    }
  }
  return worst;
}

V off_kink_scores(std::mt19937_64& rng, std::size_t n) {
  V v = oracle::random_vector(rng, n);
  for (auto& x : v) x = std::round(x * 4.0) / 4.0 + 0.1;
  return v;
}

double worst_loss_gradient_error(std::mt19937_64& rng) {
  double worst = 0;
  for (auto kind : {LossKind::kSampledSoftmax, LossKind::kMarginRanking,
                    LossKind::kMeanNegativeMargin}) {
    LossConfig cfg;
    cfg.kind = kind;
    cfg.temperature = 0.5;
    cfg.margin = 0.3;
    for (int i = 0; i < kGradInstances; ++i) {
      const V pos = off_kink_scores(rng, 4);
      const V neg = off_kink_scores(rng, 4 * 3);
      const auto r = compute_loss(cfg, pos, neg);
      const auto np = oracle::numeric_gradient(
          [&](const V& x) { return compute_loss(cfg, x, neg).loss; }, pos);
      const auto nn = oracle::numeric_gradient(
          [&](const V& x) { return compute_loss(cfg, pos, x).loss; }, neg);
      worst = std::max({worst, oracle::max_relative_error(r.pos_grad, np),
                        oracle::max_relative_error(r.neg_grad, nn)});
    }
  }
  return worst;
}

double worst_ranker_gradient_error(std::mt19937_64& rng) {
  double worst = 0;
  const std::size_t slots = 4, side = 3;
  for (auto mode : {IntegrationMode::kFrozen, IntegrationMode::kDirect,
                    IntegrationMode::kAttention}) {
    for (int i = 0; i < kGradInstances; ++i) {
      RankerNet net(mode, slots, kGradDim, side, 16, rng());
      for (auto& p : net.params()) p += std::normal_distribution<>(0, 0.1)(rng);
      const V x = oracle::random_vector(rng, slots * kGradDim, 0.5);
      const V sf = oracle::random_vector(rng, side);
      RankerNet::Cache cache;
      net.forward(x, sf, cache);
      V gp(net.params().size(), 0.0), gx(x.size(), 0.0);
      net.backward(cache, 1.0, gp, gx);
      const auto np = oracle::numeric_gradient(
          [&](const V& p) {
            RankerNet copy = net;
            copy.params() = p;
            RankerNet::Cache c;
            return copy.forward(x, sf, c);
          },
          net.params(), 1e-5);
      const auto nx = oracle::numeric_gradient(
          [&](const V& v) {
            RankerNet::Cache c;
            return net.forward(v, sf, c);
          },
          x, 1e-5);
      worst = std::max({worst, oracle::max_relative_error(gp, np),
                        oracle::max_relative_error(gx, nx)});
    }
  }
  return worst;
}

void criterion_gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  const double s = worst_score_gradient_error(rng);
  const double l = worst_loss_gradient_error(rng);
  const double r = worst_ranker_gradient_error(rng);
  const double secs = seconds_since(t0);
  const bool ok = s < kGradTolerance && l < kGradTolerance && r < kGradTolerance &&
                  secs < kGradBudgetSeconds;
  report(1, "gradient oracle", ok,
         fmt("worst relative error scores %.2e, losses %.2e, ranker %.2e "
             "(limit %.0e, dim %zu, %d instances each, %.1f s)",
             s, l, r, kGradTolerance, kGradDim, kGradInstances, secs));
}

// ---------------------------------------------------------------- desk graph

struct DeskRun {
  SyntheticGraph graph;
  HoldoutSplit split;
};

TrainConfig desk_train_config(ModelKind kind, const Schema& schema) {
  TrainConfig c;
  c.model.kind = kind;
  c.model.dim = 32;
  if (kind == ModelKind::kTransRA) c.model.anchor = *schema.find_entity_type("user");
  c.steps = 20000;
  c.batch_size = 1024;
  c.loss.kind = LossKind::kSampledSoftmax;
  c.loss.temperature = 0.1;
  c.seed = kSeed;
  c.checkpoint_every = 0;
  c.deterministic = true;
  return c;
}

EvalConfig desk_eval_config() {
  EvalConfig e;
  e.negatives = kEvalNegatives;
  e.ks = {10};
  e.seed = kSeed;
  e.threads = 0;
  return e;
}

double pooled_recall(const EvalReport& r, const std::vector<std::string>& types) {
  double hits = 0, n = 0;
  for (const auto& et : types) {
    const auto* res = r.find(et);
    if (!res) continue;
    hits += res->recall.front().second * static_cast<double>(res->positives);
    n += static_cast<double>(res->positives);
  }
  return n > 0 ? hits / n : 0.0;
}

void criterion_anchor_identity(const DeskRun& desk) {
  const auto& store = desk.split.train;
  const auto spec = desk_train_config(ModelKind::kTransRA, store.schema).model;
  const Model m = init_model(store, spec, kSeed);
  double worst = 0;
  std::size_t triples = 0;
  for (EdgeTypeId et = 0; et < store.edges.size(); ++et) {
    const auto& type = store.schema.edge_type(et);
    for (const auto& t : store.edges[et]) {
      const double s = m.score_triple(t);
      const double c = oracle::cosine(to_v(m.tables[type.head].row(t.head)),
                                      to_v(m.tables[type.tail].row(t.tail)));
      worst = std::max(worst, std::fabs(s - c));
      ++triples;
    }
  }

  // Head path of anchor-head triples must not touch relation parameters,
  // whatever the relation values are.
  std::mt19937_64 rng(202);
  std::size_t nonzero = 0, checked = 0;
  for (EdgeTypeId et = 0; et < store.schema.num_edge_types(); ++et) {
    if (!m.head_is_anchor(et)) continue;
    const auto paths = score_paths(spec, true);
    for (int i = 0; i < 200; ++i) {
      RelationParams rp = RelationParams::identity(spec.dim);
      for (auto& v : rp.projection.values) v += std::normal_distribution<>(0, 0.5)(rng);
      rp.translation = oracle::random_vector(rng, spec.dim);
      const V x = oracle::random_vector(rng, spec.dim);
      const V g = oracle::random_vector(rng, spec.dim);
      V gx(spec.dim, 0.0);
      RelationGrad rg(spec.dim);
      backprop_path(paths.head, rp, x, g, gx, rg);
      for (double v : rg.projection.values) nonzero += v != 0.0;
      for (double v : rg.translation) nonzero += v != 0.0;
      ++checked;
    }
  }
  const bool ok = worst <= kAnchorTolerance && nonzero == 0 && checked > 0;
  report(2, "anchor identity", ok,
         fmt("max |score - cosine(h,t)| = %.2e over %zu triples; %zu nonzero relation "
             "gradient entries from %zu anchor head paths",
             worst, triples, nonzero, checked));
}

void criterion_chance(const DeskRun& desk) {
  const auto& store = desk.split.train;
  const auto spec = desk_train_config(ModelKind::kTransRA, store.schema).model;
  const Model m = init_model(store, spec, kSeed + 7);
  const auto rep = evaluate(m, desk.split.eval, desk_eval_config());
  std::size_t n = 0;
  std::vector<std::string> all;
  for (const auto& r : rep.results) {
    n += r.positives;
    all.push_back(r.edge_type);
  }
  const double recall = pooled_recall(rep, all);
  const bool ok = recall >= kChanceLow && recall <= kChanceHigh && n >= kChanceMinPositives;
  report(3, "chance calibration", ok,
         fmt("untrained Recall@10 = %.4f over %zu positives (chance %.4f, band [%.3f, %.3f])",
             recall, n, rep.chance(10), kChanceLow, kChanceHigh));
}

struct Trained {
  Model model;
  EvalReport report;
  double seconds = 0;
};

Trained train_and_eval(const DeskRun& desk, TrainConfig cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  auto result = train(desk.split.train, cfg);
  Trained t{std::move(result.model), {}, 0};
  t.report = evaluate(t.model, desk.split.eval, desk_eval_config());
  t.seconds = seconds_since(t0);
  return t;
}

void print_table(const std::vector<std::pair<std::string, const EvalReport*>>& cols) {
  std::printf("  %-26s", "edge type");
  for (const auto& [label, r] : cols) std::printf(" %12s", label.c_str());
  std::printf("\n");
  for (const auto& res : cols.front().second->results) {
    std::printf("  %-26s", res.edge_type.c_str());
    for (const auto& [label, r] : cols) {
      const auto v = r->recall(res.edge_type, 10);
      std::printf(" %12.4f", v ? *v : -1.0);
    }
    std::printf("\n");
  }
}

// ---------------------------------------------------------------- evaluation oracle

void criterion_rank_oracle() {
  std::mt19937_64 rng(303);
  int matches = 0;
  for (int c = 0; c < kOracleCases; ++c) {
    Schema s;
    s.add_entity_type("user");
    s.add_entity_type("item");
    s.add_edge_type("user", "click", "item");
    s.add_edge_type("item", "similar", "item");
    TripleStore st(s);
    const std::size_t users = 3 + rng() % 10, items = 5 + rng() % 46;
    for (std::size_t i = 0; i < users; ++i) st.vocab[0].intern("u" + std::to_string(i));
    for (std::size_t i = 0; i < items; ++i) st.vocab[1].intern("i" + std::to_string(i));

    ModelSpec spec;
    spec.kind = static_cast<ModelKind>(rng() % 3);
    spec.distance = rng() % 2 ? Distance::kCosine : Distance::kL2;
    spec.translation = rng() % 2 ? TranslationSide::kHead : TranslationSide::kTail;
    spec.dim = 2 + rng() % 7;
    if (spec.kind == ModelKind::kTransRA) spec.anchor = 0;
    Model m = init_model(st, spec, rng());
    for (auto& rp : m.relations) {
      for (auto& v : rp.projection.values) v += std::normal_distribution<>(0, 0.4)(rng);
      rp.translation = oracle::random_vector(rng, spec.dim, 0.3);
    }
    // Duplicate some item rows so ties occur.
    for (std::size_t i = 1; i < items; i += 4) {
      const auto src = m.tables[1].row(0);
      std::copy(src.begin(), src.end(), m.tables[1].row(i).begin());
    }

    const EdgeTypeId et = static_cast<EdgeTypeId>(rng() % 2);
    const EntityId head = static_cast<EntityId>(rng() % (et == 0 ? users : items));
    const EntityId pos = static_cast<EntityId>(rng() % items);
    const Triple t{head, et, pos};
    std::vector<EntityId> all_others;
    for (EntityId i = 0; i < items; ++i) {
      if (i != pos) all_others.push_back(i);
    }

    const auto& rp = m.relation_for(et);
    const bool ah = m.head_is_anchor(et);
    const V hv = to_v(m.tables[s.edge_type(et).head].row(head));
    auto oscore = [&](EntityId tail) {
      return score_oracle(spec, rp.projection.values, rp.translation, hv,
                          to_v(m.tables[1].row(tail)), ah);
    };
    V others;
    for (auto i : all_others) others.push_back(oscore(i));
    matches += rank_positive(m, t, all_others) == oracle::brute_rank(oscore(pos), others);
  }
  report(7, "evaluation oracle", matches == kOracleCases,
         fmt("rank_positive equals exhaustive all-tails rank in %d/%d random cases", matches,
             kOracleCases));
}

// ---------------------------------------------------------------- finetune

void criterion_finetune(const DeskRun& desk, const Model& transra) {
  const auto t0 = std::chrono::steady_clock::now();
  bool hard = true, soft = true;
  double min_attention = 1, min_margin = 1;
  double shuffled_lo = 1, shuffled_hi = 0;
  std::printf("  %-5s %9s %9s %9s %9s\n", "seed", "frozen", "direct", "attention", "shuffled");
  for (int seed = 1; seed <= kFinetuneSeeds; ++seed) {
    const auto data = build_ranking_dataset(desk.graph.store.schema, desk.graph.community,
                                            RankingDatasetConfig{}, seed);
    const RankerConfig rc;
    const double frozen =
        train_ranker(data, transra, IntegrationMode::kFrozen, rc, seed).final_validation_auc();
    const double direct =
        train_ranker(data, transra, IntegrationMode::kDirect, rc, seed).final_validation_auc();
    const double attention = train_ranker(data, transra, IntegrationMode::kAttention, rc, seed)
                                 .final_validation_auc();
    const double shuffled =
        train_ranker(shuffle_labels(data, seed), transra, IntegrationMode::kAttention, rc, seed)
            .final_validation_auc();
    std::printf("  %-5d %9.4f %9.4f %9.4f %9.4f\n", seed, frozen, direct, attention, shuffled);
    hard = hard && attention >= kAttentionFloor && attention >= frozen &&
           shuffled >= kShuffledLow && shuffled <= kShuffledHigh;
    soft = soft && attention >= direct - kDirectSlack;
    min_attention = std::min(min_attention, attention);
    min_margin = std::min(min_margin, attention - frozen);
    shuffled_lo = std::min(shuffled_lo, shuffled);
    shuffled_hi = std::max(shuffled_hi, shuffled);
  }
  const double secs = seconds_since(t0);
  hard = hard && secs < kFinetuneBudgetSeconds;
  report(8, "finetune ladder", hard,
         fmt("attention AUC >= %.4f (floor %.2f), attention - frozen >= %+.4f, shuffled in "
             "[%.4f, %.4f] over %d seeds (%.0f s)",
             min_attention, kAttentionFloor, min_margin, shuffled_lo, shuffled_hi,
             kFinetuneSeeds, secs));
  report(8, "attention vs direct", soft,
         soft ? "attention >= direct - 0.01 on every seed"
              : "attention < direct - 0.01 on at least one seed (see table)",
         true);
}

// ---------------------------------------------------------------- determinism

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(KGE_CLI) + " " + args + " >> " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kDeterminismConfig = R"({
  "seed": 17,
  "synthetic": {
    "communities": 5,
    "entities": [{"name": "user", "count": 200}, {"name": "item", "count": 400},
                 {"name": "ad", "count": 60}, {"name": "advertiser", "count": 15}],
    "edges": [{"head": "user", "activity": "click", "tail": "item", "count": 6000},
              {"head": "user", "activity": "click", "tail": "ad", "count": 3000},
              {"head": "user", "activity": "checkout", "tail": "advertiser", "count": 800},
              {"head": "user", "activity": "follow", "tail": "user", "count": 1500,
               "crossing": true},
              {"head": "advertiser", "activity": "create", "tail": "ad", "count": 600},
              {"head": "ad", "activity": "contain", "tail": "item", "count": 2000}]
  },
  "split": {"holdout_per_edge_type": 200},
  "train": {"model": {"dim": 16}, "steps": 400, "batch_size": 256, "pool_size": 5000,
            "checkpoint_every": 200},
  "eval": {"negatives": 199, "ks": [10, 50], "threads": 4},
  "finetune": {"dataset": {"examples": 2000}, "ranker": {"epochs": 2}}
})";

std::vector<std::pair<std::string, std::string>> tree_bytes(const fs::path& root) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    // The manifest records wall-clock time and absolute paths.
    if (e.path().filename() == "manifest.json") continue;
    out.emplace_back(fs::relative(e.path(), root).string(), oracle::slurp(e.path()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

void criterion_determinism() {
  const auto dir = oracle::scratch_dir("determinism");
  const auto cfg = (dir / "config.json").string();
  std::ofstream(cfg) << kDeterminismConfig;
  const auto log = dir / "cli.log";
  bool ran = true;
  for (const char* run : {"a", "b"}) {
    const auto r = dir / run;
    const std::string common = " --config " + cfg + " --deterministic";
    ran = ran && run_cli("generate" + common + " --out " + (r / "gen").string(), log) == 0;
    ran = ran && run_cli("train" + common + " --data " + (r / "gen").string() + " --out " +
                             (r / "train").string(),
                         log) == 0;
    ran = ran && run_cli("eval" + common + " --data " + (r / "train").string() +
                             " --checkpoint " + (r / "train" / "checkpoint.bin").string() +
                             " --compare --out " + (r / "eval").string(),
                         log) == 0;
    ran = ran && run_cli("finetune" + common + " --data " + (r / "gen").string() +
                             " --checkpoint " + (r / "train" / "checkpoint.bin").string() +
                             " --mode all --out " + (r / "finetune").string(),
                         log) == 0;
  }
  std::size_t files = 0, differing = 0;
  std::string first_diff;
  if (ran) {
    const auto a = tree_bytes(dir / "a");
    const auto b = tree_bytes(dir / "b");
    if (a.size() != b.size()) {
      differing = 1;
      first_diff = "file lists differ";
    }
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
      ++files;
      if (a[i] != b[i]) {
        ++differing;
        if (first_diff.empty()) first_diff = a[i].first;
      }
    }
  }
  const bool ok = ran && differing == 0 && files > 0;
  report(9, "determinism", ok,
         ran ? fmt("%zu output files compared across two runs, %zu differ%s%s", files,
                   differing, first_diff.empty() ? "" : ": ", first_diff.c_str())
             : "a CLI stage exited non-zero (log: " + log.string() + ")");
  if (ok) fs::remove_all(dir);
}

// ---------------------------------------------------------------- AUC oracle

void criterion_auc_oracle() {
  std::mt19937_64 rng(404);
  int matches = 0;
  for (int c = 0; c < kOracleCases; ++c) {
    const std::size_t n = 2 + rng() % 199;
    std::vector<int> labels(n);
    V scores(n);
    const std::size_t grid = 1 + rng() % 30;
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = static_cast<int>(rng() % 2);
      scores[i] = static_cast<double>(rng() % grid) / static_cast<double>(grid);
    }
    labels[0] = 1;
    labels[1] = 0;
    std::shuffle(labels.begin(), labels.end(), rng);
    matches += auc(labels, scores) == oracle::pairwise_auc(labels, scores);
  }
  report(10, "AUC oracle", matches == kOracleCases,
         fmt("Mann-Whitney AUC equals the pairwise oracle exactly in %d/%d instances", matches,
             kOracleCases));
}

}  // namespace

int main() {
  try {
    criterion_gradients();

    std::printf("  generating desk graph and holdout split\n");
    auto graph = generate_synthetic(SyntheticConfig::desk_default(), kSeed);
    auto split = split_holdout(graph.store, kHoldout, kSeed);
    const DeskRun desk{std::move(graph), std::move(split)};
    const Schema& schema = desk.split.train.schema;

    criterion_anchor_identity(desk);
    criterion_chance(desk);

    // Planted structure, parity and loss family share one graph and split.
    const auto planted_t0 = std::chrono::steady_clock::now();
    std::printf("  training TransRA, TransE and TransR (20k steps each)\n");
    const auto ra = train_and_eval(desk, desk_train_config(ModelKind::kTransRA, schema));
    const auto te = train_and_eval(desk, desk_train_config(ModelKind::kTransE, schema));
    const auto tr = train_and_eval(desk, desk_train_config(ModelKind::kTransR, schema));
    const double planted_secs = seconds_since(planted_t0);
    print_table({{"TransRA", &ra.report}, {"TransE", &te.report}, {"TransR", &tr.report}});
    std::printf("  train+eval seconds: TransRA %.0f, TransE %.0f, TransR %.0f\n", ra.seconds,
                te.seconds, tr.seconds);

    double worst_user_item = 1;
    for (const auto& et : kUserItem) worst_user_item = std::min(worst_user_item, *ra.report.recall(et, 10));
    const double gap = *ra.report.recall(kCrossing, 10) - *te.report.recall(kCrossing, 10);
    report(4, "planted-structure recovery",
           worst_user_item >= kUserItemFloor && gap >= kCrossingGap &&
               planted_secs < kPlantedBudgetSeconds,
           fmt("TransRA user-item Recall@10 >= %.4f (floor %.2f, %.0fx chance); %s gap "
               "TransRA - TransE = %+.4f (need %+.2f); %.0f s",
               worst_user_item, kUserItemFloor, worst_user_item / ra.report.chance(10),
               kCrossing.c_str(), gap, kCrossingGap, planted_secs));

    double worst_parity = 0;
    std::string parity_detail;
    for (const auto& et : kNonAnchor) {
      const double d = std::fabs(*ra.report.recall(et, 10) - *tr.report.recall(et, 10));
      worst_parity = std::max(worst_parity, d);
      parity_detail += fmt("%s |diff| %.4f; ", et.c_str(), d);
    }
    report(5, "TransRA/TransR parity", worst_parity <= kParityTolerance,
           parity_detail + fmt("limit %.2f", kParityTolerance));

    std::printf("  training margin-ranking and mean-negative runs (lambda 0.5 and 2.0)\n");
    const double softmax_ui = pooled_recall(ra.report, kUserItem);
    double smallest_gap = 1;
    std::string loss_detail = fmt("softmax %.4f", softmax_ui);
    for (auto kind : {LossKind::kMarginRanking, LossKind::kMeanNegativeMargin}) {
      for (double margin : {0.5, 2.0}) {
        auto cfg = desk_train_config(ModelKind::kTransRA, schema);
        cfg.loss.kind = kind;
        cfg.loss.margin = margin;
        const auto run = train_and_eval(desk, cfg);
        const double ui = pooled_recall(run.report, kUserItem);
        smallest_gap = std::min(smallest_gap, softmax_ui - ui);
        loss_detail += fmt(", %s@%.1f %.4f", std::string(to_string(kind)).c_str(), margin, ui);
      }
    }
    const bool reproduced = smallest_gap >= kLossFamilyGap;
    report(6, "loss-family finding", reproduced,
           loss_detail + fmt("; smallest softmax lead %+.4f (need %+.2f)%s", smallest_gap,
                             kLossFamilyGap,
                             reproduced ? "" : "; DEVIATION: not reproduced on this graph"),
           true);

    criterion_rank_oracle();
    criterion_finetune(desk, ra.model);
    criterion_determinism();
    criterion_auc_oracle();
  } catch (const std::exception& e) {
    std::printf("[FAIL] acceptance aborted: %s\n", e.what());
    return 2;
  }
  std::printf("%s: %d hard criteria failed\n", hard_failures ? "FAILED" : "OK", hard_failures);
  return hard_failures ? 1 : 0;
}
