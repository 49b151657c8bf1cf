#include "commands.h"

#include <spdlog/spdlog.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kge/checkpoint.h"
#include "kge/config.h"
#include "kge/error.h"
#include "kge/evaluation.h"
#include "kge/ranker.h"
#include "kge/synthetic.h"
#include "kge/trainer.h"
#include "run_dir.h"

namespace kge::cli {

namespace fs = std::filesystem;

namespace {

struct LoadedConfig {
  ExperimentConfig config;
  std::uint64_t hash = 0;
  std::uint64_t seed = 0;
};

LoadedConfig load(const Options& opt) {
  LoadedConfig lc;
  if (!opt.config.empty()) {
    const std::string text = read_text_file(opt.config);
    lc.config = parse_config(text);
    lc.hash = fnv1a64(text);
  }
  lc.seed = opt.seed.value_or(lc.config.seed);
  return lc;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

std::string data_file(const Options& opt, const std::string& name) {
  require(!opt.data.empty(), "--data is required");
  const fs::path p = fs::path(opt.data) / name;
  if (!fs::exists(p)) throw IoError("missing input '" + p.string() + "'");
  return p.string();
}

void check_finite(const Model& model) {
  for (const auto& t : model.tables) {
    if (!all_finite(t.values)) throw TrainingFault("non-finite embedding after training");
  }
  for (const auto& r : model.relations) {
    if (!all_finite(r.projection.values) || !all_finite(r.translation)) {
      throw TrainingFault("non-finite relation parameters after training");
    }
  }
}

std::pair<std::string, std::string> split_label(const std::string& arg,
                                                const Model& model) {
  const auto eq = arg.find('=');
  if (eq != std::string::npos && eq > 0) return {arg.substr(0, eq), arg.substr(eq + 1)};
  return {std::string(to_string(model.spec.kind)), arg};
}

std::string checkpoint_path(const std::string& arg) {
  const auto eq = arg.find('=');
  return eq != std::string::npos && eq > 0 ? arg.substr(eq + 1) : arg;
}

}  // namespace

int cmd_generate(const Options& opt) {
  const auto lc = load(opt);
  require(!opt.out.empty(), "--out is required");
  RunDir run(opt.out, "generate");
  run.set_config(opt.config, lc.hash);
  run.add_seed("seed", lc.seed);
  run.set_deterministic(true);

  spdlog::info("generating synthetic graph (seed {})", lc.seed);
  const auto graph = generate_synthetic(lc.config.synthetic, lc.seed);
  graph.store.validate();
  spdlog::info("{} entity types, {} edge types, {} edges",
               graph.store.schema.num_entity_types(),
               graph.store.schema.num_edge_types(), graph.store.num_edges());

  run.write("schema.txt", [&](std::ostream& o) { write_schema(o, graph.store.schema); });
  run.write("edges.tsv", [&](std::ostream& o) { write_edges(o, graph.store); });
  run.write("communities.tsv", [&](std::ostream& o) {
    write_communities(o, graph.store, graph.community);
  });
  run.write_manifest();
  return 0;
}

int cmd_train(const Options& opt) {
  auto lc = load(opt);
  require(!opt.out.empty(), "--out is required");
  auto& section = lc.config.train;
  if (opt.model) section.base.model.kind = parse_model_kind(*opt.model);
  if (opt.steps) section.base.steps = *opt.steps;

  const std::string schema_path = data_file(opt, "schema.txt");
  const std::string edges_path =
      opt.edges.empty() ? data_file(opt, "edges.tsv") : opt.edges;
  const Schema schema = read_schema_file(schema_path);
  TrainConfig tc = section.resolve(schema);
  tc.seed = lc.seed;
  if (opt.deterministic) tc.deterministic = true;

  RunDir run(opt.out, "train");
  run.set_config(opt.config, lc.hash);
  run.add_seed("seed", lc.seed);
  run.set_deterministic(tc.deterministic);
  run.record_input("schema", schema_path);
  run.record_input("edges", edges_path);

  const TripleStore store = load_edges(edges_path, schema);
  const auto split = split_holdout(store, lc.config.holdout_per_edge_type, lc.seed);
  run.write("schema.txt", [&](std::ostream& o) { write_schema(o, schema); });
  run.write("train_edges.tsv", [&](std::ostream& o) { write_edges(o, split.train); });
  run.write("eval_edges.tsv", [&](std::ostream& o) { write_edges(o, split.eval); });
  run.write("split_manifest.txt",
            [&](std::ostream& o) { write_split_manifest(o, split.manifest); });

  spdlog::info("training {} (dim {}, {} loss) for {} steps on {} edges",
               to_string(tc.model.kind), tc.model.dim, to_string(tc.loss.kind),
               tc.steps, split.train.num_edges());
  fs::create_directories(run.file("checkpoints"));
  Trainer trainer(split.train, tc);
  auto sink = [&](const Model& m) {
    char name[64];
    std::snprintf(name, sizeof(name), "checkpoints/step_%08llu.bin",
                  static_cast<unsigned long long>(m.step));
    save_checkpoint_file(run.file(name).string(), m);
    run.record_output(name);
    const auto& tel = trainer.telemetry();
    if (!tel.records.empty()) {
      spdlog::info("step {} smoothed loss {:.5f}", m.step,
                   tel.smoothed_loss(tel.records.size(), 100));
    }
  };
  auto write_telemetry = [&] {
    run.write("telemetry.tsv",
              [&](std::ostream& o) { trainer.telemetry().write_tsv(o); });
  };

  try {
    trainer.run(sink);
    check_finite(trainer.model());
  } catch (const TrainingFault& e) {
    spdlog::error("training fault: {}", e.what());
    save_checkpoint_file(run.file("checkpoint.last_good.bin").string(), trainer.model());
    run.record_output("checkpoint.last_good.bin");
    write_telemetry();
    run.write_manifest();
    return 3;
  }
  save_checkpoint_file(run.file("checkpoint.bin").string(), trainer.model());
  run.record_output("checkpoint.bin");
  write_telemetry();
  run.write_manifest();
  return 0;
}

int cmd_eval(const Options& opt) {
  const auto lc = load(opt);
  require(!opt.out.empty(), "--out is required");
  require(!opt.checkpoints.empty(), "eval needs at least one --checkpoint");
  const std::string edges_path =
      opt.edges.empty() ? data_file(opt, "eval_edges.tsv") : opt.edges;
  EvalConfig ec = lc.config.eval;
  ec.seed = lc.seed;
  if (opt.deterministic) ec.threads = 1;

  RunDir run(opt.out, "eval");
  run.set_config(opt.config, lc.hash);
  run.add_seed("seed", lc.seed);
  run.set_deterministic(opt.deterministic);
  run.record_input("edges", edges_path);

  std::vector<std::pair<std::string, EvalReport>> reports;
  for (const auto& arg : opt.checkpoints) {
    const Model model = load_checkpoint_file(checkpoint_path(arg));
    auto [label, path] = split_label(arg, model);
    for (const auto& [l, r] : reports) {
      if (l == label) label += "#" + std::to_string(reports.size() + 1);
    }
    run.record_input("checkpoint:" + label, path);
    const TripleStore held = load_edges(edges_path, model.schema, model.vocab,
                                        EdgeReadOptions{.allow_new_ids = false});
    spdlog::info("evaluating {} on {} holdout edges ({} corruptions each)", label,
                 held.num_edges(), ec.negatives);
    EvalReport report = evaluate(model, held, ec);
    for (const auto& note : report.notes) spdlog::warn("{}", note);
    reports.emplace_back(label, std::move(report));
  }

  if (reports.size() == 1) {
    run.write("report.json", [&](std::ostream& o) { write_report_json(o, reports[0].second); });
    run.write("report.tsv", [&](std::ostream& o) { write_report_tsv(o, reports[0].second); });
  } else {
    for (const auto& [label, rep] : reports) {
      run.write("report." + label + ".json",
                [&](std::ostream& o) { write_report_json(o, rep); });
      run.write("report." + label + ".tsv",
                [&](std::ostream& o) { write_report_tsv(o, rep); });
    }
  }
  if (opt.compare || reports.size() > 1) {
    run.write("table.txt", [&](std::ostream& o) { write_comparison_table(o, reports); });
    std::ostringstream table;
    write_comparison_table(table, reports);
    spdlog::info("\n{}", table.str());
  }
  run.write_manifest();
  return 0;
}

int cmd_export(const Options& opt) {
  require(!opt.out.empty(), "--out is required");
  require(!opt.checkpoints.empty(), "export needs --checkpoint");
  const std::string path = checkpoint_path(opt.checkpoints.front());
  const Model model = load_checkpoint_file(path);
  // Render first so a refused export leaves no partial directory behind.
  std::ostringstream rendered;
  write_embeddings_tsv(rendered, model, opt.anchor_space);

  RunDir run(opt.out, "export");
  run.record_input("checkpoint", path);
  run.set_deterministic(true);
  run.write("embeddings.tsv", [&](std::ostream& o) { o << rendered.str(); });
  run.write_manifest();
  return 0;
}

int cmd_finetune(const Options& opt) {
  auto lc = load(opt);
  require(!opt.out.empty(), "--out is required");
  require(!opt.checkpoints.empty(), "finetune needs --checkpoint");
  const std::string ckpt = checkpoint_path(opt.checkpoints.front());
  const std::string comm_path = data_file(opt, "communities.tsv");
  std::vector<IntegrationMode> modes;
  if (opt.mode == "all") {
    modes = {IntegrationMode::kFrozen, IntegrationMode::kDirect,
             IntegrationMode::kAttention};
  } else {
    modes = {parse_integration_mode(opt.mode)};
  }

  const Model model = load_checkpoint_file(ckpt);
  Communities community;
  {
    std::ifstream in(comm_path);
    if (!in) throw IoError("cannot open '" + comm_path + "'");
    community = read_communities(in, model.schema, model.vocab);
  }

  RunDir run(opt.out, "finetune");
  run.set_config(opt.config, lc.hash);
  run.add_seed("seed", lc.seed);
  run.set_deterministic(true);
  run.record_input("checkpoint", ckpt);
  run.record_input("communities", comm_path);

  RankingDataset data =
      build_ranking_dataset(model.schema, community, lc.config.ranking, lc.seed);
  if (opt.shuffle_labels || lc.config.shuffle_labels) {
    data = shuffle_labels(std::move(data), lc.seed);
  }
  run.write("dataset.tsv",
            [&](std::ostream& o) { write_dataset_tsv(o, data, model.vocab); });

  std::vector<RankerMetric> metrics;
  for (auto mode : modes) {
    spdlog::info("fine-tuning ranker in {} mode on {} examples", to_string(mode),
                 data.examples.size());
    const auto result = train_ranker(data, model, mode, lc.config.ranker, lc.seed);
    if (mode == IntegrationMode::kFrozen) {
      // Frozen mode must leave the embedding tables untouched.
      for (std::size_t t = 0; t < model.tables.size(); ++t) {
        if (!(result.kge.tables[t] == model.tables[t])) {
          throw ContractViolation("frozen mode modified the KGE tables");
        }
      }
    }
    spdlog::info("{}: validation AUC {:.4f}", to_string(mode),
                 result.final_validation_auc());
    metrics.insert(metrics.end(), result.metrics.begin(), result.metrics.end());
  }
  run.write("metrics.tsv", [&](std::ostream& o) { write_metrics_tsv(o, metrics); });
  run.write_manifest();
  return 0;
}

}  // namespace kge::cli
