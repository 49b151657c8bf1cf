#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <functional>
#include <string>

#include "CLI11.hpp"
#include "commands.h"
#include "kge/error.h"

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("kge");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
  if (const char* level = std::getenv("KGE_LOG_LEVEL")) {
    spdlog::set_level(spdlog::level::from_str(level));
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  using kge::cli::Options;
  Options opt;

  CLI::App app{"Typed knowledge-graph embeddings: generate, train, evaluate, "
               "export and fine-tune"};
  app.set_version_flag("--version", ANCHORKGE_VERSION);
  app.require_subcommand(1);

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "JSON experiment config")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory")->required();
    sub->add_option("--seed", opt.seed, "override the config seed");
    sub->add_flag("--deterministic", opt.deterministic,
                  "single-threaded, reproducible execution");
  };

  auto* gen = app.add_subcommand("generate", "write a synthetic planted graph");
  common(gen);

  auto* train = app.add_subcommand("train", "split holdout edges and train a model");
  common(train);
  train->add_option("--data", opt.data, "directory with schema.txt and edges.tsv")
      ->required();
  train->add_option("--edges", opt.edges, "edge file (default: <data>/edges.tsv)");
  train->add_option("--model", opt.model, "override model kind (TransE|TransR|TransRA)");
  train->add_option("--steps", opt.steps, "override the number of steps");

  auto* eval = app.add_subcommand("eval", "Recall@k of one or more checkpoints");
  common(eval);
  eval->add_option("--data", opt.data, "train run directory (uses eval_edges.tsv)");
  eval->add_option("--edges", opt.edges, "holdout edge file");
  eval->add_option("--checkpoint", opt.checkpoints, "[label=]checkpoint path")
      ->required();
  eval->add_flag("--compare", opt.compare, "render a side-by-side table");

  auto* exp = app.add_subcommand("export", "write entity embeddings as TSV");
  exp->add_option("--out", opt.out, "output directory")->required();
  exp->add_option("--checkpoint", opt.checkpoints, "checkpoint path")->required();
  exp->add_flag("--anchor-space", opt.anchor_space,
                "move every entity into the anchor space (TransRA only)");

  auto* ft = app.add_subcommand("finetune", "train a ranker on KGE features");
  common(ft);
  ft->add_option("--data", opt.data, "generate directory (uses communities.tsv)")
      ->required();
  ft->add_option("--checkpoint", opt.checkpoints, "pretrained checkpoint")->required();
  ft->add_option("--mode", opt.mode, "frozen|direct|attention|all")
      ->check(CLI::IsMember({"frozen", "direct", "attention", "all"}));
  ft->add_flag("--shuffle-labels", opt.shuffle_labels, "label-permutation control");

  CLI11_PARSE(app, argc, argv);

  std::function<int(const Options&)> cmd;
  if (*gen) cmd = kge::cli::cmd_generate;
  if (*train) cmd = kge::cli::cmd_train;
  if (*eval) cmd = kge::cli::cmd_eval;
  if (*exp) cmd = kge::cli::cmd_export;
  if (*ft) cmd = kge::cli::cmd_finetune;
  try {
    return cmd(opt);
  } catch (const kge::Error& e) {
    spdlog::error("{}", e.what());
    return 1;
  } catch (const std::exception& e) {
    spdlog::critical("unexpected error: {}", e.what());
    return 1;
  }
}
