#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace kge::cli {

struct Options {
  std::string config;
  std::string out;
  std::string data;
  std::string edges;
  std::optional<std::uint64_t> seed;
  bool deterministic = false;
  // eval: "path" or "label=path"; export/finetune use the first.
  std::vector<std::string> checkpoints;
  bool compare = false;
  std::string mode = "attention";
  bool anchor_space = false;
  std::optional<std::string> model;
  std::optional<std::size_t> steps;
  bool shuffle_labels = false;
};

// Each returns the process exit code; errors derived from kge::Error are
// caught by the caller.
int cmd_generate(const Options& opt);
int cmd_train(const Options& opt);
int cmd_eval(const Options& opt);
int cmd_export(const Options& opt);
int cmd_finetune(const Options& opt);

}  // namespace kge::cli
