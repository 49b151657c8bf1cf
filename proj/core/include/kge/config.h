#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kge/evaluation.h"
#include "kge/ranker.h"
#include "kge/synthetic.h"
#include "kge/trainer.h"

namespace kge {

// Training settings as written in a config file. Entity and edge types are
// referred to by name and resolved against a schema later.
struct TrainSection {
  TrainConfig base;
  std::optional<std::string> anchor{"user"};
  // Edge type name ("user-click-item") -> batch share. Empty: proportional.
  std::vector<std::pair<std::string, double>> mix;

  // Throws ConfigError for unknown names or an invalid result.
  TrainConfig resolve(const Schema& schema) const;
};

// One experiment. Every section is optional in the file; missing keys keep
// the defaults below. Unknown keys are rejected.
struct ExperimentConfig {
  std::uint64_t seed = 0;
  SyntheticConfig synthetic = SyntheticConfig::desk_default();
  std::size_t holdout_per_edge_type = 1000;
  TrainSection train;
  EvalConfig eval;
  RankingDatasetConfig ranking;
  RankerConfig ranker;
  bool shuffle_labels = false;
};

// Throws ConfigError naming the offending key (e.g. "train.loss.kind").
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::string& path);
// Reads a whole file; throws IoError.
std::string read_text_file(const std::string& path);

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace kge
