#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kge/model.h"

namespace kge {

struct EvalConfig {
  // Corruptions per positive; the chance level of Recall@k is k/(negatives+1).
  std::size_t negatives = 1000;
  std::vector<std::size_t> ks{10, 100};
  std::uint64_t seed = 0;
  // 0 evaluates every holdout positive.
  std::size_t max_positives = 0;
  // Draw one corruption set per edge type instead of one per positive.
  bool share_corruptions = false;
  // Worker threads for scoring; 0 picks hardware concurrency. Results do not
  // depend on this value.
  std::size_t threads = 1;

  void validate() const;  // throws ConfigError
};

// 1 + number of corruptions scoring >= the positive (ties count against it).
std::size_t rank_positive(const Model& model, const Triple& positive,
                          std::span<const EntityId> corrupt_tails);

// Fraction of ranks <= k; nullopt for an empty rank list.
std::optional<double> recall_at_k(std::span<const std::size_t> ranks,
                                  std::size_t k);

struct EdgeTypeResult {
  std::string edge_type;
  std::size_t positives = 0;
  std::vector<std::pair<std::size_t, double>> recall;  // (k, Recall@k)
};

struct EvalReport {
  std::string checkpoint;
  EvalConfig config;
  std::vector<EdgeTypeResult> results;
  std::vector<std::string> notes;

  double chance(std::size_t k) const {
    return static_cast<double>(k) / static_cast<double>(config.negatives + 1);
  }
  const EdgeTypeResult* find(const std::string& edge_type) const;
  std::optional<double> recall(const std::string& edge_type, std::size_t k) const;
};

// Ranks every (or up to max_positives) holdout positive per edge type
// against uniformly drawn corrupted tails. Corruptions never repeat the
// positive's own tail; they may coincide with other true edges (unfiltered).
// Edge types with no holdout edges are omitted with a note. Throws
// ContractViolation if the store's schema differs from the model's.
EvalReport evaluate(const Model& model, const TripleStore& eval_store,
                    const EvalConfig& config);

// Structured report (JSON object, stable key order) and a flat TSV with
// columns edge_type, k, recall, n, chance.
void write_report_json(std::ostream& out, const EvalReport& report);
void write_report_tsv(std::ostream& out, const EvalReport& report);

// Side-by-side Recall@k table: one row per edge type, one column per
// labelled report.
void write_comparison_table(
    std::ostream& out,
    const std::vector<std::pair<std::string, EvalReport>>& reports);

}  // namespace kge
