#include "kge/evaluation.h"

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "kge/error.h"
#include "kge/random.h"

namespace kge {

void EvalConfig::validate() const {
  if (ks.empty()) throw ConfigError("eval.ks must list at least one k");
  for (auto k : ks) {
    if (k == 0) throw ConfigError("eval.ks entries must be >= 1");
    if (k > negatives) {
      throw ConfigError("eval.negatives (" + std::to_string(negatives) +
                        ") must be >= every k (got " + std::to_string(k) + ")");
    }
  }
}

std::size_t rank_positive(const Model& model, const Triple& positive,
                          std::span<const EntityId> corrupt_tails) {
  const double s = model.score_triple(positive);
  std::size_t rank = 1;
  Triple corrupted = positive;
  for (EntityId t : corrupt_tails) {
    corrupted.tail = t;
    if (model.score_triple(corrupted) >= s) ++rank;
  }
  return rank;
}

std::optional<double> recall_at_k(std::span<const std::size_t> ranks,
                                  std::size_t k) {
  if (ranks.empty()) return std::nullopt;
  const auto hits = std::count_if(ranks.begin(), ranks.end(),
                                  [k](std::size_t r) { return r <= k; });
  return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

const EdgeTypeResult* EvalReport::find(const std::string& edge_type) const {
  for (const auto& r : results) {
    if (r.edge_type == edge_type) return &r;
  }
  return nullptr;
}

std::optional<double> EvalReport::recall(const std::string& edge_type,
                                         std::size_t k) const {
  const auto* r = find(edge_type);
  if (r == nullptr) return std::nullopt;
  for (const auto& [kk, v] : r->recall) {
    if (kk == k) return v;
  }
  return std::nullopt;
}

namespace {

template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(n, 1));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> workers;
  const std::size_t chunk = (n + threads - 1) / threads;
  for (std::size_t w = 0; w < threads; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    workers.emplace_back([&fn, begin, end] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
}

}  // namespace

EvalReport evaluate(const Model& model, const TripleStore& eval_store,
                    const EvalConfig& config) {
  config.validate();
  if (!(eval_store.schema == model.schema)) {
    throw ContractViolation("evaluation store schema does not match the model");
  }
  for (EntityTypeId t = 0; t < model.schema.num_entity_types(); ++t) {
    if (eval_store.vocab[t].size() != model.vocab[t].size()) {
      throw ContractViolation("evaluation store vocabulary for '" +
                              model.schema.entity_name(t) +
                              "' does not match the model");
    }
  }

  EvalReport report;
  report.config = config;
  report.checkpoint = std::string(to_string(model.spec.kind)) + "/dim" +
                      std::to_string(model.spec.dim) + "/step" +
                      std::to_string(model.step);

  const std::size_t dim = model.spec.dim;
  const Distance dist = model.spec.distance;
  for (EdgeTypeId et = 0; et < model.schema.num_edge_types(); ++et) {
    const std::string name = model.schema.edge_type_name(et);
    const auto& edges = eval_store.edges[et];
    if (edges.empty()) {
      report.notes.push_back(name + ": no holdout edges, omitted");
      continue;
    }
    const auto& type = model.schema.edge_type(et);
    const std::size_t n_tails = model.vocab[type.tail].size();
    if (n_tails < 2) {
      report.notes.push_back(name + ": tail vocabulary too small to corrupt, omitted");
      continue;
    }
    const std::size_t n =
        config.max_positives ? std::min(config.max_positives, edges.size())
                             : edges.size();

    // Tail-path vectors for the whole tail vocabulary.
    const auto& rp = model.relation_for(et);
    const auto paths = score_paths(model.spec, model.head_is_anchor(et));
    std::vector<double> tails(n_tails * dim);
    for (EntityId t = 0; t < n_tails; ++t) {
      apply_path(paths.tail, rp, model.tables[type.tail].row(t),
                 Vec(tails).subspan(t * dim, dim));
    }
    auto tail_vec = [&](EntityId t) {
      return ConstVec(tails).subspan(static_cast<std::size_t>(t) * dim, dim);
    };

    std::vector<EntityId> shared;
    if (config.share_corruptions) {
      Rng rng(derive_seed(config.seed, {et, 0x5a4ed}));
      shared.resize(config.negatives);
      for (auto& c : shared) c = uniform_index(rng, n_tails);
    }

    std::vector<std::size_t> ranks(n);
    parallel_for(n, config.threads, [&](std::size_t i) {
      const Triple& pos = edges[i];
      std::vector<double> head(dim);
      apply_path(paths.head, rp, model.tables[type.head].row(pos.head), head);
      const double s = distance(dist, head, tail_vec(pos.tail));
      std::size_t rank = 1;
      if (config.share_corruptions) {
        for (EntityId c : shared) {
          if (c != pos.tail && distance(dist, head, tail_vec(c)) >= s) ++rank;
        }
      } else {
        Rng rng(derive_seed(config.seed, {et, i}));
        for (std::size_t j = 0; j < config.negatives; ++j) {
          EntityId c = uniform_index(rng, n_tails - 1);
          if (c >= pos.tail) ++c;
          if (distance(dist, head, tail_vec(c)) >= s) ++rank;
        }
      }
      ranks[i] = rank;
    });

    EdgeTypeResult result;
    result.edge_type = name;
    result.positives = n;
    for (std::size_t k : config.ks) {
      result.recall.emplace_back(k, *recall_at_k(ranks, k));
    }
    report.results.push_back(std::move(result));
  }
  return report;
}

void write_report_json(std::ostream& out, const EvalReport& report) {
  nlohmann::ordered_json j;
  j["checkpoint"] = report.checkpoint;
  j["protocol"] = {
      {"negatives_per_positive", report.config.negatives},
      {"ks", report.config.ks},
      {"seed", report.config.seed},
      {"max_positives", report.config.max_positives},
      {"share_corruptions", report.config.share_corruptions},
      {"tie_rule", "pessimistic"},
      {"corruption", "tail, uniform, unfiltered"},
  };
  nlohmann::ordered_json chance = nlohmann::ordered_json::object();
  for (auto k : report.config.ks) chance[std::to_string(k)] = report.chance(k);
  j["chance"] = chance;
  j["edge_types"] = nlohmann::ordered_json::array();
  for (const auto& r : report.results) {
    nlohmann::ordered_json e;
    e["edge_type"] = r.edge_type;
    e["positives"] = r.positives;
    nlohmann::ordered_json rec = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.recall) rec[std::to_string(k)] = v;
    e["recall"] = rec;
    j["edge_types"].push_back(std::move(e));
  }
  j["notes"] = report.notes;
  out << j.dump(2) << '\n';
}

void write_report_tsv(std::ostream& out, const EvalReport& report) {
  out << "edge_type\tk\trecall\tn\tchance\n";
  char buf[64];
  for (const auto& r : report.results) {
    for (const auto& [k, v] : r.recall) {
      std::snprintf(buf, sizeof(buf), "%.6f\t%zu\t%.6f", v, r.positives,
                    report.chance(k));
      out << r.edge_type << '\t' << k << '\t' << buf << '\n';
    }
  }
}

void write_comparison_table(
    std::ostream& out,
    const std::vector<std::pair<std::string, EvalReport>>& reports) {
  if (reports.empty()) return;
  std::vector<std::string> edge_types;
  for (const auto& [label, rep] : reports) {
    for (const auto& r : rep.results) {
      if (std::find(edge_types.begin(), edge_types.end(), r.edge_type) ==
          edge_types.end()) {
        edge_types.push_back(r.edge_type);
      }
    }
  }
  std::size_t first_width = std::string("edge type").size();
  for (const auto& e : edge_types) first_width = std::max(first_width, e.size());
  std::size_t col_width = 10;
  for (const auto& [label, rep] : reports) {
    col_width = std::max(col_width, label.size());
  }

  for (std::size_t k : reports.front().second.config.ks) {
    out << "Recall@" << k << " (chance "
        << std::setprecision(4) << reports.front().second.chance(k) << ")\n";
    out << std::left << std::setw(static_cast<int>(first_width)) << "edge type";
    for (const auto& [label, rep] : reports) {
      out << " | " << std::setw(static_cast<int>(col_width)) << label;
    }
    out << '\n' << std::string(first_width, '-');
    for (std::size_t i = 0; i < reports.size(); ++i) {
      out << "-+-" << std::string(col_width, '-');
    }
    out << '\n';
    for (const auto& e : edge_types) {
      out << std::setw(static_cast<int>(first_width)) << e;
      for (const auto& [label, rep] : reports) {
        const auto v = rep.recall(e, k);
        std::ostringstream cell;
        if (v) {
          cell << std::fixed << std::setprecision(4) << *v;
        } else {
          cell << "-";
        }
        out << " | " << std::setw(static_cast<int>(col_width)) << cell.str();
      }
      out << '\n';
    }
    out << '\n';
  }
  out << std::right;
}

}  // namespace kge
