#include "kge/triple_store.h"

#include <algorithm>
#include <array>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include "kge/error.h"
#include "kge/random.h"

namespace kge {

EntityId Vocabulary::intern(std::string_view raw_id) {
  auto [it, inserted] = index_.try_emplace(std::string(raw_id),
                                           static_cast<EntityId>(ids_.size()));
  if (inserted) ids_.emplace_back(raw_id);
  return it->second;
}

std::optional<EntityId> Vocabulary::find(std::string_view raw_id) const {
  auto it = index_.find(std::string(raw_id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TripleStore::TripleStore(Schema s)
    : schema(std::move(s)),
      vocab(schema.num_entity_types()),
      edges(schema.num_edge_types()) {}

std::size_t TripleStore::num_edges() const {
  std::size_t n = 0;
  for (const auto& e : edges) n += e.size();
  return n;
}

void TripleStore::validate() const {
  if (vocab.size() != schema.num_entity_types() ||
      edges.size() != schema.num_edge_types()) {
    throw ContractViolation("triple store partitions do not match schema");
  }
  for (EdgeTypeId et = 0; et < edges.size(); ++et) {
    const auto& type = schema.edge_type(et);
    for (const auto& t : edges[et]) {
      if (t.edge_type != et || t.head >= vocab[type.head].size() ||
          t.tail >= vocab[type.tail].size()) {
        throw ContractViolation("invalid triple in edge type " +
                                schema.edge_type_name(et));
      }
    }
  }
}

namespace {

// Splits on tabs; returns false unless exactly five non-empty fields.
bool split_fields(std::string_view line, std::array<std::string_view, 5>& out) {
  std::size_t n = 0;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    const std::string_view field =
        line.substr(start, tab == std::string_view::npos ? tab : tab - start);
    if (n == out.size() || field.empty()) return false;
    out[n++] = field;
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return n == out.size();
}

}  // namespace

TripleStore read_edges(std::istream& in, const Schema& schema,
                       std::vector<Vocabulary> vocab, EdgeReadOptions options) {
  TripleStore store(schema);
  if (!vocab.empty()) {
    if (vocab.size() != schema.num_entity_types()) {
      throw ContractViolation("vocabulary count does not match schema");
    }
    store.vocab = std::move(vocab);
  }

  auto resolve = [&](EntityTypeId type, std::string_view raw,
                     std::size_t line_no) -> EntityId {
    auto& v = store.vocab[type];
    if (options.allow_new_ids) return v.intern(raw);
    if (auto id = v.find(raw)) return *id;
    throw SchemaError("line " + std::to_string(line_no) + ": " +
                      schema.entity_name(type) + " '" + std::string(raw) +
                      "' is not in the vocabulary");
  };

  std::string line;
  std::size_t line_no = 0;
  std::array<std::string_view, 5> f;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!split_fields(line, f)) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected 5 tab-separated fields");
    }
    const auto head_type = schema.find_entity_type(f[0]);
    const auto tail_type = schema.find_entity_type(f[3]);
    if (!head_type || !tail_type) {
      throw SchemaError("line " + std::to_string(line_no) +
                        ": unknown entity type '" +
                        std::string(head_type ? f[3] : f[0]) + "'");
    }
    const auto edge_type = schema.find_edge_type(*head_type, f[2], *tail_type);
    if (!edge_type) {
      throw SchemaError("line " + std::to_string(line_no) +
                        ": undeclared edge type '" + std::string(f[0]) + " " +
                        std::string(f[2]) + " " + std::string(f[3]) + "'");
    }
    Triple t;
    t.head = resolve(*head_type, f[1], line_no);
    t.edge_type = *edge_type;
    t.tail = resolve(*tail_type, f[4], line_no);
    store.edges[*edge_type].push_back(t);
  }
  return store;
}

TripleStore load_edges(const std::string& path, const Schema& schema,
                       std::vector<Vocabulary> vocab, EdgeReadOptions options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open edge file '" + path + "'");
  return read_edges(in, schema, std::move(vocab), options);
}

void write_edges(std::ostream& out, const TripleStore& store) {
  const auto& schema = store.schema;
  for (EdgeTypeId et = 0; et < store.edges.size(); ++et) {
    const auto& type = schema.edge_type(et);
    const auto& head_name = schema.entity_name(type.head);
    const auto& tail_name = schema.entity_name(type.tail);
    for (const auto& t : store.edges[et]) {
      out << head_name << '\t' << store.vocab[type.head].raw_id(t.head) << '\t'
          << type.activity << '\t' << tail_name << '\t'
          << store.vocab[type.tail].raw_id(t.tail) << '\n';
    }
  }
}

HoldoutSplit split_holdout(const TripleStore& store,
                           std::size_t n_per_edge_type, std::uint64_t seed) {
  HoldoutSplit split{TripleStore(store.schema), TripleStore(store.schema), {}};
  split.train.vocab = store.vocab;
  split.eval.vocab = store.vocab;
  split.manifest.seed = seed;

  for (EdgeTypeId et = 0; et < store.edges.size(); ++et) {
    const auto& edges = store.edges[et];
    const std::size_t take = std::min(n_per_edge_type, edges.size());

    // Partial Fisher-Yates over positions, then restore original order.
    Rng rng(derive_seed(seed, {et}));
    std::vector<std::size_t> order(edges.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < take; ++i) {
      const std::size_t j = i + uniform_index(rng, edges.size() - i);
      std::swap(order[i], order[j]);
    }
    std::vector<char> held(edges.size(), 0);
    for (std::size_t i = 0; i < take; ++i) held[order[i]] = 1;

    auto& train = split.train.edges[et];
    auto& eval = split.eval.edges[et];
    train.reserve(edges.size() - take);
    eval.reserve(take);
    for (std::size_t i = 0; i < edges.size(); ++i) {
      (held[i] ? eval : train).push_back(edges[i]);
    }
    split.manifest.entries.push_back(
        {store.schema.edge_type_name(et), n_per_edge_type, take});
  }
  return split;
}

void write_split_manifest(std::ostream& out, const SplitManifest& manifest) {
  out << "seed\t" << manifest.seed << '\n';
  out << "edge_type\trequested\tactual\n";
  for (const auto& e : manifest.entries) {
    out << e.edge_type << '\t' << e.requested << '\t' << e.actual << '\n';
  }
}

}  // namespace kge
