#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kge/schema.h"

namespace kge {

using EntityId = std::uint32_t;

struct Triple {
  EntityId head = 0;
  EdgeTypeId edge_type = 0;
  EntityId tail = 0;

  friend bool operator==(const Triple&, const Triple&) = default;
};

// Raw external id <-> contiguous local index for one entity type.
class Vocabulary {
 public:
  // Returns the existing index or appends the id (first-seen order).
  EntityId intern(std::string_view raw_id);
  std::optional<EntityId> find(std::string_view raw_id) const;
  const std::string& raw_id(EntityId index) const { return ids_.at(index); }
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.ids_ == b.ids_;
  }

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, EntityId> index_;
};

// Typed edge list partitioned by edge type. Immutable once built.
struct TripleStore {
  Schema schema;
  std::vector<Vocabulary> vocab;            // indexed by EntityTypeId
  std::vector<std::vector<Triple>> edges;   // indexed by EdgeTypeId

  explicit TripleStore(Schema s = {});

  std::size_t num_edges() const;
  std::size_t vocab_size(EntityTypeId type) const { return vocab.at(type).size(); }
  // Throws ContractViolation on any out-of-range index or misfiled triple.
  void validate() const;
};

struct EdgeReadOptions {
  // When false, raw ids missing from the supplied vocabularies are rejected
  // instead of appended (used to read holdout edges against a checkpoint).
  bool allow_new_ids = true;
};

// Edge file format: one edge per line,
//   head_type \t head_raw_id \t activity \t tail_type \t tail_raw_id
// '#'-prefixed and blank lines are skipped. Duplicates are kept.
TripleStore read_edges(std::istream& in, const Schema& schema,
                       std::vector<Vocabulary> vocab = {},
                       EdgeReadOptions options = {});
TripleStore load_edges(const std::string& path, const Schema& schema,
                       std::vector<Vocabulary> vocab = {},
                       EdgeReadOptions options = {});
void write_edges(std::ostream& out, const TripleStore& store);

struct SplitManifest {
  struct Entry {
    std::string edge_type;
    std::size_t requested = 0;
    std::size_t actual = 0;
  };
  std::uint64_t seed = 0;
  std::vector<Entry> entries;
};

struct HoldoutSplit {
  TripleStore train;
  TripleStore eval;
  SplitManifest manifest;
};

// Moves min(n, available) edges per edge type into the eval store, uniformly
// without replacement. Both stores keep the full vocabularies and the
// original relative edge order.
HoldoutSplit split_holdout(const TripleStore& store,
                           std::size_t n_per_edge_type, std::uint64_t seed);

void write_split_manifest(std::ostream& out, const SplitManifest& manifest);

}  // namespace kge
