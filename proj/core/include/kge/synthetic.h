#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "kge/triple_store.h"

namespace kge {

struct SyntheticEdgeSpec {
  std::string head;
  std::string activity;
  std::string tail;
  std::size_t count = 0;
  // Crossing edge types connect community c to community (c + 1) mod C
  // and ring position p to p + 1/2. A relation-specific linear map can do
  // that; one translation shared with the other relations cannot.
  bool crossing = false;
};

struct SyntheticEntitySpec {
  std::string name;
  std::size_t count = 0;
};

// Planted-partition graph. Every entity gets a community and a position on
// a unit ring. An edge keeps its tail in the head's target community with
// probability p_in / (p_in + p_out), otherwise the tail comes from a
// uniformly chosen other community. Inside the community the tail is the
// member nearest to head position + Laplace(locality) noise, so
// neighbourhoods are local; locality == 0 means uniform inside the community.
struct SyntheticConfig {
  std::size_t communities = 10;
  double p_in = 0.95;
  double p_out = 0.05;
  double locality = 0.02;
  std::vector<SyntheticEntitySpec> entities;
  std::vector<SyntheticEdgeSpec> edges;

  // Throws ConfigError.
  void validate() const;
  // Four entity types, seven edge types (user-follow-user crossing), 200k edges.
  static SyntheticConfig desk_default();
};

// Planted community per entity, indexed [entity type][local index].
using Communities = std::vector<std::vector<std::uint32_t>>;

struct SyntheticGraph {
  TripleStore store;
  Communities community;
  std::vector<std::vector<double>> position;
};

SyntheticGraph generate_synthetic(const SyntheticConfig& config,
                                  std::uint64_t seed);

// communities file: "entity_type \t raw_id \t community" per line.
void write_communities(std::ostream& out, const TripleStore& store,
                       const Communities& community);
// Maps the file onto the given vocabularies; entities absent from the
// vocabularies are skipped, vocabulary entries without a label are an error.
Communities read_communities(std::istream& in, const Schema& schema,
                             const std::vector<Vocabulary>& vocab);

}  // namespace kge
