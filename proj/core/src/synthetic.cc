#include "kge/synthetic.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "kge/error.h"
#include "kge/random.h"

namespace kge {

void SyntheticConfig::validate() const {
  if (communities == 0) throw ConfigError("synthetic.communities must be >= 1");
  if (!(p_in > p_out) || p_out < 0.0) {
    throw ConfigError("synthetic: require p_in > p_out >= 0");
  }
  if (!(locality >= 0.0)) throw ConfigError("synthetic.locality must be >= 0");
  if (entities.empty()) throw ConfigError("synthetic.entities is empty");
  for (const auto& e : edges) {
    for (const auto* side : {&e.head, &e.tail}) {
      auto it = std::find_if(entities.begin(), entities.end(),
                             [&](const auto& s) { return s.name == *side; });
      if (it == entities.end()) {
        throw ConfigError("synthetic edge '" + e.head + " " + e.activity + " " +
                          e.tail + "' references undeclared entity type '" +
                          *side + "'");
      }
      if (it->count == 0) {
        throw ConfigError("synthetic entity type '" + *side +
                          "' has zero entities but is used by edge type '" +
                          e.head + " " + e.activity + " " + e.tail + "'");
      }
    }
  }
}

SyntheticConfig SyntheticConfig::desk_default() {
  SyntheticConfig c;
  c.entities = {{"user", 1000}, {"item", 2000}, {"ad", 200}, {"advertiser", 50}};
  c.edges = {
      {"user", "click", "item", 60000, false},
      {"user", "checkout", "item", 20000, false},
      {"user", "click", "ad", 40000, false},
      {"user", "checkout", "advertiser", 10000, false},
      {"user", "follow", "user", 20000, true},
      {"advertiser", "create", "ad", 10000, false},
      {"ad", "contain", "item", 40000, false},
  };
  return c;
}

namespace {

// Members of one (entity type, community), sorted by ring position.
struct Block {
  std::vector<double> position;
  std::vector<EntityId> member;
};

double ring_distance(double a, double b) {
  const double d = std::fabs(a - b);
  return std::min(d, 1.0 - d);
}

EntityId nearest_on_ring(const Block& block, double target) {
  const auto& pos = block.position;
  const std::size_t n = pos.size();
  const std::size_t hi =
      static_cast<std::size_t>(std::lower_bound(pos.begin(), pos.end(), target) -
                               pos.begin());
  const std::size_t right = hi % n;
  const std::size_t left = (hi + n - 1) % n;
  return ring_distance(pos[left], target) <= ring_distance(pos[right], target)
             ? block.member[left]
             : block.member[right];
}

}  // namespace

SyntheticGraph generate_synthetic(const SyntheticConfig& config,
                                  std::uint64_t seed) {
  config.validate();

  Schema schema;
  for (const auto& e : config.entities) schema.add_entity_type(e.name);
  for (const auto& e : config.edges) {
    schema.add_edge_type(e.head, e.activity, e.tail);
  }

  const std::size_t C = config.communities;
  SyntheticGraph graph{TripleStore(schema), {}, {}};
  graph.community.resize(schema.num_entity_types());
  graph.position.resize(schema.num_entity_types());
  std::vector<std::vector<Block>> blocks(schema.num_entity_types(),
                                         std::vector<Block>(C));

  for (EntityTypeId type = 0; type < schema.num_entity_types(); ++type) {
    const auto& spec = config.entities[type];
    Rng rng(derive_seed(seed, {0x5eed, type}));
    auto& vocab = graph.store.vocab[type];
    auto& comm = graph.community[type];
    auto& pos = graph.position[type];
    comm.resize(spec.count);
    pos.resize(spec.count);
    for (std::size_t i = 0; i < spec.count; ++i) {
      vocab.intern(spec.name + "_" + std::to_string(i));
      comm[i] = static_cast<std::uint32_t>(i % C);
      pos[i] = uniform01(rng);
    }
    std::vector<std::size_t> order(spec.count);
    for (std::size_t i = 0; i < spec.count; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return pos[a] < pos[b]; });
    for (std::size_t i : order) {
      auto& b = blocks[type][comm[i]];
      b.position.push_back(pos[i]);
      b.member.push_back(static_cast<EntityId>(i));
    }
  }

  const double p_target = config.p_in / (config.p_in + config.p_out);
  for (EdgeTypeId et = 0; et < schema.num_edge_types(); ++et) {
    const auto& spec = config.edges[et];
    const auto& type = schema.edge_type(et);
    const std::size_t n_heads = config.entities[type.head].count;
    const std::size_t n_tails = config.entities[type.tail].count;
    Rng rng(derive_seed(seed, {0xed9e, et}));
    auto& out = graph.store.edges[et];
    out.reserve(spec.count);
    for (std::size_t n = 0; n < spec.count; ++n) {
      const EntityId head = uniform_index(rng, n_heads);
      const std::uint32_t head_comm = graph.community[type.head][head];
      const std::uint32_t target =
          spec.crossing ? static_cast<std::uint32_t>((head_comm + 1) % C)
                        : head_comm;
      const bool intra = C == 1 || uniform01(rng) < p_target;
      std::uint32_t tail_comm = target;
      if (!intra) {
        tail_comm = uniform_index(rng, C - 1);
        if (tail_comm >= target) ++tail_comm;
      }
      const Block& block = blocks[type.tail][tail_comm];
      EntityId tail;
      if (block.member.empty()) {
        tail = uniform_index(rng, n_tails);
      } else if (intra && config.locality > 0.0) {
        // Laplace offset as a signed exponential.
        const double offset =
            std::exponential_distribution<double>(1.0 / config.locality)(rng);
        const double sign = uniform01(rng) < 0.5 ? -1.0 : 1.0;
        double p = graph.position[type.head][head] + sign * offset;
        if (spec.crossing) p += 0.5;
        p -= std::floor(p);
        tail = nearest_on_ring(block, p);
      } else {
        tail = block.member[uniform_index(rng, block.member.size())];
      }
      out.push_back(Triple{head, et, tail});
    }
  }
  return graph;
}

void write_communities(std::ostream& out, const TripleStore& store,
                       const Communities& community) {
  for (EntityTypeId type = 0; type < store.schema.num_entity_types(); ++type) {
    const auto& name = store.schema.entity_name(type);
    for (EntityId i = 0; i < store.vocab[type].size(); ++i) {
      out << name << '\t' << store.vocab[type].raw_id(i) << '\t'
          << community.at(type).at(i) << '\n';
    }
  }
}

Communities read_communities(std::istream& in, const Schema& schema,
                             const std::vector<Vocabulary>& vocab) {
  constexpr std::uint32_t kMissing = 0xffffffffu;
  Communities result(schema.num_entity_types());
  for (EntityTypeId t = 0; t < schema.num_entity_types(); ++t) {
    result[t].assign(vocab.at(t).size(), kMissing);
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string type_name, raw;
    long long comm = -1;
    if (!(fields >> type_name >> raw >> comm) || comm < 0) {
      throw ParseError("communities line " + std::to_string(line_no) +
                       ": expected 'entity_type raw_id community'");
    }
    const auto type = schema.find_entity_type(type_name);
    if (!type) {
      throw SchemaError("communities line " + std::to_string(line_no) +
                        ": unknown entity type '" + type_name + "'");
    }
    if (auto id = vocab[*type].find(raw)) {
      result[*type][*id] = static_cast<std::uint32_t>(comm);
    }
  }
  for (EntityTypeId t = 0; t < result.size(); ++t) {
    for (EntityId i = 0; i < result[t].size(); ++i) {
      if (result[t][i] == kMissing) {
        throw ParseError("communities file has no label for " +
                         schema.entity_name(t) + " '" + vocab[t].raw_id(i) +
                         "'");
      }
    }
  }
  return result;
}

}  // namespace kge
