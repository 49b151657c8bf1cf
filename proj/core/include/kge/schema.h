#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kge {

using EntityTypeId = std::uint32_t;
using EdgeTypeId = std::uint32_t;
using RelationId = std::uint32_t;

struct EdgeType {
  EntityTypeId head = 0;
  std::string activity;
  EntityTypeId tail = 0;

  friend bool operator==(const EdgeType&, const EdgeType&) = default;
};

// The (head type, tail type) pair that relation parameters are shared over.
// Edge types differing only in activity collapse onto one RelationType.
struct RelationType {
  EntityTypeId head = 0;
  EntityTypeId tail = 0;

  friend auto operator<=>(const RelationType&, const RelationType&) = default;
};

inline RelationType relation_type_of(const EdgeType& edge) {
  return RelationType{edge.head, edge.tail};
}

// Entity types and edge types of a heterogeneous graph. Ids are dense and
// assigned in declaration order; relation ids follow first appearance among
// the edge types.
class Schema {
 public:
  EntityTypeId add_entity_type(std::string name);
  EdgeTypeId add_edge_type(std::string_view head, std::string activity,
                           std::string_view tail);

  std::optional<EntityTypeId> find_entity_type(std::string_view name) const;
  // Throws SchemaError when the name is not declared.
  EntityTypeId entity_type(std::string_view name) const;
  std::optional<EdgeTypeId> find_edge_type(EntityTypeId head,
                                           std::string_view activity,
                                           EntityTypeId tail) const;

  const std::string& entity_name(EntityTypeId id) const {
    return entity_types_.at(id);
  }
  const EdgeType& edge_type(EdgeTypeId id) const { return edge_types_.at(id); }
  // "head-activity-tail", e.g. "user-click-item".
  std::string edge_type_name(EdgeTypeId id) const;
  std::string relation_name(RelationId id) const;

  std::size_t num_entity_types() const { return entity_types_.size(); }
  std::size_t num_edge_types() const { return edge_types_.size(); }
  std::size_t num_relations() const { return relations_.size(); }

  const std::vector<std::string>& entity_types() const { return entity_types_; }
  const std::vector<EdgeType>& edge_types() const { return edge_types_; }
  const std::vector<RelationType>& relation_types() const { return relations_; }

  RelationId relation_of(EdgeTypeId edge) const {
    return edge_relation_.at(edge);
  }
  std::optional<RelationId> find_relation(RelationType rel) const;

  friend bool operator==(const Schema& a, const Schema& b) {
    return a.entity_types_ == b.entity_types_ &&
           a.edge_types_ == b.edge_types_;
  }

 private:
  std::vector<std::string> entity_types_;
  std::vector<EdgeType> edge_types_;
  std::vector<RelationType> relations_;
  std::vector<RelationId> edge_relation_;
};

// Schema text format, one declaration per line:
//   entity <name>
//   edge <head> <activity> <tail>
// Blank lines and lines starting with '#' are ignored.
Schema parse_schema(std::istream& in);
Schema read_schema_file(const std::string& path);
void write_schema(std::ostream& out, const Schema& schema);

}  // namespace kge
