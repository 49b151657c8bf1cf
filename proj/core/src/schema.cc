#include "kge/schema.h"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "kge/error.h"

namespace kge {
namespace {

bool valid_label(std::string_view s) {
  return !s.empty() && std::none_of(s.begin(), s.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r';
  });
}

}  // namespace

EntityTypeId Schema::add_entity_type(std::string name) {
  if (!valid_label(name)) {
    throw SchemaError("invalid entity type name '" + name + "'");
  }
  if (find_entity_type(name)) {
    throw SchemaError("duplicate entity type '" + name + "'");
  }
  entity_types_.push_back(std::move(name));
  return static_cast<EntityTypeId>(entity_types_.size() - 1);
}

EdgeTypeId Schema::add_edge_type(std::string_view head, std::string activity,
                                 std::string_view tail) {
  if (!valid_label(activity)) {
    throw SchemaError("invalid activity label '" + activity + "'");
  }
  EdgeType edge{entity_type(head), std::move(activity), entity_type(tail)};
  if (find_edge_type(edge.head, edge.activity, edge.tail)) {
    throw SchemaError("duplicate edge type '" + std::string(head) + " " +
                      edge.activity + " " + std::string(tail) + "'");
  }
  const RelationType rel = relation_type_of(edge);
  auto rel_id = find_relation(rel);
  if (!rel_id) {
    relations_.push_back(rel);
    rel_id = static_cast<RelationId>(relations_.size() - 1);
  }
  edge_types_.push_back(std::move(edge));
  edge_relation_.push_back(*rel_id);
  return static_cast<EdgeTypeId>(edge_types_.size() - 1);
}

std::optional<EntityTypeId> Schema::find_entity_type(
    std::string_view name) const {
  for (std::size_t i = 0; i < entity_types_.size(); ++i) {
    if (entity_types_[i] == name) return static_cast<EntityTypeId>(i);
  }
  return std::nullopt;
}

EntityTypeId Schema::entity_type(std::string_view name) const {
  if (auto id = find_entity_type(name)) return *id;
  throw SchemaError("unknown entity type '" + std::string(name) + "'");
}

std::optional<EdgeTypeId> Schema::find_edge_type(EntityTypeId head,
                                                 std::string_view activity,
                                                 EntityTypeId tail) const {
  for (std::size_t i = 0; i < edge_types_.size(); ++i) {
    const auto& e = edge_types_[i];
    if (e.head == head && e.tail == tail && e.activity == activity) {
      return static_cast<EdgeTypeId>(i);
    }
  }
  return std::nullopt;
}

std::optional<RelationId> Schema::find_relation(RelationType rel) const {
  auto it = std::find(relations_.begin(), relations_.end(), rel);
  if (it == relations_.end()) return std::nullopt;
  return static_cast<RelationId>(it - relations_.begin());
}

std::string Schema::edge_type_name(EdgeTypeId id) const {
  const auto& e = edge_types_.at(id);
  return entity_types_[e.head] + "-" + e.activity + "-" +
         entity_types_[e.tail];
}

std::string Schema::relation_name(RelationId id) const {
  const auto& r = relations_.at(id);
  return entity_types_[r.head] + ":" + entity_types_[r.tail];
}

Schema parse_schema(std::istream& in) {
  Schema schema;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::string keyword;
    if (!(fields >> keyword) || keyword[0] == '#') continue;
    std::vector<std::string> args;
    for (std::string a; fields >> a;) args.push_back(std::move(a));
    try {
      if (keyword == "entity" && args.size() == 1) {
        schema.add_entity_type(args[0]);
      } else if (keyword == "edge" && args.size() == 3) {
        schema.add_edge_type(args[0], args[1], args[2]);
      } else {
        throw ParseError("schema line " + std::to_string(line_no) +
                         ": expected 'entity <name>' or "
                         "'edge <head> <activity> <tail>'");
      }
    } catch (const SchemaError& e) {
      throw SchemaError("schema line " + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  return schema;
}

Schema read_schema_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open schema file '" + path + "'");
  return parse_schema(in);
}

void write_schema(std::ostream& out, const Schema& schema) {
  for (const auto& name : schema.entity_types()) {
    out << "entity " << name << '\n';
  }
  for (const auto& e : schema.edge_types()) {
    out << "edge " << schema.entity_name(e.head) << ' ' << e.activity << ' '
        << schema.entity_name(e.tail) << '\n';
  }
}

}  // namespace kge
