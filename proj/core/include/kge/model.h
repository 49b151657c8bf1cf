#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "kge/math.h"
#include "kge/schema.h"
#include "kge/triple_store.h"

namespace kge {

enum class ModelKind { kTransE, kTransR, kTransRA };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view s);

// Which path carries the relation translation in TransR. kTail gives
// dist(M h, M t + T), the convention TransRA uses on its non-anchor branch;
// kHead gives dist(M h + T, M t).
enum class TranslationSide { kTail, kHead };

std::string_view to_string(TranslationSide side);
TranslationSide parse_translation_side(std::string_view s);

struct ModelSpec {
  ModelKind kind = ModelKind::kTransRA;
  Distance distance = Distance::kCosine;
  TranslationSide translation = TranslationSide::kTail;
  // Set iff kind == kTransRA.
  std::optional<EntityTypeId> anchor;
  std::size_t dim = 64;

  // Throws ConfigError. For TransRA the anchor may only appear on the head
  // side of edge types.
  void validate(const Schema& schema) const;
};

// Per-relation projection M (dim x dim) and translation T (dim).
struct RelationParams {
  Matrix projection;
  std::vector<double> translation;

  static RelationParams identity(std::size_t dim);
  friend bool operator==(const RelationParams&, const RelationParams&) = default;
};

// Gradient accumulator with the same shape as RelationParams.
struct RelationGrad {
  Matrix projection;
  std::vector<double> translation;

  explicit RelationGrad(std::size_t dim = 0)
      : projection(dim, dim), translation(dim) {}
  void clear();
};

// What a score applies to one side of the triple before the distance.
enum class PathTransform {
  kIdentity,          // x
  kTranslate,         // x + T
  kProject,           // M x
  kProjectTranslate,  // M x + T
};

struct ScorePaths {
  PathTransform head;
  PathTransform tail;
};

// TransE:              head x + T,  tail x
// TransR (tail side):  head M x,    tail M x + T
// TransR (head side):  head M x + T, tail M x
// TransRA, anchor head: head x,     tail M x + T
// TransRA, other head:  head M x,   tail M x + T
// Throws ContractViolation if head_is_anchor is set for a non-TransRA spec.
ScorePaths score_paths(const ModelSpec& spec, bool head_is_anchor);

void apply_path(PathTransform path, const RelationParams& rp, ConstVec x,
                Vec out);
// Given g = d(loss)/d(out), accumulates into grad_x and, when the path uses
// them, into grad_rel.
void backprop_path(PathTransform path, const RelationParams& rp, ConstVec x,
                   ConstVec g, Vec grad_x, RelationGrad& grad_rel);

double score(const ModelSpec& spec, const RelationParams& rp, ConstVec h,
             ConstVec t, bool head_is_anchor);

struct ScoreGradients {
  double score = 0.0;
  std::vector<double> head;
  std::vector<double> tail;
  RelationGrad relation;
};

ScoreGradients score_gradients(const ModelSpec& spec, const RelationParams& rp,
                               ConstVec h, ConstVec t, bool head_is_anchor);

// M t + T: the tail's representation in the anchor space.
std::vector<double> transform_to_anchor(const RelationParams& rp, ConstVec t);

// Embedding tables plus relation parameters for one schema.
struct Model {
  ModelSpec spec;
  Schema schema;
  std::vector<Vocabulary> vocab;         // indexed by EntityTypeId
  std::vector<Matrix> tables;            // vocab size x dim per entity type
  std::vector<RelationParams> relations; // indexed by RelationId
  std::uint64_t step = 0;

  bool head_is_anchor(EdgeTypeId edge_type) const;
  const RelationParams& relation_for(EdgeTypeId edge_type) const {
    return relations[schema.relation_of(edge_type)];
  }
  double score_triple(const Triple& t) const;

  // Relation (anchor, type) used to move `type` into the anchor space, or
  // nullopt if the schema has none. Throws ContractViolation unless TransRA.
  std::optional<RelationId> anchor_relation(EntityTypeId type) const;
  // Anchor entities are returned unchanged; others go through
  // transform_to_anchor with anchor_relation(type). Throws ContractViolation
  // if no such relation exists.
  std::vector<double> anchor_space_embedding(EntityTypeId type,
                                             EntityId row) const;
};

// Rows i.i.d. uniform in [-1/sqrt(dim), 1/sqrt(dim)]; M = I and T = 0 for
// every relation type in the store's schema.
Model init_model(const TripleStore& store, const ModelSpec& spec,
                 std::uint64_t seed);

}  // namespace kge
