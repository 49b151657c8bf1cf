#include "kge/model.h"

#include <cmath>
#include <string>

#include "kge/error.h"
#include "kge/random.h"

namespace kge {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kTransE: return "TransE";
    case ModelKind::kTransR: return "TransR";
    case ModelKind::kTransRA: return "TransRA";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view s) {
  if (s == "TransE" || s == "transe") return ModelKind::kTransE;
  if (s == "TransR" || s == "transr") return ModelKind::kTransR;
  if (s == "TransRA" || s == "transra") return ModelKind::kTransRA;
  throw ConfigError("unknown model kind '" + std::string(s) +
                    "' (expected TransE, TransR or TransRA)");
}

std::string_view to_string(TranslationSide side) {
  return side == TranslationSide::kTail ? "tail" : "head";
}

TranslationSide parse_translation_side(std::string_view s) {
  if (s == "tail") return TranslationSide::kTail;
  if (s == "head") return TranslationSide::kHead;
  throw ConfigError("unknown translation side '" + std::string(s) +
                    "' (expected tail or head)");
}

void ModelSpec::validate(const Schema& schema) const {
  if (dim == 0) throw ConfigError("model dim must be >= 1");
  if (kind != ModelKind::kTransRA) {
    if (anchor) throw ConfigError("anchor is only valid for TransRA");
    return;
  }
  if (!anchor) throw ConfigError("TransRA requires an anchor entity type");
  if (*anchor >= schema.num_entity_types()) {
    throw ConfigError("anchor entity type out of range");
  }
  for (EdgeTypeId et = 0; et < schema.num_edge_types(); ++et) {
    const auto& e = schema.edge_type(et);
    if (e.tail == *anchor && e.head != *anchor) {
      throw ConfigError("TransRA places the anchor on the head side, but edge "
                        "type '" + schema.edge_type_name(et) +
                        "' has the anchor as its tail");
    }
  }
}

RelationParams RelationParams::identity(std::size_t dim) {
  return RelationParams{Matrix::identity(dim), std::vector<double>(dim, 0.0)};
}

void RelationGrad::clear() {
  std::fill(projection.values.begin(), projection.values.end(), 0.0);
  std::fill(translation.begin(), translation.end(), 0.0);
}

ScorePaths score_paths(const ModelSpec& spec, bool head_is_anchor) {
  if (head_is_anchor && spec.kind != ModelKind::kTransRA) {
    throw ContractViolation("head_is_anchor requires a TransRA model");
  }
  switch (spec.kind) {
    case ModelKind::kTransE:
      return {PathTransform::kTranslate, PathTransform::kIdentity};
    case ModelKind::kTransR:
      if (spec.translation == TranslationSide::kHead) {
        return {PathTransform::kProjectTranslate, PathTransform::kProject};
      }
      return {PathTransform::kProject, PathTransform::kProjectTranslate};
    case ModelKind::kTransRA:
      return {head_is_anchor ? PathTransform::kIdentity : PathTransform::kProject,
              PathTransform::kProjectTranslate};
  }
  throw ContractViolation("unknown model kind");
}

void apply_path(PathTransform path, const RelationParams& rp, ConstVec x,
                Vec out) {
  switch (path) {
    case PathTransform::kIdentity:
      std::copy(x.begin(), x.end(), out.begin());
      return;
    case PathTransform::kTranslate:
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + rp.translation[i];
      return;
    case PathTransform::kProject:
      matvec(rp.projection, x, out);
      return;
    case PathTransform::kProjectTranslate:
      matvec(rp.projection, x, out);
      axpy(1.0, rp.translation, out);
      return;
  }
}

void backprop_path(PathTransform path, const RelationParams& rp, ConstVec x,
                   ConstVec g, Vec grad_x, RelationGrad& grad_rel) {
  switch (path) {
    case PathTransform::kIdentity:
      axpy(1.0, g, grad_x);
      return;
    case PathTransform::kTranslate:
      axpy(1.0, g, grad_x);
      axpy(1.0, g, grad_rel.translation);
      return;
    case PathTransform::kProject:
      matvec_transposed_add(rp.projection, g, grad_x);
      outer_add(grad_rel.projection, g, x);
      return;
    case PathTransform::kProjectTranslate:
      matvec_transposed_add(rp.projection, g, grad_x);
      outer_add(grad_rel.projection, g, x);
      axpy(1.0, g, grad_rel.translation);
      return;
  }
}

double score(const ModelSpec& spec, const RelationParams& rp, ConstVec h,
             ConstVec t, bool head_is_anchor) {
  if (h.size() != t.size() || h.size() != rp.translation.size()) {
    throw ContractViolation("score: inconsistent dimensions");
  }
  const auto paths = score_paths(spec, head_is_anchor);
  std::vector<double> a(h.size()), b(t.size());
  apply_path(paths.head, rp, h, a);
  apply_path(paths.tail, rp, t, b);
  return distance(spec.distance, a, b);
}

ScoreGradients score_gradients(const ModelSpec& spec, const RelationParams& rp,
                               ConstVec h, ConstVec t, bool head_is_anchor) {
  if (h.size() != t.size() || h.size() != rp.translation.size()) {
    throw ContractViolation("score_gradients: inconsistent dimensions");
  }
  const std::size_t dim = h.size();
  const auto paths = score_paths(spec, head_is_anchor);
  std::vector<double> a(dim), b(dim), ga(dim, 0.0), gb(dim, 0.0);
  apply_path(paths.head, rp, h, a);
  apply_path(paths.tail, rp, t, b);

  ScoreGradients out;
  out.score = distance_backward(spec.distance, a, b, 1.0, ga, gb);
  out.head.assign(dim, 0.0);
  out.tail.assign(dim, 0.0);
  out.relation = RelationGrad(dim);
  backprop_path(paths.head, rp, h, ga, out.head, out.relation);
  backprop_path(paths.tail, rp, t, gb, out.tail, out.relation);
  return out;
}

std::vector<double> transform_to_anchor(const RelationParams& rp, ConstVec t) {
  std::vector<double> out(t.size());
  apply_path(PathTransform::kProjectTranslate, rp, t, out);
  return out;
}

bool Model::head_is_anchor(EdgeTypeId edge_type) const {
  return spec.kind == ModelKind::kTransRA && spec.anchor &&
         schema.edge_type(edge_type).head == *spec.anchor;
}

double Model::score_triple(const Triple& t) const {
  const auto& e = schema.edge_type(t.edge_type);
  return score(spec, relation_for(t.edge_type), tables[e.head].row(t.head),
               tables[e.tail].row(t.tail), head_is_anchor(t.edge_type));
}

std::optional<RelationId> Model::anchor_relation(EntityTypeId type) const {
  if (spec.kind != ModelKind::kTransRA || !spec.anchor) {
    throw ContractViolation(
        "anchor-space transforms exist only for TransRA models (this is " +
        std::string(to_string(spec.kind)) + ")");
  }
  return schema.find_relation(RelationType{*spec.anchor, type});
}

std::vector<double> Model::anchor_space_embedding(EntityTypeId type,
                                                  EntityId row) const {
  const auto rel = anchor_relation(type);
  const auto x = tables.at(type).row(row);
  if (type == *spec.anchor) return {x.begin(), x.end()};
  if (!rel) {
    throw ContractViolation("no relation from anchor '" +
                            schema.entity_name(*spec.anchor) + "' to '" +
                            schema.entity_name(type) +
                            "'; it cannot be moved into the anchor space");
  }
  return transform_to_anchor(relations[*rel], x);
}

Model init_model(const TripleStore& store, const ModelSpec& spec,
                 std::uint64_t seed) {
  spec.validate(store.schema);
  Model model;
  model.spec = spec;
  model.schema = store.schema;
  model.vocab = store.vocab;

  const double bound = 1.0 / std::sqrt(static_cast<double>(spec.dim));
  std::uniform_real_distribution<double> init(-bound, bound);
  for (EntityTypeId type = 0; type < store.schema.num_entity_types(); ++type) {
    Rng rng(derive_seed(seed, {0x7ab1e, type}));
    Matrix table(store.vocab[type].size(), spec.dim);
    for (double& v : table.values) v = init(rng);
    model.tables.push_back(std::move(table));
  }
  model.relations.assign(store.schema.num_relations(),
                         RelationParams::identity(spec.dim));
  return model;
}

}  // namespace kge
