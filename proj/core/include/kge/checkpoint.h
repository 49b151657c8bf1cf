#pragma once

#include <iosfwd>
#include <string>

#include "kge/model.h"

namespace kge {

// Binary checkpoint, little-endian throughout:
//
//   char[8]  magic "KGECKPT\0"
//   u32      version (= 1)
//   u32      dim
//   u32      model kind      (0 TransE, 1 TransR, 2 TransRA)
//   u32      distance        (0 cosine, 1 l2)
//   u32      translation side (0 tail, 1 head)
//   i32      anchor entity type id, -1 if none
//   u64      training step
//   u32      entity type count E, then E x { str name, u64 vocab size }
//   u32      edge type count,     then each { u32 head, str activity, u32 tail }
//   u32      relation count R,    then R x { u32 head, u32 tail }
//   E x vocab: vocab size x str raw id
//   E x table: vocab size * dim f64, row-major
//   R x { dim * dim f64 projection (row-major), dim f64 translation }
//
// where str is { u32 byte length, bytes }.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(std::ostream& out, const Model& model);
Model load_checkpoint(std::istream& in);

// Writes to path.tmp and renames, so readers never see a partial file.
void save_checkpoint_file(const std::string& path, const Model& model);
Model load_checkpoint_file(const std::string& path);

// TSV rows "entity_type \t raw_id \t v0 ... v{dim-1}". With anchor_space set
// every entity is written in the anchor space via
// Model::anchor_space_embedding; throws ContractViolation for non-TransRA
// models or entity types with no anchor relation.
void write_embeddings_tsv(std::ostream& out, const Model& model,
                          bool anchor_space);

}  // namespace kge
