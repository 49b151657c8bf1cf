#include "kge/checkpoint.h"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>

#include "kge/error.h"

namespace kge {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'K', 'G', 'E', 'C', 'K', 'P', 'T', '\0'};

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  template <typename T>
  void pod(T v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void str(const std::string& s) {
    pod(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void doubles(std::span<const double> v) {
    out_.write(reinterpret_cast<const char*>(v.data()),
               static_cast<std::streamsize>(v.size_bytes()));
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  template <typename T>
  T pod() {
    T v{};
    read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
  }
  std::string str() {
    const auto n = pod<std::uint32_t>();
    if (n > (1u << 20)) throw ParseError("checkpoint: implausible string length");
    std::string s(n, '\0');
    read(s.data(), n);
    return s;
  }
  void doubles(std::span<double> v) {
    read(reinterpret_cast<char*>(v.data()), v.size_bytes());
  }

 private:
  void read(char* dst, std::size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw ParseError("checkpoint: unexpected end of file");
    }
  }
  std::istream& in_;
};

}  // namespace

void save_checkpoint(std::ostream& out, const Model& model) {
  Writer w(out);
  out.write(kMagic, sizeof(kMagic));
  w.pod(kCheckpointVersion);
  w.pod(static_cast<std::uint32_t>(model.spec.dim));
  w.pod(static_cast<std::uint32_t>(model.spec.kind));
  w.pod(static_cast<std::uint32_t>(model.spec.distance));
  w.pod(static_cast<std::uint32_t>(model.spec.translation));
  w.pod(model.spec.anchor ? static_cast<std::int32_t>(*model.spec.anchor)
                          : std::int32_t{-1});
  w.pod(static_cast<std::uint64_t>(model.step));

  const auto& schema = model.schema;
  w.pod(static_cast<std::uint32_t>(schema.num_entity_types()));
  for (EntityTypeId t = 0; t < schema.num_entity_types(); ++t) {
    w.str(schema.entity_name(t));
    w.pod(static_cast<std::uint64_t>(model.vocab[t].size()));
  }
  w.pod(static_cast<std::uint32_t>(schema.num_edge_types()));
  for (const auto& e : schema.edge_types()) {
    w.pod(e.head);
    w.str(e.activity);
    w.pod(e.tail);
  }
  w.pod(static_cast<std::uint32_t>(schema.num_relations()));
  for (const auto& r : schema.relation_types()) {
    w.pod(r.head);
    w.pod(r.tail);
  }
  for (const auto& v : model.vocab) {
    for (EntityId i = 0; i < v.size(); ++i) w.str(v.raw_id(i));
  }
  for (const auto& table : model.tables) w.doubles(table.values);
  for (const auto& rp : model.relations) {
    w.doubles(rp.projection.values);
    w.doubles(rp.translation);
  }
  if (!out) throw IoError("checkpoint: write failed");
}

Model load_checkpoint(std::istream& in) {
  Reader r(in);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (in.gcount() != sizeof(magic) ||
      std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw ParseError("checkpoint: bad magic");
  }
  const auto version = r.pod<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw ParseError("checkpoint: unsupported version " +
                     std::to_string(version));
  }
  Model model;
  model.spec.dim = r.pod<std::uint32_t>();
  const auto kind = r.pod<std::uint32_t>();
  const auto dist = r.pod<std::uint32_t>();
  const auto side = r.pod<std::uint32_t>();
  if (kind > 2 || dist > 1 || side > 1) {
    throw ParseError("checkpoint: invalid model header");
  }
  model.spec.kind = static_cast<ModelKind>(kind);
  model.spec.distance = static_cast<Distance>(dist);
  model.spec.translation = static_cast<TranslationSide>(side);
  const auto anchor = r.pod<std::int32_t>();
  if (anchor >= 0) model.spec.anchor = static_cast<EntityTypeId>(anchor);
  model.step = r.pod<std::uint64_t>();

  const auto n_types = r.pod<std::uint32_t>();
  std::vector<std::uint64_t> sizes;
  for (std::uint32_t t = 0; t < n_types; ++t) {
    model.schema.add_entity_type(r.str());
    sizes.push_back(r.pod<std::uint64_t>());
  }
  const auto n_edges = r.pod<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_edges; ++i) {
    const auto head = r.pod<std::uint32_t>();
    auto activity = r.str();
    const auto tail = r.pod<std::uint32_t>();
    if (head >= n_types || tail >= n_types) {
      throw ParseError("checkpoint: edge type references unknown entity type");
    }
    model.schema.add_edge_type(model.schema.entity_name(head),
                               std::move(activity),
                               model.schema.entity_name(tail));
  }
  const auto n_rel = r.pod<std::uint32_t>();
  if (n_rel != model.schema.num_relations()) {
    throw ParseError("checkpoint: relation table does not match edge types");
  }
  for (std::uint32_t i = 0; i < n_rel; ++i) {
    const RelationType rel{r.pod<std::uint32_t>(), r.pod<std::uint32_t>()};
    if (!(rel == model.schema.relation_types()[i])) {
      throw ParseError("checkpoint: relation order mismatch");
    }
  }
  try {
    model.spec.validate(model.schema);
  } catch (const ConfigError& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }

  const std::size_t dim = model.spec.dim;
  model.vocab.resize(n_types);
  for (std::uint32_t t = 0; t < n_types; ++t) {
    for (std::uint64_t i = 0; i < sizes[t]; ++i) {
      model.vocab[t].intern(r.str());
    }
    if (model.vocab[t].size() != sizes[t]) {
      throw ParseError("checkpoint: duplicate raw id in vocabulary of '" +
                       model.schema.entity_name(t) + "'");
    }
  }
  for (std::uint32_t t = 0; t < n_types; ++t) {
    Matrix table(sizes[t], dim);
    r.doubles(table.values);
    model.tables.push_back(std::move(table));
  }
  for (std::uint32_t i = 0; i < n_rel; ++i) {
    RelationParams rp{Matrix(dim, dim), std::vector<double>(dim)};
    r.doubles(rp.projection.values);
    r.doubles(rp.translation);
    model.relations.push_back(std::move(rp));
  }
  return model;
}

void save_checkpoint_file(const std::string& path, const Model& model) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint '" + tmp + "'");
    save_checkpoint(out, model);
    out.flush();
    if (!out) throw IoError("cannot write checkpoint '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename checkpoint to '" + path + "': " + ec.message());
}

Model load_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path + "'");
  return load_checkpoint(in);
}

void write_embeddings_tsv(std::ostream& out, const Model& model,
                          bool anchor_space) {
  if (anchor_space) {
    if (model.spec.kind != ModelKind::kTransRA) {
      throw ContractViolation(
          "--anchor-space needs a TransRA checkpoint; " +
          std::string(to_string(model.spec.kind)) +
          " keeps entity types in separate spaces with no anchor transform");
    }
    // Fail before writing anything if some type cannot be moved.
    for (EntityTypeId t = 0; t < model.schema.num_entity_types(); ++t) {
      if (t != *model.spec.anchor && !model.anchor_relation(t)) {
        throw ContractViolation("entity type '" + model.schema.entity_name(t) +
                                "' has no relation from the anchor type '" +
                                model.schema.entity_name(*model.spec.anchor) +
                                "'");
      }
    }
  }
  const auto old_precision = out.precision(9);
  for (EntityTypeId t = 0; t < model.schema.num_entity_types(); ++t) {
    const auto& name = model.schema.entity_name(t);
    for (EntityId i = 0; i < model.vocab[t].size(); ++i) {
      out << name << '\t' << model.vocab[t].raw_id(i);
      if (anchor_space) {
        for (double v : model.anchor_space_embedding(t, i)) out << '\t' << v;
      } else {
        for (double v : model.tables[t].row(i)) out << '\t' << v;
      }
      out << '\n';
    }
  }
  out.precision(old_precision);
}

}  // namespace kge
