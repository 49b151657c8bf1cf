#include "kge/config.h"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "kge/error.h"

namespace kge {

using nlohmann::json;

namespace {

// Walks one JSON object, remembering which keys were read so leftovers can
// be reported by their full dotted path.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("config key '" + name() + "' must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw ConfigError("config key '" + child(key) + "' has the wrong type: " +
                        e.what());
    }
  }

  const json* find(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string child(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown config key '" + child(key) + "'");
    }
  }

 private:
  std::string name() const { return path_.empty() ? "<root>" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Fn>
void with_section(Section& parent, const char* key, Fn&& fn) {
  if (const json* j = parent.find(key)) {
    Section s(*j, parent.child(key));
    fn(s);
    s.finish();
  }
}

template <typename Parse>
auto parse_enum(Section& s, const char* key, Parse parse,
                decltype(parse(std::string_view{})) fallback) {
  std::string text;
  s.get(key, text);
  if (text.empty()) return fallback;
  try {
    return parse(text);
  } catch (const ConfigError& e) {
    throw ConfigError("config key '" + s.child(key) + "': " + e.what());
  }
}

void parse_synthetic(Section& s, SyntheticConfig& c) {
  s.get("communities", c.communities);
  s.get("p_in", c.p_in);
  s.get("p_out", c.p_out);
  s.get("locality", c.locality);
  if (const json* ents = s.find("entities")) {
    if (!ents->is_array()) throw ConfigError("config key '" + s.child("entities") + "' must be an array");
    c.entities.clear();
    for (std::size_t i = 0; i < ents->size(); ++i) {
      Section e((*ents)[i], s.child("entities[" + std::to_string(i) + "]"));
      SyntheticEntitySpec spec;
      e.get("name", spec.name);
      e.get("count", spec.count);
      e.finish();
      c.entities.push_back(spec);
    }
  }
  if (const json* edges = s.find("edges")) {
    if (!edges->is_array()) throw ConfigError("config key '" + s.child("edges") + "' must be an array");
    c.edges.clear();
    for (std::size_t i = 0; i < edges->size(); ++i) {
      Section e((*edges)[i], s.child("edges[" + std::to_string(i) + "]"));
      SyntheticEdgeSpec spec;
      e.get("head", spec.head);
      e.get("activity", spec.activity);
      e.get("tail", spec.tail);
      e.get("count", spec.count);
      e.get("crossing", spec.crossing);
      e.finish();
      c.edges.push_back(spec);
    }
  }
}

void parse_train(Section& s, TrainSection& t) {
  auto& c = t.base;
  with_section(s, "model", [&](Section& m) {
    c.model.kind = parse_enum(m, "kind", parse_model_kind, c.model.kind);
    c.model.distance = parse_enum(m, "distance", parse_distance, c.model.distance);
    c.model.translation =
        parse_enum(m, "translation", parse_translation_side, c.model.translation);
    std::string anchor;
    m.get("anchor", anchor);
    if (!anchor.empty()) t.anchor = anchor;
    m.get("dim", c.model.dim);
  });
  s.get("steps", c.steps);
  s.get("batch_size", c.batch_size);
  if (const json* mix = s.find("mix")) {
    if (!mix->is_object()) {
      throw ConfigError("config key '" + s.child("mix") +
                        "' must map edge type names to shares");
    }
    t.mix.clear();
    for (const auto& [name, v] : mix->items()) {
      if (!v.is_number()) {
        throw ConfigError("config key '" + s.child("mix." + name) + "' must be a number");
      }
      t.mix.emplace_back(name, v.get<double>());
    }
  }
  s.get("uniform_negatives", c.uniform_negatives);
  s.get("in_batch_negatives", c.in_batch_negatives);
  s.get("pool_size", c.pool_size);
  with_section(s, "loss", [&](Section& l) {
    c.loss.kind = parse_enum(l, "kind", parse_loss_kind, c.loss.kind);
    l.get("temperature", c.loss.temperature);
    l.get("margin", c.loss.margin);
  });
  with_section(s, "optimizer", [&](Section& o) {
    o.get("learning_rate", c.optimizer.learning_rate);
    o.get("epsilon", c.optimizer.epsilon);
  });
  s.get("checkpoint_every", c.checkpoint_every);
  s.get("deterministic", c.deterministic);
}

}  // namespace

TrainConfig TrainSection::resolve(const Schema& schema) const {
  TrainConfig c = base;
  c.model.anchor.reset();
  // The anchor only means something to TransRA; other kinds ignore it so one
  // config can drive a model comparison.
  if (anchor && c.model.kind == ModelKind::kTransRA) {
    const auto t = schema.find_entity_type(*anchor);
    if (!t) throw ConfigError("train.model.anchor '" + *anchor + "' is not an entity type");
    c.model.anchor = *t;
  }
  if (!mix.empty()) {
    c.mix.assign(schema.num_edge_types(), 0.0);
    for (const auto& [name, share] : mix) {
      bool found = false;
      for (EdgeTypeId et = 0; et < schema.num_edge_types(); ++et) {
        if (schema.edge_type_name(et) == name) {
          c.mix[et] = share;
          found = true;
        }
      }
      if (!found) throw ConfigError("train.mix names unknown edge type '" + name + "'");
    }
  }
  c.validate(schema);
  return c;
}

ExperimentConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig c;
  Section s(root, "");
  s.get("seed", c.seed);
  with_section(s, "synthetic", [&](Section& x) { parse_synthetic(x, c.synthetic); });
  with_section(s, "split", [&](Section& x) {
    x.get("holdout_per_edge_type", c.holdout_per_edge_type);
  });
  with_section(s, "train", [&](Section& x) { parse_train(x, c.train); });
  with_section(s, "eval", [&](Section& x) {
    x.get("negatives", c.eval.negatives);
    x.get("ks", c.eval.ks);
    x.get("max_positives", c.eval.max_positives);
    x.get("share_corruptions", c.eval.share_corruptions);
    x.get("threads", c.eval.threads);
  });
  with_section(s, "finetune", [&](Section& f) {
    with_section(f, "dataset", [&](Section& d) {
      d.get("slot_types", c.ranking.slot_types);
      d.get("examples", c.ranking.examples);
      d.get("neg_ratio", c.ranking.neg_ratio);
      d.get("p_in", c.ranking.p_in);
      d.get("side_features", c.ranking.side_features);
    });
    with_section(f, "ranker", [&](Section& r) {
      r.get("hidden", c.ranker.hidden);
      r.get("epochs", c.ranker.epochs);
      r.get("batch_size", c.ranker.batch_size);
      r.get("dense_learning_rate", c.ranker.dense_learning_rate);
      r.get("kge_learning_rate", c.ranker.kge_learning_rate);
      r.get("validation_fraction", c.ranker.validation_fraction);
    });
    f.get("shuffle_labels", c.shuffle_labels);
  });
  s.finish();

  c.synthetic.validate();
  c.eval.validate();
  c.ranking.validate();
  c.ranker.validate();
  c.train.base.loss.validate();
  return c;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig load_config(const std::string& path) {
  return parse_config(read_text_file(path));
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace kge
