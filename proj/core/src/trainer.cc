#include "kge/trainer.h"

#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "kge/error.h"

namespace kge {

void TrainConfig::validate(const Schema& schema) const {
  model.validate(schema);
  loss.validate();
  if (batch_size == 0) throw ConfigError("train.batch_size must be >= 1");
  if (uniform_negatives + in_batch_negatives == 0) {
    throw ConfigError("train: uniform_negatives + in_batch_negatives must be "
                      ">= 1; the loss is undefined without negatives");
  }
  if (pool_size == 0) throw ConfigError("train.pool_size must be >= 1");
  if (!(optimizer.learning_rate > 0.0) || !(optimizer.epsilon >= 0.0)) {
    throw ConfigError("train: optimizer needs learning_rate > 0, epsilon >= 0");
  }
  if (!mix.empty() && mix.size() != schema.num_edge_types()) {
    throw ConfigError("train.mix must give one share per edge type");
  }
}

double TrainTelemetry::smoothed_loss(std::uint64_t step,
                                     std::size_t window) const {
  if (step == 0 || step > records.size() || window == 0) {
    throw ContractViolation("smoothed_loss: step out of range");
  }
  const std::size_t end = step;
  const std::size_t begin = end > window ? end - window : 0;
  double sum = 0.0;
  for (std::size_t i = begin; i < end; ++i) sum += records[i].loss;
  return sum / static_cast<double>(end - begin);
}

void TrainTelemetry::write_tsv(std::ostream& out, std::size_t every) const {
  out << "step\tloss";
  for (const auto& et : edge_types) out << "\tpos_mean:" << et;
  for (const auto& et : edge_types) out << "\tneg_mean:" << et;
  out << "\tgrad_norm\n";
  const auto old_precision = out.precision(8);
  for (const auto& r : records) {
    if (every > 1 && r.step % every != 0) continue;
    out << r.step << '\t' << r.loss;
    for (double v : r.pos_mean) out << '\t' << v;
    for (double v : r.neg_mean) out << '\t' << v;
    out << '\t' << r.grad_norm << '\n';
  }
  out.precision(old_precision);
}

struct Trainer::Workspace {
  struct RowGrads {
    Matrix grad;
    std::vector<EntityId> touched;
    std::vector<std::uint8_t> mark;

    Vec row(EntityId id) {
      if (!mark[id]) {
        mark[id] = 1;
        touched.push_back(id);
      }
      return grad.row(id);
    }
  };

  std::vector<RowGrads> rows;
  std::vector<RelationGrad> relations;
  std::vector<std::uint8_t> relation_touched;
  std::vector<std::vector<std::int32_t>> tail_slot;

  // Per-group scratch.
  std::vector<double> heads, tails, head_grad, tail_grad;
  std::vector<EntityId> unique_tails;
  std::vector<std::uint32_t> pos_slot, neg_slot;
};

namespace {

MixConfig make_mix(const TripleStore& store, const TrainConfig& config) {
  config.validate(store.schema);
  if (config.mix.empty()) return proportional_mix(store, config.batch_size);
  MixConfig mix;
  mix.fractions = config.mix;
  mix.batch_size = config.batch_size;
  return mix;
}

}  // namespace

Trainer::Trainer(const TripleStore& train, TrainConfig config)
    : Trainer(train, config, init_model(train, config.model, config.seed)) {}

Trainer::Trainer(const TripleStore& train, TrainConfig config, Model initial)
    : store_(train),
      config_(std::move(config)),
      model_(std::move(initial)),
      composer_(train, make_mix(train, config_),
                derive_seed(config_.seed, {0xba7c4})),
      negative_rng_(derive_seed(config_.seed, {0x4e9})),
      ws_(std::make_unique<Workspace>()) {
  if (!(model_.schema == train.schema) || model_.vocab.size() != train.vocab.size()) {
    throw ContractViolation("initial model schema does not match the store");
  }
  const std::size_t dim = model_.spec.dim;
  const auto& schema = train.schema;

  pools_.resize(schema.num_entity_types());
  std::vector<std::uint8_t> is_tail(schema.num_entity_types(), 0);
  for (const auto& e : schema.edge_types()) is_tail[e.tail] = 1;
  for (EntityTypeId t = 0; t < schema.num_entity_types(); ++t) {
    if (is_tail[t] && !train.vocab[t].empty()) {
      pools_[t] = build_pool(train, t, config_.pool_size, config_.seed);
    }
  }

  for (EntityTypeId t = 0; t < schema.num_entity_types(); ++t) {
    const std::size_t n = model_.tables[t].rows;
    table_opt_.emplace_back("embedding:" + schema.entity_name(t), n, dim,
                            config_.optimizer);
    ws_->rows.push_back({Matrix(n, dim), {}, std::vector<std::uint8_t>(n, 0)});
    ws_->tail_slot.emplace_back(n, -1);
  }
  for (RelationId r = 0; r < schema.num_relations(); ++r) {
    projection_opt_.emplace_back("projection:" + schema.relation_name(r), dim,
                                 dim, config_.optimizer);
    translation_opt_.emplace_back("translation:" + schema.relation_name(r), 1,
                                  dim, config_.optimizer);
    ws_->relations.emplace_back(dim);
  }
  ws_->relation_touched.assign(schema.num_relations(), 0);
  for (EdgeTypeId et = 0; et < schema.num_edge_types(); ++et) {
    telemetry_.edge_types.push_back(schema.edge_type_name(et));
  }
}

Trainer::~Trainer() = default;

TrainBatch Trainer::next_batch() {
  return attach_negatives(store_.schema, composer_.next(), pools_,
                          config_.uniform_negatives,
                          config_.in_batch_negatives, negative_rng_);
}

StepStats Trainer::step(const TrainBatch& batch) {
  Workspace& ws = *ws_;
  const std::size_t dim = model_.spec.dim;
  const std::size_t k = batch.negatives_per_positive;
  const std::size_t total_pos = batch.num_positives();
  const auto& schema = model_.schema;
  const Distance dist = model_.spec.distance;

  std::vector<double> pos_scores(total_pos), neg_scores(total_pos * k);

  // Forward pass; transformed tails are computed once per distinct tail.
  struct GroupCache {
    std::vector<double> heads, tails;
    std::vector<EntityId> unique_tails;
    std::vector<std::uint32_t> pos_slot, neg_slot;
    std::size_t offset = 0;
  };
  std::vector<GroupCache> caches(batch.groups.size());
  std::size_t offset = 0;
  for (std::size_t g = 0; g < batch.groups.size(); ++g) {
    const auto& group = batch.groups[g];
    const auto& type = schema.edge_type(group.edge_type);
    const auto& rp = model_.relation_for(group.edge_type);
    const auto paths = score_paths(model_.spec, model_.head_is_anchor(group.edge_type));
    const auto& head_table = model_.tables[type.head];
    const auto& tail_table = model_.tables[type.tail];
    auto& slots = ws.tail_slot[type.tail];
    auto& c = caches[g];
    const std::size_t n = group.positives.size();
    c.offset = offset;

    auto slot_of = [&](EntityId id) -> std::uint32_t {
      if (slots[id] < 0) {
        slots[id] = static_cast<std::int32_t>(c.unique_tails.size());
        c.unique_tails.push_back(id);
      }
      return static_cast<std::uint32_t>(slots[id]);
    };
    c.pos_slot.resize(n);
    c.neg_slot.resize(n * k);
    for (std::size_t i = 0; i < n; ++i) {
      c.pos_slot[i] = slot_of(group.positives[i].tail);
    }
    for (std::size_t j = 0; j < n * k; ++j) {
      c.neg_slot[j] = slot_of(group.negative_tails[j]);
    }
    for (EntityId id : c.unique_tails) slots[id] = -1;

    c.tails.resize(c.unique_tails.size() * dim);
    for (std::size_t u = 0; u < c.unique_tails.size(); ++u) {
      apply_path(paths.tail, rp, tail_table.row(c.unique_tails[u]),
                 Vec(c.tails).subspan(u * dim, dim));
    }
    c.heads.resize(n * dim);
    for (std::size_t i = 0; i < n; ++i) {
      const ConstVec a = ConstVec(c.heads).subspan(i * dim, dim);
      apply_path(paths.head, rp, head_table.row(group.positives[i].head),
                 Vec(c.heads).subspan(i * dim, dim));
      pos_scores[offset + i] = distance(
          dist, a, ConstVec(c.tails).subspan(c.pos_slot[i] * dim, dim));
      for (std::size_t j = 0; j < k; ++j) {
        neg_scores[(offset + i) * k + j] = distance(
            dist, a, ConstVec(c.tails).subspan(c.neg_slot[i * k + j] * dim, dim));
      }
    }
    offset += n;
  }

  const LossResult loss = compute_loss(config_.loss, pos_scores, neg_scores);
  if (!std::isfinite(loss.loss)) {
    throw TrainingFault("non-finite loss at step " +
                        std::to_string(model_.step + 1));
  }

  // Backward pass into row-sparse gradient buffers.
  for (std::size_t g = 0; g < batch.groups.size(); ++g) {
    const auto& group = batch.groups[g];
    const auto& type = schema.edge_type(group.edge_type);
    const RelationId rid = schema.relation_of(group.edge_type);
    const auto& rp = model_.relations[rid];
    const auto paths = score_paths(model_.spec, model_.head_is_anchor(group.edge_type));
    auto& c = caches[g];
    const std::size_t n = group.positives.size();
    ws.head_grad.assign(n * dim, 0.0);
    ws.tail_grad.assign(c.unique_tails.size() * dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const ConstVec a = ConstVec(c.heads).subspan(i * dim, dim);
      const Vec ga = Vec(ws.head_grad).subspan(i * dim, dim);
      auto pair_backward = [&](std::uint32_t slot, double upstream) {
        if (upstream == 0.0) return;
        distance_backward(dist, a, ConstVec(c.tails).subspan(slot * dim, dim),
                          upstream, ga, Vec(ws.tail_grad).subspan(slot * dim, dim));
      };
      pair_backward(c.pos_slot[i], loss.pos_grad[c.offset + i]);
      for (std::size_t j = 0; j < k; ++j) {
        pair_backward(c.neg_slot[i * k + j], loss.neg_grad[(c.offset + i) * k + j]);
      }
    }
    auto& rel_grad = ws.relations[rid];
    ws.relation_touched[rid] = 1;
    auto& head_rows = ws.rows[type.head];
    for (std::size_t i = 0; i < n; ++i) {
      const EntityId h = group.positives[i].head;
      backprop_path(paths.head, rp, model_.tables[type.head].row(h),
                    ConstVec(ws.head_grad).subspan(i * dim, dim),
                    head_rows.row(h), rel_grad);
    }
    auto& tail_rows = ws.rows[type.tail];
    for (std::size_t u = 0; u < c.unique_tails.size(); ++u) {
      const EntityId t = c.unique_tails[u];
      backprop_path(paths.tail, rp, model_.tables[type.tail].row(t),
                    ConstVec(ws.tail_grad).subspan(u * dim, dim),
                    tail_rows.row(t), rel_grad);
    }
  }

  // Validate everything before touching parameters.
  StepStats stats;
  stats.loss = loss.loss;
  double sq = 0.0;
  for (auto& rows : ws.rows) {
    for (EntityId id : rows.touched) sq += dot(rows.grad.row(id), rows.grad.row(id));
    stats.touched_rows += rows.touched.size();
  }
  for (std::size_t r = 0; r < ws.relations.size(); ++r) {
    if (!ws.relation_touched[r]) continue;
    sq += dot(ws.relations[r].projection.values, ws.relations[r].projection.values);
    sq += dot(ws.relations[r].translation, ws.relations[r].translation);
  }
  stats.grad_norm = std::sqrt(sq);
  auto clear_grads = [&] {
    for (auto& rows : ws.rows) {
      for (EntityId id : rows.touched) {
        auto row = rows.grad.row(id);
        std::fill(row.begin(), row.end(), 0.0);
        rows.mark[id] = 0;
      }
      rows.touched.clear();
    }
    for (std::size_t r = 0; r < ws.relations.size(); ++r) {
      if (ws.relation_touched[r]) ws.relations[r].clear();
      ws.relation_touched[r] = 0;
    }
  };
  if (!std::isfinite(stats.grad_norm)) {
    clear_grads();
    throw TrainingFault("non-finite gradient at step " +
                        std::to_string(model_.step + 1));
  }

  for (EntityTypeId t = 0; t < ws.rows.size(); ++t) {
    auto& rows = ws.rows[t];
    for (EntityId id : rows.touched) {
      table_opt_[t].step_row(id, model_.tables[t].row(id), rows.grad.row(id));
    }
  }
  for (std::size_t r = 0; r < ws.relations.size(); ++r) {
    if (!ws.relation_touched[r]) continue;
    projection_opt_[r].step(model_.relations[r].projection.values,
                            ws.relations[r].projection.values);
    translation_opt_[r].step(model_.relations[r].translation,
                             ws.relations[r].translation);
  }
  clear_grads();
  ++model_.step;

  TelemetryRecord rec;
  rec.step = model_.step;
  rec.loss = loss.loss;
  rec.grad_norm = stats.grad_norm;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  rec.pos_mean.assign(schema.num_edge_types(), nan);
  rec.neg_mean.assign(schema.num_edge_types(), nan);
  for (std::size_t g = 0; g < batch.groups.size(); ++g) {
    const auto& group = batch.groups[g];
    const std::size_t n = group.positives.size();
    const std::size_t off = caches[g].offset;
    const double ps = std::accumulate(pos_scores.begin() + off,
                                      pos_scores.begin() + off + n, 0.0);
    const double ns = std::accumulate(neg_scores.begin() + off * k,
                                      neg_scores.begin() + (off + n) * k, 0.0);
    rec.pos_mean[group.edge_type] = ps / static_cast<double>(n);
    rec.neg_mean[group.edge_type] =
        k ? ns / static_cast<double>(n * k) : nan;
  }
  telemetry_.records.push_back(std::move(rec));
  return stats;
}

void Trainer::run(const CheckpointSink& sink) {
  if (model_.step >= config_.steps) {
    if (sink) sink(model_);
    return;
  }
  BatchSource source([this] { return next_batch(); }, !config_.deterministic);
  while (model_.step < config_.steps) {
    const TrainBatch batch = source.next();
    step(batch);
    if (sink && config_.checkpoint_every > 0 &&
        model_.step % config_.checkpoint_every == 0 &&
        model_.step != config_.steps) {
      sink(model_);
    }
  }
  if (sink) sink(model_);
}

TrainResult train(const TripleStore& store, const TrainConfig& config,
                  const CheckpointSink& sink) {
  Trainer trainer(store, config);
  trainer.run(sink);
  return TrainResult{trainer.model(), trainer.telemetry()};
}

}  // namespace kge
