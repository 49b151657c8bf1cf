#include "kge/ranker.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>

#include "kge/error.h"
#include "kge/random.h"

namespace kge {

std::string_view to_string(IntegrationMode mode) {
  switch (mode) {
    case IntegrationMode::kFrozen: return "frozen";
    case IntegrationMode::kDirect: return "direct";
    case IntegrationMode::kAttention: return "attention";
  }
  return "?";
}

IntegrationMode parse_integration_mode(std::string_view s) {
  if (s == "frozen") return IntegrationMode::kFrozen;
  if (s == "direct") return IntegrationMode::kDirect;
  if (s == "attention") return IntegrationMode::kAttention;
  throw ConfigError("unknown integration mode '" + std::string(s) +
                    "' (expected frozen, direct or attention)");
}

void RankingDatasetConfig::validate() const {
  if (slot_types.size() < 2) {
    throw ConfigError("ranking.slot_types needs at least two slots");
  }
  if (examples < 2) throw ConfigError("ranking.examples must be >= 2");
  if (!(neg_ratio > 0.0) || !std::isfinite(neg_ratio)) {
    throw ConfigError("ranking.neg_ratio must be > 0");
  }
  if (!(p_in >= 0.0 && p_in <= 1.0)) {
    throw ConfigError("ranking.p_in must lie in [0, 1]");
  }
}

RankingDataset build_ranking_dataset(const Schema& schema,
                                     const Communities& community,
                                     const RankingDatasetConfig& config,
                                     std::uint64_t seed) {
  config.validate();
  RankingDataset data;
  data.side_dim = config.side_features;
  for (const auto& name : config.slot_types) {
    const auto t = schema.find_entity_type(name);
    if (!t) throw ConfigError("ranking slot type '" + name + "' is not in the schema");
    if (*t >= community.size() || community[*t].empty()) {
      throw ConfigError("ranking slot type '" + name + "' has no entities");
    }
    data.slot_types.push_back(*t);
  }

  // Members of each community, per slot type.
  std::uint32_t num_comm = 0;
  for (auto t : data.slot_types) {
    for (auto c : community[t]) num_comm = std::max(num_comm, c + 1);
  }
  std::vector<std::vector<std::vector<EntityId>>> members(data.slot_types.size());
  for (std::size_t s = 0; s < data.slot_types.size(); ++s) {
    const auto& labels = community[data.slot_types[s]];
    members[s].resize(num_comm);
    for (EntityId e = 0; e < labels.size(); ++e) members[s][labels[e]].push_back(e);
  }

  const auto n_pos = static_cast<std::size_t>(std::llround(
      static_cast<double>(config.examples) / (1.0 + config.neg_ratio)));
  if (n_pos == 0 || n_pos == config.examples) {
    throw ConfigError("ranking.examples and neg_ratio leave one class empty");
  }

  Rng rng(derive_seed(seed, {0xda7a}));
  std::normal_distribution<double> noise(0.0, 1.0);
  auto from_community = [&](std::size_t s, std::uint32_t c) -> EntityId {
    const auto& pool = members[s][c];
    if (pool.empty()) {
      return uniform_index(rng, community[data.slot_types[s]].size());
    }
    return pool[uniform_index(rng, pool.size())];
  };

  data.examples.reserve(config.examples);
  for (std::size_t i = 0; i < config.examples; ++i) {
    RankingExample ex;
    ex.label = i < n_pos ? 1 : 0;
    ex.slots.resize(data.slot_types.size());
    ex.slots[0] = uniform_index(rng, community[data.slot_types[0]].size());
    const std::uint32_t c = community[data.slot_types[0]][ex.slots[0]];
    if (ex.label == 1) {
      const bool planted = uniform01(rng) < config.p_in;
      for (std::size_t s = 1; s < ex.slots.size(); ++s) {
        ex.slots[s] = planted
                          ? from_community(s, c)
                          : uniform_index(rng, community[data.slot_types[s]].size());
      }
    } else {
      for (std::size_t s = 1; s < ex.slots.size(); ++s) {
        std::uint32_t other = c;
        if (num_comm > 1) {
          other = uniform_index(rng, num_comm - 1);
          if (other >= c) ++other;
        }
        ex.slots[s] = from_community(s, other);
      }
    }
    ex.side.resize(config.side_features);
    for (auto& v : ex.side) v = noise(rng);
    data.examples.push_back(std::move(ex));
  }
  std::shuffle(data.examples.begin(), data.examples.end(), rng);
  return data;
}

RankingDataset shuffle_labels(RankingDataset data, std::uint64_t seed) {
  std::vector<int> labels;
  labels.reserve(data.examples.size());
  for (const auto& ex : data.examples) labels.push_back(ex.label);
  Rng rng(derive_seed(seed, {0x5bff1e}));
  std::shuffle(labels.begin(), labels.end(), rng);
  for (std::size_t i = 0; i < labels.size(); ++i) data.examples[i].label = labels[i];
  return data;
}

void write_dataset_tsv(std::ostream& out, const RankingDataset& data,
                       const std::vector<Vocabulary>& vocab) {
  char buf[32];
  for (const auto& ex : data.examples) {
    out << ex.label;
    for (std::size_t s = 0; s < ex.slots.size(); ++s) {
      out << '\t' << vocab.at(data.slot_types[s]).raw_id(ex.slots[s]);
    }
    for (double v : ex.side) {
      std::snprintf(buf, sizeof(buf), "%.9g", v);
      out << '\t' << buf;
    }
    out << '\n';
  }
}

double auc(std::span<const int> labels, std::span<const double> scores) {
  if (labels.size() != scores.size()) {
    throw ContractViolation("auc: labels and scores differ in length");
  }
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Twice the Mann-Whitney U, kept integral so ties stay exact.
  std::uint64_t twice_u = 0, n_pos = 0, n_neg = 0, neg_below = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::uint64_t p = 0, q = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] != 0 ? p : q) += 1;
      ++j;
    }
    twice_u += p * (2 * neg_below + q);
    neg_below += q;
    n_pos += p;
    n_neg += q;
    i = j;
  }
  if (n_pos == 0 || n_neg == 0) {
    throw ContractViolation("auc is undefined unless both classes are present");
  }
  return static_cast<double>(twice_u) / static_cast<double>(2 * n_pos * n_neg);
}

// ---- RankerNet

RankerNet::RankerNet(IntegrationMode mode, std::size_t slots, std::size_t dim,
                     std::size_t side_dim, std::size_t hidden,
                     std::uint64_t seed)
    : mode_(mode), slots_(slots), dim_(dim), side_dim_(side_dim), hidden_(hidden) {
  if (slots < 2 && mode == IntegrationMode::kAttention) {
    throw ContractViolation("attention needs at least two slots");
  }
  if (slots == 0 || dim == 0 || hidden == 0) {
    throw ContractViolation("ranker shapes must be non-zero");
  }
  const std::size_t f = feature_dim();
  std::size_t at = 0;
  if (mode == IntegrationMode::kAttention) {
    layout_.wq = at; at += dim * dim;
    layout_.wk = at; at += dim * dim;
    layout_.wv = at; at += dim * dim;
  }
  layout_.w1 = at; at += hidden * f;
  layout_.b1 = at; at += hidden;
  layout_.w2 = at; at += hidden;
  layout_.b2 = at; at += 1;
  layout_.size = at;
  params_.assign(at, 0.0);

  if (mode == IntegrationMode::kAttention) {
    for (std::size_t i = 0; i < dim; ++i) {
      params_[layout_.wq + i * dim + i] = 1.0;
      params_[layout_.wk + i * dim + i] = 1.0;
      params_[layout_.wv + i * dim + i] = 1.0;
    }
  }
  Rng rng(derive_seed(seed, {0x41a7}));
  const double b1 = std::sqrt(6.0 / static_cast<double>(f));
  std::uniform_real_distribution<double> u1(-b1, b1);
  for (std::size_t i = 0; i < hidden * f; ++i) params_[layout_.w1 + i] = u1(rng);
  const double b2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  std::uniform_real_distribution<double> u2(-b2, b2);
  for (std::size_t i = 0; i < hidden; ++i) params_[layout_.w2 + i] = u2(rng);
}

std::size_t RankerNet::feature_dim() const {
  const std::size_t core = mode_ == IntegrationMode::kAttention
                               ? slots_ * dim_ + slots_ * slots_
                               : slots_ * dim_;
  return core + side_dim_;
}

double RankerNet::forward(std::span<const double> x, std::span<const double> side,
                          Cache& c) const {
  if (x.size() != slots_ * dim_ || side.size() != side_dim_) {
    throw ContractViolation("ranker input has " + std::to_string(x.size()) +
                            " slot values and " + std::to_string(side.size()) +
                            " side features; expected " +
                            std::to_string(slots_ * dim_) + " and " +
                            std::to_string(side_dim_));
  }
  if (params_.size() != layout_.size) {
    throw ContractViolation("ranker parameter block has the wrong size");
  }
  const std::size_t S = slots_, d = dim_, F = feature_dim();
  const double* p = params_.data();
  c.slots.assign(x.begin(), x.end());
  c.features.assign(F, 0.0);

  std::size_t core = 0;
  if (mode_ == IntegrationMode::kAttention) {
    c.q.assign(S * d, 0.0);
    c.k.assign(S * d, 0.0);
    c.v.assign(S * d, 0.0);
    for (std::size_t i = 0; i < S; ++i) {
      const double* xi = x.data() + i * d;
      for (std::size_t a = 0; a < d; ++a) {
        double q = 0, k = 0, v = 0;
        for (std::size_t b = 0; b < d; ++b) {
          q += p[layout_.wq + a * d + b] * xi[b];
          k += p[layout_.wk + a * d + b] * xi[b];
          v += p[layout_.wv + a * d + b] * xi[b];
        }
        c.q[i * d + a] = q;
        c.k[i * d + a] = k;
        c.v[i * d + a] = v;
      }
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    c.logits.assign(S * S, 0.0);
    c.weights.assign(S * S, 0.0);
    for (std::size_t i = 0; i < S; ++i) {
      double mx = -INFINITY;
      for (std::size_t j = 0; j < S; ++j) {
        double l = 0;
        for (std::size_t a = 0; a < d; ++a) l += c.q[i * d + a] * c.k[j * d + a];
        l *= scale;
        c.logits[i * S + j] = l;
        mx = std::max(mx, l);
      }
      double z = 0;
      for (std::size_t j = 0; j < S; ++j) {
        c.weights[i * S + j] = std::exp(c.logits[i * S + j] - mx);
        z += c.weights[i * S + j];
      }
      for (std::size_t j = 0; j < S; ++j) c.weights[i * S + j] /= z;
    }
    c.attended.assign(S * d, 0.0);
    for (std::size_t i = 0; i < S; ++i) {
      for (std::size_t j = 0; j < S; ++j) {
        const double w = c.weights[i * S + j];
        for (std::size_t a = 0; a < d; ++a) c.attended[i * d + a] += w * c.v[j * d + a];
      }
    }
    std::copy(c.attended.begin(), c.attended.end(), c.features.begin());
    std::copy(c.logits.begin(), c.logits.end(), c.features.begin() + S * d);
    core = S * d + S * S;
  } else {
    std::copy(x.begin(), x.end(), c.features.begin());
    core = S * d;
  }
  std::copy(side.begin(), side.end(), c.features.begin() + core);

  c.pre.assign(hidden_, 0.0);
  c.hidden.assign(hidden_, 0.0);
  double logit = p[layout_.b2];
  for (std::size_t h = 0; h < hidden_; ++h) {
    double s = p[layout_.b1 + h];
    const double* w = p + layout_.w1 + h * F;
    for (std::size_t f = 0; f < F; ++f) s += w[f] * c.features[f];
    c.pre[h] = s;
    c.hidden[h] = s > 0 ? s : 0.0;
    logit += p[layout_.w2 + h] * c.hidden[h];
  }
  return logit;
}

void RankerNet::backward(const Cache& c, double upstream,
                         std::span<double> gp, std::span<double> gx) const {
  if (gp.size() != layout_.size || gx.size() != slots_ * dim_) {
    throw ContractViolation("ranker gradient buffers have the wrong size");
  }
  const std::size_t S = slots_, d = dim_, F = feature_dim();
  const double* p = params_.data();

  gp[layout_.b2] += upstream;
  std::vector<double> gf(F, 0.0);
  for (std::size_t h = 0; h < hidden_; ++h) {
    gp[layout_.w2 + h] += upstream * c.hidden[h];
    if (c.pre[h] <= 0) continue;
    const double g = upstream * p[layout_.w2 + h];
    gp[layout_.b1 + h] += g;
    const double* w = p + layout_.w1 + h * F;
    double* gw = gp.data() + layout_.w1 + h * F;
    for (std::size_t f = 0; f < F; ++f) {
      gw[f] += g * c.features[f];
      gf[f] += g * w[f];
    }
  }

  if (mode_ != IntegrationMode::kAttention) {
    for (std::size_t i = 0; i < S * d; ++i) gx[i] += gf[i];
    return;
  }

  const double* g_out = gf.data();
  std::vector<double> g_logits(gf.begin() + S * d, gf.begin() + S * d + S * S);
  std::vector<double> gq(S * d, 0.0), gk(S * d, 0.0), gv(S * d, 0.0);
  for (std::size_t i = 0; i < S; ++i) {
    std::vector<double> g_w(S, 0.0);
    for (std::size_t j = 0; j < S; ++j) {
      const double w = c.weights[i * S + j];
      for (std::size_t a = 0; a < d; ++a) {
        g_w[j] += g_out[i * d + a] * c.v[j * d + a];
        gv[j * d + a] += w * g_out[i * d + a];
      }
    }
    double mean = 0;
    for (std::size_t j = 0; j < S; ++j) mean += c.weights[i * S + j] * g_w[j];
    for (std::size_t j = 0; j < S; ++j) {
      g_logits[i * S + j] += c.weights[i * S + j] * (g_w[j] - mean);
    }
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t i = 0; i < S; ++i) {
    for (std::size_t j = 0; j < S; ++j) {
      const double g = g_logits[i * S + j] * scale;
      if (g == 0) continue;
      for (std::size_t a = 0; a < d; ++a) {
        gq[i * d + a] += g * c.k[j * d + a];
        gk[j * d + a] += g * c.q[i * d + a];
      }
    }
  }
  // q_i = Wq x_i and friends.
  for (std::size_t i = 0; i < S; ++i) {
    const double* xi = c.slots.data() + i * d;
    double* gxi = gx.data() + i * d;
    for (std::size_t a = 0; a < d; ++a) {
      const double dq = gq[i * d + a], dk = gk[i * d + a], dv = gv[i * d + a];
      for (std::size_t b = 0; b < d; ++b) {
        gp[layout_.wq + a * d + b] += dq * xi[b];
        gp[layout_.wk + a * d + b] += dk * xi[b];
        gp[layout_.wv + a * d + b] += dv * xi[b];
        gxi[b] += dq * p[layout_.wq + a * d + b] + dk * p[layout_.wk + a * d + b] +
                  dv * p[layout_.wv + a * d + b];
      }
    }
  }
}

// ---- SlotEncoder

namespace {
constexpr double kMinNorm = 1e-12;
}

SlotEncoder::SlotEncoder(const Model& model, std::vector<EntityTypeId> slot_types)
    : slot_types_(std::move(slot_types)), relation_(slot_types_.size(), -1) {
  if (model.spec.kind != ModelKind::kTransRA) return;
  for (std::size_t s = 0; s < slot_types_.size(); ++s) {
    const auto t = slot_types_[s];
    if (t == *model.spec.anchor) continue;
    const auto rel = model.anchor_relation(t);
    if (!rel) {
      throw ContractViolation("slot type '" + model.schema.entity_name(t) +
                              "' has no relation from the anchor type");
    }
    relation_[s] = static_cast<int>(*rel);
  }
}

void SlotEncoder::encode(const Model& model, std::span<const EntityId> ids,
                         std::span<double> out) const {
  const std::size_t d = model.spec.dim;
  if (ids.size() != slot_types_.size() || out.size() != ids.size() * d) {
    throw ContractViolation("slot encoder input has the wrong shape");
  }
  for (std::size_t s = 0; s < ids.size(); ++s) {
    const auto& table = model.tables[slot_types_[s]];
    if (ids[s] >= table.rows) {
      throw ContractViolation("slot id " + std::to_string(ids[s]) +
                              " is outside the '" +
                              model.schema.entity_name(slot_types_[s]) +
                              "' vocabulary");
    }
    auto y = out.subspan(s * d, d);
    const auto x = table.row(ids[s]);
    if (relation_[s] < 0) {
      std::copy(x.begin(), x.end(), y.begin());
    } else {
      const auto& rp = model.relations[relation_[s]];
      matvec(rp.projection, x, y);
      axpy(1.0, rp.translation, y);
    }
    const double n = norm(y);
    if (n < kMinNorm) {
      std::fill(y.begin(), y.end(), 0.0);
    } else {
      for (auto& v : y) v /= n;
    }
  }
}

void SlotEncoder::backward(const Model& model, std::span<const EntityId> ids,
                           std::span<const double> grad_out,
                           std::vector<Matrix>& row_grads,
                           std::vector<RelationGrad>& relation_grads) const {
  const std::size_t d = model.spec.dim;
  std::vector<double> z(d), gz(d);
  for (std::size_t s = 0; s < ids.size(); ++s) {
    const auto x = model.tables[slot_types_[s]].row(ids[s]);
    if (relation_[s] < 0) {
      std::copy(x.begin(), x.end(), z.begin());
    } else {
      const auto& rp = model.relations[relation_[s]];
      matvec(rp.projection, x, z);
      axpy(1.0, rp.translation, z);
    }
    const double n = norm(z);
    if (n < kMinNorm) continue;
    const auto gy = grad_out.subspan(s * d, d);
    double yg = 0;
    for (std::size_t a = 0; a < d; ++a) yg += z[a] / n * gy[a];
    for (std::size_t a = 0; a < d; ++a) gz[a] = (gy[a] - z[a] / n * yg) / n;

    auto gx = row_grads[slot_types_[s]].row(ids[s]);
    if (relation_[s] < 0) {
      axpy(1.0, gz, gx);
    } else {
      const auto& rp = model.relations[relation_[s]];
      auto& gr = relation_grads[relation_[s]];
      matvec_transposed_add(rp.projection, gz, gx);
      outer_add(gr.projection, gz, x);
      axpy(1.0, gz, gr.translation);
    }
  }
}

// ---- training

void RankerConfig::validate() const {
  if (hidden == 0) throw ConfigError("ranker.hidden must be >= 1");
  if (batch_size == 0) throw ConfigError("ranker.batch_size must be >= 1");
  if (!(dense_learning_rate > 0) || !(kge_learning_rate >= 0)) {
    throw ConfigError("ranker learning rates must be positive");
  }
  if (!(validation_fraction > 0 && validation_fraction < 1)) {
    throw ConfigError("ranker.validation_fraction must lie in (0, 1)");
  }
}

double RankerResult::final_validation_auc() const {
  for (auto it = metrics.rbegin(); it != metrics.rend(); ++it) {
    if (it->split == "validation") return it->auc;
  }
  return std::nan("");
}

namespace {

double softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

RankerResult train_ranker(const RankingDataset& data, const Model& kge,
                          IntegrationMode mode, const RankerConfig& config,
                          std::uint64_t seed) {
  config.validate();
  const std::size_t S = data.slot_types.size();
  const std::size_t d = kge.spec.dim;
  for (const auto& ex : data.examples) {
    if (ex.slots.size() != S || ex.side.size() != data.side_dim) {
      throw ContractViolation("ranking example shape does not match the dataset");
    }
  }
  const auto n_train = static_cast<std::size_t>(
      std::floor(static_cast<double>(data.examples.size()) *
                 (1.0 - config.validation_fraction)));
  if (n_train == 0 || n_train >= data.examples.size()) {
    throw ConfigError("validation split leaves an empty train or validation set");
  }

  RankerResult result;
  result.kge = kge;
  result.net = RankerNet(mode, S, d, data.side_dim, config.hidden,
                         derive_seed(seed, {0x4e7}));
  const bool tune_kge = mode != IntegrationMode::kFrozen;
  Model& m = result.kge;
  RankerNet& net = result.net;
  const SlotEncoder encoder(m, data.slot_types);

  Adagrad dense_opt("ranker", 1, net.params().size(),
                    {config.dense_learning_rate, 1e-10});
  const AdagradConfig kge_cfg{config.kge_learning_rate, 1e-10};
  std::vector<Adagrad> table_opt, proj_opt, trans_opt;
  std::vector<Matrix> row_grads;
  std::vector<RelationGrad> rel_grads;
  std::vector<std::vector<char>> row_touched;
  std::vector<char> rel_touched(m.relations.size(), 0);
  if (tune_kge) {
    for (EntityTypeId t = 0; t < m.tables.size(); ++t) {
      table_opt.emplace_back("ranker/" + m.schema.entity_name(t), m.tables[t].rows,
                             d, kge_cfg);
      row_grads.emplace_back(m.tables[t].rows, d);
      row_touched.emplace_back(m.tables[t].rows, 0);
    }
    for (RelationId r = 0; r < m.relations.size(); ++r) {
      proj_opt.emplace_back("ranker/projection/" + m.schema.relation_name(r), d, d,
                            kge_cfg);
      trans_opt.emplace_back("ranker/translation/" + m.schema.relation_name(r), 1,
                             d, kge_cfg);
      rel_grads.emplace_back(d);
    }
  }

  RankerNet::Cache cache;
  std::vector<double> x(S * d), gx(S * d), gp(net.params().size());
  std::vector<std::pair<EntityTypeId, EntityId>> touched;

  auto measure = [&](std::size_t begin, std::size_t end, std::size_t epoch,
                     const char* split) {
    std::vector<int> labels;
    std::vector<double> scores;
    double loss = 0;
    for (std::size_t i = begin; i < end; ++i) {
      const auto& ex = data.examples[i];
      encoder.encode(m, ex.slots, x);
      const double z = net.forward(x, ex.side, cache);
      labels.push_back(ex.label);
      scores.push_back(z);
      loss += softplus(z) - ex.label * z;
    }
    RankerMetric metric{mode, epoch, split, auc(labels, scores),
                        loss / static_cast<double>(end - begin)};
    result.metrics.push_back(metric);
  };

  std::vector<std::size_t> order(n_train);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    Rng rng(derive_seed(seed, {0xe90c, epoch}));
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t b = 0; b < n_train; b += config.batch_size) {
      const std::size_t e = std::min(n_train, b + config.batch_size);
      const double inv = 1.0 / static_cast<double>(e - b);
      std::fill(gp.begin(), gp.end(), 0.0);
      for (std::size_t i = b; i < e; ++i) {
        const auto& ex = data.examples[order[i]];
        encoder.encode(m, ex.slots, x);
        const double z = net.forward(x, ex.side, cache);
        const double g = (sigmoid(z) - ex.label) * inv;
        std::fill(gx.begin(), gx.end(), 0.0);
        net.backward(cache, g, gp, gx);
        if (!tune_kge) continue;
        encoder.backward(m, ex.slots, gx, row_grads, rel_grads);
        for (std::size_t s = 0; s < S; ++s) {
          const auto t = data.slot_types[s];
          if (!row_touched[t][ex.slots[s]]) {
            row_touched[t][ex.slots[s]] = 1;
            touched.emplace_back(t, ex.slots[s]);
          }
          const auto rel = m.spec.kind == ModelKind::kTransRA && t != *m.spec.anchor
                               ? m.anchor_relation(t)
                               : std::nullopt;
          if (rel) rel_touched[*rel] = 1;
        }
      }
      dense_opt.step(net.params(), gp);
      if (!tune_kge) continue;
      for (const auto& [t, row] : touched) {
        table_opt[t].step_row(row, m.tables[t].row(row), row_grads[t].row(row));
        auto g = row_grads[t].row(row);
        std::fill(g.begin(), g.end(), 0.0);
        row_touched[t][row] = 0;
      }
      touched.clear();
      for (RelationId r = 0; r < m.relations.size(); ++r) {
        if (!rel_touched[r]) continue;
        proj_opt[r].step(m.relations[r].projection.values,
                         rel_grads[r].projection.values);
        trans_opt[r].step(m.relations[r].translation, rel_grads[r].translation);
        rel_grads[r].clear();
        rel_touched[r] = 0;
      }
    }
    measure(0, n_train, epoch, "train");
    measure(n_train, data.examples.size(), epoch, "validation");
  }
  return result;
}

void write_metrics_tsv(std::ostream& out, std::span<const RankerMetric> metrics,
                       bool header) {
  if (header) out << "mode\tepoch\tsplit\tauc\tlogloss\n";
  char buf[64];
  for (const auto& m : metrics) {
    std::snprintf(buf, sizeof(buf), "%.6f\t%.6f", m.auc, m.logloss);
    out << to_string(m.mode) << '\t' << m.epoch << '\t' << m.split << '\t' << buf
        << '\n';
  }
}

}  // namespace kge
