#include "kge/sampling.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

#include "kge/error.h"

namespace kge {

std::vector<std::size_t> MixConfig::counts() const {
  const std::size_t n = fractions.size();
  double total = 0.0;
  for (double f : fractions) {
    if (!(f >= 0.0)) throw ConfigError("mix fractions must be >= 0");
    total += f;
  }
  if (n == 0 || std::fabs(total - 1.0) > 1e-6) {
    throw ConfigError("mix fractions must sum to 1");
  }

  std::vector<std::size_t> counts(n);
  std::vector<double> remainder(n);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double exact = fractions[i] * static_cast<double>(batch_size);
    counts[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    remainder[i] = exact - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return remainder[a] > remainder[b] + 1e-12;
  });
  for (std::size_t k = 0; assigned < batch_size; ++k, ++assigned) {
    ++counts[order[k % n]];
  }
  while (assigned > batch_size) {
    auto it = std::max_element(counts.begin(), counts.end());
    --*it;
    --assigned;
  }

  for (std::size_t i = 0; i < n; ++i) {
    while (fractions[i] > 0.0 && counts[i] < min_per_type) {
      auto donor = std::max_element(counts.begin(), counts.end());
      if (*donor <= min_per_type) {
        throw ConfigError("batch size too small for the per-type minimum");
      }
      --*donor;
      ++counts[i];
    }
  }
  return counts;
}

MixConfig proportional_mix(const TripleStore& store, std::size_t batch_size) {
  MixConfig mix;
  mix.batch_size = batch_size;
  mix.min_per_type = 1;
  const double total = static_cast<double>(store.num_edges());
  if (total == 0.0) throw ConfigError("cannot build a mix over an empty store");
  for (const auto& edges : store.edges) {
    mix.fractions.push_back(static_cast<double>(edges.size()) / total);
  }
  return mix;
}

NegativePool build_pool(const TripleStore& store, EntityTypeId entity_type,
                        std::size_t pool_size, std::uint64_t seed) {
  const std::size_t n = store.vocab.at(entity_type).size();
  if (n == 0) {
    throw ConfigError("cannot build a negative pool for '" +
                      store.schema.entity_name(entity_type) +
                      "': empty vocabulary");
  }
  if (pool_size == 0) throw ConfigError("negative pool size must be >= 1");
  NegativePool pool{entity_type, std::vector<EntityId>(pool_size)};
  Rng rng(derive_seed(seed, {0x9001, entity_type}));
  for (auto& id : pool.ids) id = uniform_index(rng, n);
  return pool;
}

EdgeStream::EdgeStream(std::span<const Triple> edges, std::uint64_t seed)
    : edges_(edges), rng_(seed), order_(edges.size()) {
  std::iota(order_.begin(), order_.end(), 0u);
  reshuffle();
}

void EdgeStream::reshuffle() {
  std::shuffle(order_.begin(), order_.end(), rng_);
  cursor_ = 0;
}

void EdgeStream::take(std::size_t n, std::vector<Triple>& out) {
  if (n > 0 && edges_.empty()) {
    throw ContractViolation("cannot read positives from an empty edge type");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (cursor_ == order_.size()) {
      ++epoch_;
      reshuffle();
    }
    out.push_back(edges_[order_[cursor_++]]);
  }
}

BatchComposer::BatchComposer(const TripleStore& store, MixConfig mix,
                             std::uint64_t seed) {
  if (mix.fractions.size() != store.schema.num_edge_types()) {
    throw ConfigError("mix has " + std::to_string(mix.fractions.size()) +
                      " fractions for " +
                      std::to_string(store.schema.num_edge_types()) +
                      " edge types");
  }
  counts_ = mix.counts();
  for (EdgeTypeId et = 0; et < store.edges.size(); ++et) {
    if (counts_[et] > 0 && store.edges[et].empty()) {
      throw ConfigError("edge type '" + store.schema.edge_type_name(et) +
                        "' has a nonzero mix share but no training edges");
    }
    streams_.emplace_back(store.edges[et], derive_seed(seed, {0x57ea, et}));
  }
}

std::vector<std::vector<Triple>> BatchComposer::next() {
  std::vector<std::vector<Triple>> out(streams_.size());
  for (std::size_t et = 0; et < streams_.size(); ++et) {
    out[et].reserve(counts_[et]);
    streams_[et].take(counts_[et], out[et]);
  }
  return out;
}

std::size_t TrainBatch::num_positives() const {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.positives.size();
  return n;
}

TrainBatch attach_negatives(const Schema& schema,
                            std::vector<std::vector<Triple>> positives,
                            std::span<const NegativePool> pools,
                            std::size_t k_uniform, std::size_t k_in_batch,
                            Rng& rng) {
  TrainBatch batch;
  const std::size_t k = k_uniform + k_in_batch;
  batch.negatives_per_positive = k;

  for (auto& group_positives : positives) {
    if (group_positives.empty()) continue;
    PositiveGroup group;
    group.edge_type = group_positives.front().edge_type;
    group.positives = std::move(group_positives);
    const std::size_t n = group.positives.size();
    group.negative_tails.resize(n * k);

    const EntityTypeId tail_type = schema.edge_type(group.edge_type).tail;
    if (tail_type >= pools.size() || pools[tail_type].ids.empty()) {
      throw ContractViolation("no negative pool for entity type '" +
                              schema.entity_name(tail_type) + "'");
    }
    const auto& pool = pools[tail_type].ids;
    auto uniform_tail = [&] { return pool[uniform_index(rng, pool.size())]; };

    for (std::size_t i = 0; i < n; ++i) {
      EntityId* row = group.negative_tails.data() + i * k;
      for (std::size_t j = 0; j < k_uniform; ++j) row[j] = uniform_tail();
      for (std::size_t j = k_uniform; j < k; ++j) {
        if (n < 2) {
          row[j] = uniform_tail();
          ++batch.stats.in_batch_fallbacks;
          continue;
        }
        std::size_t other = uniform_index(rng, n - 1);
        if (other >= i) ++other;
        row[j] = group.positives[other].tail;
      }
    }
    batch.groups.push_back(std::move(group));
  }
  return batch;
}

BatchSource::BatchSource(Producer producer, bool background,
                         std::size_t queue_depth)
    : producer_(std::move(producer)) {
  if (!background) return;
  queue_.emplace(queue_depth);
  worker_ = std::jthread([this](std::stop_token stop) {
    while (!stop.stop_requested()) {
      TrainBatch batch;
      try {
        batch = producer_();
      } catch (...) {
        error_ = std::current_exception();
        queue_->close();
        return;
      }
      if (!queue_->push(std::move(batch))) return;
    }
  });
}

BatchSource::~BatchSource() {
  if (queue_) {
    worker_.request_stop();
    queue_->close();
  }
}

TrainBatch BatchSource::next() {
  if (!queue_) return producer_();
  auto batch = queue_->pop();
  if (!batch) {
    if (error_) std::rethrow_exception(error_);
    throw ContractViolation("batch source closed");
  }
  return std::move(*batch);
}

}  // namespace kge
