#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "kge/random.h"
#include "kge/triple_store.h"

namespace kge {

// Share of each training batch per edge type (indexed by EdgeTypeId).
struct MixConfig {
  std::vector<double> fractions;
  std::size_t batch_size = 1024;
  // Every edge type with a nonzero fraction gets at least this many slots;
  // the extra slots are taken from the currently largest counts.
  std::size_t min_per_type = 0;

  // Largest-remainder rounding of fraction * batch_size; ties go to the
  // edge type declared first. Sums to batch_size exactly. Throws ConfigError
  // on negative fractions or fractions that do not sum to 1 (within 1e-6).
  std::vector<std::size_t> counts() const;
};

// Fractions proportional to edge counts with a floor of one slot per
// non-empty edge type.
MixConfig proportional_mix(const TripleStore& store, std::size_t batch_size);

struct NegativePool {
  EntityTypeId entity_type = 0;
  std::vector<EntityId> ids;
};

// Uniform with replacement over the type's vocabulary. Throws ConfigError on
// an empty vocabulary or pool_size == 0.
NegativePool build_pool(const TripleStore& store, EntityTypeId entity_type,
                        std::size_t pool_size, std::uint64_t seed);

// Cyclic reader over one edge type's positives. Each pass visits every edge
// once in a fresh seeded permutation.
class EdgeStream {
 public:
  EdgeStream(std::span<const Triple> edges, std::uint64_t seed);

  void take(std::size_t n, std::vector<Triple>& out);
  std::uint64_t epoch() const { return epoch_; }
  std::size_t size() const { return edges_.size(); }

 private:
  void reshuffle();

  std::span<const Triple> edges_;
  Rng rng_;
  std::vector<std::uint32_t> order_;
  std::size_t cursor_ = 0;
  std::uint64_t epoch_ = 0;
};

// One EdgeStream per edge type; every call yields exactly mix.batch_size
// positives, grouped by edge type.
class BatchComposer {
 public:
  // Throws ConfigError if an edge type with a nonzero share has no edges.
  BatchComposer(const TripleStore& store, MixConfig mix, std::uint64_t seed);

  std::vector<std::vector<Triple>> next();
  const std::vector<std::size_t>& counts() const { return counts_; }
  const EdgeStream& stream(EdgeTypeId et) const { return streams_[et]; }

 private:
  std::vector<EdgeStream> streams_;
  std::vector<std::size_t> counts_;
};

struct PositiveGroup {
  EdgeTypeId edge_type = 0;
  std::vector<Triple> positives;
  // positives.size() x negatives_per_positive tail ids, row-major; the first
  // k_uniform of each row are uniform, the rest in-batch.
  std::vector<EntityId> negative_tails;
};

struct BatchStats {
  // In-batch negatives replaced by uniform ones because the edge type had a
  // single positive in the batch.
  std::size_t in_batch_fallbacks = 0;
};

struct TrainBatch {
  std::vector<PositiveGroup> groups;
  std::size_t negatives_per_positive = 0;
  BatchStats stats;

  std::size_t num_positives() const;
};

// Corrupts tails only. Uniform negatives come from the pool of the tail
// entity type (pools indexed by EntityTypeId; unused types may be empty).
// In-batch negatives are tails of other positives of the same edge type.
TrainBatch attach_negatives(const Schema& schema,
                            std::vector<std::vector<Triple>> positives,
                            std::span<const NegativePool> pools,
                            std::size_t k_uniform, std::size_t k_in_batch,
                            Rng& rng);

// Bounded single-producer hand-off queue.
template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {}

  // Returns false once closed.
  bool push(T value) {
    std::unique_lock lock(mu_);
    not_full_.wait(lock, [&] { return closed_ || items_.size() < capacity_; });
    if (closed_) return false;
    items_.push_back(std::move(value));
    not_empty_.notify_one();
    return true;
  }
  std::optional<T> pop() {
    std::unique_lock lock(mu_);
    not_empty_.wait(lock, [&] { return closed_ || !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    T value = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return value;
  }
  void close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    not_full_.notify_all();
    not_empty_.notify_all();
  }

 private:
  std::size_t capacity_;
  std::mutex mu_;
  std::condition_variable not_full_;
  std::condition_variable not_empty_;
  std::deque<T> items_;
  bool closed_ = false;
};

// Produces TrainBatches either inline (single-reader, deterministic mode) or
// on a background thread feeding a bounded queue. Batches are consumed in
// production order in both modes.
class BatchSource {
 public:
  using Producer = std::function<TrainBatch()>;

  BatchSource(Producer producer, bool background, std::size_t queue_depth = 4);
  ~BatchSource();
  BatchSource(const BatchSource&) = delete;
  BatchSource& operator=(const BatchSource&) = delete;

  TrainBatch next();

 private:
  Producer producer_;
  std::optional<BoundedQueue<TrainBatch>> queue_;
  std::exception_ptr error_;
  std::jthread worker_;
};

}  // namespace kge
