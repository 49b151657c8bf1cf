#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kge/model.h"
#include "kge/optimizer.h"
#include "kge/synthetic.h"

namespace kge {

// How pretrained KGE rows enter the ranking model.
//   kFrozen:    anchor-space embeddings, fixed, fed to the scoring MLP.
//   kDirect:    same inputs, but rows and relation transforms are fine-tuned.
//   kAttention: fine-tuned rows go through one self-attention layer first.
enum class IntegrationMode { kFrozen, kDirect, kAttention };

std::string_view to_string(IntegrationMode mode);
IntegrationMode parse_integration_mode(std::string_view s);

struct RankingExample {
  std::vector<EntityId> slots;  // one id per slot type
  std::vector<double> side;     // dense side features
  int label = 0;
};

struct RankingDatasetConfig {
  std::vector<std::string> slot_types{"user", "ad", "item", "advertiser"};
  std::size_t examples = 10000;
  // Negatives per positive.
  double neg_ratio = 1.0;
  // Probability that a positive keeps every slot in the first slot's
  // community; the rest draw their other slots from anywhere.
  double p_in = 0.97;
  std::size_t side_features = 4;

  void validate() const;  // throws ConfigError
};

struct RankingDataset {
  std::vector<EntityTypeId> slot_types;
  std::size_t side_dim = 0;
  std::vector<RankingExample> examples;
};

// Positives: slots drawn from the first slot's community (a "click");
// negatives: the other slots come from different communities. Side features
// are i.i.d. N(0, 1) noise, so the label is reachable only through entity
// identity. Throws ConfigError on unknown slot types, fewer than two slots
// or an empty slot vocabulary.
RankingDataset build_ranking_dataset(const Schema& schema,
                                     const Communities& community,
                                     const RankingDatasetConfig& config,
                                     std::uint64_t seed);

// Label-permutation control: same examples, labels shuffled.
RankingDataset shuffle_labels(RankingDataset data, std::uint64_t seed);

// "label \t slot raw ids... \t side features..."
void write_dataset_tsv(std::ostream& out, const RankingDataset& data,
                       const std::vector<Vocabulary>& vocab);

// Mann-Whitney AUC with ties counted 1/2. Throws ContractViolation when only
// one class is present or the sizes differ.
double auc(std::span<const int> labels, std::span<const double> scores);

// Scoring network over slot vectors. Dense parameters live in one flat
// vector so they can be optimised and finite-difference checked as a block.
//
// attention:  q_i = Wq x_i, k_i = Wk x_i, v_i = Wv x_i,
//             L_ij = q_i . k_j / sqrt(dim), A = row-softmax(L),
//             o_i = sum_j A_ij v_j, features = [o_1..o_S, L, side]
// otherwise:  features = [x_1..x_S, side]
// scorer:     logit = w2 . relu(W1 features + b1) + b2
class RankerNet {
 public:
  struct Cache {
    std::vector<double> slots, q, k, v, logits, weights, attended, features,
        pre, hidden;
  };

  RankerNet() = default;
  RankerNet(IntegrationMode mode, std::size_t slots, std::size_t dim,
            std::size_t side_dim, std::size_t hidden, std::uint64_t seed);

  IntegrationMode mode() const { return mode_; }
  std::size_t num_slots() const { return slots_; }
  std::size_t dim() const { return dim_; }
  std::size_t side_dim() const { return side_dim_; }
  std::size_t feature_dim() const;

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  // slot_vectors is num_slots x dim, row-major.
  double forward(std::span<const double> slot_vectors,
                 std::span<const double> side, Cache& cache) const;
  // Accumulates d(logit)/d(.) * upstream into grad_params and grad_slots.
  void backward(const Cache& cache, double upstream,
                std::span<double> grad_params, std::span<double> grad_slots) const;

  // Row-softmax attention weights from the last forward (num_slots^2).
  static std::span<const double> attention_weights(const Cache& cache) {
    return cache.weights;
  }

  // Offsets into params(); attention blocks are absent unless kAttention.
  struct Layout {
    std::size_t wq = 0, wk = 0, wv = 0, w1 = 0, b1 = 0, w2 = 0, b2 = 0, size = 0;
  };
  const Layout& layout() const { return layout_; }

 private:
  IntegrationMode mode_ = IntegrationMode::kFrozen;
  std::size_t slots_ = 0, dim_ = 0, side_dim_ = 0, hidden_ = 0;
  Layout layout_;
  std::vector<double> params_;
};

// Looks up slot entities in a KGE model and moves them into one space:
// TransRA rows go through (anchor, type) relations, then every vector is
// L2-normalised (the KGE scores are cosine). Other model kinds use raw rows.
class SlotEncoder {
 public:
  SlotEncoder(const Model& model, std::vector<EntityTypeId> slot_types);

  // out is num_slots x dim.
  void encode(const Model& model, std::span<const EntityId> ids,
              std::span<double> out) const;
  // Backprops d(loss)/d(out) into row gradients (one Matrix per entity type,
  // shaped like model.tables) and relation gradients.
  void backward(const Model& model, std::span<const EntityId> ids,
                std::span<const double> grad_out, std::vector<Matrix>& row_grads,
                std::vector<RelationGrad>& relation_grads) const;

 private:
  std::vector<EntityTypeId> slot_types_;
  std::vector<int> relation_;  // -1: no transform
};

struct RankerConfig {
  std::size_t hidden = 64;
  std::size_t epochs = 8;
  std::size_t batch_size = 32;
  double dense_learning_rate = 0.05;
  double kge_learning_rate = 0.02;
  double validation_fraction = 0.2;

  void validate() const;  // throws ConfigError
};

struct RankerMetric {
  IntegrationMode mode;
  std::size_t epoch = 0;
  std::string split;  // "train" or "validation"
  double auc = 0.0;
  double logloss = 0.0;
};

struct RankerResult {
  RankerNet net;
  Model kge;  // fine-tuned copy (unchanged in frozen mode)
  std::vector<RankerMetric> metrics;

  double final_validation_auc() const;
};

// Logistic loss on labels. The first (1 - validation_fraction) of the
// examples train, the rest validate. Throws ContractViolation if the dataset
// references ids outside the model's vocabularies.
RankerResult train_ranker(const RankingDataset& data, const Model& kge,
                          IntegrationMode mode, const RankerConfig& config,
                          std::uint64_t seed);

// "mode epoch split auc logloss"
void write_metrics_tsv(std::ostream& out, std::span<const RankerMetric> metrics,
                       bool header = true);

}  // namespace kge
