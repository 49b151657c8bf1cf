#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "kge/loss.h"
#include "kge/model.h"
#include "kge/optimizer.h"
#include "kge/sampling.h"

namespace kge {

struct TrainConfig {
  ModelSpec model;
  std::size_t steps = 5000;
  std::size_t batch_size = 1024;
  // Per edge type share of each batch; empty means proportional_mix.
  std::vector<double> mix;
  std::size_t uniform_negatives = 2;
  std::size_t in_batch_negatives = 2;
  std::size_t pool_size = 100000;
  LossConfig loss;
  AdagradConfig optimizer;
  std::uint64_t seed = 0;
  std::size_t checkpoint_every = 1000;
  // Single-reader mode: batches are prepared inline on the training thread.
  bool deterministic = true;

  void validate(const Schema& schema) const;  // throws ConfigError
};

struct TelemetryRecord {
  std::uint64_t step = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
  // Indexed by EdgeTypeId; NaN when the edge type had no positives.
  std::vector<double> pos_mean;
  std::vector<double> neg_mean;
};

struct TrainTelemetry {
  std::vector<std::string> edge_types;
  std::vector<TelemetryRecord> records;  // one per step, in order

  // Mean loss over steps (step - window, step], 1-based steps.
  double smoothed_loss(std::uint64_t step, std::size_t window) const;
  // "step loss pos_mean:<et>... neg_mean:<et>... grad_norm", every n-th step.
  void write_tsv(std::ostream& out, std::size_t every = 1) const;
};

struct StepStats {
  double loss = 0.0;
  double grad_norm = 0.0;
  std::size_t touched_rows = 0;
};

using CheckpointSink = std::function<void(const Model&)>;

// Single-writer trainer. Each step composes a batch, attaches negatives,
// scores it, evaluates the loss and applies row-sparse Adagrad updates.
class Trainer {
 public:
  Trainer(const TripleStore& train, TrainConfig config);
  Trainer(const TripleStore& train, TrainConfig config, Model initial);
  ~Trainer();

  // Runs the remaining steps up to config.steps. The sink receives the model
  // every checkpoint_every steps and once at the end. A non-finite loss or
  // gradient throws TrainingFault and leaves model() at the last good step.
  void run(const CheckpointSink& sink = {});

  TrainBatch next_batch();
  // One optimisation step on a given batch.
  StepStats step(const TrainBatch& batch);

  const Model& model() const { return model_; }
  Model& mutable_model() { return model_; }
  const TrainTelemetry& telemetry() const { return telemetry_; }
  const TrainConfig& config() const { return config_; }
  const std::vector<std::size_t>& batch_counts() const {
    return composer_.counts();
  }

 private:
  struct Workspace;

  const TripleStore& store_;
  TrainConfig config_;
  Model model_;
  BatchComposer composer_;
  std::vector<NegativePool> pools_;
  Rng negative_rng_;
  std::vector<Adagrad> table_opt_;
  std::vector<Adagrad> projection_opt_;
  std::vector<Adagrad> translation_opt_;
  TrainTelemetry telemetry_;
  std::unique_ptr<Workspace> ws_;
};

struct TrainResult {
  Model model;
  TrainTelemetry telemetry;
};

TrainResult train(const TripleStore& store, const TrainConfig& config,
                  const CheckpointSink& sink = {});

}  // namespace kge
