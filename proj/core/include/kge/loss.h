#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace kge {

enum class LossKind { kSampledSoftmax, kMarginRanking, kMeanNegativeMargin };

std::string_view to_string(LossKind kind);
LossKind parse_loss_kind(std::string_view s);

struct LossConfig {
  LossKind kind = LossKind::kSampledSoftmax;
  double temperature = 0.1;
  double margin = 1.0;

  void validate() const;  // throws ConfigError
};

// Loss value plus d(loss)/d(score) for every positive and negative score.
struct LossResult {
  double loss = 0.0;
  std::vector<double> pos_grad;
  std::vector<double> neg_grad;
};

// All losses take P positive scores and a row-major P x K block of negative
// scores (K >= 1 negatives per positive) and throw ContractViolation when
// P == 0, K == 0 or the shapes disagree.

// mean_p -log( e^{s+/tau} / (e^{s+/tau} + sum_n e^{s-/tau}) ), max-shifted.
LossResult sampled_softmax_loss(std::span<const double> pos,
                                std::span<const double> neg, double temperature);

// 1/(P K) sum_p sum_n max(0, margin - (s+ - s-)); zero subgradient at the kink.
LossResult margin_ranking_loss(std::span<const double> pos,
                               std::span<const double> neg, double margin);

// 1/P sum_p max(0, margin - (s+ - mean_n s-)).
LossResult mean_negative_margin_loss(std::span<const double> pos,
                                     std::span<const double> neg, double margin);

LossResult compute_loss(const LossConfig& config, std::span<const double> pos,
                        std::span<const double> neg);

}  // namespace kge
