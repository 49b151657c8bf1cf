#include "kge/loss.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "kge/error.h"

namespace kge {

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::kSampledSoftmax: return "sampled_softmax";
    case LossKind::kMarginRanking: return "margin_ranking";
    case LossKind::kMeanNegativeMargin: return "mean_negative_margin";
  }
  return "?";
}

LossKind parse_loss_kind(std::string_view s) {
  if (s == "sampled_softmax") return LossKind::kSampledSoftmax;
  if (s == "margin_ranking") return LossKind::kMarginRanking;
  if (s == "mean_negative_margin") return LossKind::kMeanNegativeMargin;
  throw ConfigError("unknown loss '" + std::string(s) +
                    "' (expected sampled_softmax, margin_ranking or "
                    "mean_negative_margin)");
}

void LossConfig::validate() const {
  if (!(temperature > 0.0)) throw ConfigError("loss temperature must be > 0");
  if (!(margin > 0.0)) throw ConfigError("loss margin must be > 0");
}

namespace {

std::size_t negatives_per_positive(std::span<const double> pos,
                                   std::span<const double> neg) {
  if (pos.empty()) throw ContractViolation("loss over an empty positive set");
  if (neg.empty() || neg.size() % pos.size() != 0) {
    throw ContractViolation("each positive needs the same number (>= 1) of "
                            "negative scores");
  }
  return neg.size() / pos.size();
}

}  // namespace

LossResult sampled_softmax_loss(std::span<const double> pos,
                                std::span<const double> neg,
                                double temperature) {
  const std::size_t k = negatives_per_positive(pos, neg);
  const double inv_tau = 1.0 / temperature;
  const double inv_p = 1.0 / static_cast<double>(pos.size());
  LossResult r{0.0, std::vector<double>(pos.size()),
               std::vector<double>(neg.size())};

  for (std::size_t i = 0; i < pos.size(); ++i) {
    const auto row = neg.subspan(i * k, k);
    double top = pos[i];
    for (double s : row) top = std::max(top, s);
    const double e_pos = std::exp((pos[i] - top) * inv_tau);
    double z = e_pos;
    for (double s : row) z += std::exp((s - top) * inv_tau);
    // -log softmax(pos) = log z - (pos - top)/tau
    r.loss += std::log(z) - (pos[i] - top) * inv_tau;
    r.pos_grad[i] = (e_pos / z - 1.0) * inv_tau * inv_p;
    for (std::size_t j = 0; j < k; ++j) {
      r.neg_grad[i * k + j] =
          std::exp((row[j] - top) * inv_tau) / z * inv_tau * inv_p;
    }
  }
  r.loss *= inv_p;
  return r;
}

LossResult margin_ranking_loss(std::span<const double> pos,
                               std::span<const double> neg, double margin) {
  const std::size_t k = negatives_per_positive(pos, neg);
  const double scale = 1.0 / static_cast<double>(pos.size() * k);
  LossResult r{0.0, std::vector<double>(pos.size()),
               std::vector<double>(neg.size())};
  for (std::size_t i = 0; i < pos.size(); ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double hinge = margin - (pos[i] - neg[i * k + j]);
      if (hinge > 0.0) {
        r.loss += hinge;
        r.pos_grad[i] -= scale;
        r.neg_grad[i * k + j] += scale;
      }
    }
  }
  r.loss *= scale;
  return r;
}

LossResult mean_negative_margin_loss(std::span<const double> pos,
                                     std::span<const double> neg,
                                     double margin) {
  const std::size_t k = negatives_per_positive(pos, neg);
  const double inv_p = 1.0 / static_cast<double>(pos.size());
  const double inv_k = 1.0 / static_cast<double>(k);
  LossResult r{0.0, std::vector<double>(pos.size()),
               std::vector<double>(neg.size())};
  for (std::size_t i = 0; i < pos.size(); ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < k; ++j) mean += neg[i * k + j];
    mean *= inv_k;
    const double hinge = margin - (pos[i] - mean);
    if (hinge > 0.0) {
      r.loss += hinge;
      r.pos_grad[i] = -inv_p;
      for (std::size_t j = 0; j < k; ++j) r.neg_grad[i * k + j] = inv_p * inv_k;
    }
  }
  r.loss *= inv_p;
  return r;
}

LossResult compute_loss(const LossConfig& config, std::span<const double> pos,
                        std::span<const double> neg) {
  switch (config.kind) {
    case LossKind::kSampledSoftmax:
      return sampled_softmax_loss(pos, neg, config.temperature);
    case LossKind::kMarginRanking:
      return margin_ranking_loss(pos, neg, config.margin);
    case LossKind::kMeanNegativeMargin:
      return mean_negative_margin_loss(pos, neg, config.margin);
  }
  throw ContractViolation("unknown loss kind");
}

}  // namespace kge
