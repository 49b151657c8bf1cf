#include "kge/optimizer.h"

#include <cmath>

#include "kge/error.h"

namespace kge {

Adagrad::Adagrad(std::string name, std::size_t rows, std::size_t cols,
                 AdagradConfig config)
    : name_(std::move(name)), cols_(cols), config_(config), acc_(rows * cols) {}

void Adagrad::step_row(std::size_t row, std::span<double> param,
                       std::span<const double> grad) {
  if (param.size() != cols_ || grad.size() != cols_) {
    throw ContractViolation("adagrad '" + name_ + "': shape mismatch");
  }
  for (double g : grad) {
    if (!std::isfinite(g)) {
      throw TrainingFault("non-finite gradient in '" + name_ + "' row " +
                          std::to_string(row));
    }
  }
  double* acc = acc_.data() + row * cols_;
  const double lr = config_.learning_rate;
  const double eps = config_.epsilon;
  for (std::size_t i = 0; i < cols_; ++i) {
    const double g = grad[i];
    if (g == 0.0) continue;
    acc[i] += g * g;
    param[i] -= lr * g / (std::sqrt(acc[i]) + eps);
  }
}

void Adagrad::step(std::span<double> param, std::span<const double> grad) {
  if (param.size() != acc_.size() || grad.size() != acc_.size()) {
    throw ContractViolation("adagrad '" + name_ + "': shape mismatch");
  }
  const std::size_t rows = cols_ == 0 ? 0 : acc_.size() / cols_;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!std::isfinite(grad[i])) {
      throw TrainingFault("non-finite gradient in '" + name_ + "' row " +
                          std::to_string(i / cols_));
    }
  }
  for (std::size_t r = 0; r < rows; ++r) {
    step_row(r, param.subspan(r * cols_, cols_), grad.subspan(r * cols_, cols_));
  }
}

}  // namespace kge
