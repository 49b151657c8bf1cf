#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace kge {

struct AdagradConfig {
  double learning_rate = 0.1;
  double epsilon = 1e-10;
};

// Row-sparse Adagrad state for one parameter block of shape rows x cols:
//   acc += g^2;  p -= lr * g / (sqrt(acc) + eps)
// Rows that are never stepped keep both parameter and accumulator untouched.
class Adagrad {
 public:
  Adagrad() = default;
  Adagrad(std::string name, std::size_t rows, std::size_t cols,
          AdagradConfig config);

  // Throws TrainingFault naming the block and row on a non-finite gradient;
  // in that case nothing is modified.
  void step_row(std::size_t row, std::span<double> param,
                std::span<const double> grad);
  // Whole-block update (rows * cols values).
  void step(std::span<double> param, std::span<const double> grad);

  std::span<const double> accumulator(std::size_t row) const {
    return std::span<const double>(acc_).subspan(row * cols_, cols_);
  }
  const std::string& name() const { return name_; }
  const AdagradConfig& config() const { return config_; }

 private:
  std::string name_;
  std::size_t cols_ = 0;
  AdagradConfig config_;
  std::vector<double> acc_;
};

}  // namespace kge
