#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace kge {

using Vec = std::span<double>;
using ConstVec = std::span<const double>;

// Row-major dense matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), values(r * c, fill) {}

  static Matrix identity(std::size_t n);

  Vec row(std::size_t i) { return Vec(values).subspan(i * cols, cols); }
  ConstVec row(std::size_t i) const {
    return ConstVec(values).subspan(i * cols, cols);
  }
  double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return values[r * cols + c];
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

double dot(ConstVec a, ConstVec b);
double norm(ConstVec a);
bool all_finite(ConstVec a);

// out = m * x
void matvec(const Matrix& m, ConstVec x, Vec out);
// out += m^T * g
void matvec_transposed_add(const Matrix& m, ConstVec g, Vec out);
// m += scale * g x^T
void outer_add(Matrix& m, ConstVec g, ConstVec x, double scale = 1.0);
// out += scale * x
void axpy(double scale, ConstVec x, Vec out);

enum class Distance { kCosine, kL2 };

std::string_view to_string(Distance d);
Distance parse_distance(std::string_view s);

// Score convention: larger is more plausible. Cosine similarity lies in
// [-1, 1] and is 0 when either norm is below 1e-12; l2 returns the negated
// Euclidean distance. Throws ContractViolation on dimension mismatch.
double distance(Distance kind, ConstVec u, ConstVec v);

// Adds upstream * d(distance)/du into grad_u and upstream * d/dv into grad_v;
// returns the distance value. At the non-differentiable points (zero norm
// for cosine, u == v for l2) the gradient contribution is zero.
double distance_backward(Distance kind, ConstVec u, ConstVec v, double upstream,
                         Vec grad_u, Vec grad_v);

}  // namespace kge
