#include "kge/math.h"

#include <cmath>
#include <string>

#include "kge/error.h"

namespace kge {
namespace {

constexpr double kNormFloor = 1e-12;

void require_same_dim(ConstVec u, ConstVec v) {
  if (u.size() != v.size()) {
    throw ContractViolation("dimension mismatch: " + std::to_string(u.size()) +
                            " vs " + std::to_string(v.size()));
  }
}

}  // namespace

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

double dot(ConstVec a, ConstVec b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(ConstVec a) { return std::sqrt(dot(a, a)); }

bool all_finite(ConstVec a) {
  for (double x : a) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

void matvec(const Matrix& m, ConstVec x, Vec out) {
  const double* p = m.values.data();
  for (std::size_t r = 0; r < m.rows; ++r, p += m.cols) {
    double s = 0.0;
    for (std::size_t c = 0; c < m.cols; ++c) s += p[c] * x[c];
    out[r] = s;
  }
}

void matvec_transposed_add(const Matrix& m, ConstVec g, Vec out) {
  const double* p = m.values.data();
  for (std::size_t r = 0; r < m.rows; ++r, p += m.cols) {
    const double gr = g[r];
    if (gr == 0.0) continue;
    for (std::size_t c = 0; c < m.cols; ++c) out[c] += gr * p[c];
  }
}

void outer_add(Matrix& m, ConstVec g, ConstVec x, double scale) {
  double* p = m.values.data();
  for (std::size_t r = 0; r < m.rows; ++r, p += m.cols) {
    const double gr = scale * g[r];
    if (gr == 0.0) continue;
    for (std::size_t c = 0; c < m.cols; ++c) p[c] += gr * x[c];
  }
}

void axpy(double scale, ConstVec x, Vec out) {
  for (std::size_t i = 0; i < x.size(); ++i) out[i] += scale * x[i];
}

std::string_view to_string(Distance d) {
  return d == Distance::kCosine ? "cosine" : "l2";
}

Distance parse_distance(std::string_view s) {
  if (s == "cosine") return Distance::kCosine;
  if (s == "l2") return Distance::kL2;
  throw ConfigError("unknown distance '" + std::string(s) +
                    "' (expected cosine or l2)");
}

double distance(Distance kind, ConstVec u, ConstVec v) {
  require_same_dim(u, v);
  if (kind == Distance::kCosine) {
    const double nu = norm(u);
    const double nv = norm(v);
    if (nu < kNormFloor || nv < kNormFloor) return 0.0;
    return dot(u, v) / (nu * nv);
  }
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u[i] - v[i];
    s += d * d;
  }
  return -std::sqrt(s);
}

double distance_backward(Distance kind, ConstVec u, ConstVec v, double upstream,
                         Vec grad_u, Vec grad_v) {
  require_same_dim(u, v);
  if (kind == Distance::kCosine) {
    const double nu = norm(u);
    const double nv = norm(v);
    if (nu < kNormFloor || nv < kNormFloor) return 0.0;
    const double inv = 1.0 / (nu * nv);
    const double c = dot(u, v) * inv;
    if (upstream != 0.0) {
      // d cos / du = v / (|u||v|) - cos * u / |u|^2
      const double au = upstream * inv;
      const double bu = upstream * c / (nu * nu);
      const double bv = upstream * c / (nv * nv);
      for (std::size_t i = 0; i < u.size(); ++i) {
        grad_u[i] += au * v[i] - bu * u[i];
        grad_v[i] += au * u[i] - bv * v[i];
      }
    }
    return c;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u[i] - v[i];
    s += d * d;
  }
  const double dist = std::sqrt(s);
  if (dist > 0.0 && upstream != 0.0) {
    // d(-|u - v|)/du = -(u - v) / |u - v|
    const double k = -upstream / dist;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double d = u[i] - v[i];
      grad_u[i] += k * d;
      grad_v[i] -= k * d;
    }
  }
  return -dist;
}

}  // namespace kge
