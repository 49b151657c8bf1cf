#pragma once

// Reference implementations used only by tests. They are written
// independently of the library code they check and favour obviousness over
// speed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace oracle {

// Five-point stencil derivative of f along every coordinate.
inline std::vector<double> numeric_gradient(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x, double h = 1e-4) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double x0 = x[i];
    auto at = [&](double d) {
      x[i] = x0 + d;
      const double v = f(x);
      x[i] = x0;
      return v;
    };
    g[i] = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
  }
  return g;
}

inline double max_relative_error(const std::vector<double>& a,
                                 const std::vector<double>& n,
                                 double floor = 1e-6) {
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double s = std::max({floor, std::fabs(a[i]), std::fabs(n[i])});
    worst = std::max(worst, std::fabs(a[i] - n[i]) / s);
  }
  return worst;
}

// Plain formulas, no shared helpers with the library.
inline double cosine(const std::vector<double>& u, const std::vector<double>& v) {
  double uv = 0, uu = 0, vv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uv += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (std::sqrt(uu) < 1e-12 || std::sqrt(vv) < 1e-12) return 0.0;
  return uv / (std::sqrt(uu) * std::sqrt(vv));
}

inline double neg_l2(const std::vector<double>& u, const std::vector<double>& v) {
  double s = 0;
  for (std::size_t i = 0; i < u.size(); ++i) s += (u[i] - v[i]) * (u[i] - v[i]);
  return -std::sqrt(s);
}

// y = M x + T for a row-major n x n matrix.
inline std::vector<double> affine(const std::vector<double>& m,
                                  const std::vector<double>& x,
                                  const std::vector<double>* t = nullptr) {
  const std::size_t n = x.size();
  std::vector<double> y(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) y[r] += m[r * n + c] * x[c];
    if (t) y[r] += (*t)[r];
  }
  return y;
}

// Pessimistic rank of scores[positive] among scores[others].
inline std::size_t brute_rank(double positive, const std::vector<double>& others) {
  std::size_t r = 1;
  for (double s : others) r += s >= positive ? 1 : 0;
  return r;
}

// Mann-Whitney by enumerating every (positive, negative) pair. Returns
// (2 * wins + ties) and (2 * n_pos * n_neg) so callers can compare exactly.
inline std::pair<std::uint64_t, std::uint64_t> pairwise_auc_counts(
    const std::vector<int>& labels, const std::vector<double>& scores) {
  std::uint64_t num = 0, pos = 0, neg = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i]) ++pos; else ++neg;
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (labels[j]) continue;
      if (scores[i] > scores[j]) num += 2;
      else if (scores[i] == scores[j]) num += 1;
    }
  }
  return {num, 2 * pos * neg};
}

inline double pairwise_auc(const std::vector<int>& labels,
                           const std::vector<double>& scores) {
  const auto [num, den] = pairwise_auc_counts(labels, scores);
  return static_cast<double>(num) / static_cast<double>(den);
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n,
                                         double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::size_t count_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

// Distinct values of one tab-separated column, like `cut -f N | sort -u | wc -l`.
inline std::size_t distinct_in_column(const std::filesystem::path& p,
                                      std::size_t column,
                                      const std::string& type_filter,
                                      std::size_t type_column) {
  std::ifstream in(p);
  std::set<std::string> seen;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string x;
    while (std::getline(ss, x, '\t')) f.push_back(x);
    if (f.size() <= std::max(column, type_column)) continue;
    if (f[type_column] == type_filter) seen.insert(f[column]);
  }
  return seen.size();
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  static std::mt19937_64 rng(std::random_device{}());
  auto p = std::filesystem::temp_directory_path() /
           ("anchorkge_" + tag + "_" + std::to_string(rng() % 1000000000));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace oracle
