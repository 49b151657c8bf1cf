#include "kge/gradient_check.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "kge/error.h"

namespace kge {

std::vector<double> central_difference(const ScalarFn& f,
                                       std::span<const double> params,
                                       double eps) {
  if (!(eps > 0.0)) throw OracleError("finite-difference step must be > 0");
  std::vector<double> x(params.begin(), params.end());
  if (!std::isfinite(f(x))) throw OracleError("function is non-finite at the base point");
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + eps;
    const double plus = f(x);
    x[i] = saved - eps;
    const double minus = f(x);
    x[i] = saved;
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      throw OracleError("function is non-finite near coordinate " +
                        std::to_string(i));
    }
    grad[i] = (plus - minus) / (2.0 * eps);
  }
  return grad;
}

double check_gradient(const ScalarFn& f, std::span<const double> params,
                      std::span<const double> analytic, double eps) {
  if (analytic.size() != params.size()) {
    throw OracleError("analytic gradient has " +
                      std::to_string(analytic.size()) + " entries, expected " +
                      std::to_string(params.size()));
  }
  const auto numeric = central_difference(f, params, eps);
  double worst = 0.0;
  for (std::size_t i = 0; i < numeric.size(); ++i) {
    const double a = analytic[i];
    const double n = numeric[i];
    const double scale = std::max({kGradientFloor, std::fabs(a), std::fabs(n)});
    const double err = std::fabs(a - n) / scale;
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace kge
