#pragma once

#include <functional>
#include <span>
#include <vector>

namespace kge {

using ScalarFn = std::function<double(std::span<const double>)>;

// Central differences (f(x + eps e_i) - f(x - eps e_i)) / 2 eps for every
// coordinate. Throws OracleError if f is non-finite at a probe point.
std::vector<double> central_difference(const ScalarFn& f,
                                       std::span<const double> params,
                                       double eps);

// Below this magnitude gradient entries are compared in absolute terms.
inline constexpr double kGradientFloor = 1e-6;

// Max over coordinates of |a - n| / max(|a|, |n|, kGradientFloor) between the
// analytic gradient a and the central-difference gradient n. A sign-flipped
// gradient scores 2.
double check_gradient(const ScalarFn& f, std::span<const double> params,
                      std::span<const double> analytic, double eps = 1e-5);

}  // namespace kge
