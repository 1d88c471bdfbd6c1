#pragma once

#include <string>

namespace causalsem::detail {

double normal_cdf(double x);
/// Inverse standard-normal CDF; p is clamped into (0, 1).
double normal_quantile(double p);
/// Two-sided p-value of a standard-normal statistic.
double normal_two_sided_p(double z);
/// Upper tail P(X > x) of a chi-square with dof degrees of freedom.
double chi_square_sf(double x, double dof);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);

}  // namespace causalsem::detail
