#pragma once

#include <cstddef>
#include <span>

namespace pgps {

struct TTestResult {
  double t = 0.0;
  double p = 0.5;  ///< upper-tail probability, in (0, 1) except degenerate cases
  std::size_t n = 0;
  /// Set when the differences have zero sample variance; p is 0, 1 or 0.5
  /// by convention depending on the sign of the mean difference.
  bool degenerate = false;
};

/// One-sided paired t-test of a > b. d = a - b, t = mean(d)/(sd(d)/sqrt(n))
/// with the n-1 sample standard deviation; p is the upper tail of the
/// Student-t distribution with n-1 degrees of freedom. Throws stats_error
/// for n < 2 or length mismatch.
TTestResult paired_one_sided_ttest(std::span<const double> a,
                                   std::span<const double> b);

/// P(T > t) for Student-t with dof degrees of freedom, evaluated through
/// the regularized incomplete beta function (absolute accuracy well below
/// 1e-10 for the dof used here).
double student_t_upper_tail(double t, double dof);

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double regularized_incomplete_beta(double a, double b, double x);

}  // namespace pgps
