#include "pgps/stats.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "pgps/errors.hpp"

namespace pgps {
namespace {

// Continued fraction for the incomplete beta function (modified Lentz).
// Converges quickly for x < (a+1)/(a+b+2); the caller applies the symmetry
// transform outside that region.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double result = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double numer = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + numer * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + numer / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    result *= d * c;
    numer = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + numer * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + numer / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    result *= delta;
    if (std::fabs(delta - 1.0) < kEps) return result;
  }
  throw numeric_error("incomplete beta continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0))
    throw contract_error("incomplete beta requires positive parameters");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_prefactor = std::lgamma(a + b) - std::lgamma(a) -
                               std::lgamma(b) + a * std::log(x) +
                               b * std::log1p(-x);
  const double prefactor = std::exp(log_prefactor);
  if (x < (a + 1.0) / (a + b + 2.0))
    return prefactor * beta_continued_fraction(a, b, x) / a;
  return 1.0 - prefactor * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_upper_tail(double t, double dof) {
  if (!(dof > 0.0)) throw contract_error("degrees of freedom must be positive");
  if (t == 0.0) return 0.5;
  const double x = dof / (dof + t * t);
  const double half_tail = 0.5 * regularized_incomplete_beta(0.5 * dof, 0.5, x);
  return t > 0.0 ? half_tail : 1.0 - half_tail;
}

TTestResult paired_one_sided_ttest(std::span<const double> a,
                                   std::span<const double> b) {
  if (a.size() != b.size())
    throw stats_error("paired t-test requires equal-length samples (" +
                      std::to_string(a.size()) + " vs " +
                      std::to_string(b.size()) + ")");
  const std::size_t n = a.size();
  if (n < 2) throw stats_error("paired t-test requires n >= 2");

  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double centered = (a[i] - b[i]) - mean;
    ss += centered * centered;
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));

  TTestResult result;
  result.n = n;
  if (sd == 0.0) {
    result.degenerate = true;
    if (mean > 0.0) {
      result.t = std::numeric_limits<double>::infinity();
      result.p = 0.0;
    } else if (mean < 0.0) {
      result.t = -std::numeric_limits<double>::infinity();
      result.p = 1.0;
    } else {
      result.t = 0.0;
      result.p = 0.5;
    }
    return result;
  }
  result.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  result.p = student_t_upper_tail(result.t, static_cast<double>(n - 1));
  return result;
}

}  // namespace pgps
