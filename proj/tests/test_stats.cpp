#include <doctest.h>

#include <cmath>
#include <vector>

#include "pgps/errors.hpp"
#include "pgps/stats.hpp"
#include "support/t_tail_oracle.hpp"

using namespace pgps;

TEST_SUITE("stats") {

TEST_CASE("upper tail matches quadrature across a (t, dof) grid") {
  const double ts[] = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, -1.0, -2.0, -3.5, 0.01};
  const double dofs[] = {1.0, 2.0, 4.0, 9.0, 30.0};
  for (double t : ts)
    for (double dof : dofs) {
      const double expected = t_upper_tail_by_integration(t, dof);
      const double got = student_t_upper_tail(t, dof);
      CAPTURE(t); CAPTURE(dof);
      CHECK(std::abs(got - expected) < 1e-9);
    }
}

TEST_CASE("tail limits and symmetry") {
  CHECK(student_t_upper_tail(0.0, 5.0) == 0.5);
  for (double t : {0.3, 1.7, 2.9})
    for (double dof : {2.0, 6.0, 19.0}) {
      // S(t) + S(-t) = 1
      CHECK(student_t_upper_tail(t, dof) + student_t_upper_tail(-t, dof) ==
            doctest::Approx(1.0).epsilon(1e-13));
      // monotone decreasing in t
      CHECK(student_t_upper_tail(t, dof) <
            student_t_upper_tail(t - 0.1, dof));
    }
  CHECK(student_t_upper_tail(50.0, 10.0) < 1e-10);
  CHECK(student_t_upper_tail(-50.0, 10.0) > 1.0 - 1e-10);
  CHECK_THROWS_AS(student_t_upper_tail(1.0, 0.0), contract_error);
  CHECK_THROWS_AS(student_t_upper_tail(1.0, -3.0), contract_error);
}

TEST_CASE("incomplete beta identities") {
  CHECK(regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0);
  // I_x(1,1) is the identity function
  for (double x : {0.1, 0.25, 0.5, 0.9})
    CHECK(regularized_incomplete_beta(1.0, 1.0, x) ==
          doctest::Approx(x).epsilon(1e-12));
  // I_x(a,b) = 1 - I_{1-x}(b,a)
  for (double x : {0.05, 0.3, 0.62, 0.97})
    for (double a : {0.5, 2.0, 7.5})
      for (double b : {0.5, 1.0, 4.0})
        CHECK(regularized_incomplete_beta(a, b, x) +
                  regularized_incomplete_beta(b, a, 1.0 - x) ==
              doctest::Approx(1.0).epsilon(1e-12));
  // I_x(1,b) = 1 - (1-x)^b in closed form
  CHECK(regularized_incomplete_beta(1.0, 4.0, 0.2) ==
        doctest::Approx(1.0 - std::pow(0.8, 4)).epsilon(1e-12));
  CHECK_THROWS_AS(regularized_incomplete_beta(0.0, 1.0, 0.5), contract_error);
  CHECK_THROWS_AS(regularized_incomplete_beta(1.0, -1.0, 0.5), contract_error);
}

TEST_CASE("paired test reproduces independently computed literals") {
  struct Fixture {
    std::vector<double> a, b;
    double t, p;
  };
  // expected values come from Simpson integration of the t density,
  // computed outside this codebase
  const Fixture fixtures[] = {
      {{0.1, -0.05, 0.2, 0.05, 0.1}, {0.0, 0.0, 0.0, 0.0, 0.0},
       1.9694638556693236, 0.060121670316774234},
      {{0.84, 0.8, 0.79, 0.88}, {0.8, 0.78, 0.81, 0.83},
       1.453631135557046, 0.12100684731228623},
      {{0.91, 0.9, 0.92, 0.89, 0.95, 0.93}, {0.9, 0.91, 0.9, 0.88, 0.92, 0.94},
       1.274117978594068, 0.12931431975997487},
      {{1.0, 2.0, 3.0, 4.0, 5.0}, {1.1, 1.9, 3.2, 3.8, 5.1},
       -0.2721655269759075, 0.6005170704036085},
      {{-0.2, -0.1, -0.3, -0.15}, {0.0, 0.0, 0.0, 0.0},
       -4.3915503282684005, 0.9890623006086188},
      {{0.5, 0.7}, {0.4, 0.5}, 3.0, 0.10241638234956896},
      {{10.0, 11.0, 12.0, 9.0, 13.0, 10.5, 11.5},
       {9.0, 10.0, 13.0, 8.5, 12.0, 10.0, 11.0},
       1.8708286933869707, 0.05527587020113228},
      {{0.02, 0.03, -0.01, 0.04, 0.0, 0.05}, {0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
       2.2909489747632836, 0.03528281767442304},
      {{0.73, 0.75, 0.7, 0.78, 0.72, 0.74, 0.71, 0.76},
       {0.7, 0.74, 0.71, 0.75, 0.73, 0.7, 0.72, 0.74},
       1.7222374095679303, 0.06434848984248198},
      {{2.5, 2.7, 2.6, 2.8, 2.55, 2.75}, {2.6, 2.65, 2.7, 2.6, 2.5, 2.8},
       0.1762268442125598, 0.4335155454141118},
      {{0.005, -0.003, 0.002, 0.004, -0.001, 0.003, 0.001, -0.002, 0.006,
        0.002},
       {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
       1.8019963960108125, 0.05252907667332796},
      {{5.0, 4.0, 6.0, 5.5, 4.5}, {5.2, 4.1, 5.7, 5.9, 4.6},
       -0.8770580193070291, 0.7850133102557371},
  };

  for (const Fixture& f : fixtures) {
    const TTestResult result = paired_one_sided_ttest(f.a, f.b);
    CAPTURE(f.t);
    CHECK(result.n == f.a.size());
    CHECK_FALSE(result.degenerate);
    CHECK(std::abs(result.t - f.t) < 1e-10);
    CHECK(std::abs(result.p - f.p) < 1e-6);
    // and against the shared runtime oracle
    CHECK(std::abs(result.p -
                   t_upper_tail_by_integration(
                       result.t, static_cast<double>(result.n - 1))) < 1e-6);
  }
}

TEST_CASE("identical samples sit exactly on the fence") {
  const std::vector<double> same = {0.9, 0.8, 0.85, 0.95};
  const TTestResult result = paired_one_sided_ttest(same, same);
  CHECK(result.t == 0.0);
  CHECK(result.p == 0.5);
  CHECK(result.degenerate);
}

TEST_CASE("constant nonzero differences pin the tail") {
  const std::vector<double> ones = {1.0, 1.0, 1.0, 1.0};
  const std::vector<double> zeros = {0.0, 0.0, 0.0, 0.0};

  const TTestResult win = paired_one_sided_ttest(ones, zeros);
  CHECK(win.degenerate);
  CHECK(std::isinf(win.t));
  CHECK(win.t > 0.0);
  CHECK(win.p == 0.0);

  const TTestResult loss = paired_one_sided_ttest(zeros, ones);
  CHECK(loss.degenerate);
  CHECK(loss.t < 0.0);
  CHECK(loss.p == 1.0);
}

TEST_CASE("swapping the samples flips the tail") {
  const std::vector<double> a = {0.93, 0.91, 0.95, 0.9, 0.94};
  const std::vector<double> b = {0.9, 0.92, 0.91, 0.89, 0.9};
  const TTestResult ab = paired_one_sided_ttest(a, b);
  const TTestResult ba = paired_one_sided_ttest(b, a);
  CHECK(ab.t == doctest::Approx(-ba.t).epsilon(1e-13));
  CHECK(ab.p + ba.p == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("preconditions are enforced") {
  const std::vector<double> one = {1.0};
  const std::vector<double> two = {1.0, 2.0};
  const std::vector<double> three = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(paired_one_sided_ttest(one, one), stats_error);
  CHECK_THROWS_AS(paired_one_sided_ttest(two, three), stats_error);
  CHECK_THROWS_WITH_AS(paired_one_sided_ttest(three, two),
                       "paired t-test requires equal-length samples (3 vs 2)",
                       stats_error);
}

}  // TEST_SUITE
