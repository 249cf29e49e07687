#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace karma {

struct LogisticResult {
  double intercept = 0.0;
  double slope = 0.0;
  double pseudo_r2 = 0.0;  // McFadden: 1 - ll_full / ll_null
  double p_value = 1.0;    // likelihood ratio vs intercept-only, 1 df
  double log_likelihood = 0.0;
  double null_log_likelihood = 0.0;
  double slope_se = 0.0;  // from the observed information at the optimum
  std::size_t n = 0;
  bool converged = false;
  int iterations = 0;

  double predict(double x) const;
};

// Bernoulli log-likelihood of logit P(y=1) = intercept + slope*x, and its gradient.
double logistic_log_likelihood(std::span<const double> x, std::span<const int> y, double intercept, double slope);
std::pair<double, double> logistic_gradient(std::span<const double> x, std::span<const int> y, double intercept,
                                            double slope);

// Newton-Raphson maximum likelihood. Stops when the largest coefficient step
// is below 1e-10 or after 50 iterations. Throws EstimationError for n < 3,
// single-class y, constant x, or complete / quasi-complete separation.
LogisticResult logistic_fit(std::span<const double> x, std::span<const int> y);

struct OlsResult {
  double intercept = 0.0;
  double slope = 0.0;
  double r2 = 0.0;
  double p_value = 1.0;  // two-sided t test on the slope
  double slope_se = 0.0;
  std::size_t n = 0;
  int df = 0;              // n - 2
  bool saturated = false;  // n == 2: exact fit, p reported as 1
};

// Throws EstimationError for n < 2 or constant x.
OlsResult ols_fit(std::span<const double> x, std::span<const double> y);

enum class Tails { One, Two };
// Alternative hypothesis for one-tailed tests.
enum class Direction { GreaterA, GreaterB };

struct TestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
  Tails tails = Tails::Two;
  double mean_a = 0.0;
  double mean_b = 0.0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
};

// Welch's unequal-variance t test with Welch-Satterthwaite df. Both samples
// need at least two values (EstimationError otherwise); one-tailed tests
// need a direction.
TestResult welch_t_test(std::span<const double> a, std::span<const double> b, Tails tails = Tails::Two,
                        std::optional<Direction> direction = std::nullopt);

struct BonferroniRow {
  double p = 1.0;
  double adjusted_threshold = 0.0;
  bool significant = false;
};

std::vector<BonferroniRow> bonferroni(std::span<const double> p_values, double alpha = 0.05);

// Pearson correlation; EstimationError for n < 3 or a constant series.
double pearson_r(std::span<const double> x, std::span<const double> y);

}  // namespace karma
