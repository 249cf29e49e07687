#include "karma/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "karma/error.hpp"
#include "karma/special.hpp"

namespace karma {

namespace {

// log(1 + e^z) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double mean(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double sample_variance(std::span<const double> v, double m) {
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / (v.size() - 1);
}

}  // namespace

double LogisticResult::predict(double x) const { return sigmoid(intercept + slope * x); }

double logistic_log_likelihood(std::span<const double> x, std::span<const int> y, double intercept, double slope) {
  double ll = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double eta = intercept + slope * x[i];
    ll += y[i] * eta - softplus(eta);
  }
  return ll;
}

std::pair<double, double> logistic_gradient(std::span<const double> x, std::span<const int> y, double intercept,
                                            double slope) {
  double g0 = 0.0;
  double g1 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - sigmoid(intercept + slope * x[i]);
    g0 += r;
    g1 += r * x[i];
  }
  return {g0, g1};
}

LogisticResult logistic_fit(std::span<const double> x, std::span<const int> y) {
  if (x.size() != y.size()) throw ValidationError("logistic_fit: x and y differ in length");
  const std::size_t n = x.size();
  if (n < 3) throw EstimationError("logistic_fit: need at least 3 observations");
  const auto ones = std::count(y.begin(), y.end(), 1);
  if (static_cast<std::size_t>(ones + std::count(y.begin(), y.end(), 0)) != n)
    throw ValidationError("logistic_fit: outcomes must be 0 or 1");
  if (ones == 0 || static_cast<std::size_t>(ones) == n)
    throw EstimationError("logistic_fit: outcome has a single class");
  const auto [xmin, xmax] = std::minmax_element(x.begin(), x.end());
  if (*xmin == *xmax) throw EstimationError("logistic_fit: regressor is constant (singular design)");

  double max0 = -INFINITY, min0 = INFINITY, max1 = -INFINITY, min1 = INFINITY;
  for (std::size_t i = 0; i < n; ++i) {
    if (y[i] == 1) {
      max1 = std::max(max1, x[i]);
      min1 = std::min(min1, x[i]);
    } else {
      max0 = std::max(max0, x[i]);
      min0 = std::min(min0, x[i]);
    }
  }
  if (max0 <= min1 || max1 <= min0) throw EstimationError("logistic_fit: outcomes are separated by the regressor");

  const double ybar = static_cast<double>(ones) / n;
  LogisticResult result;
  result.n = n;
  double b0 = std::log(ybar / (1.0 - ybar));
  double b1 = 0.0;
  double ll = logistic_log_likelihood(x, y, b0, b1);

  for (int it = 1; it <= 50; ++it) {
    result.iterations = it;
    double g0 = 0.0, g1 = 0.0, h00 = 0.0, h01 = 0.0, h11 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(b0 + b1 * x[i]);
      const double w = p * (1.0 - p);
      g0 += y[i] - p;
      g1 += (y[i] - p) * x[i];
      h00 += w;
      h01 += w * x[i];
      h11 += w * x[i] * x[i];
    }
    const double det = h00 * h11 - h01 * h01;
    if (!(det > 0.0)) throw EstimationError("logistic_fit: information matrix is singular");
    double s0 = (h11 * g0 - h01 * g1) / det;
    double s1 = (h00 * g1 - h01 * g0) / det;

    // Step halving keeps the likelihood from decreasing.
    double next_ll = logistic_log_likelihood(x, y, b0 + s0, b1 + s1);
    for (int k = 0; k < 30 && next_ll < ll - 1e-12 * std::abs(ll); ++k) {
      s0 *= 0.5;
      s1 *= 0.5;
      next_ll = logistic_log_likelihood(x, y, b0 + s0, b1 + s1);
    }
    b0 += s0;
    b1 += s1;
    ll = next_ll;
    if (std::abs(b1) > 50.0) throw EstimationError("logistic_fit: coefficients diverge (separation)");
    if (std::max(std::abs(s0), std::abs(s1)) < 1e-10) {
      result.converged = true;
      break;
    }
  }

  double h00 = 0.0, h01 = 0.0, h11 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = sigmoid(b0 + b1 * x[i]);
    const double w = p * (1.0 - p);
    h00 += w;
    h01 += w * x[i];
    h11 += w * x[i] * x[i];
  }
  const double det = h00 * h11 - h01 * h01;

  result.intercept = b0;
  result.slope = b1;
  result.log_likelihood = ll;
  result.null_log_likelihood = n * (ybar * std::log(ybar) + (1.0 - ybar) * std::log1p(-ybar));
  result.pseudo_r2 = std::clamp(1.0 - ll / result.null_log_likelihood, 0.0, 1.0);
  const double lr = std::max(0.0, 2.0 * (ll - result.null_log_likelihood));
  result.p_value = std::clamp(special::chi_square_sf(lr, 1.0), 0.0, 1.0);
  result.slope_se = det > 0.0 ? std::sqrt(h00 / det) : INFINITY;
  return result;
}

OlsResult ols_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("ols_fit: x and y differ in length");
  const std::size_t n = x.size();
  if (n < 2) throw EstimationError("ols_fit: need at least 2 observations");
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw EstimationError("ols_fit: regressor is constant (singular design)");

  OlsResult r;
  r.n = n;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - (r.intercept + r.slope * x[i]);
    sse += e * e;
  }
  r.r2 = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 0.0;
  r.df = static_cast<int>(n) - 2;
  if (n == 2) {
    r.saturated = true;
    r.r2 = 1.0;
    r.p_value = 1.0;
    return r;
  }
  r.slope_se = std::sqrt(sse / r.df / sxx);
  if (r.slope_se == 0.0) {
    r.p_value = r.slope == 0.0 ? 1.0 : 0.0;
  } else {
    const double t = r.slope / r.slope_se;
    r.p_value = std::min(1.0, 2.0 * special::student_t_sf(std::abs(t), r.df));
  }
  return r;
}

TestResult welch_t_test(std::span<const double> a, std::span<const double> b, Tails tails,
                        std::optional<Direction> direction) {
  if (a.size() < 2 || b.size() < 2) throw EstimationError("welch_t_test: each sample needs at least 2 values");
  if (tails == Tails::One && !direction) throw ValidationError("welch_t_test: one-tailed test needs a direction");

  TestResult r;
  r.tails = tails;
  r.n_a = a.size();
  r.n_b = b.size();
  r.mean_a = mean(a);
  r.mean_b = mean(b);
  const double va = sample_variance(a, r.mean_a) / a.size();
  const double vb = sample_variance(b, r.mean_b) / b.size();
  const double se2 = va + vb;

  if (se2 == 0.0) {
    r.df = static_cast<double>(a.size() + b.size() - 2);
    if (r.mean_a == r.mean_b) {
      r.t = 0.0;
      r.p = 1.0;
      return r;
    }
    r.t = r.mean_a > r.mean_b ? INFINITY : -INFINITY;
  } else {
    r.t = (r.mean_a - r.mean_b) / std::sqrt(se2);
    r.df = se2 * se2 / (va * va / (a.size() - 1) + vb * vb / (b.size() - 1));
  }

  const double upper = special::student_t_sf(r.t, r.df);  // P(T >= t)
  const double lower = special::student_t_cdf(r.t, r.df);
  if (tails == Tails::Two)
    r.p = std::min(1.0, 2.0 * std::min(upper, lower));
  else
    r.p = *direction == Direction::GreaterA ? upper : lower;
  return r;
}

std::vector<BonferroniRow> bonferroni(std::span<const double> p_values, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("bonferroni: alpha must lie in (0, 1)");
  std::vector<BonferroniRow> rows;
  if (p_values.empty()) return rows;
  const double threshold = alpha / p_values.size();
  for (double p : p_values) rows.push_back({p, threshold, p <= threshold});
  return rows;
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("pearson_r: series differ in length");
  if (x.size() < 3) throw EstimationError("pearson_r: need at least 3 points");
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw EstimationError("pearson_r: a series is constant");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace karma
