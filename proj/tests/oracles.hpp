#pragma once

// Independent reference computations used only by tests. None of these call
// into the library's numeric code.

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

namespace oracle {

// 2 * (concordant rater pairs / all rater pairs) - 1 by explicit enumeration.
inline double kappa_by_enumeration(std::size_t a, std::size_t b) {
  std::vector<int> votes;
  votes.insert(votes.end(), a, 0);
  votes.insert(votes.end(), b, 1);
  std::size_t concordant = 0, total = 0;
  for (std::size_t i = 0; i < votes.size(); ++i)
    for (std::size_t j = 0; j < votes.size(); ++j) {
      if (i == j) continue;
      ++total;
      if (votes[i] == votes[j]) ++concordant;
    }
  return 2.0 * static_cast<double>(concordant) / static_cast<double>(total) - 1.0;
}

inline double log_likelihood(const std::vector<double>& x, const std::vector<int>& y, double b0, double b1) {
  // Kahan-summed; direct formula log(p) / log(1-p) through log1p/exp.
  double sum = 0.0, comp = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double eta = b0 + b1 * x[i];
    const double term = y[i] ? -std::log1p(std::exp(-eta)) : -std::log1p(std::exp(eta));
    const double yk = term - comp;
    const double t = sum + yk;
    comp = (t - sum) - yk;
    sum = t;
  }
  return sum;
}

// Coarse-to-fine grid maximizer of the logistic log-likelihood.
inline std::pair<double, double> logistic_grid_search(const std::vector<double>& x, const std::vector<int>& y,
                                                      double half_range = 10.0) {
  double c0 = 0.0, c1 = 0.0;
  double step = half_range / 10.0;
  constexpr int kHalf = 10;
  while (step > 1e-10) {
    double best = -INFINITY, b0 = c0, b1 = c1;
    for (int i = -kHalf; i <= kHalf; ++i)
      for (int j = -kHalf; j <= kHalf; ++j) {
        const double ll = log_likelihood(x, y, c0 + i * step, c1 + j * step);
        if (ll > best) {
          best = ll;
          b0 = c0 + i * step;
          b1 = c1 + j * step;
        }
      }
    c0 = b0;
    c1 = b1;
    step /= 4.0;
  }
  return {c0, c1};
}

// Composite Gauss-Legendre (5 nodes) over [lo, hi] with `panels` panels.
inline double integrate(const std::function<double(double)>& f, double lo, double hi, int panels) {
  static const double nodes[5] = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                                  0.9061798459386640};
  static const double weights[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                    0.2369268850561891, 0.2369268850561891};
  const double h = (hi - lo) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = lo + (p + 0.5) * h;
    double s = 0.0;
    for (int k = 0; k < 5; ++k) s += weights[k] * f(mid + 0.5 * h * nodes[k]);
    total += 0.5 * h * s;
  }
  return total;
}

inline double t_density(double t, double df) {
  const double log_c = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) - 0.5 * std::log(df * std::numbers::pi);
  return std::exp(log_c - 0.5 * (df + 1.0) * std::log1p(t * t / df));
}

// P(T >= t) by quadrature. Substituting t = tan(theta) maps the infinite tail
// onto a finite interval.
inline double t_upper_tail(double t, double df) {
  if (t < 0.0) return 1.0 - t_upper_tail(-t, df);
  const double lo = std::atan(t);
  const double hi = std::numbers::pi / 2.0;
  auto f = [df](double theta) {
    const double c = std::cos(theta);
    if (c <= 0.0) return 0.0;
    return t_density(std::tan(theta), df) / (c * c);
  };
  return integrate(f, lo, hi, 4000);
}

struct WelchParts {
  double t, df;
};

inline WelchParts welch_parts(const std::vector<double>& a, const std::vector<double>& b) {
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / v.size();
  };
  auto var = [](const std::vector<double>& v, double m) {
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / (v.size() - 1);
  };
  const double ma = mean(a), mb = mean(b);
  const double va = var(a, ma) / a.size(), vb = var(b, mb) / b.size();
  return {(ma - mb) / std::sqrt(va + vb),
          (va + vb) * (va + vb) / (va * va / (a.size() - 1) + vb * vb / (b.size() - 1))};
}

// Textbook two-pass Pearson r.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double num = 0, dx = 0, dy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - mx) * (y[i] - my);
    dx += (x[i] - mx) * (x[i] - mx);
    dy += (y[i] - my) * (y[i] - my);
  }
  return num / std::sqrt(dx * dy);
}

}  // namespace oracle
