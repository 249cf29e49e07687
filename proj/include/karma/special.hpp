#pragma once

// Distribution tails used by the inference kernels. Accuracy target is
// about 1e-12 relative for moderate arguments.
namespace karma::special {

// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

// Regularized lower / upper incomplete gamma P(a, x), Q(a, x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Student t with df degrees of freedom: P(T <= t).
double student_t_cdf(double t, double df);
// P(T >= t).
double student_t_sf(double t, double df);
// Inverse of student_t_cdf for p in (0, 1).
double student_t_quantile(double p, double df);

// Upper tail of chi-square with k degrees of freedom.
double chi_square_sf(double x, double k);

}  // namespace karma::special
