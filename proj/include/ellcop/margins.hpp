#pragma once

#include "ellcop/errors.hpp"

namespace ellcop {

// Degrees-of-freedom parameter of the Student's t margin.
struct Dof {
    double nu;

    explicit Dof(double v) : nu(v) {
        if (!(v > 0.0) || !(v < 1e308)) throw DomainError("degrees of freedom must be positive and finite");
    }
};

// Standard normal distribution function.
double norm_cdf(double x);

// Inverse of norm_cdf on the open unit interval.
double norm_quantile(double u);

// Student's t distribution function with nu degrees of freedom.
double t_cdf(double x, Dof nu);

// Inverse of t_cdf on the open unit interval.
double t_quantile(double u, Dof nu);

// log Gamma(x) for x > 0.
double log_gamma(double x);

// Regularized incomplete beta function I_x(a,b), continued-fraction
// evaluation. Exposed for tests; t_cdf is built on it.
double incomplete_beta(double a, double b, double x);

}  // namespace ellcop
