#pragma once

#include <cstdint>

#include "tracekit/types.hpp"

namespace tracekit::special {

/// Tolerance/failure-probability/slack triple driving the adaptive estimators.
/// ell = 0 is reserved for the practical mode that omits the sample floor.
struct TailConstants {
    double eps;
    double delta;
    double ell = 0.0;

    void validate() const;
};

/// Regularized lower incomplete gamma function P(s,x) = gamma(s,x)/Gamma(s).
///
/// Series expansion for x < s+1, modified Lentz continued fraction otherwise;
/// absolute accuracy around 1e-14 over the range needed here (s up to ~5e5).
/// Monotone non-decreasing in x, P(s,0) = 0, P(s,x) -> 1 as x -> inf.
double reg_lower_gamma(double s, double x);

/// Largest alpha in (0,1) with P(k/2, alpha*k/2) <= delta, i.e. the root of
/// P(k/2, alpha*k/2) = delta, found by bisection on [1e-16, 1] to absolute
/// tolerance 1e-12.  When even alpha = 1 satisfies the constraint (tiny k
/// together with large delta) there is no root in (0,1); the value is clamped
/// to 1 - 1e-12 and flagged.
struct AlphaResult {
    double value;
    bool clamped;
};
AlphaResult alpha_k(int64_t k, double delta);

/// C(eps,delta) = 4(1+ell) * eps^-2 * log(2/delta).
double sample_constant(const TailConstants& tc);

/// ceil(4(1+ell) log(2/delta) / ell^2), the sample floor of the guaranteed
/// mode.  Requires ell > 0; the practical mode omits this floor entirely.
int64_t min_samples_floor(double delta, double ell);

/// C(c) = -1/c - log(1-2c)/(2c^2) for c in (0, 1/2).  Always > 1, tends to 1
/// as c -> 0+.
double hanson_wright_c(double c);

/// Two-sided tail bound 2 exp(-m min{eps^2/(4 C(c) frob2), c eps/(2 spec)})
/// for the Gaussian trace estimator with m probes, where frob2 = |A|_F^2 and
/// spec = |A|_2.  Requires frob2 >= spec^2 > 0 and m >= 1.
double hw_tail_bound(double frob2, double spec, int64_t m, double eps, double c);

}  // namespace tracekit::special
