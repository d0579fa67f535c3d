#include "tracekit/special.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tracekit::special {

void TailConstants::validate() const {
    if (!(eps > 0.0)) throw ParameterError("TailConstants: eps must be > 0");
    if (!(delta > 0.0 && delta < 1.0))
        throw ParameterError("TailConstants: delta must lie in (0,1)");
    if (!(ell >= 0.0)) throw ParameterError("TailConstants: ell must be >= 0");
}

namespace {

// P(s,x) via the power series, valid and fast for x < s+1.
double gamma_p_series(double s, double x) {
    double ap = s;
    double sum = 1.0 / s;
    double del = sum;
    // Terms decay like x/(s+n); near x ~ s this needs O(sqrt(s)) terms.
    const int itmax = 30000;
    for (int n = 0; n < itmax; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-17) break;
    }
    return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
}

// Q(s,x) = 1 - P(s,x) via modified Lentz continued fraction, for x >= s+1.
double gamma_q_contfrac(double s, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - s;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    const int itmax = 30000;
    for (int i = 1; i <= itmax; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - s);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return std::exp(-x + s * std::log(x) - std::lgamma(s)) * h;
}

}  // namespace

double reg_lower_gamma(double s, double x) {
    if (!(s > 0.0)) throw DomainError("reg_lower_gamma: s must be > 0");
    if (!(x >= 0.0)) throw DomainError("reg_lower_gamma: x must be >= 0");
    if (x == 0.0) return 0.0;
    if (x < s + 1.0) return gamma_p_series(s, x);
    return 1.0 - gamma_q_contfrac(s, x);
}

AlphaResult alpha_k(int64_t k, double delta) {
    if (k < 1) throw ParameterError("alpha_k: k must be >= 1");
    if (!(delta > 0.0 && delta < 1.0))
        throw ParameterError("alpha_k: delta must lie in (0,1)");

    const double s = 0.5 * static_cast<double>(k);
    // P(s, alpha*s) is 0 at alpha -> 0 and increasing; a root in (0,1)
    // exists only if the value at alpha = 1 exceeds delta.
    if (reg_lower_gamma(s, s) <= delta) return {1.0 - 1e-12, true};

    double lo = 1e-16;
    double hi = 1.0;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (reg_lower_gamma(s, mid * s) <= delta) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return {0.5 * (lo + hi), false};
}

double sample_constant(const TailConstants& tc) {
    tc.validate();
    return 4.0 * (1.0 + tc.ell) * std::log(2.0 / tc.delta) / (tc.eps * tc.eps);
}

int64_t min_samples_floor(double delta, double ell) {
    if (!(delta > 0.0 && delta < 1.0))
        throw ParameterError("min_samples_floor: delta must lie in (0,1)");
    if (!(ell > 0.0))
        throw ParameterError("min_samples_floor: ell must be > 0 in guaranteed mode");
    return static_cast<int64_t>(
        std::ceil(4.0 * (1.0 + ell) * std::log(2.0 / delta) / (ell * ell)));
}

double hanson_wright_c(double c) {
    if (!(c > 0.0 && c < 0.5))
        throw DomainError("hanson_wright_c: c must lie in (0, 0.5)");
    // log1p keeps the c -> 0 limit (C -> 1) accurate.
    return -1.0 / c - std::log1p(-2.0 * c) / (2.0 * c * c);
}

double hw_tail_bound(double frob2, double spec, int64_t m, double eps, double c) {
    if (!(spec > 0.0) || !(frob2 >= spec * spec))
        throw ParameterError("hw_tail_bound: need frob2 >= spec^2 > 0");
    if (m < 1) throw ParameterError("hw_tail_bound: m must be >= 1");
    if (!(eps >= 0.0)) throw ParameterError("hw_tail_bound: eps must be >= 0");
    const double big_c = hanson_wright_c(c);
    const double exponent =
        std::min(eps * eps / (4.0 * big_c * frob2), c * eps / (2.0 * spec));
    return 2.0 * std::exp(-static_cast<double>(m) * exponent);
}

}  // namespace tracekit::special
