#pragma once

#include <vector>

namespace fsikit {

// Scalar building block of every subharmonic-oscillation (fast-scale
// instability) condition in this toolkit:
//
//   alpha(D, p) = 2*pi*csch(2*pi*p) - pi*exp(pi*p*(1-2*D))*csch(pi*p)
//
// where D is the duty cycle and p a pole frequency normalized by the
// switching frequency (p = omega_p / omega_s).  Its Taylor expansion in p,
//
//   alpha = sum_k (-1)^k alpha_k(D) p^k,
//
// has alpha_0 = pi*(2D-1) and alpha_1 = pi^2*(2D^2-2D+1); these two leading
// coefficients drive all the closed-form stability conditions.

// alpha_0(D) = pi*(2D-1).  Throws std::domain_error for D outside [0,1].
double alpha0(double D);

// alpha_1(D) = pi^2*(2D^2-2D+1).  Throws std::domain_error for D outside [0,1].
double alpha1(double D);

// Closed-form alpha(D, p).  Numerically stable for large p (csch is evaluated
// through decaying exponentials only).  Requires p > 0; values of p below
// 1e-12 return the alpha_0 limit.  Throws std::domain_error on bad input.
double alpha_closed(double D, double p);

// Taylor coefficients alpha_k(D), k = 0 .. n_terms-1, in the sign convention
// alpha = sum_k (-1)^k alpha_k p^k.  Derived from the Laurent series of csch:
// csch(x) = 1/x + sum_n d_n x^(2n-1) with
// d_n = (-1)^(n+1) * 4 * (1 - 2^(2n-1)) * zeta(2n) / (2*pi)^(2n).
// The series converges for |p| < 1/2 (nearest pole of alpha at p = i/2).
std::vector<double> alpha_coefficients(double D, int n_terms);

// Truncated series sum_{k<n_terms} (-1)^k alpha_k(D) p^k.
// n_terms = 1 returns alpha0(D) exactly.
double alpha_series(double D, double p, int n_terms);

// alpha decomposed as alpha0 - alpha1*p + correction (correction = the k >= 2
// series tail, evaluated as closed - alpha0 + alpha1*p).
struct AlphaTerms {
    double alpha0;
    double alpha1;
    double correction;
    double closed;
};
AlphaTerms alpha_terms(double D, double p);

// One term of a partial-fraction decomposition of a rational loop gain:
//   Origin1:  c / s
//   Origin2:  c / s^2
//   RealPole: c / (s + pole_rad_per_s)
enum class TermKind { Origin1, Origin2, RealPole };

struct PartialFractionTerm {
    TermKind kind;
    double coefficient;
    double pole_rad_per_s = 0.0; // 0 for origin kinds, > 0 for RealPole
};

// Linear map from a decomposed loop gain to the scalar stability index
// (closed loop avoids subharmonic oscillation iff the index is < 1):
//   Origin1:  c * alpha0(D) / omega_s
//   Origin2:  c * alpha1(D) / omega_s^2
//   RealPole: c * alpha(D, pole/omega_s) / omega_s
// Rejects decompositions outside this coverage (more than one origin term of
// each order, repeated or non-positive real poles) with std::invalid_argument.
double f_transform(const std::vector<PartialFractionTerm>& terms, double D,
                   double omega_s);

} // namespace fsikit
