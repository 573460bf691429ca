#include "fsikit/core_math.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fsikit {

namespace {

constexpr double kPi = std::numbers::pi;

void check_duty(double D) {
    if (!(D >= 0.0 && D <= 1.0))
        throw std::domain_error("duty cycle D must lie in [0, 1]");
}

} // namespace

double alpha0(double D) {
    check_duty(D);
    return kPi * (2.0 * D - 1.0);
}

double alpha1(double D) {
    check_duty(D);
    return kPi * kPi * (2.0 * D * D - 2.0 * D + 1.0);
}

double alpha_closed(double D, double p) {
    check_duty(D);
    if (!(p > 0.0))
        throw std::domain_error("normalized pole p must be > 0");
    if (p < 1e-12)
        return alpha0(D); // removable limit at p -> 0

    // 2*pi*csch(2*pi*p) = 4*pi*e2 / (1 - e2^2),        e2 = exp(-2*pi*p)
    // pi*exp(pi*p*(1-2D))*csch(pi*p) = 2*pi*e1/(1-e2), e1 = exp(-2*pi*p*D)
    // All exponents are <= 0 for D in [0,1], so nothing overflows even for
    // very large p (both terms simply underflow to 0).  The denominators use
    // expm1 so neither term loses precision when p is tiny.
    const double e2 = std::exp(-2.0 * kPi * p);
    const double e1 = std::exp(-2.0 * kPi * p * D);
    return 4.0 * kPi * e2 / -std::expm1(-4.0 * kPi * p) -
           2.0 * kPi * e1 / -std::expm1(-2.0 * kPi * p);
}

std::vector<double> alpha_coefficients(double D, int n_terms) {
    check_duty(D);
    if (n_terms < 1)
        throw std::invalid_argument("n_terms must be >= 1");

    const double a = kPi * (1.0 - 2.0 * D);

    // csch(x) = 1/x + sum_{n>=1} d_n x^(2n-1),
    // d_n = (-1)^(n+1) * 4 * (1 - 2^(2n-1)) * zeta(2n) / (2*pi)^(2n).
    const int n_max = (n_terms + 1) / 2 + 1;
    std::vector<double> d(static_cast<size_t>(n_max) + 1, 0.0);
    for (int n = 1; n <= n_max; ++n) {
        const double sign = (n % 2 == 1) ? 1.0 : -1.0;
        d[static_cast<size_t>(n)] = sign * 4.0 *
                                    (1.0 - std::ldexp(1.0, 2 * n - 1)) *
                                    std::riemann_zeta(2.0 * n) /
                                    std::pow(2.0 * kPi, 2.0 * n);
    }

    // af[m] = a^m / m!
    std::vector<double> af(static_cast<size_t>(n_terms) + 2);
    af[0] = 1.0;
    for (size_t m = 1; m < af.size(); ++m)
        af[m] = af[m - 1] * a / static_cast<double>(m);

    // alpha(p) = (1 - e^{a p})/p + sum_n d_n (2 pi)^{2n} p^{2n-1}
    //            - e^{a p} * sum_n d_n pi^{2n} p^{2n-1}
    // Collecting the coefficient of p^k:
    std::vector<double> out(static_cast<size_t>(n_terms));
    for (int k = 0; k < n_terms; ++k) {
        double c = -af[static_cast<size_t>(k) + 1]; // from (1 - e^{a p})/p
        if (k % 2 == 1) {
            const int n = (k + 1) / 2;
            c += d[static_cast<size_t>(n)] * std::pow(2.0 * kPi, k + 1);
        }
        for (int n = 1; 2 * n - 1 <= k; ++n)
            c -= d[static_cast<size_t>(n)] * std::pow(kPi, 2.0 * n) *
                 af[static_cast<size_t>(k - 2 * n + 1)];
        // paper sign convention: alpha = sum (-1)^k alpha_k p^k
        out[static_cast<size_t>(k)] = (k % 2 == 0) ? c : -c;
    }
    return out;
}

double alpha_series(double D, double p, int n_terms) {
    const std::vector<double> ak = alpha_coefficients(D, n_terms);
    double sum = 0.0;
    double mpk = 1.0; // (-p)^k
    for (int k = 0; k < n_terms; ++k) {
        sum += ak[static_cast<size_t>(k)] * mpk;
        mpk *= -p;
    }
    return sum;
}

AlphaTerms alpha_terms(double D, double p) {
    AlphaTerms t{};
    t.alpha0 = alpha0(D);
    t.alpha1 = alpha1(D);
    t.closed = alpha_closed(D, p);
    t.correction = t.closed - t.alpha0 + t.alpha1 * p;
    return t;
}

double f_transform(const std::vector<PartialFractionTerm>& terms, double D,
                   double omega_s) {
    if (!(omega_s > 0.0))
        throw std::domain_error("omega_s must be > 0");

    int n_origin1 = 0;
    int n_origin2 = 0;
    std::vector<double> poles;
    for (const auto& t : terms) {
        switch (t.kind) {
        case TermKind::Origin1:
            ++n_origin1;
            break;
        case TermKind::Origin2:
            ++n_origin2;
            break;
        case TermKind::RealPole:
            if (!(t.pole_rad_per_s > 0.0))
                throw std::invalid_argument(
                    "real-pole term requires a strictly positive pole");
            poles.push_back(t.pole_rad_per_s);
            break;
        }
    }
    if (n_origin1 > 1 || n_origin2 > 1)
        throw std::invalid_argument(
            "loop gain outside coverage: origin pole of order > 2 "
            "(more than one 1/s or 1/s^2 term)");
    std::sort(poles.begin(), poles.end());
    for (size_t i = 1; i < poles.size(); ++i)
        if (poles[i] - poles[i - 1] <= 1e-12 * poles[i])
            throw std::invalid_argument(
                "loop gain outside coverage: repeated real pole");

    double index = 0.0;
    for (const auto& t : terms) {
        switch (t.kind) {
        case TermKind::Origin1:
            index += t.coefficient * alpha0(D) / omega_s;
            break;
        case TermKind::Origin2:
            index += t.coefficient * alpha1(D) / (omega_s * omega_s);
            break;
        case TermKind::RealPole:
            index += t.coefficient *
                     alpha_closed(D, t.pole_rad_per_s / omega_s) / omega_s;
            break;
        }
    }
    return index;
}

} // namespace fsikit
