#include "fsikit/core_math.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

using namespace fsikit;
namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_SUITE("core_math") {

TEST_CASE("alpha0 closed form") {
    CHECK(alpha0(0.5) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(alpha0(1.0) == doctest::Approx(kPi).epsilon(1e-15));
    CHECK(alpha0(0.0) == doctest::Approx(-kPi).epsilon(1e-15));
    CHECK(alpha0(0.86) == doctest::Approx(kPi * 0.72).epsilon(1e-15));
    CHECK_THROWS_AS(alpha0(-0.01), std::domain_error);
    CHECK_THROWS_AS(alpha0(1.01), std::domain_error);
}

TEST_CASE("alpha1 closed form") {
    // alpha1(D) = pi^2 (2D^2 - 2D + 1); minimum pi^2/2 at D = 1/2.
    CHECK(alpha1(0.5) == doctest::Approx(kPi * kPi / 2.0).epsilon(1e-15));
    CHECK(alpha1(0.0) == doctest::Approx(kPi * kPi).epsilon(1e-15));
    CHECK(alpha1(1.0) == doctest::Approx(kPi * kPi).epsilon(1e-15));
    CHECK(alpha1(0.6) == doctest::Approx(5.1321942886).epsilon(1e-9));
    CHECK_THROWS_AS(alpha1(1.5), std::domain_error);
}

TEST_CASE("alpha closed form against frozen high-precision values") {
    CHECK(alpha_closed(0.86, 0.75) ==
          doctest::Approx(0.00272900017933).epsilon(1e-10));
    CHECK(alpha_closed(0.36, 0.18) ==
          doctest::Approx(-1.64743230274).epsilon(1e-10));
    CHECK(alpha_closed(0.30, 0.20) ==
          doctest::Approx(-2.1326180648).epsilon(1e-10));
    CHECK(alpha_closed(0.86, 0.30) ==
          doctest::Approx(0.488576581863).epsilon(1e-10));
}

TEST_CASE("alpha small-p limit and large-p decay") {
    // p -> 0 recovers alpha0; large p kills both csch terms.
    CHECK(alpha_closed(0.7, 1e-13) == doctest::Approx(alpha0(0.7)).epsilon(1e-12));
    CHECK(alpha_closed(0.7, 1e-9) == doctest::Approx(alpha0(0.7)).epsilon(1e-6));
    CHECK(std::abs(alpha_closed(0.5, 50.0)) < 1e-30);
    CHECK_THROWS_AS(alpha_closed(0.5, -1.0), std::domain_error);
}

TEST_CASE("series coefficients reproduce alpha0 and alpha1") {
    for (double D : {0.1, 0.36, 0.5, 0.6, 0.86, 0.99}) {
        const auto c = alpha_coefficients(D, 2);
        REQUIRE(c.size() == 2);
        CHECK(c[0] == doctest::Approx(alpha0(D)).epsilon(1e-13));
        CHECK(c[1] == doctest::Approx(alpha1(D)).epsilon(1e-13));
    }
}

TEST_CASE("series sum matches the closed form inside the radius") {
    // The series converges for |p| < 1/2 (pole of alpha at p = i/2).
    for (double D : {0.3, 0.5, 0.86}) {
        for (double p : {0.05, 0.1, 0.2, 0.3}) {
            CHECK(alpha_series(D, p, 40) ==
                  doctest::Approx(alpha_closed(D, p)).epsilon(1e-8));
        }
    }
    CHECK(alpha_series(0.42, 0.17, 1) == alpha0(0.42));
}

TEST_CASE("alpha_terms decomposition is consistent") {
    const AlphaTerms t = alpha_terms(0.36, 0.2);
    CHECK(t.alpha0 == alpha0(0.36));
    CHECK(t.alpha1 == alpha1(0.36));
    CHECK(t.closed == alpha_closed(0.36, 0.2));
    CHECK(t.alpha0 - t.alpha1 * 0.2 + t.correction ==
          doctest::Approx(t.closed).epsilon(1e-13));
}

TEST_CASE("f_transform maps the three term kinds") {
    const double D = 0.7, ws = 2.0 * kPi * 50e3;
    // c/s -> c*alpha0/ws
    CHECK(f_transform({{TermKind::Origin1, 3.0, 0.0}}, D, ws) ==
          doctest::Approx(3.0 * alpha0(D) / ws).epsilon(1e-14));
    // c/s^2 -> c*alpha1/ws^2
    CHECK(f_transform({{TermKind::Origin2, 2.0, 0.0}}, D, ws) ==
          doctest::Approx(2.0 * alpha1(D) / (ws * ws)).epsilon(1e-14));
    // c/(s+wp) -> c*alpha(D, wp/ws)/ws
    const double wp = 0.75 * ws;
    CHECK(f_transform({{TermKind::RealPole, 5.0, wp}}, D, ws) ==
          doctest::Approx(5.0 * alpha_closed(D, 0.75) / ws).epsilon(1e-13));
}

TEST_CASE("f_transform is additive over terms") {
    const double ws = 1e5;
    const std::vector<PartialFractionTerm> a{{TermKind::Origin1, 1.5, 0.0}};
    const std::vector<PartialFractionTerm> b{{TermKind::RealPole, -2.0, 4e4}};
    std::vector<PartialFractionTerm> both = a;
    both.insert(both.end(), b.begin(), b.end());
    CHECK(f_transform(both, 0.6, ws) ==
          f_transform(a, 0.6, ws) + f_transform(b, 0.6, ws));
}

TEST_CASE("f_transform rejects decompositions outside coverage") {
    const double ws = 1e5;
    CHECK_THROWS_AS(f_transform({{TermKind::Origin1, 1.0, 0.0},
                                 {TermKind::Origin1, 2.0, 0.0}},
                                0.5, ws),
                    std::invalid_argument);
    CHECK_THROWS_AS(f_transform({{TermKind::RealPole, 1.0, 1e4},
                                 {TermKind::RealPole, 1.0, 1e4}},
                                0.5, ws),
                    std::invalid_argument);
    CHECK_THROWS_AS(f_transform({{TermKind::RealPole, 1.0, -1e4}}, 0.5, ws),
                    std::invalid_argument);
}

} // TEST_SUITE
