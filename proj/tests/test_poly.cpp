#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "facdual/interval.hpp"
#include "facdual/poly.hpp"

using namespace facdual;

TEST_CASE("polynomial arithmetic is exact and sparse") {
    Poly x = Poly::variable(2, 0), y = Poly::variable(2, 1);
    Poly p = (x + y) * (x - y);
    CHECK(p == x * x - y * y);
    CHECK(p.coeff({1, 1}) == 0);
    CHECK(p.degree() == 2);
    CHECK((p - p).is_zero());
    CHECK((p * Rational(0)).is_zero());

    Poly q = x * x * rat(1, 2) + Poly::constant(2, 3);
    CHECK(q.evaluate({2, 5}) == 5);
    CHECK(q.evaluate_double({2.0, 0.0}) == doctest::Approx(5.0));
}

TEST_CASE("zero coefficients are never stored") {
    Poly p(1);
    p.add_term({1}, 1);
    p.add_term({1}, -1);
    CHECK(p.is_zero());
    CHECK(p.terms().empty());
    CHECK(p.degree() == -1);
}

TEST_CASE("derivative") {
    Poly x = Poly::variable(2, 0), y = Poly::variable(2, 1);
    Poly p = x * x * y * rat(3);
    CHECK(p.derivative(0) == x * y * rat(6));
    CHECK(p.derivative(1) == x * x * rat(3));
    CHECK(Poly::constant(2, 7).derivative(0).is_zero());
}

TEST_CASE("truncation and degree bookkeeping") {
    Poly x = Poly::variable(1, 0);
    Poly p = x * x * x + x + Poly::constant(1, 1);
    CHECK(p.truncated(2) == x + Poly::constant(1, 1));
    CHECK(p.min_total_degree() == 0);
    CHECK((x * x).min_total_degree() == 2);
}

TEST_CASE("truncated series order propagation") {
    Poly x = Poly::variable(1, 0);
    TruncatedSeries a(x + Poly::constant(1, 1), 5);
    TruncatedSeries b(x * x, 3);
    CHECK((a + b).order() == 3);
    // product: min(5 + 2, 3 + 0) = 3
    CHECK((a * b).order() == 3);
    CHECK(a.mul_exact(x * x).order() == 7);
    CHECK(a.derivative(0).order() == 4);
    CHECK_THROWS_AS(a.coeff({7}), std::out_of_range);
}

TEST_CASE("series detects guaranteed zero") {
    Poly x = Poly::variable(1, 0);
    TruncatedSeries s(x - x, 4);
    CHECK(s.guaranteed_zero());
}

TEST_CASE("univariate helpers") {
    Poly p = univariate_from_coeffs({1, 2, 3});
    CHECK(univariate_coeff(p, 1) == 2);
    Poly sq = univariate_pow(p, 2, 2);
    CHECK(univariate_coeff(sq, 0) == 1);
    CHECK(univariate_coeff(sq, 1) == 4);
    CHECK(univariate_coeff(sq, 2) == 10);
    CHECK(sq.degree() <= 2);
}

TEST_CASE("bracket arithmetic") {
    Bracket a(rat(1, 2), rat(3, 4));
    Bracket b(rat(-1), rat(2));
    Bracket s = a + b;
    CHECK(s.lo == rat(-1, 2));
    CHECK(s.hi == rat(11, 4));
    Bracket p = a * b;
    CHECK(p.lo == rat(-3, 4));
    CHECK(p.hi == rat(3, 2));
    CHECK(a.contains(rat(2, 3)));
    CHECK_FALSE(a.contains(rat(1)));
    Bracket q = a / Bracket(rat(2));
    CHECK(q.lo == rat(1, 4));
    CHECK(q.hi == rat(3, 8));
    CHECK_THROWS_AS(a / b, std::domain_error);  // divisor straddles zero
}
