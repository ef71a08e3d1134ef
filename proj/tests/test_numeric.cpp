#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "invm/errors.hpp"
#include "invm/polynomial.hpp"

using namespace invm;

namespace {

// Naive power-sum evaluation, independent of the Horner path.
Complex eval_oracle(const Polynomial& f, Complex x) {
    Complex sum(0.0), xp(1.0);
    for (const auto& c : f.coeffs()) {
        sum += c * xp;
        xp *= x;
    }
    return sum;
}

Polynomial random_poly(std::mt19937_64& rng, int max_degree = 10) {
    std::uniform_int_distribution<int> deg(1, max_degree);
    std::uniform_real_distribution<double> coef(-10.0, 10.0);
    const int d = deg(rng);
    std::vector<Complex> c(static_cast<std::size_t>(d) + 1);
    for (auto& v : c)
        v = Complex(coef(rng), coef(rng));
    if (c.back() == Complex(0.0))
        c.back() = Complex(1.0);
    return Polynomial(c);
}

Complex random_point(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> mod(0.1, 10.0);
    std::uniform_real_distribution<double> arg(-std::numbers::pi, std::numbers::pi);
    const double m = mod(rng), a = arg(rng);
    return Complex(m * std::cos(a), m * std::sin(a));
}

} // namespace

TEST_CASE("gamma known values") {
    CHECK(gamma_fn(1.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(gamma_fn(0.5) == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-13));
    CHECK(gamma_fn(5.0) == doctest::Approx(24.0).epsilon(1e-14));
    CHECK(gamma_fn(2.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("gamma domain errors") {
    CHECK_THROWS_AS(gamma_fn(0.0), domain_error);
    CHECK_THROWS_AS(gamma_fn(-1.5), domain_error);
    CHECK_THROWS_AS(gamma_fn(200.0), domain_error);
}

TEST_CASE("gamma recurrence on a grid") {
    // |G(x+1) - x G(x)| <= 1e-10 G(x+1) for x in {0.1, ..., 5.0}
    for (int i = 1; i <= 50; ++i) {
        const double x = 0.1 * i;
        const double lhs = std::abs(gamma_fn(x + 1.0) - x * gamma_fn(x));
        CHECK(lhs <= 1e-10 * gamma_fn(x + 1.0));
    }
}

TEST_CASE("principal power basics") {
    const Complex r = principal_power(Complex(4.0, 0.0), 0.5);
    CHECK(r.real() == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(r.imag() == doctest::Approx(0.0).epsilon(1e-14));

    // (-1)^{1/2} = exp(i pi / 2) = i on the principal branch
    const Complex m = principal_power(Complex(-1.0, 0.0), 0.5);
    CHECK(m.real() == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(m.imag() == doctest::Approx(1.0).epsilon(1e-14));

    const Complex one = principal_power(Complex(1.0, 0.0), 7.3);
    CHECK(one.real() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(one.imag() == doctest::Approx(0.0).epsilon(1e-14));

    CHECK(principal_power(Complex(0.0), 2.5) == Complex(0.0));
    CHECK_THROWS_AS(principal_power(Complex(0.0), 0.0), domain_error);
    CHECK_THROWS_AS(principal_power(Complex(0.0), -1.0), domain_error);
}

TEST_CASE("principal power identity and square-root round trip") {
    std::mt19937_64 rng(42);
    for (int t = 0; t < 200; ++t) {
        const Complex z = random_point(rng);
        CHECK(principal_power(z, 1.0) == z); // exact

        if (!(z.imag() == 0.0 && z.real() < 0.0)) { // off the negative real axis
            const Complex back = principal_power(principal_power(z, 0.5), 2.0);
            CHECK(std::abs(back - z) <= 1e-12 * std::abs(z));
        }
    }
}

TEST_CASE("poly_eval examples") {
    const Polynomial cubic = Polynomial::parse("-1,0,0,1"); // x^3 - 1
    CHECK(std::abs(cubic.eval(Complex(1.0))) == 0.0);
    CHECK(cubic.eval(Complex(2.0)).real() == doctest::Approx(7.0));

    // hand sum: 1 + 30 - 125 - 5 + 120 = 21
    const Polynomial sext = Polynomial::parse("120,-5,-125,30,0,0,1");
    CHECK(sext.eval(Complex(1.0)).real() == doctest::Approx(21.0));
    CHECK(sext.eval(Complex(1.0)).imag() == doctest::Approx(0.0));
}

TEST_CASE("poly_eval at the cube roots of unity") {
    const Polynomial cubic = Polynomial::parse("-1,0,0,1");
    const double ang = 2.0 * std::numbers::pi / 3.0;
    const Complex roots[3] = {Complex(1.0), Complex(std::cos(ang), std::sin(ang)),
                              Complex(std::cos(ang), -std::sin(ang))};
    for (const auto& r : roots)
        CHECK(std::abs(cubic.eval(r)) <= 1e-14);
}

TEST_CASE("poly_eval equals the power-sum oracle") {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 100; ++t) {
        const Polynomial f = random_poly(rng);
        const Complex x = random_point(rng);
        const Complex a = f.eval(x), b = eval_oracle(f, x);
        CHECK(std::abs(a - b) <= 1e-10 * (1.0 + std::abs(b)));
    }
}

TEST_CASE("classical derivative") {
    CHECK(Polynomial::parse("-1,0,0,1").derivative().format() == "0,0,3"); // 3x^2
    CHECK(Polynomial(std::vector<Complex>{Complex(0.0), Complex(5.0)}).derivative().format() == "5");
    CHECK(Polynomial::parse("120,-5,-125,30,0,0,1").derivative().format() ==
          "-5,-250,90,0,0,6"); // 6x^5 + 90x^2 - 250x - 5
}

TEST_CASE("caputo examples") {
    // f = x, beta = 0.5, x = 1 -> 1/G(1.5), with G(1.5) = sqrt(pi)/2
    const Polynomial lin(std::vector<Complex>{Complex(0.0), Complex(1.0)});
    const double expected = 1.0 / (std::sqrt(std::numbers::pi) / 2.0);
    const Complex got = lin.caputo(0.5, Complex(1.0));
    CHECK(got.real() == doctest::Approx(expected).epsilon(1e-12));
    CHECK(got.imag() == doctest::Approx(0.0).epsilon(1e-14));

    // beta = 1 reduces to the classical derivative: f'(2) = 12 for x^3 - 1
    const Polynomial cubic = Polynomial::parse("-1,0,0,1");
    CHECK(cubic.caputo(1.0, Complex(2.0)).real() == doctest::Approx(12.0).epsilon(1e-13));

    // constants are annihilated
    const Polynomial c7(std::vector<Complex>{Complex(7.0)});
    CHECK(c7.caputo(0.3, Complex(2.5, 1.0)) == Complex(0.0));
    CHECK(c7.caputo(1.0, Complex(-4.0)) == Complex(0.0));
}

TEST_CASE("caputo at beta=1 equals the classical derivative") {
    std::mt19937_64 rng(123);
    for (int t = 0; t < 100; ++t) {
        const Polynomial f = random_poly(rng);
        const Polynomial df = f.derivative();
        for (int p = 0; p < 10; ++p) {
            const Complex x = random_point(rng);
            const Complex classical = df.eval(x);
            const Complex frac = f.caputo(1.0, x);
            CHECK(std::abs(frac - classical) <= 1e-12 * (1.0 + std::abs(classical)));
        }
    }
}

TEST_CASE("caputo domain checks") {
    const Polynomial f = Polynomial::parse("-1,0,0,1");
    CHECK_THROWS_AS(f.caputo(0.0, Complex(1.0)), domain_error);
    CHECK_THROWS_AS(f.caputo(1.5, Complex(1.0)), domain_error);
    CHECK_THROWS_AS(f.caputo(-0.2, Complex(1.0)), domain_error);
}

TEST_CASE("complex parsing and formatting") {
    CHECK(parse_complex("-1.5") == Complex(-1.5, 0.0));
    CHECK(parse_complex("1.5+2i") == Complex(1.5, 2.0));
    CHECK(parse_complex("179.5-1i") == Complex(179.5, -1.0));
    CHECK(parse_complex("179.5-i") == Complex(179.5, -1.0));
    CHECK(parse_complex("2i") == Complex(0.0, 2.0));
    CHECK(parse_complex("-i") == Complex(0.0, -1.0));
    CHECK_THROWS_AS(parse_complex(""), parse_error);
    CHECK_THROWS_AS(parse_complex("1.5+"), parse_error);
    CHECK_THROWS_AS(parse_complex("abc"), parse_error);

    std::mt19937_64 rng(5);
    for (int t = 0; t < 100; ++t) {
        Complex z(random_point(rng));
        CHECK(parse_complex(format_complex(z)) == z); // bit-exact round trip
    }
}

TEST_CASE("polynomial parse/format round trip") {
    const Polynomial f = Polynomial::parse("-1,0,0,1");
    CHECK(f.degree() == 3);
    CHECK(f.format() == "-1,0,0,1");
    CHECK(Polynomial::parse(f.format()).coeffs() == f.coeffs());

    CHECK_THROWS_AS(Polynomial::parse("5"), parse_error);       // constant
    CHECK_THROWS_AS(Polynomial::parse("1,,2"), parse_error);    // empty token
    CHECK_THROWS_AS(Polynomial::parse(""), parse_error);
}
