#include "invm/numeric.hpp"

#include <charconv>
#include <cmath>

#include "invm/errors.hpp"

namespace invm {

double gamma_fn(double x) {
    if (!(x > 0.0))
        throw domain_error("gamma_fn: argument must be a positive real, got " + std::to_string(x));
    if (x > 171.0)
        throw domain_error("gamma_fn: argument " + std::to_string(x) + " overflows binary64");
    return std::tgamma(x);
}

Complex principal_power(const Complex& z, double p) {
    if (!std::isfinite(p))
        throw domain_error("principal_power: non-finite exponent");
    if (p == 1.0)
        return z;
    if (z == Complex(0.0)) {
        if (p > 0.0)
            return Complex(0.0);
        throw domain_error("principal_power: 0 raised to a non-positive exponent");
    }
    // std::log on complex uses the principal branch, arg in (-pi, pi].
    return std::exp(p * std::log(z));
}

bool is_finite(const Complex& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

} // namespace invm
