#ifndef INVM_NUMERIC_HPP
#define INVM_NUMERIC_HPP

#include <complex>
#include <string>

namespace invm {

using Complex = std::complex<double>;

// Gamma function for positive real arguments. Every use in the schemes has
// a small positive argument (beta+1, n+1, n-beta+1), so the positive axis
// is all we accept; x <= 0 or non-finite throws domain_error.
double gamma_fn(double x);

// z^p through the principal branch of the logarithm, arg in (-pi, pi].
// 0^p = 0 for p > 0; z = 0 with p <= 0 throws domain_error.
// p == 1 returns z unchanged so identity holds exactly.
Complex principal_power(const Complex& z, double p);

bool is_finite(const Complex& z);

// Shortest decimal representation that round-trips binary64.
std::string format_double(double v);

} // namespace invm

#endif
