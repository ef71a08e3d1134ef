#ifndef INVM_POLYNOMIAL_HPP
#define INVM_POLYNOMIAL_HPP

#include <string>
#include <string_view>
#include <vector>

#include "invm/numeric.hpp"

namespace invm {

// Univariate polynomial with complex coefficients, lowest degree first.
// Trailing zero coefficients are stripped on construction; the zero
// polynomial is stored as the single coefficient 0.
class Polynomial {
  public:
    Polynomial() : coeffs_{Complex(0.0)} {}
    explicit Polynomial(std::vector<Complex> coeffs);

    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    const std::vector<Complex>& coeffs() const { return coeffs_; }
    const Complex& operator[](std::size_t i) const { return coeffs_[i]; }
    bool is_constant() const { return coeffs_.size() == 1; }

    // Horner evaluation.
    Complex eval(const Complex& x) const;

    // Coefficient-wise power rule.
    Polynomial derivative() const;

    // Caputo fractional derivative of order beta in (0,1] at a point,
    // by the term-wise rule D[x^n] = G(n+1)/G(n-beta+1) x^{n-beta} for
    // n >= 1 (constants contribute nothing), using principal powers for
    // the fractional exponent. beta outside (0,1] throws domain_error;
    // a non-finite sum throws overflow_error.
    Complex caputo(double beta, const Complex& x) const;

    // External form: comma-separated coefficients, lowest degree first,
    // each as `re` or `re+imi` / `re-imi` (e.g. "-1,0,0,1" for x^3-1).
    static Polynomial parse(std::string_view text);
    std::string format() const;

  private:
    std::vector<Complex> coeffs_;
};

// Single coefficient in the external format above.
Complex parse_complex(std::string_view token);
std::string format_complex(const Complex& z);

// Comma-separated list of complex numbers (initial vectors on the CLI).
std::vector<Complex> parse_complex_list(std::string_view text);

} // namespace invm

#endif
