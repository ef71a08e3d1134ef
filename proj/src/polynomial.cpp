#include "invm/polynomial.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

#include "invm/errors.hpp"

namespace invm {

Polynomial::Polynomial(std::vector<Complex> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty())
        throw domain_error("Polynomial: empty coefficient list");
    for (const auto& c : coeffs_)
        if (!is_finite(c))
            throw domain_error("Polynomial: non-finite coefficient");
    while (coeffs_.size() > 1 && coeffs_.back() == Complex(0.0))
        coeffs_.pop_back();
}

Complex Polynomial::eval(const Complex& x) const {
    Complex acc = coeffs_.back();
    for (auto it = coeffs_.rbegin() + 1; it != coeffs_.rend(); ++it)
        acc = acc * x + *it;
    return acc;
}

Polynomial Polynomial::derivative() const {
    if (is_constant())
        return Polynomial(std::vector<Complex>{Complex(0.0)});
    std::vector<Complex> d(coeffs_.size() - 1);
    for (std::size_t n = 1; n < coeffs_.size(); ++n)
        d[n - 1] = static_cast<double>(n) * coeffs_[n];
    return Polynomial(std::move(d));
}

Complex Polynomial::caputo(double beta, const Complex& x) const {
    if (!(beta > 0.0) || beta > 1.0)
        throw domain_error("caputo: order must lie in (0,1]");
    Complex sum(0.0);
    for (std::size_t n = 1; n < coeffs_.size(); ++n) {
        if (coeffs_[n] == Complex(0.0))
            continue;
        const double nd = static_cast<double>(n);
        const double ratio = gamma_fn(nd + 1.0) / gamma_fn(nd - beta + 1.0);
        const double expo = nd - beta;
        // expo == 0 only for n = 1, beta = 1: x^0 = 1 even at x = 0.
        const Complex pw = (expo == 0.0) ? Complex(1.0) : principal_power(x, expo);
        sum += coeffs_[n] * ratio * pw;
    }
    if (!is_finite(sum))
        throw overflow_error("caputo: non-finite result");
    return sum;
}

namespace {

// Leading signed real number of `s`; advances `pos` past it.
// from_chars rejects a leading '+', so consume it here.
double scan_real(std::string_view s, std::size_t& pos) {
    std::size_t start = pos;
    if (start < s.size() && s[start] == '+') {
        ++start;
        if (start >= s.size() || s[start] == '-' || s[start] == '+')
            throw parse_error("bad number in '" + std::string(s) + "'");
    }
    const char* begin = s.data() + start;
    const char* end = s.data() + s.size();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc())
        throw parse_error("bad number in '" + std::string(s) + "'");
    pos = start + static_cast<std::size_t>(ptr - begin);
    return value;
}

} // namespace

Complex parse_complex(std::string_view token) {
    std::string t;
    for (char c : token)
        if (!std::isspace(static_cast<unsigned char>(c)))
            t.push_back(c);
    if (t.empty())
        throw parse_error("empty complex token");

    // bare i / +i / -i
    if (t == "i" || t == "+i")
        return Complex(0.0, 1.0);
    if (t == "-i")
        return Complex(0.0, -1.0);

    std::size_t pos = 0;
    double first = scan_real(t, pos);
    if (pos == t.size())
        return Complex(first, 0.0); // plain real

    if (t[pos] == 'i' && pos + 1 == t.size())
        return Complex(0.0, first); // pure imaginary like "2i"

    if (t[pos] != '+' && t[pos] != '-')
        throw parse_error("malformed complex '" + std::string(token) + "'");

    double im;
    if ((t.compare(pos, 2, "+i") == 0 && pos + 2 == t.size()) ||
        (t.compare(pos, 2, "-i") == 0 && pos + 2 == t.size())) {
        im = (t[pos] == '+') ? 1.0 : -1.0; // "re+i" / "re-i"
    } else {
        im = scan_real(t, pos);
        if (pos + 1 != t.size() || t[pos] != 'i')
            throw parse_error("malformed complex '" + std::string(token) + "'");
    }
    return Complex(first, im);
}

std::string format_complex(const Complex& z) {
    if (z.imag() == 0.0)
        return format_double(z.real());
    std::string s = format_double(z.real());
    if (z.imag() >= 0.0 || std::isnan(z.imag()))
        s += "+";
    s += format_double(z.imag());
    s += "i";
    return s;
}

std::vector<Complex> parse_complex_list(std::string_view text) {
    std::vector<Complex> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t comma = text.find(',', start);
        std::string_view token = text.substr(start, comma == std::string_view::npos
                                                        ? std::string_view::npos
                                                        : comma - start);
        out.push_back(parse_complex(token));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return out;
}

Polynomial Polynomial::parse(std::string_view text) {
    auto coeffs = parse_complex_list(text);
    Polynomial p(std::move(coeffs));
    if (p.degree() < 1)
        throw parse_error("polynomial must have degree >= 1");
    return p;
}

std::string Polynomial::format() const {
    std::string s;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
        if (i)
            s += ",";
        s += format_complex(coeffs_[i]);
    }
    return s;
}

} // namespace invm
