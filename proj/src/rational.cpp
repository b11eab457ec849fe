#include "simplex_slice/rational.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <mpfr.h>

#include "simplex_slice/errors.hpp"

namespace sslice {

Rational rational_from_decimal(std::string_view text) {
    std::size_t pos = 0;
    auto fail = [&]() -> Rational { throw DataError("not a decimal number: '" + std::string(text) + "'"); };
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    bool negative = false;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) negative = text[pos++] == '-';

    std::string digits;
    long exponent = 0;
    bool seen_digit = false;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
        digits.push_back(text[pos++]);
        seen_digit = true;
    }
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
            digits.push_back(text[pos++]);
            --exponent;
            seen_digit = true;
        }
    }
    if (!seen_digit) return fail();
    if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
        ++pos;
        const std::string rest(text.substr(pos));
        char* end = nullptr;
        const long e = std::strtol(rest.c_str(), &end, 10);
        if (end == rest.c_str()) return fail();
        pos += static_cast<std::size_t>(end - rest.c_str());
        exponent += e;
    }
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos != text.size()) return fail();
    if (std::labs(exponent) > 100000) return fail();

    mpz_class mantissa(digits, 10);
    if (negative) mantissa = -mantissa;
    mpz_class power;
    mpz_ui_pow_ui(power.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(exponent)));
    Rational out = exponent >= 0 ? Rational(mantissa * power) : Rational(mantissa, power);
    out.canonicalize();
    return out;
}

Rational rational_from_double(double value) {
    if (!std::isfinite(value)) throw DataError("cannot rationalize a non-finite double");
    Rational out;
    mpq_set_d(out.get_mpq_t(), value);
    return out;
}

double to_double(const Rational& value) {
    mpfr_t x;
    mpfr_init2(x, 53);
    mpfr_set_q(x, value.get_mpq_t(), MPFR_RNDN);
    const double out = mpfr_get_d(x, MPFR_RNDN);
    mpfr_clear(x);
    return out;
}

std::string to_scientific(const Rational& value, int digits) {
    mpfr_t x;
    mpfr_init2(x, 256);
    mpfr_set_q(x, value.get_mpq_t(), MPFR_RNDN);
    char* buffer = nullptr;
    const std::string fmt = "%." + std::to_string(digits - 1) + "Re";
    mpfr_asprintf(&buffer, fmt.c_str(), x);
    std::string out(buffer);
    mpfr_free_str(buffer);
    mpfr_clear(x);
    return out;
}

}  // namespace sslice
