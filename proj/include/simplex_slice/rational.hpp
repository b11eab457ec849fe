#pragma once

#include <string>
#include <string_view>

#include <gmpxx.h>

namespace sslice {

using Rational = mpq_class;

/// Exact value of a decimal literal such as "-1.25e-3" (no binary round trip).
Rational rational_from_decimal(std::string_view text);

/// Exact value of a finite double.
Rational rational_from_double(double value);

/// Nearest double.
double to_double(const Rational& value);

/// Scientific notation with `digits` significant digits, e.g. "1.0715102e-160".
std::string to_scientific(const Rational& value, int digits = 17);

}  // namespace sslice
