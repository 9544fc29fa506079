#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <boost/multiprecision/gmp.hpp>

namespace derham {

/// Arbitrary-precision integer.
using Int = boost::multiprecision::mpz_int;
/// Exact rational, always kept in lowest terms with a positive denominator.
using Rat = boost::multiprecision::mpq_rational;

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline Int numerator_of(const Rat& r) { return boost::multiprecision::numerator(r); }
inline Int denominator_of(const Rat& r) { return boost::multiprecision::denominator(r); }

inline bool is_integer(const Rat& r) { return denominator_of(r) == 1; }

inline int sign_of(const Rat& r) { return r.sign(); }

/// Renders as `p` or `p/q`.
inline std::string to_string(const Rat& r) {
    if (is_integer(r)) return numerator_of(r).str();
    return numerator_of(r).str() + "/" + denominator_of(r).str();
}

/// Parses `p`, `-p` or `p/q`; throws Error on malformed input.
inline Rat parse_rat(std::string_view text) {
    auto digits = [](std::string_view s) {
        if (s.empty()) return false;
        std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
        if (i == s.size()) return false;
        for (; i < s.size(); ++i)
            if (s[i] < '0' || s[i] > '9') return false;
        return true;
    };
    auto slash = text.find('/');
    std::string_view num = text.substr(0, slash);
    if (!digits(num)) throw Error("malformed rational '" + std::string(text) + "'");
    if (num[0] == '+') num.remove_prefix(1);
    Int p{std::string(num)};
    if (slash == std::string_view::npos) return Rat(p);
    std::string_view den = text.substr(slash + 1);
    if (!digits(den) || den[0] == '-' || den[0] == '+')
        throw Error("malformed rational '" + std::string(text) + "'");
    Int q{std::string(den)};
    if (q == 0) throw Error("zero denominator in '" + std::string(text) + "'");
    return Rat(p, q);
}

inline Int factorial(int k) {
    Int r = 1;
    for (int i = 2; i <= k; ++i) r *= i;
    return r;
}

inline Int binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    return factorial(n) / (factorial(k) * factorial(n - k));
}

/// Largest integer not exceeding r.
inline Int floor_of(const Rat& r) {
    Int q = numerator_of(r) / denominator_of(r);  // truncates toward zero
    if (r.sign() < 0 && Rat(q) != r) q -= 1;
    return q;
}

}  // namespace derham
