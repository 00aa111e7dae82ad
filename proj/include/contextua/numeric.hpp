#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace contextua {

using Integer = mpz_class;
using Rational = mpq_class;

Rational parse_rational(const std::string& text);  // "3/8", "-2", "0.375", "1e-3"
std::string format_rational(const Rational& q);
// Exact binary value of a finite double.
Rational rational_from_double(double x);

// A probability that stays exact while every operand is exact and degrades to
// double as soon as one operand is inexact.
class Prob {
public:
    Prob() : v_(Rational(0)) {}
    Prob(const Rational& q) : v_(q) {}
    Prob(double x) : v_(x) {}
    static Prob zero() { return Prob(Rational(0)); }
    static Prob one() { return Prob(Rational(1)); }

    bool exact() const { return std::holds_alternative<Rational>(v_); }
    const Rational& rational() const { return std::get<Rational>(v_); }
    double to_double() const;
    Rational to_rational() const;  // exact value of the stored double when inexact
    bool is_zero() const;

    Prob& operator+=(const Prob& o);
    Prob& operator-=(const Prob& o);
    Prob& operator*=(const Prob& o);
    friend Prob operator+(Prob a, const Prob& b) { return a += b; }
    friend Prob operator-(Prob a, const Prob& b) { return a -= b; }
    friend Prob operator*(Prob a, const Prob& b) { return a *= b; }

    std::string to_string() const;

private:
    std::variant<Rational, double> v_;
};

// Canonical n/d; mpq_class(n, d) alone does not reduce.
inline Rational ratio(long n, long d) {
    Rational q(n, d);
    q.canonicalize();
    return q;
}

bool all_exact(const std::vector<Prob>& ps);
Prob sum(const std::vector<Prob>& ps);

// Mixed-radix helpers; the first digit is the most significant.
std::size_t radix_product(const std::vector<std::size_t>& radices);
std::vector<std::size_t> radix_digits(std::size_t index, const std::vector<std::size_t>& radices);
std::size_t radix_index(const std::vector<std::size_t>& digits, const std::vector<std::size_t>& radices);

inline long long mod(long long a, long long d) {
    long long r = a % d;
    return r < 0 ? r + d : r;
}

}  // namespace contextua
