#pragma once

// Exact rational arithmetic for grid endpoints.  The two dyadic lattices use
// shifts 0 and 1/3, so every endpoint is an integer multiple of 2^j/3; those
// values (and every double, which is a dyadic rational) fit a reduced
// 128-bit fraction for all scales this library accepts (|scale| <= 60).

#include <cmath>
#include <cstdint>
#include <string>

#include "bbmax/errors.hpp"

namespace bbmax {

using int128 = __int128;

namespace detail {

inline int128 iabs128(int128 v) { return v < 0 ? -v : v; }

inline int128 igcd128(int128 a, int128 b) {
    a = iabs128(a);
    b = iabs128(b);
    while (b != 0) {
        int128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

inline int bits128(int128 v) {
    v = iabs128(v);
    auto hi = static_cast<std::uint64_t>(static_cast<unsigned __int128>(v) >> 64);
    auto lo = static_cast<std::uint64_t>(static_cast<unsigned __int128>(v));
    if (hi != 0) return 128 - __builtin_clzll(hi);
    return lo == 0 ? 0 : 64 - __builtin_clzll(lo);
}

inline int128 checked_mul(int128 a, int128 b) {
    if (a == 0 || b == 0) return 0;
    if (bits128(a) + bits128(b) > 126) throw domain_error("rational: product overflow");
    return a * b;
}

}  // namespace detail

class rational {
  public:
    rational() = default;
    rational(long long n) : num_(n), den_(1) {}  // NOLINT: implicit by design
    rational(int128 n, int128 d) : num_(n), den_(d) { normalize(); }

    // Exact value of a finite double.  Values with magnitude beyond 2^100
    // or with set bits below 2^-120 are rejected: they cannot arise from
    // admissible windows and would overflow 128-bit cross-products.
    static rational from_double(double x) {
        if (!std::isfinite(x)) throw domain_error("rational: non-finite double");
        if (x == 0.0) return rational();
        int e = 0;
        double m = std::frexp(x, &e);
        auto mi = static_cast<std::int64_t>(std::ldexp(m, 53));
        e -= 53;
        while (mi != 0 && (mi & 1) == 0) {
            mi >>= 1;
            ++e;
        }
        if (e > 100 || e < -120) throw domain_error("rational: double exponent out of range");
        rational r(mi, 1);
        r.shift_pow2(e);
        return r;
    }

    // Multiply by 2^k exactly.
    rational& shift_pow2(int k) {
        if (k > 0) {
            while (k > 0 && den_ % 2 == 0) {
                den_ /= 2;
                --k;
            }
            check_shift(k, num_);
            num_ <<= k;
        } else if (k < 0) {
            k = -k;
            while (k > 0 && num_ != 0 && num_ % 2 == 0) {
                num_ /= 2;
                --k;
            }
            check_shift(k, den_);
            den_ <<= k;
        }
        return *this;
    }

    int128 numerator() const { return num_; }
    int128 denominator() const { return den_; }
    bool is_zero() const { return num_ == 0; }
    int sign() const { return num_ > 0 ? 1 : (num_ < 0 ? -1 : 0); }

    double to_double() const {
        return static_cast<double>(static_cast<long double>(num_) /
                                   static_cast<long double>(den_));
    }

    // Largest integer <= value.
    std::int64_t floor() const {
        int128 q = num_ / den_;
        if (num_ % den_ != 0 && num_ < 0) --q;
        return clamp64(q);
    }

    // Denominators are gcd-reduced before any cross product; mixed-scale
    // operands (deep dyadic endpoints against full-mantissa doubles) would
    // otherwise overflow 128 bits.
    friend rational operator+(const rational& a, const rational& b) {
        int128 g = detail::igcd128(a.den_, b.den_);
        int128 da = a.den_ / g, db = b.den_ / g;
        int128 n = detail::checked_mul(a.num_, db) + detail::checked_mul(b.num_, da);
        return rational(n, detail::checked_mul(a.den_, db));
    }
    friend rational operator-(const rational& a, const rational& b) { return a + (-b); }
    friend rational operator*(const rational& a, const rational& b) {
        int128 g1 = detail::igcd128(a.num_, b.den_);
        int128 g2 = detail::igcd128(b.num_, a.den_);
        return rational(detail::checked_mul(a.num_ / g1, b.num_ / g2),
                        detail::checked_mul(a.den_ / g2, b.den_ / g1));
    }
    rational operator-() const {
        rational r = *this;
        r.num_ = -r.num_;
        return r;
    }

    friend bool operator==(const rational& a, const rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator<(const rational& a, const rational& b) { return cmp(a, b) < 0; }
    friend bool operator<=(const rational& a, const rational& b) { return cmp(a, b) <= 0; }
    friend bool operator>(const rational& a, const rational& b) { return cmp(a, b) > 0; }
    friend bool operator>=(const rational& a, const rational& b) { return cmp(a, b) >= 0; }

    std::string str() const {
        auto dec = [](int128 v) {
            if (v == 0) return std::string("0");
            bool neg = v < 0;
            if (neg) v = -v;
            std::string s;
            while (v > 0) {
                s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
                v /= 10;
            }
            return neg ? "-" + s : s;
        };
        return den_ == 1 ? dec(num_) : dec(num_) + "/" + dec(den_);
    }

  private:
    static int cmp(const rational& a, const rational& b) {
        if (a.sign() != b.sign()) return a.sign() < b.sign() ? -1 : 1;
        int128 g = detail::igcd128(a.den_, b.den_);
        int128 l = detail::checked_mul(a.num_, b.den_ / g);
        int128 r = detail::checked_mul(b.num_, a.den_ / g);
        return l < r ? -1 : (l > r ? 1 : 0);
    }

    void normalize() {
        if (den_ == 0) throw domain_error("rational: zero denominator");
        if (den_ < 0) {
            den_ = -den_;
            num_ = -num_;
        }
        if (num_ == 0) {
            den_ = 1;
            return;
        }
        int128 g = detail::igcd128(num_, den_);
        num_ /= g;
        den_ /= g;
    }

    static void check_shift(int k, int128 v) {
        if (k > 124) throw domain_error("rational: pow2 shift out of range");
        if (detail::bits128(v) + k > 125) throw domain_error("rational: overflow");
    }

    static std::int64_t clamp64(int128 v) {
        if (v > int128(INT64_MAX) || v < int128(INT64_MIN))
            throw domain_error("rational: floor out of int64 range");
        return static_cast<std::int64_t>(v);
    }

    int128 num_{0};
    int128 den_{1};
};

}  // namespace bbmax
