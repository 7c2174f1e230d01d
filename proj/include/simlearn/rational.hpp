#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include "simlearn/error.hpp"

namespace simlearn {

// Exact rational number with a 64-bit numerator and a positive denominator,
// always stored in lowest terms. Arithmetic is checked: operations that would
// overflow or divide by zero return nullopt instead of a value.
class Rational {
public:
    constexpr Rational() = default;
    constexpr Rational(std::int64_t value) : num_(value) {}  // NOLINT(implicit)

    static std::optional<Rational> make(std::int64_t num, std::int64_t den) {
        if (den == 0) return std::nullopt;
        return normalized(static_cast<__int128>(num), static_cast<__int128>(den));
    }

    constexpr std::int64_t num() const noexcept { return num_; }
    constexpr std::int64_t den() const noexcept { return den_; }
    constexpr bool is_integer() const noexcept { return den_ == 1; }

    friend constexpr bool operator==(const Rational&, const Rational&) = default;

    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
        const __int128 lhs = static_cast<__int128>(a.num_) * b.den_;
        const __int128 rhs = static_cast<__int128>(b.num_) * a.den_;
        return lhs <=> rhs;
    }

    // "7", "-3", "7/2"
    std::string str() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

    double to_double() const noexcept {
        return static_cast<double>(num_) / static_cast<double>(den_);
    }

    static std::optional<Rational> parse(std::string_view text) {
        const auto slash = text.find('/');
        if (slash == std::string_view::npos) {
            auto v = parse_int(text);
            if (!v) return std::nullopt;
            return Rational(*v);
        }
        auto n = parse_int(text.substr(0, slash));
        auto d = parse_int(text.substr(slash + 1));
        if (!n || !d) return std::nullopt;
        return make(*n, *d);
    }

    friend std::optional<Rational> checked_add(const Rational& a, const Rational& b) {
        return normalized(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
                          static_cast<__int128>(a.den_) * b.den_);
    }

    friend std::optional<Rational> checked_sub(const Rational& a, const Rational& b) {
        return normalized(static_cast<__int128>(a.num_) * b.den_ - static_cast<__int128>(b.num_) * a.den_,
                          static_cast<__int128>(a.den_) * b.den_);
    }

    friend std::optional<Rational> checked_mul(const Rational& a, const Rational& b) {
        return normalized(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
    }

    friend std::optional<Rational> checked_div(const Rational& a, const Rational& b) {
        if (b.num_ == 0) return std::nullopt;
        return normalized(static_cast<__int128>(a.num_) * b.den_, static_cast<__int128>(a.den_) * b.num_);
    }

    friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;

    static std::optional<std::int64_t> parse_int(std::string_view text) {
        if (text.empty()) return std::nullopt;
        std::int64_t v = 0;
        const char* first = text.data();
        const char* last = first + text.size();
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc{} || ptr != last) return std::nullopt;
        return v;
    }

    static __int128 abs128(__int128 v) { return v < 0 ? -v : v; }

    static std::optional<Rational> normalized(__int128 num, __int128 den) {
        if (den == 0) return std::nullopt;
        if (den < 0) {
            num = -num;
            den = -den;
        }
        __int128 a = abs128(num);
        __int128 b = den;
        while (b != 0) {
            const __int128 t = a % b;
            a = b;
            b = t;
        }
        const __int128 g = a == 0 ? 1 : a;
        num /= g;
        den /= g;
        constexpr __int128 lo = INT64_MIN;
        constexpr __int128 hi = INT64_MAX;
        if (num < lo || num > hi || den > hi) return std::nullopt;
        Rational r;
        r.num_ = static_cast<std::int64_t>(num);
        r.den_ = static_cast<std::int64_t>(den);
        return r;
    }
};

}  // namespace simlearn
