#pragma once

#include <cmath>
#include <limits>

namespace vgpqmc {

// A real number stored as sign * exp(log_mag), so products and sums of
// partition-function weights neither underflow nor overflow.
class SignedLogValue {
public:
    constexpr SignedLogValue() = default;
    constexpr SignedLogValue(int sign, double log_mag) : sign_(sign), log_mag_(sign == 0 ? 0.0 : log_mag) {}

    static SignedLogValue from_double(double x) {
        if (x == 0.0) return {};
        return {x > 0 ? 1 : -1, std::log(std::abs(x))};
    }
    static constexpr SignedLogValue zero() { return {}; }

    constexpr int sign() const noexcept { return sign_; }
    constexpr double log_mag() const noexcept { return log_mag_; }
    constexpr bool is_zero() const noexcept { return sign_ == 0; }

    // May overflow to +-inf or underflow to 0 outside double range.
    double to_double() const { return sign_ == 0 ? 0.0 : sign_ * std::exp(log_mag_); }

    SignedLogValue operator-() const { return {-sign_, log_mag_}; }
    SignedLogValue abs() const { return {sign_ == 0 ? 0 : 1, log_mag_}; }

    friend SignedLogValue operator*(SignedLogValue a, SignedLogValue b) {
        if (a.sign_ == 0 || b.sign_ == 0) return {};
        return {a.sign_ * b.sign_, a.log_mag_ + b.log_mag_};
    }

    friend SignedLogValue operator/(SignedLogValue a, SignedLogValue b) {
        if (a.sign_ == 0) return {};
        if (b.sign_ == 0) return {a.sign_, std::numeric_limits<double>::infinity()};
        return {a.sign_ * b.sign_, a.log_mag_ - b.log_mag_};
    }

    friend SignedLogValue operator+(SignedLogValue a, SignedLogValue b) {
        if (a.sign_ == 0) return b;
        if (b.sign_ == 0) return a;
        if (a.log_mag_ < b.log_mag_) std::swap(a, b);
        const double ratio = std::exp(b.log_mag_ - a.log_mag_);  // <= 1
        if (a.sign_ == b.sign_) return {a.sign_, a.log_mag_ + std::log1p(ratio)};
        if (ratio == 1.0) return {};
        return {a.sign_, a.log_mag_ + std::log1p(-ratio)};
    }

    friend SignedLogValue operator-(SignedLogValue a, SignedLogValue b) { return a + (-b); }

    SignedLogValue& operator+=(SignedLogValue b) { return *this = *this + b; }
    SignedLogValue& operator*=(SignedLogValue b) { return *this = *this * b; }

private:
    int sign_ = 0;
    double log_mag_ = 0.0;
};

}  // namespace vgpqmc
