#include "vgpqmc/divdiff.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "vgpqmc/errors.hpp"

namespace vgpqmc {

namespace {

constexpr std::size_t kMaxOrder = 1500;
constexpr double kMaxSpread = 600.0;
constexpr double kRescaleAbove = 1e200;

void check_inputs(double beta, std::span<const double> energies) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidArgument("beta must be positive and finite");
    if (energies.empty()) throw InvalidArgument("divided difference needs at least one input");
    for (double e : energies)
        if (!std::isfinite(e)) throw InvalidArgument("divided difference inputs must be finite");
}

// log of exp[y_0..y_q] for sorted y >= 0, via column 0 of exp(A) where A has
// diagonal y and subdiagonal s; the (q, 0) entry equals s^q exp[y].
double log_exp_divdiff(const std::vector<double>& y) {
    const std::size_t q = y.size() - 1;
    const double y_max = *std::max_element(y.begin(), y.end());
    const double s = std::max(1.0, static_cast<double>(q) / std::numbers::e);
    const double norm = y_max + s;

    std::vector<double> term(q + 1, 0.0);
    std::vector<double> next(q + 1, 0.0);
    std::vector<double> acc(q + 1, 0.0);
    term[0] = 1.0;
    acc[0] = 1.0;
    double log_scale = 0.0;

    for (std::size_t n = 0;; ++n) {
        const std::size_t top = std::min(n + 1, q);  // term_{n+1} vanishes below row n+1
        const double inv = 1.0 / static_cast<double>(n + 1);
        next[0] = y[0] * term[0] * inv;
        for (std::size_t i = 1; i <= top; ++i) next[i] = (y[i] * term[i] + s * term[i - 1]) * inv;
        std::swap(term, next);

        double term_max = 0.0;
        double acc_max = 0.0;
        for (std::size_t i = 0; i <= top; ++i) {
            acc[i] += term[i];
            term_max = std::max(term_max, term[i]);
            acc_max = std::max(acc_max, acc[i]);
        }
        if (acc_max > kRescaleAbove) {
            const double inv_max = 1.0 / acc_max;
            for (std::size_t i = 0; i <= q; ++i) {
                term[i] *= inv_max;
                acc[i] *= inv_max;
            }
            term_max *= inv_max;
            log_scale += std::log(acc_max);
        }
        // Past n = 2 |A| every further term at least halves, so the tail is below 2 term_max.
        const double m = static_cast<double>(n + 1);
        if (m > static_cast<double>(q) && m > 2.0 * norm && acc[q] > 0.0 && 2.0 * term_max <= 1e-17 * acc[q])
            break;
    }
    return std::log(acc[q]) + log_scale - static_cast<double>(q) * std::log(s);
}

}  // namespace

SignedLogValue divdiff_exp(double beta, std::span<const double> energies) {
    check_inputs(beta, energies);
    const std::size_t q = energies.size() - 1;
    if (q > kMaxOrder) throw DimensionError("divided difference order above 1500 is not supported");

    std::vector<double> sorted(energies.begin(), energies.end());
    std::sort(sorted.begin(), sorted.end());
    const double e_min = sorted.front();
    const double e_max = sorted.back();
    const double spread = beta * (e_max - e_min);
    if (spread > kMaxSpread) throw DimensionError("beta times energy spread above 600 is not supported");

    double log_e;
    if (e_max == e_min) {
        log_e = -std::lgamma(static_cast<double>(q) + 1.0);
    } else {
        std::vector<double> y(q + 1);
        for (std::size_t i = 0; i <= q; ++i) y[i] = beta * (e_max - sorted[i]);
        log_e = log_exp_divdiff(y);
    }
    const double log_mag = -beta * e_max + static_cast<double>(q) * std::log(beta) + log_e;
    return {divdiff_sign(q), log_mag};
}

double divdiff_naive(double beta, std::span<const double> energies, double sep_min) {
    check_inputs(beta, energies);
    using Big = boost::multiprecision::cpp_bin_float_100;
    const std::size_t n = energies.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(energies[i] - energies[j]) <= sep_min)
                throw NearDegenerate("inputs closer than the minimum separation");

    Big total = 0;
    for (std::size_t j = 0; j < n; ++j) {
        Big denom = 1;
        for (std::size_t k = 0; k < n; ++k)
            if (k != j) denom *= Big(energies[j]) - Big(energies[k]);
        total += exp(-Big(beta) * Big(energies[j])) / denom;
    }
    return total.convert_to<double>();
}

}  // namespace vgpqmc
