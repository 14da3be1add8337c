// special_functions.hpp: Bessel functions, thermal occupations and the
// Lorentzian spectral density

#pragma once

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>
#include <vector>

#include "dynmod/errors.hpp"

namespace dynmod {

inline constexpr int kMaxBesselOrder = 200;

// Lorentzian bath profile of total weight coupling^2, full width `width`
// and peak at `center`. All frequencies are in units of the coupling.
struct LorentzianSpectrum {
    double coupling{1.0}; // Omega
    double width{1.0};    // lambda (FWHM)
    double center{1.0};   // omega_c

    void validate() const {
        if (!(coupling > 0.0)) throw InvalidInput("LorentzianSpectrum: coupling must be > 0");
        if (!(width > 0.0)) throw InvalidInput("LorentzianSpectrum: width must be > 0");
        if (!(center > 0.0)) throw InvalidInput("LorentzianSpectrum: center must be > 0");
    }

    double peak() const { return 2.0 * coupling * coupling / (std::numbers::pi * width); }
};

enum class Statistics { fermionic, bosonic };

inline const char* to_string(Statistics s) {
    return s == Statistics::fermionic ? "fermionic" : "bosonic";
}

namespace detail {

// J_0..J_{order} of |x| > 0 by Miller's downward recurrence, normalized with
// J_0 + 2 sum_k J_{2k} = 1.
inline std::vector<double> bessel_sequence(int order, double x) {
    const double ax = std::abs(x);
    const int top = std::max(order, static_cast<int>(ax));
    int start = top + 20 + static_cast<int>(std::sqrt(40.0 * (top + 1)));
    start += start % 2; // even start keeps the normalization sum aligned

    std::vector<double> j(static_cast<std::size_t>(start) + 2, 0.0);
    double next = 0.0;
    double cur = 1e-300;
    double norm = 0.0;
    for (int k = start; k >= 1; --k) {
        const double prev = 2.0 * k / ax * cur - next;
        next = cur;
        cur = prev;
        j[static_cast<std::size_t>(k)] = next;
        if (std::abs(cur) > 1e250) {
            // rescale everything computed so far
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            for (int m = k; m <= start; ++m) j[static_cast<std::size_t>(m)] *= 1e-250;
        }
        if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * cur;
    }
    j[0] = cur;
    norm += cur;
    j.resize(static_cast<std::size_t>(order) + 1);
    for (double& v : j) v /= norm;
    return j;
}

} // namespace detail

// Integer-order Bessel function of the first kind, |n| <= 200.
inline double bessel_jn(int n, double x) {
    if (std::abs(n) > kMaxBesselOrder) {
        throw InvalidInput("bessel_jn: |order| must not exceed " + std::to_string(kMaxBesselOrder));
    }
    if (!std::isfinite(x)) throw InvalidInput("bessel_jn: argument must be finite");

    const int m = std::abs(n);
    if (x == 0.0) return m == 0 ? 1.0 : 0.0;

    double value = detail::bessel_sequence(m, x)[static_cast<std::size_t>(m)];
    // J_{-n}(x) = (-1)^n J_n(x) and J_n(-x) = (-1)^n J_n(x)
    const bool flip = ((n < 0) != (x < 0.0)) && (m % 2 == 1);
    return flip ? -value : value;
}

// Mean occupation (e^{w/T} + 1)^{-1} (fermionic) or (e^{w/T} - 1)^{-1} (bosonic).
inline double occupation(double omega, double temperature, Statistics stats) {
    if (!(temperature >= 0.0)) throw DomainError("occupation: temperature must be >= 0");
    if (stats == Statistics::bosonic && !(omega > 0.0)) {
        throw DomainError("occupation: bosonic occupation requires omega > 0");
    }
    if (temperature == 0.0) {
        if (omega > 0.0) return 0.0;
        return omega == 0.0 ? 0.5 : 1.0; // fermionic step function
    }
    const double x = omega / temperature;
    if (stats == Statistics::bosonic) return 1.0 / std::expm1(x);
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(x));
}

// J(w) = coupling^2 width / (2 pi [(w - center)^2 + (width/2)^2])
inline double spectral_density(double omega, const LorentzianSpectrum& spec) {
    const double d = omega - spec.center;
    const double hw = 0.5 * spec.width;
    return spec.coupling * spec.coupling * spec.width / (2.0 * std::numbers::pi * (d * d + hw * hw));
}

} // namespace dynmod
