// grid.hpp: sample grids and discrete peak detection

#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "dynmod/errors.hpp"

namespace dynmod {

inline std::vector<double> linspace(double lo, double hi, std::size_t points) {
    if (points == 0) throw InvalidInput("linspace: at least one point required");
    if (points == 1) return {lo};
    std::vector<double> out(points);
    const double d = (hi - lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) out[i] = lo + d * static_cast<double>(i);
    out.back() = hi;
    return out;
}

inline std::vector<double> logspace(double lo, double hi, std::size_t points) {
    if (!(lo > 0.0 && hi > 0.0)) throw InvalidInput("logspace: bounds must be positive");
    std::vector<double> out = linspace(std::log(lo), std::log(hi), points);
    for (double& v : out) v = std::exp(v);
    if (points > 1) {
        out.front() = lo;
        out.back() = hi;
    }
    return out;
}

// Interior indices i with v[i-1] < v[i] > v[i+1].
inline std::vector<std::size_t> strict_local_maxima(const std::vector<double>& v) {
    std::vector<std::size_t> out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        if (v[i] > v[i - 1] && v[i] > v[i + 1]) out.push_back(i);
    }
    return out;
}

} // namespace dynmod
