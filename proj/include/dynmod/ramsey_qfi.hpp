// ramsey_qfi.hpp: quantum Fisher information of omega0 in a modulated Ramsey
// sequence, and parameter sweeps over the drive

#pragma once

#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "dynmod/amplitude_dynamics.hpp"
#include "dynmod/errors.hpp"
#include "dynmod/parallel.hpp"

namespace dynmod {

inline constexpr double kRatioTolerance = 1e-9;

struct RamseyResult {
    double free_time{0.0};
    cplx ratio{};            // R = c_e(T_f) / c_e(0)
    cplx ratio_derivative{}; // dR/domega0
    double qfi_full{0.0};
    double qfi_approx{0.0};   // T_f^2 |R|^2 with the numerical R
    double qfi_analytic{0.0}; // T_f^2 |R|^2 with the closed-form R
};

// F = T^2|R|^2 + (d|R|)^2/(1 - |R|^2) + |dR|^2 + 2T Im[R dR*].
// |R| -> 1 drops the singular term (pure state); |R| -> 0 returns 0.
inline double ramsey_qfi_full(cplx ratio, cplx ratio_derivative, double free_time) {
    const double r = std::abs(ratio);
    if (r > 1.0 + kRatioTolerance) throw InvalidState("ramsey_qfi_full: |R| exceeds 1");
    if (r < kRatioTolerance) return 0.0;

    const double t = free_time;
    const double phase_part = t * t * r * r + std::norm(ratio_derivative) +
                              2.0 * t * (ratio * std::conj(ratio_derivative)).imag();
    if (r >= 1.0 - kRatioTolerance) return phase_part;
    const double dmod = (std::conj(ratio) * ratio_derivative).real() / r;
    return phase_part + dmod * dmod / (1.0 - r * r);
}

// Initial excited amplitude after the first pi/2 pulse.
inline const cplx kRamseyInitialExcited{0.0, -1.0 / std::numbers::sqrt2};

inline RamseyResult ramsey_point(const SystemSpec& sys, const LorentzianSpectrum& bath,
                                 const ModulationConfig& mod, double free_time, double h) {
    const AmplitudeTrajectory traj = solve_sensitivity(sys, bath, mod, kRamseyInitialExcited, free_time, h);
    RamseyResult res;
    res.free_time = free_time;
    res.ratio = traj.excited.back() / kRamseyInitialExcited;
    res.ratio_derivative = traj.sensitivity.back() / kRamseyInitialExcited;
    res.qfi_full = ramsey_qfi_full(res.ratio, res.ratio_derivative, free_time);
    res.qfi_approx = free_time * free_time * std::norm(res.ratio);
    const cplx analytic = amplitude_analytic(free_time, sys, bath, mod, 1.0);
    res.qfi_analytic = free_time * free_time * std::norm(analytic);
    return res;
}

enum class RamseyAxis { frequency, amplitude, grid };

struct RamseySweepSpec {
    RamseyAxis axis{RamseyAxis::frequency};
    std::vector<double> frequencies; // used by frequency and grid sweeps
    std::vector<double> amplitudes;  // used by amplitude and grid sweeps
    double free_time{150.0};
    std::optional<double> step; // default_step at each point when unset
};

struct RamseySweepRow {
    double frequency{0.0};
    double amplitude{0.0};
    double qfi_full_norm{0.0};
    double qfi_approx_norm{0.0};
    double qfi_analytic_norm{0.0};
    double abs_ratio{0.0};
};

// Grid sweeps are ordered frequency-major, amplitude-minor.
inline std::vector<RamseySweepRow> ramsey_sweep(const SystemSpec& sys, const LorentzianSpectrum& bath,
                                                const ModulationConfig& fixed, const RamseySweepSpec& spec) {
    std::vector<ModulationConfig> points;
    switch (spec.axis) {
    case RamseyAxis::frequency:
        for (double nu : spec.frequencies) points.push_back({fixed.amplitude, nu});
        break;
    case RamseyAxis::amplitude:
        for (double xi : spec.amplitudes) points.push_back({xi, fixed.frequency});
        break;
    case RamseyAxis::grid:
        for (double nu : spec.frequencies)
            for (double xi : spec.amplitudes) points.push_back({xi, nu});
        break;
    }
    if (points.empty()) throw InvalidInput("ramsey_sweep: empty grid");

    return parallel_map(points.size(), [&](std::size_t i) {
        const ModulationConfig& mod = points[i];
        try {
            const double h = spec.step.value_or(default_step(bath, mod));
            const RamseyResult r = ramsey_point(sys, bath, mod, spec.free_time, h);
            const double t2 = spec.free_time * spec.free_time;
            return RamseySweepRow{mod.frequency, mod.amplitude, r.qfi_full / t2, r.qfi_approx / t2,
                                  r.qfi_analytic / t2, std::abs(r.ratio)};
        } catch (const std::exception& ex) {
            char where[96];
            std::snprintf(where, sizeof where, "at nu=%g, xi=%g: ", mod.frequency, mod.amplitude);
            throw InvalidInput(std::string("ramsey_sweep ") + where + ex.what());
        }
    });
}

} // namespace dynmod
