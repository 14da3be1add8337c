// thermo_qfi.hpp: steady-state quantum thermometry with and without drive

#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "dynmod/errors.hpp"
#include "dynmod/parallel.hpp"
#include "dynmod/tcl_dynamics.hpp"

namespace dynmod {

namespace detail {

// ln sech^2(x), finite for any x
inline double log_sech2(double x) {
    const double a = std::abs(x);
    return std::log(4.0) - 2.0 * a - 2.0 * std::log1p(std::exp(-2.0 * a));
}

// ln csch^2(x) for x > 0
inline double log_csch2(double x) {
    return std::log(4.0) - 2.0 * x - 2.0 * std::log(-std::expm1(-2.0 * x));
}

// omega^2 / (4 T^4) * exp(log_factor), assembled in the log domain
inline double scaled_square(double omega, double temperature, double log_factor) {
    if (omega == 0.0) return 0.0;
    return std::exp(2.0 * std::log(std::abs(omega)) - std::log(4.0) - 4.0 * std::log(temperature) + log_factor);
}

} // namespace detail

// QFI of a qubit thermalized at temperature T: omega0^2 / (4 T^4 cosh^2(omega0/2T)).
inline double qfi_conventional(double omega0, double temperature) {
    if (!(temperature > 0.0)) throw DomainError("qfi_conventional: temperature must be > 0");
    return detail::scaled_square(omega0, temperature, detail::log_sech2(omega0 / (2.0 * temperature)));
}

// Temperature maximizing qfi_conventional: coth(x) = x/2 with x = omega0/(2T).
inline double optimal_temperature(double omega0) {
    if (!(omega0 > 0.0)) throw DomainError("optimal_temperature: omega0 must be > 0");
    auto f = [](double x) { return 1.0 / std::tanh(x) - 0.5 * x; };
    double lo = 1.0, hi = 4.0; // f(lo) > 0 > f(hi)
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? lo : hi) = mid;
    }
    return omega0 / (2.0 * 0.5 * (lo + hi));
}

struct ThermoQfiResult {
    double temperature{0.0};
    double qfi{0.0};
    double qfi_low{0.0};
    double qfi_high{0.0};
    double qfi_conventional{0.0};
    double population{0.0};
    double population_low{0.0};
    double population_high{0.0};
    bool degenerate{false}; // population within 1e-12 of 0 or 1, qfi set to 0
};

inline constexpr double kDegeneratePopulation = 1e-12;

// Fisher information of the steady population with respect to T. For
// fermions F = X^2 / (T^4 P(1-P)), X = 1/4 sum_n P_n omega_n sech^2(omega_n/2T).
// For bosons the sech^2 becomes csch^2 and the denominator is
// Nbar(1+Nbar)(1+2Nbar)^2 in terms of the mean occupation Nbar.
inline ThermoQfiResult qfi_modulated(ThermalBathSpec bath, const SystemSpec& sys, const ModulationConfig& mod,
                                     double temperature, int n_max = -1) {
    if (!(temperature > 0.0)) throw DomainError("qfi_modulated: temperature must be > 0");
    bath.temperature = temperature;
    const SteadyState ss = steady_state_population(bath, sys, mod, n_max);
    const RegionalPopulations reg = regional_populations(bath, sys, mod);
    const bool fermi = bath.statistics == Statistics::fermionic;

    ThermoQfiResult r;
    r.temperature = temperature;
    r.population = ss.population;
    r.population_low = reg.low;
    r.population_high = reg.high;
    r.qfi_conventional = qfi_conventional(sys.omega0, temperature);

    const double pn1 = sideband_weight(ss, reg.n1);
    const double x1 = reg.omega_n1 / (2.0 * temperature);
    r.qfi_low = pn1 * detail::scaled_square(reg.omega_n1, temperature,
                                            fermi ? detail::log_sech2(x1) : detail::log_csch2(x1));
    r.qfi_high = qfi_conventional(reg.omega_n0, temperature);

    if (ss.population < kDegeneratePopulation || ss.population > 1.0 - kDegeneratePopulation) {
        r.degenerate = true;
        return r;
    }

    double x = 0.0;
    for (const auto& sb : ss.weights) {
        const double arg = sb.frequency / (2.0 * temperature);
        const double lf = fermi ? detail::log_sech2(arg) : detail::log_csch2(arg);
        x += 0.25 * sb.weight * sb.frequency * std::exp(lf);
    }
    const double t4 = std::pow(temperature, 4);
    if (fermi) {
        r.qfi = x * x / (t4 * ss.population * (1.0 - ss.population));
    } else {
        const double nbar = ss.mean_occupation;
        const double s = 1.0 + 2.0 * nbar;
        r.qfi = x * x / (t4 * nbar * (1.0 + nbar) * s * s);
    }
    return r;
}

enum class ThermoAxis { temperature, grid };

struct ThermoSweepSpec {
    ThermoAxis axis{ThermoAxis::temperature};
    std::vector<double> temperatures;
    std::vector<double> frequencies; // grid sweeps only
};

struct ThermoSweepRow {
    double frequency{0.0};
    ThermoQfiResult result;
};

// Optimal temperatures of the two effective frequencies at one drive frequency.
struct RidgePoint {
    double frequency{0.0};
    double low{0.0};  // 0.242-rule optimum of omega_{n1}
    double high{0.0}; // 0.242-rule optimum of omega_{n0}
};

struct ThermoSweep {
    std::vector<ThermoSweepRow> rows; // frequency-major, temperature-minor
    std::vector<RidgePoint> ridges;   // grid sweeps only
};

inline ThermoSweep thermo_sweep(const ThermalBathSpec& bath, const SystemSpec& sys, const ModulationConfig& mod,
                                const ThermoSweepSpec& spec) {
    if (spec.temperatures.empty()) throw InvalidInput("thermo_sweep: empty temperature grid");
    for (double t : spec.temperatures)
        if (!(t > 0.0)) throw InvalidInput("thermo_sweep: temperatures must be positive");

    std::vector<double> freqs =
        spec.axis == ThermoAxis::grid ? spec.frequencies : std::vector<double>{mod.frequency};
    if (freqs.empty()) throw InvalidInput("thermo_sweep: empty frequency grid");

    const std::size_t nt = spec.temperatures.size();
    ThermoSweep out;
    out.rows = parallel_map(freqs.size() * nt, [&](std::size_t i) {
        const ModulationConfig m{mod.amplitude, freqs[i / nt]};
        return ThermoSweepRow{m.frequency, qfi_modulated(bath, sys, m, spec.temperatures[i % nt])};
    });
    if (spec.axis == ThermoAxis::grid) {
        for (double nu : freqs) {
            const int n1 = lowest_positive_sideband(sys.omega0, nu);
            const int n0 = select_effective_index(detuning(sys, bath.spectrum), nu).index;
            out.ridges.push_back({nu, optimal_temperature(sys.omega0 + n1 * nu),
                                  optimal_temperature(sys.omega0 + n0 * nu)});
        }
    }
    return out;
}

} // namespace dynmod
