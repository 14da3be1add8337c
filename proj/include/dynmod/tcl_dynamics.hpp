// tcl_dynamics.hpp: finite-temperature second-order time-convolutionless
// dynamics of the modulated qubit
//
// The bath enters through the correlation kernels
//
//   K_w(s) = int_{omega_floor}^inf domega J(omega) w(omega) e^{i (omega0 - omega) s},
//   w in {1, N(omega), 2 N(omega) + 1},
//
// tabulated once on the propagation grid. The populations then follow
//
//   dP_e/dt = A(t) - D(t) P_e,   A = 2 Re G_N,  D = 2 Re G_damp,
//   d rho_eg/dt = -G_damp(t) rho_eg,
//   G_w(t) = int_0^t dtau e^{i xi [sin(nu t) - sin(nu tau)]} K_w(t - tau),
//
// with damping weight 1 (fermions) or 2N + 1 (bosons).

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "dynmod/amplitude_dynamics.hpp"
#include "dynmod/errors.hpp"
#include "dynmod/special_functions.hpp"

namespace dynmod {

struct ThermalBathSpec {
    LorentzianSpectrum spectrum;
    double temperature{0.0};
    Statistics statistics{Statistics::fermionic};

    void validate() const {
        spectrum.validate();
        if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
            throw InvalidInput("ThermalBathSpec: temperature must be finite and >= 0");
        }
    }

    // Lower end of the frequency integrals; the bosonic occupation has a pole at 0.
    double omega_floor() const {
        return statistics == Statistics::bosonic ? 1e-6 * spectrum.coupling : 0.0;
    }
};

// Frequency-quadrature controls. Zero selects the default.
struct QuadratureOptions {
    double window_halfwidth{0.0}; // W, default 50 lambda
    double d_omega{0.0};          // default min(lambda/20, pi/(4 s_max))
    double tail_tolerance{1e-2};  // admissible Lorentzian mass outside omega_c +- W, in units of Omega^2
};

// Nodes and weights of the omega integral. A uniform trapezoid rule covers
// the window; for bosons the first panel is refined geometrically to follow
// the 1/omega growth of N(omega) near the floor.
struct FrequencyQuadrature {
    std::vector<double> omega;
    std::vector<double> weight;
    double lower{0.0};
    double upper{0.0};
    double d_omega{0.0};

    static FrequencyQuadrature build(const ThermalBathSpec& bath, double s_max, const QuadratureOptions& opt) {
        bath.validate();
        const LorentzianSpectrum& spec = bath.spectrum;
        if (!(s_max >= 0.0)) throw InvalidInput("FrequencyQuadrature: s_max must be >= 0");

        const double max_dw = std::min(spec.width / 20.0,
                                       s_max > 0.0 ? std::numbers::pi / (4.0 * s_max) : spec.width / 20.0);
        const double dw = opt.d_omega > 0.0 ? opt.d_omega : max_dw;
        if (dw > max_dw * (1.0 + 1e-12)) {
            throw InvalidInput("FrequencyQuadrature: d_omega " + std::to_string(dw) + " exceeds the bound " +
                               std::to_string(max_dw));
        }
        const double half = opt.window_halfwidth > 0.0 ? opt.window_halfwidth : 50.0 * spec.width;
        const double tail = 1.0 - 2.0 / std::numbers::pi * std::atan(2.0 * half / spec.width);
        if (tail > opt.tail_tolerance) {
            throw InvalidInput("FrequencyQuadrature: window half-width " + std::to_string(half) +
                               " leaves spectral mass " + std::to_string(tail) + " outside");
        }

        FrequencyQuadrature q;
        q.lower = std::max(bath.omega_floor(), spec.center - half);
        q.upper = spec.center + half;
        const auto panels = static_cast<std::size_t>(std::ceil((q.upper - q.lower) / dw - 1e-9));
        q.d_omega = (q.upper - q.lower) / static_cast<double>(panels);

        const bool refine_floor = bath.statistics == Statistics::bosonic && q.lower == bath.omega_floor();
        constexpr std::size_t kGeometric = 96;
        if (refine_floor) {
            const double a = q.lower;
            const double b = q.lower + q.d_omega;
            const double du = std::log(b / a) / static_cast<double>(kGeometric);
            for (std::size_t g = 0; g <= kGeometric; ++g) {
                q.omega.push_back(g == kGeometric ? b : a * std::exp(du * static_cast<double>(g)));
                q.weight.push_back(0.0);
            }
            for (std::size_t g = 0; g < kGeometric; ++g) {
                q.weight[g] += 0.5 * du * q.omega[g];
                q.weight[g + 1] += 0.5 * du * q.omega[g + 1];
            }
        }
        // uniform node k lives at index(k); with refinement node 1 closes the geometric panel
        auto index = [&](std::size_t k) { return refine_floor ? kGeometric + k - 1 : k; };
        for (std::size_t k = refine_floor ? 2 : 0; k <= panels; ++k) {
            q.omega.push_back(q.lower + static_cast<double>(k) * q.d_omega);
            q.weight.push_back(0.0);
        }
        for (std::size_t k = refine_floor ? 1 : 0; k < panels; ++k) {
            q.weight[index(k)] += 0.5 * q.d_omega;
            q.weight[index(k + 1)] += 0.5 * q.d_omega;
        }
        return q;
    }

    std::size_t size() const { return omega.size(); }
};

enum class KernelWeight { unit, occupation, thermal_damping };

namespace detail {

// N(omega) on the quadrature domain omega >= 0. At T = 0 the fermionic step
// takes its right limit at the omega = 0 endpoint.
inline double bath_occupation(double omega, const ThermalBathSpec& bath) {
    if (bath.temperature == 0.0) return 0.0;
    return occupation(omega, bath.temperature, bath.statistics);
}

inline double kernel_weight(KernelWeight w, double omega, const ThermalBathSpec& bath) {
    switch (w) {
    case KernelWeight::unit:
        return 1.0;
    case KernelWeight::occupation:
        return bath_occupation(omega, bath);
    case KernelWeight::thermal_damping:
        return 2.0 * bath_occupation(omega, bath) + 1.0;
    }
    return 1.0;
}

} // namespace detail

// Direct evaluation of K_w(s) at an arbitrary (possibly negative) lag.
inline cplx evaluate_kernel(const ThermalBathSpec& bath, const FrequencyQuadrature& q, double omega0, double s,
                            KernelWeight w) {
    cplx sum{};
    for (std::size_t k = 0; k < q.size(); ++k) {
        const double amp = q.weight[k] * spectral_density(q.omega[k], bath.spectrum) *
                           detail::kernel_weight(w, q.omega[k], bath);
        sum += amp * std::polar(1.0, (omega0 - q.omega[k]) * s);
    }
    return sum;
}

struct KernelTable {
    double step{0.0};
    double omega0{0.0};
    double temperature{0.0};
    Statistics statistics{Statistics::fermionic};
    double omega_lower{0.0};
    double omega_upper{0.0};
    double d_omega{0.0};
    std::size_t nodes{0};
    std::vector<cplx> unit;            // K_1(s_j)
    std::vector<cplx> occupation;      // K_N(s_j)
    std::vector<cplx> thermal_damping; // K_{2N+1}(s_j)

    std::size_t size() const { return unit.size(); }
    double s_max() const { return step * static_cast<double>(size() == 0 ? 0 : size() - 1); }

    // Kernel that damps populations and coherences.
    const std::vector<cplx>& damping() const {
        return statistics == Statistics::fermionic ? unit : thermal_damping;
    }
};

// Samples K_w(j h) for j = 0..ceil(s_max/h). The phasors e^{i(omega0-omega)jh}
// are advanced by recurrence and re-anchored every 256 samples.
inline KernelTable build_kernel_table(const ThermalBathSpec& bath, double omega0, double s_max, double h,
                                      const QuadratureOptions& opt = {}) {
    if (!(omega0 > 0.0)) throw InvalidInput("build_kernel_table: omega0 must be > 0");
    if (!(h > 0.0)) throw InvalidInput("build_kernel_table: step must be > 0");
    if (h > 2.0 / (20.0 * bath.spectrum.width) * (1.0 + 1e-12) ||
        h > 1.0 / (20.0 * bath.spectrum.coupling) * (1.0 + 1e-12)) {
        throw InvalidInput("build_kernel_table: step does not resolve the coupling and kernel decay");
    }
    const FrequencyQuadrature q = FrequencyQuadrature::build(bath, s_max, opt);

    KernelTable table;
    table.step = h;
    table.omega0 = omega0;
    table.temperature = bath.temperature;
    table.statistics = bath.statistics;
    table.omega_lower = q.lower;
    table.omega_upper = q.upper;
    table.d_omega = q.d_omega;
    table.nodes = q.size();

    const std::size_t samples = (s_max == 0.0 ? 0 : static_cast<std::size_t>(std::ceil(s_max / h - 1e-9))) + 1;
    const std::size_t n = q.size();
    std::vector<double> a_unit(n), a_occ(n), a_damp(n), freq(n);
    std::vector<double> pr(n), pi(n), zr(n), zi(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double jw = q.weight[k] * spectral_density(q.omega[k], bath.spectrum);
        const double occ = detail::bath_occupation(q.omega[k], bath);
        a_unit[k] = jw;
        a_occ[k] = jw * occ;
        a_damp[k] = jw * (2.0 * occ + 1.0);
        freq[k] = omega0 - q.omega[k];
        zr[k] = std::cos(freq[k] * h);
        zi[k] = std::sin(freq[k] * h);
    }

    table.unit.resize(samples);
    table.occupation.resize(samples);
    table.thermal_damping.resize(samples);
    for (std::size_t j = 0; j < samples; ++j) {
        if (j % 256 == 0) {
            const double s = static_cast<double>(j) * h;
            for (std::size_t k = 0; k < n; ++k) {
                pr[k] = std::cos(freq[k] * s);
                pi[k] = std::sin(freq[k] * s);
            }
        }
        double ur = 0, ui = 0, or_ = 0, oi = 0, dr = 0, di = 0;
        for (std::size_t k = 0; k < n; ++k) {
            ur += a_unit[k] * pr[k];
            ui += a_unit[k] * pi[k];
            or_ += a_occ[k] * pr[k];
            oi += a_occ[k] * pi[k];
            dr += a_damp[k] * pr[k];
            di += a_damp[k] * pi[k];
            const double nr = pr[k] * zr[k] - pi[k] * zi[k];
            pi[k] = pr[k] * zi[k] + pi[k] * zr[k];
            pr[k] = nr;
        }
        table.unit[j] = {ur, ui};
        table.occupation[j] = {or_, oi};
        table.thermal_damping[j] = {dr, di};
    }
    return table;
}

struct PopulationTrajectory {
    double step{0.0};
    std::vector<double> time;
    std::vector<double> excited_population;
    std::vector<cplx> coherence; // rho_eg(t)
    double steady_state{0.0};    // mean P_e over the last 10% of the grid
    bool steady{false};          // |mean dP_e/dt| there below 1e-4 Omega

    std::size_t size() const { return time.size(); }
};

inline PopulationTrajectory tcl_propagate(const ThermalBathSpec& bath, const SystemSpec& sys,
                                          const ModulationConfig& mod, double pe0, cplx coherence0,
                                          const KernelTable& kernels, double t_max, double h) {
    bath.validate();
    sys.validate();
    mod.validate();
    if (!(pe0 >= 0.0 && pe0 <= 1.0)) throw InvalidInput("tcl_propagate: P_e(0) must lie in [0, 1]");
    if (!(t_max >= 0.0)) throw InvalidInput("tcl_propagate: t_max must be >= 0");
    if (std::abs(kernels.step - h) > 1e-12 * h) {
        throw InvalidInput("tcl_propagate: kernel table step does not match the propagation step");
    }
    if (kernels.omega0 != sys.omega0 || kernels.statistics != bath.statistics ||
        kernels.temperature != bath.temperature) {
        throw InvalidInput("tcl_propagate: kernel table was built for a different bath or qubit");
    }
    const std::size_t steps = t_max == 0.0 ? 0 : static_cast<std::size_t>(std::ceil(t_max / h - 1e-9));
    if (steps + 1 > kernels.size()) {
        throw InvalidInput("tcl_propagate: kernel table does not cover t_max");
    }

    std::vector<cplx> drive(steps + 1);
    for (std::size_t n = 0; n <= steps; ++n) drive[n] = detail::drive_phase(mod, static_cast<double>(n) * h);

    const std::vector<cplx>& k_occ = kernels.occupation;
    const std::vector<cplx>& k_damp = kernels.damping();

    // G_w(t_n) by the trapezoid rule over the cached kernel grid
    std::vector<cplx> g_occ(steps + 1), g_damp(steps + 1);
    std::vector<cplx> back(steps + 1);
    for (std::size_t j = 0; j <= steps; ++j) back[j] = std::conj(drive[j]);
    for (std::size_t n = 1; n <= steps; ++n) {
        cplx so = 0.5 * (back[0] * k_occ[n] + back[n] * k_occ[0]);
        cplx sd = 0.5 * (back[0] * k_damp[n] + back[n] * k_damp[0]);
        for (std::size_t j = 1; j < n; ++j) {
            so += back[j] * k_occ[n - j];
            sd += back[j] * k_damp[n - j];
        }
        g_occ[n] = h * drive[n] * so;
        g_damp[n] = h * drive[n] * sd;
    }

    PopulationTrajectory out;
    out.step = h;
    out.time.resize(steps + 1);
    out.excited_population.resize(steps + 1);
    out.coherence.resize(steps + 1);
    out.time[0] = 0.0;
    out.excited_population[0] = pe0;
    out.coherence[0] = coherence0;

    cplx integrated_rate{};
    for (std::size_t n = 0; n < steps; ++n) {
        const double a0 = 2.0 * g_occ[n].real(), a1 = 2.0 * g_occ[n + 1].real();
        const double d0 = 2.0 * g_damp[n].real(), d1 = 2.0 * g_damp[n + 1].real();
        const double p = out.excited_population[n];
        out.excited_population[n + 1] = (p * (1.0 - 0.5 * h * d0) + 0.5 * h * (a0 + a1)) / (1.0 + 0.5 * h * d1);
        integrated_rate += 0.5 * h * (g_damp[n] + g_damp[n + 1]);
        out.coherence[n + 1] = coherence0 * std::exp(-integrated_rate);
        out.time[n + 1] = static_cast<double>(n + 1) * h;
    }

    const std::size_t tail = std::max<std::size_t>(1, (steps + 1) / 10);
    const std::size_t first = steps + 1 - tail;
    double mean = 0.0;
    for (std::size_t n = first; n <= steps; ++n) mean += out.excited_population[n];
    out.steady_state = mean / static_cast<double>(tail);
    // net drift over the window; drive micromotion averages out
    const double span = static_cast<double>(steps - first) * h;
    out.steady = tail > 1 && std::abs(out.excited_population[steps] - out.excited_population[first]) / span <
                                 1e-4 * bath.spectrum.coupling;
    return out;
}

struct SidebandWeight {
    int index{0};
    double frequency{0.0}; // omega_n = omega0 + n nu
    double weight{0.0};    // P_n
};

struct SteadyState {
    double population{0.0};      // P_e
    double mean_occupation{0.0}; // sum_n P_n N(omega_n)
    std::vector<SidebandWeight> weights;
};

inline int default_sideband_cutoff(const ModulationConfig& mod) {
    return static_cast<int>(std::ceil(mod.amplitude)) + 20;
}

// Steady population as a Bessel- and spectrum-weighted mixture of thermal
// occupations at the sideband frequencies omega_n > 0, |n| <= n_max. For
// bosons the population is Nbar / (1 + 2 Nbar).
inline SteadyState steady_state_population(const ThermalBathSpec& bath, const SystemSpec& sys,
                                           const ModulationConfig& mod, int n_max = -1) {
    bath.validate();
    sys.validate();
    mod.validate();
    const int cutoff = default_sideband_cutoff(mod);
    if (n_max < 0) n_max = cutoff;
    if (n_max < cutoff) throw InvalidInput("steady_state_population: n_max must be >= ceil(xi) + 20");

    SteadyState out;
    double total = 0.0;
    for (int n = -n_max; n <= n_max; ++n) {
        const double w = sys.omega0 + n * mod.frequency;
        if (!(w > 0.0)) continue;
        const double jn = bessel_jn(n, mod.amplitude);
        const double a = jn * jn * spectral_density(w, bath.spectrum);
        out.weights.push_back({n, w, a});
        total += a;
    }
    if (out.weights.empty()) throw DomainError("steady_state_population: no sideband with omega_n > 0");
    if (!(total > 0.0)) throw DomainError("steady_state_population: all sideband weights vanish");

    double mean = 0.0;
    for (auto& sb : out.weights) {
        sb.weight /= total;
        mean += sb.weight * occupation(sb.frequency, bath.temperature, bath.statistics);
    }
    out.mean_occupation = mean;
    out.population = bath.statistics == Statistics::fermionic ? mean : mean / (1.0 + 2.0 * mean);
    return out;
}

inline double sideband_weight(const SteadyState& ss, int index) {
    for (const auto& sb : ss.weights)
        if (sb.index == index) return sb.weight;
    return 0.0;
}

// n1 = -floor(omega0/nu), shifted by one when omega0/nu is an integer so that
// omega_{n1} lies in (0, nu].
inline int lowest_positive_sideband(double omega0, double nu) {
    if (!(nu > 0.0)) throw InvalidInput("lowest_positive_sideband: nu must be > 0");
    return -(static_cast<int>(std::ceil(omega0 / nu)) - 1);
}

struct RegionalPopulations {
    double low{0.0};  // P_{n1} N(omega_{n1})
    double high{0.0}; // N_+(omega_{n0})
    int n1{0};
    int n0{0};
    double omega_n1{0.0};
    double omega_n0{0.0};
};

inline RegionalPopulations regional_populations(const ThermalBathSpec& bath, const SystemSpec& sys,
                                                const ModulationConfig& mod) {
    mod.validate();
    const SteadyState ss = steady_state_population(bath, sys, mod);
    RegionalPopulations r;
    r.n1 = lowest_positive_sideband(sys.omega0, mod.frequency);
    r.n0 = select_effective_index(detuning(sys, bath.spectrum), mod.frequency).index;
    r.omega_n1 = sys.omega0 + r.n1 * mod.frequency;
    r.omega_n0 = sys.omega0 + r.n0 * mod.frequency;
    r.low = sideband_weight(ss, r.n1) * occupation(r.omega_n1, bath.temperature, bath.statistics);
    r.high = occupation(r.omega_n0, bath.temperature, Statistics::fermionic);
    return r;
}

// Frequency of an unmodulated qubit with the same thermal population.
inline double effective_frequency(double population, double temperature) {
    if (!(population > 0.0 && population < 1.0)) throw DomainError("effective_frequency: P_e must lie in (0, 1)");
    if (!(temperature > 0.0)) throw DomainError("effective_frequency: temperature must be > 0");
    return temperature * std::log(1.0 / population - 1.0);
}

} // namespace dynmod
