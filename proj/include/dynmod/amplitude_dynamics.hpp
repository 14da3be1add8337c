// amplitude_dynamics.hpp: zero-temperature single-excitation dynamics of a
// frequency-modulated qubit coupled to a Lorentzian bath
//
// The excited amplitude obeys the Volterra equation
//
//   dc/dt = -Omega^2 int_0^t dtau c(tau) e^{(i d - l/2)(t - tau)} e^{i xi [sin(nu t) - sin(nu tau)]}
//
// with d = omega0 - omega_c. Because the kernel is a single exponential it is
// equivalent to the local system
//
//   dc/dt = -Omega^2 e^{+i xi sin(nu t)} B
//   dB/dt = (i d - l/2) B + e^{-i xi sin(nu t)} c,     B(0) = 0,
//
// which solve_amplitude_exact integrates with RK4. solve_volterra_direct keeps
// the history sum and is used as the independent reference.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "dynmod/errors.hpp"
#include "dynmod/ode.hpp"
#include "dynmod/special_functions.hpp"

namespace dynmod {

struct ModulationConfig {
    double amplitude{0.0};   // xi
    double frequency{100.0}; // nu

    void validate() const {
        if (!(frequency > 0.0)) throw InvalidInput("ModulationConfig: frequency must be > 0");
        if (!(amplitude >= 0.0)) throw InvalidInput("ModulationConfig: amplitude must be >= 0");
    }
};

struct SystemSpec {
    double omega0{1.0};

    void validate() const {
        if (!(omega0 > 0.0)) throw InvalidInput("SystemSpec: omega0 must be > 0");
    }
};

// omega0 - omega_c
inline double detuning(const SystemSpec& sys, const LorentzianSpectrum& bath) {
    return sys.omega0 - bath.center;
}

struct AmplitudeTrajectory {
    double step{0.0};
    std::vector<double> time;
    std::vector<cplx> excited;     // c_e(t_i), interaction picture
    std::vector<cplx> memory;      // B(t_i)
    std::vector<cplx> sensitivity; // dc_e/domega0, empty unless requested
    cplx initial_excited{};
    cplx initial_ground{};

    std::size_t size() const { return time.size(); }
    bool has_sensitivity() const { return !sensitivity.empty(); }
};

struct EffectiveIndex {
    int index{0};       // n0
    double detuning{0}; // delta_{n0} = delta_c + n0 nu
    cplx theta{};       // Theta_{n0}
};

// n0 = argmin_n |delta_c + n nu|. Exact ties go to the smaller |n|, then to
// the negative index.
inline EffectiveIndex select_effective_index(double detuning_c, double nu) {
    if (!(nu > 0.0)) throw InvalidInput("select_effective_index: nu must be > 0");
    const double x = -detuning_c / nu;
    const int lo = static_cast<int>(std::floor(x));
    const int hi = lo + 1;
    const double dlo = std::abs(detuning_c + lo * nu);
    const double dhi = std::abs(detuning_c + hi * nu);
    int best = lo;
    if (dhi < dlo) {
        best = hi;
    } else if (dhi == dlo) {
        if (std::abs(hi) < std::abs(lo)) best = hi;
        else if (std::abs(hi) == std::abs(lo)) best = std::min(lo, hi);
    }
    return {best, detuning_c + best * nu, {}};
}

// Resonant sideband together with its complex rate
// Theta = sqrt((l/2 - i d_{n0})^2 - 4 Omega^2 J_{n0}(xi)^2).
inline EffectiveIndex effective_index(const SystemSpec& sys, const LorentzianSpectrum& bath,
                                      const ModulationConfig& mod) {
    EffectiveIndex e = select_effective_index(detuning(sys, bath), mod.frequency);
    const cplx a{0.5 * bath.width, -e.detuning};
    const double jn = bessel_jn(e.index, mod.amplitude);
    e.theta = std::sqrt(a * a - 4.0 * bath.coupling * bath.coupling * jn * jn);
    return e;
}

// Largest admissible step: resolves the drive period, the coupling and the
// kernel decay with 20 points each.
inline double max_step(const LorentzianSpectrum& bath, const ModulationConfig& mod) {
    return std::min({2.0 * std::numbers::pi / (20.0 * mod.frequency), 1.0 / (20.0 * bath.coupling),
                     2.0 / (20.0 * bath.width)});
}

// Step used when none is given: max_step, further limited so the drive phase
// xi sin(nu t) advances by at most 2 pi / 20 per step.
inline double default_step(const LorentzianSpectrum& bath, const ModulationConfig& mod) {
    return std::min(max_step(bath, mod), 2.0 * std::numbers::pi / (20.0 * mod.frequency * std::max(1.0, mod.amplitude)));
}

namespace detail {

inline void check_inputs(const SystemSpec& sys, const LorentzianSpectrum& bath,
                         const ModulationConfig& mod, cplx ce0, double t_max, double h) {
    sys.validate();
    bath.validate();
    mod.validate();
    if (!(t_max >= 0.0) || !std::isfinite(t_max)) throw InvalidInput("t_max must be finite and >= 0");
    if (!(h > 0.0)) throw InvalidInput("step must be > 0");
    const double bound = max_step(bath, mod);
    if (h > bound * (1.0 + 1e-12)) {
        throw InvalidInput("step " + std::to_string(h) + " exceeds the admissible bound " +
                           std::to_string(bound));
    }
    if (std::norm(ce0) > 1.0 + 1e-12) throw InvalidState("|c_e(0)| must not exceed 1");
}

// Uniform grid covering [0, t_max] with a step no larger than h.
inline std::size_t step_count(double t_max, double h) {
    if (t_max == 0.0) return 0;
    return static_cast<std::size_t>(std::ceil(t_max / h - 1e-9));
}

inline AmplitudeTrajectory make_trajectory(cplx ce0, double t_max, std::size_t steps) {
    AmplitudeTrajectory traj;
    traj.step = steps == 0 ? 0.0 : t_max / static_cast<double>(steps);
    traj.initial_excited = ce0;
    traj.initial_ground = std::sqrt(std::max(0.0, 1.0 - std::norm(ce0)));
    traj.time.reserve(steps + 1);
    traj.excited.reserve(steps + 1);
    traj.memory.reserve(steps + 1);
    return traj;
}

inline cplx drive_phase(const ModulationConfig& mod, double t) {
    const double phi = mod.amplitude * std::sin(mod.frequency * t);
    return {std::cos(phi), std::sin(phi)};
}

template <bool WithSensitivity>
AmplitudeTrajectory integrate_local(const SystemSpec& sys, const LorentzianSpectrum& bath,
                                    const ModulationConfig& mod, cplx ce0, double t_max, double h) {
    check_inputs(sys, bath, mod, ce0, t_max, h);
    const std::size_t steps = step_count(t_max, h);
    AmplitudeTrajectory traj = make_trajectory(ce0, t_max, steps);
    if constexpr (WithSensitivity) traj.sensitivity.reserve(steps + 1);

    const double omega2 = bath.coupling * bath.coupling;
    const cplx decay{-0.5 * bath.width, detuning(sys, bath)};
    const cplx i1{0.0, 1.0};

    constexpr std::size_t N = WithSensitivity ? 4 : 2;
    auto rhs = [&](double t, const CState<N>& y) {
        const cplx u = drive_phase(mod, t);
        const cplx uc = std::conj(u);
        CState<N> dy;
        dy[0] = -omega2 * u * y[1];
        dy[1] = decay * y[1] + uc * y[0];
        if constexpr (WithSensitivity) {
            dy[2] = -omega2 * u * y[3];
            dy[3] = decay * y[3] + i1 * y[1] + uc * y[2];
        }
        return dy;
    };

    CState<N> y{};
    y[0] = ce0;
    auto record = [&](double t) {
        traj.time.push_back(t);
        traj.excited.push_back(y[0]);
        traj.memory.push_back(y[1]);
        if constexpr (WithSensitivity) traj.sensitivity.push_back(y[2]);
    };
    record(0.0);
    for (std::size_t n = 0; n < steps; ++n) {
        const double t = static_cast<double>(n) * traj.step;
        y = rk4_step<N>(rhs, t, y, traj.step);
        record(static_cast<double>(n + 1) * traj.step);
    }
    return traj;
}

} // namespace detail

// Exact dynamics through the local (c_e, B) reformulation.
inline AmplitudeTrajectory solve_amplitude_exact(const SystemSpec& sys, const LorentzianSpectrum& bath,
                                                 const ModulationConfig& mod, cplx ce0, double t_max,
                                                 double h) {
    return detail::integrate_local<false>(sys, bath, mod, ce0, t_max, h);
}

// Exact dynamics plus dc_e/domega0 at fixed omega_c, from the variational
// equations of the local system.
inline AmplitudeTrajectory solve_sensitivity(const SystemSpec& sys, const LorentzianSpectrum& bath,
                                             const ModulationConfig& mod, cplx ce0, double t_max,
                                             double h) {
    return detail::integrate_local<true>(sys, bath, mod, ce0, t_max, h);
}

// Direct discretization of the Volterra equation: trapezoidal history sum and
// a trapezoidal predictor-corrector step. Cost is quadratic in the step count.
inline AmplitudeTrajectory solve_volterra_direct(const SystemSpec& sys, const LorentzianSpectrum& bath,
                                                 const ModulationConfig& mod, cplx ce0, double t_max,
                                                 double h) {
    detail::check_inputs(sys, bath, mod, ce0, t_max, h);
    const std::size_t steps = detail::step_count(t_max, h);
    AmplitudeTrajectory traj = detail::make_trajectory(ce0, t_max, steps);
    const double dt = traj.step;
    const double omega2 = bath.coupling * bath.coupling;
    const cplx decay{-0.5 * bath.width, detuning(sys, bath)};

    std::vector<cplx> kernel(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) kernel[k] = std::exp(decay * (static_cast<double>(k) * dt));

    std::vector<cplx> phase(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) phase[k] = detail::drive_phase(mod, static_cast<double>(k) * dt);

    // d_j = c_j e^{-i xi sin(nu t_j)}
    std::vector<cplx> weighted(steps + 1);
    std::vector<cplx> c(steps + 1);
    c[0] = ce0;
    weighted[0] = ce0 * std::conj(phase[0]);

    traj.time.push_back(0.0);
    traj.excited.push_back(ce0);
    traj.memory.push_back(0.0);

    cplx f_prev = 0.0; // dc/dt at t_0: the history integral is empty
    for (std::size_t n = 0; n < steps; ++n) {
        const std::size_t m = n + 1;
        cplx partial = 0.5 * kernel[m] * weighted[0];
        for (std::size_t j = 1; j < m; ++j) partial += kernel[m - j] * weighted[j];
        partial *= dt;

        cplx guess = c[n] + dt * f_prev;
        cplx history{};
        cplx f_next{};
        for (int pass = 0; pass < 3; ++pass) {
            history = partial + 0.5 * dt * guess * std::conj(phase[m]);
            f_next = -omega2 * phase[m] * history;
            guess = c[n] + 0.5 * dt * (f_prev + f_next);
        }
        c[m] = guess;
        weighted[m] = guess * std::conj(phase[m]);
        history = partial + 0.5 * dt * weighted[m];
        f_prev = -omega2 * phase[m] * history;

        traj.time.push_back(static_cast<double>(m) * dt);
        traj.excited.push_back(c[m]);
        traj.memory.push_back(history);
    }
    return traj;
}

// Closed-form single-sideband approximation
//   c_e(t) = c_e(0) e^{-a t/2} [cosh(Theta t/2) + (a/Theta) sinh(Theta t/2)],
// a = l/2 - i d_{n0}. Valid for nu >> Omega, lambda; evaluated regardless.
inline cplx amplitude_analytic(double t, const SystemSpec& sys, const LorentzianSpectrum& bath,
                               const ModulationConfig& mod, cplx ce0) {
    const EffectiveIndex e = effective_index(sys, bath, mod);
    const cplx a{0.5 * bath.width, -e.detuning};
    const cplx theta = e.theta;
    const cplx z = 0.5 * theta * t;
    if (std::abs(z) < 1e-3) {
        const cplx z2 = z * z;
        const cplx cosh_z = 1.0 + z2 / 2.0 + z2 * z2 / 24.0;
        const cplx sinh_over_theta = 0.5 * t * (1.0 + z2 / 6.0 + z2 * z2 / 120.0);
        return ce0 * std::exp(-0.5 * a * t) * (cosh_z + a * sinh_over_theta);
    }
    // grouped so that no factor overflows: |Re Theta| <= l/2 always
    const cplx up = std::exp(0.5 * (theta - a) * t);
    const cplx down = std::exp(0.5 * (-theta - a) * t);
    return ce0 * (0.5 * (up + down) + (a / theta) * 0.5 * (up - down));
}

// Closed-form dR/domega0 of the single-sideband approximation,
//   i 4 Omega^2 J_{n0}^2 / Theta^3 e^{-a t/2} [sinh(z) - z cosh(z)],  z = Theta t/2.
inline cplx derivative_analytic(double t, const SystemSpec& sys, const LorentzianSpectrum& bath,
                                const ModulationConfig& mod) {
    const EffectiveIndex e = effective_index(sys, bath, mod);
    const double jn = bessel_jn(e.index, mod.amplitude);
    const double strength = 4.0 * bath.coupling * bath.coupling * jn * jn;
    if (strength == 0.0) return 0.0;

    const cplx a{0.5 * bath.width, -e.detuning};
    const cplx theta = e.theta;
    const cplx z = 0.5 * theta * t;
    const cplx i1{0.0, 1.0};
    if (std::abs(z) < 1e-2) {
        // (sinh z - z cosh z) / z^3 = -sum_k 2k z^{2k-2} / (2k+1)!
        const cplx z2 = z * z;
        const cplx ratio = -(1.0 / 3.0 + z2 / 30.0 + z2 * z2 / 840.0);
        const double half_t = 0.5 * t;
        return i1 * strength * std::exp(-0.5 * a * t) * ratio * half_t * half_t * half_t;
    }
    const cplx up = std::exp(0.5 * (theta - a) * t);
    const cplx down = std::exp(0.5 * (-theta - a) * t);
    const cplx bracket = 0.5 * ((1.0 - z) * up - (1.0 + z) * down);
    return i1 * strength / (theta * theta * theta) * bracket;
}

// g(x, y) = 1 - |Re sqrt((1 - i x)^2 - y^2)|; nonnegative for real x, y.
inline double g_function(double x, double y) {
    const cplx base{1.0, -x};
    return 1.0 - std::abs(std::sqrt(base * base - y * y).real());
}

} // namespace dynmod
