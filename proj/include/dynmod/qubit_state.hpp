// qubit_state.hpp: Bloch-vector utilities for a single qubit
//
// Convention: rho = (I + r.sigma)/2 with |e> the +1 eigenvector of sigma_z, so
// rho_ee = (1 + r_z)/2 and rho_eg = (r_x - i r_y)/2.

#pragma once

#include <array>
#include <cmath>
#include <complex>

#include "dynmod/errors.hpp"
#include "dynmod/ode.hpp"

namespace dynmod {

inline constexpr double kPureThreshold = 1e-9;

struct BlochVector {
    double x{0.0};
    double y{0.0};
    double z{0.0};

    double dot(const BlochVector& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm2() const { return dot(*this); }
    double norm() const { return std::sqrt(norm2()); }
};

struct QubitState {
    BlochVector bloch;

    static QubitState from_elements(double excited_population, cplx coherence_eg) {
        return QubitState{{2.0 * coherence_eg.real(), -2.0 * coherence_eg.imag(), 2.0 * excited_population - 1.0}};
    }

    double excited_population() const { return 0.5 * (1.0 + bloch.z); }
    cplx coherence_eg() const { return {0.5 * bloch.x, -0.5 * bloch.y}; }
    double determinant() const { return 0.25 * (1.0 - bloch.norm2()); }

    void validate() const {
        if (bloch.norm() > 1.0 + kPureThreshold) throw InvalidState("QubitState: |r| exceeds 1");
    }
};

// Quantum Fisher information of a qubit from its Bloch vector and the
// derivative of the Bloch vector with respect to the parameter.
inline double bloch_qfi(const QubitState& state, const BlochVector& derivative) {
    state.validate();
    const double r2 = state.bloch.norm2();
    const double base = derivative.norm2();
    if (std::sqrt(r2) >= 1.0 - kPureThreshold) return base;
    const double proj = state.bloch.dot(derivative);
    return base + proj * proj / (1.0 - r2);
}

// Root fidelity Tr sqrt(sqrt(rho0) rho sqrt(rho0)) of two qubit states.
inline double fidelity(const QubitState& a, const QubitState& b) {
    const double overlap = 0.5 * (1.0 + a.bloch.dot(b.bloch));
    const double dets = std::max(0.0, a.determinant()) * std::max(0.0, b.determinant());
    const double value = std::sqrt(std::max(0.0, overlap + 2.0 * std::sqrt(dets)));
    return std::min(1.0, value);
}

// Reduced qubit state after tracing out a bath that holds at most one
// excitation. `phase` is the free-evolution phase Xi carried by the excited
// amplitude in the lab frame; the bath branch only feeds the ground level.
inline QubitState reduced_state_from_amplitudes(cplx excited, cplx ground, double phase) {
    const double pe = std::norm(excited);
    if (pe + std::norm(ground) > 1.0 + kPureThreshold) {
        throw InvalidState("reduced_state_from_amplitudes: |c_e|^2 + |c_g|^2 exceeds 1");
    }
    const cplx rotation = std::polar(1.0, -phase);
    return QubitState::from_elements(pe, rotation * excited * std::conj(ground));
}

} // namespace dynmod
