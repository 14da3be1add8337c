// ode.hpp: classical fixed-step Runge-Kutta for small complex state vectors

#pragma once

#include <array>
#include <complex>
#include <cstddef>

namespace dynmod {

using cplx = std::complex<double>;

template <std::size_t N>
using CState = std::array<cplx, N>;

template <std::size_t N>
inline CState<N> axpy(const CState<N>& y, double a, const CState<N>& k) {
    CState<N> out;
    for (std::size_t i = 0; i < N; ++i) out[i] = y[i] + a * k[i];
    return out;
}

// One classical RK4 step of dy/dt = rhs(t, y).
template <std::size_t N, typename Rhs>
inline CState<N> rk4_step(Rhs&& rhs, double t, const CState<N>& y, double h) {
    const CState<N> k1 = rhs(t, y);
    const CState<N> k2 = rhs(t + 0.5 * h, axpy(y, 0.5 * h, k1));
    const CState<N> k3 = rhs(t + 0.5 * h, axpy(y, 0.5 * h, k2));
    const CState<N> k4 = rhs(t + h, axpy(y, h, k3));
    CState<N> out;
    for (std::size_t i = 0; i < N; ++i) {
        out[i] = y[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return out;
}

} // namespace dynmod
