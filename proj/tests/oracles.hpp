#pragma once

// Independent reference implementations used only by the tests. Everything
// here is computed by a different route than the library: Bessel values come
// from the cosine integral representation, Fourier coefficients from a
// higher-resolution quadrature in extended precision, and propagation from a
// fixed-step classical RK4 in extended precision.

#include <cmath>
#include <complex>
#include <vector>

#include "dualdress/types.hpp"

namespace oracle {

using complexl = std::complex<long double>;

// J_n(x) = (1/pi) \int_0^pi cos(n t - x sin t) dt, trapezoid rule. The
// integrand has vanishing odd derivatives at both endpoints, so the rule
// converges geometrically; 4096 panels in long double give ~1e-17 absolute.
inline long double bessel_j(int n, long double x) {
    const int sign_n = (n < 0 && (n & 1)) ? -1 : 1;
    n = std::abs(n);
    int sign_x = 1;
    if (x < 0.0L) {
        x = -x;
        if (n & 1) sign_x = -1;
    }
    constexpr int kPanels = 4096;
    const long double pi = 3.14159265358979323846264338327950288L;
    const long double h = pi / kPanels;
    long double sum = 0.5L * (std::cos(-0.0L) + std::cos(n * pi));
    for (int k = 1; k < kPanels; ++k) {
        const long double t = h * k;
        sum += std::cos(n * t - x * std::sin(t));
    }
    return sign_n * sign_x * (sum * h / pi);
}

// First positive zero of J_0 by bisection on the integral representation.
inline double j0_first_zero() {
    long double lo = 2.0L, hi = 3.0L;
    for (int i = 0; i < 120; ++i) {
        const long double mid = 0.5L * (lo + hi);
        if (bessel_j(0, lo) * bessel_j(0, mid) <= 0.0L)
            hi = mid;
        else
            lo = mid;
    }
    return static_cast<double>(0.5L * (lo + hi));
}

// Harmonic coefficient of a drive-derived waveform:
//   c_n = (1/2pi) \int_0^{2pi} f(tau) exp(-i n tau) dtau
// with f supplied as a callable returning complexl. 8192-panel trapezoid on
// the periodic integrand (spectrally accurate).
template <typename F>
complexl fourier_coeff(F&& f, int n) {
    constexpr int kPanels = 8192;
    const long double twopi = 6.28318530717958647692528676655900577L;
    const long double h = twopi / kPanels;
    complexl sum{0.0L, 0.0L};
    for (int k = 0; k < kPanels; ++k) {
        const long double t = h * k;
        sum += f(t) * std::exp(complexl{0.0L, -n * t});
    }
    return sum * (h / twopi);
}

// exp(i phi_x(tau)) for the given drive, in extended precision.
inline complexl drive_exp_phase(const dualdress::DriveConfig& cfg,
                                long double tau) {
    const long double ps = cfg.psi();
    const long double phi =
        static_cast<long double>(cfg.omega_x_amp) *
        (std::sin(tau + ps) - std::sin(ps));
    return std::exp(complexl{0.0L, phi});
}

// Unit-amplitude primary y waveform cos(p (tau+psi) + Phi).
inline long double drive_sy(const dualdress::DriveConfig& cfg,
                            long double tau) {
    const long double ps = cfg.psi();
    return std::cos(cfg.harmonic_p * (tau + ps) +
                    static_cast<long double>(cfg.phase_Phi));
}

// Full y drive (primary + extra harmonics), matching DriveConfig::y_drive.
inline long double drive_y(const dualdress::DriveConfig& cfg,
                           long double tau) {
    const long double ps = cfg.psi();
    long double v = static_cast<long double>(cfg.omega_y_amp) *
                    std::cos(cfg.harmonic_p * (tau + ps) +
                             static_cast<long double>(cfg.phase_Phi));
    for (const auto& hterm : cfg.extra_y)
        v += static_cast<long double>(hterm.amplitude) *
             std::cos(hterm.order * (tau + ps) +
                      static_cast<long double>(hterm.phase));
    return v;
}

inline complexl alpha_coeff(const dualdress::DriveConfig& cfg, int n) {
    return fourier_coeff(
        [&](long double t) { return drive_exp_phase(cfg, t); }, n);
}

inline complexl beta_coeff(const dualdress::DriveConfig& cfg, int n) {
    return fourier_coeff(
        [&](long double t) { return drive_sy(cfg, t) * drive_exp_phase(cfg, t); },
        n);
}

inline complexl w_coeff(const dualdress::DriveConfig& cfg, int n) {
    return fourier_coeff(
        [&](long double t) { return drive_y(cfg, t) * drive_exp_phase(cfg, t); },
        n);
}

// Fixed-step classical RK4 on i u' = H(tau) u in extended precision. The
// Hamiltonian is rebuilt here from the drive definition, independent of the
// library's propagator.
struct Mat2l {
    complexl a, b, c, d;
};

inline Mat2l rk4_propagate(const dualdress::DriveConfig& cfg,
                           const dualdress::StaticField& field,
                           long double tau0, long double tau1, int steps) {
    auto deriv = [&](long double t, const Mat2l& u) -> Mat2l {
        const long double bx =
            static_cast<long double>(field.omega0.x) +
            static_cast<long double>(cfg.omega_x_amp) * std::cos(t + cfg.psi());
        const long double by =
            static_cast<long double>(field.omega0.y) + drive_y(cfg, t);
        const long double bz = static_cast<long double>(field.omega0.z);
        // du = -i * (1/2) (b . sigma) u
        const complexl haa{0.5L * bz, 0.0L};
        const complexl hab{0.5L * bx, -0.5L * by};
        const complexl hba{0.5L * bx, 0.5L * by};
        const complexl mi{0.0L, -1.0L};
        return {mi * (haa * u.a + hab * u.c), mi * (haa * u.b + hab * u.d),
                mi * (hba * u.a - haa * u.c), mi * (hba * u.b - haa * u.d)};
    };
    auto axpy = [](const Mat2l& u, const Mat2l& k, long double s) -> Mat2l {
        return {u.a + s * k.a, u.b + s * k.b, u.c + s * k.c, u.d + s * k.d};
    };

    Mat2l u{{1.0L, 0.0L}, {0.0L, 0.0L}, {0.0L, 0.0L}, {1.0L, 0.0L}};
    const long double h = (tau1 - tau0) / steps;
    for (int i = 0; i < steps; ++i) {
        const long double t = tau0 + h * i;
        const Mat2l k1 = deriv(t, u);
        const Mat2l k2 = deriv(t + 0.5L * h, axpy(u, k1, 0.5L * h));
        const Mat2l k3 = deriv(t + 0.5L * h, axpy(u, k2, 0.5L * h));
        const Mat2l k4 = deriv(t + h, axpy(u, k3, h));
        u = {u.a + (h / 6.0L) * (k1.a + 2.0L * k2.a + 2.0L * k3.a + k4.a),
             u.b + (h / 6.0L) * (k1.b + 2.0L * k2.b + 2.0L * k3.b + k4.b),
             u.c + (h / 6.0L) * (k1.c + 2.0L * k2.c + 2.0L * k3.c + k4.c),
             u.d + (h / 6.0L) * (k1.d + 2.0L * k2.d + 2.0L * k3.d + k4.d)};
    }
    return u;
}

inline dualdress::Mat2 to_mat2(const Mat2l& m) {
    return {static_cast<std::complex<double>>(m.a),
            static_cast<std::complex<double>>(m.b),
            static_cast<std::complex<double>>(m.c),
            static_cast<std::complex<double>>(m.d)};
}

}  // namespace oracle
