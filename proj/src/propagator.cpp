#include "dualdress/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace dualdress {

Mat2 instantaneous_hamiltonian(const DriveConfig& cfg, const StaticField& field,
                               double tau) {
    if (!std::isfinite(tau)) throw DomainError("hamiltonian: non-finite tau");
    const double ps = cfg.psi();
    const double bx = field.omega0.x + cfg.omega_x_amp * std::cos(tau + ps);
    const double by = field.omega0.y + cfg.y_drive(tau);
    const double bz = field.omega0.z;
    return dot_sigma({0.5 * bx, 0.5 * by, 0.5 * bz});
}

namespace {

// dU/dtau = -i H U for H = (1/2) b.sigma, written on raw complex entries.
inline void deriv(const DriveConfig& cfg, const StaticField& field, double tau,
                  const Mat2& u, Mat2& du) {
    const double ps = cfg.psi();
    const double bx = 0.5 * (field.omega0.x + cfg.omega_x_amp * std::cos(tau + ps));
    const double by = 0.5 * (field.omega0.y + cfg.y_drive(tau));
    const double bz = 0.5 * field.omega0.z;
    const complexd hxy(bx, -by);   // H01
    const complexd hyx(bx, by);    // H10
    const complexd mi(0.0, -1.0);  // -i
    du.a = mi * (bz * u.a + hxy * u.c);
    du.b = mi * (bz * u.b + hxy * u.d);
    du.c = mi * (hyx * u.a - bz * u.c);
    du.d = mi * (hyx * u.b - bz * u.d);
}

inline Mat2 axpy(const Mat2& u, const Mat2& k, double h) {
    return {u.a + h * k.a, u.b + h * k.b, u.c + h * k.c, u.d + h * k.d};
}

// Dormand-Prince RK5(4) tableau.
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187,
                 A53 = 64448.0 / 6561, A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247,
                 A64 = 49.0 / 176, A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192,
                 B5 = -2187.0 / 6784, B6 = 11.0 / 84;
constexpr double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9;
// 5th-order minus embedded 4th-order weights (error estimator).
constexpr double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920,
                 E5 = -17253.0 / 339200, E6 = 22.0 / 525, E7 = -1.0 / 40;

struct Stepper {
    const DriveConfig& cfg;
    const StaticField& field;
    IntegratorSettings st;
    double tau;
    double tau_start;  // origin of this integration, for the defect budget
    Mat2 u;
    Mat2 k1;  // FSAL slot
    long steps = 0;
    double h;  // current trial step

    Stepper(const DriveConfig& c, const StaticField& f,
            const IntegratorSettings& s, double tau0)
        : cfg(c), field(f), st(s), tau(tau0), tau_start(tau0),
          u(Mat2::identity()) {
        cfg.validate();
        field.validate();
        st.validate();
        deriv(cfg, field, tau, u, k1);
        // Conservative initial step against the field magnitude.
        const double b = field.omega0.norm() + cfg.omega_x_amp +
                         cfg.omega_y_amp + 1.0;
        h = std::min(0.1, 0.01 / b);
    }

    // One accepted adaptive step, no farther than tau_cap.
    void step_to_cap(double tau_cap) {
        for (;;) {
            if (++steps > st.max_steps)
                throw IntegrationError("propagate: step budget exhausted", tau);
            bool clamped = false;
            if (tau + h >= tau_cap) {
                h = tau_cap - tau;
                clamped = true;
            }
            Mat2 k2, k3, k4, k5, k6, k7;
            Mat2 y = axpy(u, k1, h * A21);
            deriv(cfg, field, tau + C2 * h, y, k2);
            y = axpy(axpy(u, k1, h * A31), k2, h * A32);
            deriv(cfg, field, tau + C3 * h, y, k3);
            y = axpy(axpy(axpy(u, k1, h * A41), k2, h * A42), k3, h * A43);
            deriv(cfg, field, tau + C4 * h, y, k4);
            y = axpy(axpy(axpy(axpy(u, k1, h * A51), k2, h * A52), k3, h * A53),
                     k4, h * A54);
            deriv(cfg, field, tau + C5 * h, y, k5);
            y = axpy(axpy(axpy(axpy(axpy(u, k1, h * A61), k2, h * A62), k3,
                               h * A63),
                          k4, h * A64),
                     k5, h * A65);
            deriv(cfg, field, tau + h, y, k6);
            Mat2 u5 = axpy(axpy(axpy(axpy(axpy(u, k1, h * B1), k3, h * B3), k4,
                                     h * B4),
                                k5, h * B5),
                           k6, h * B6);
            deriv(cfg, field, tau + h, u5, k7);

            // RMS of the componentwise embedded error against abs/rel scale.
            const complexd ec[4] = {
                h * (E1 * k1.a + E3 * k3.a + E4 * k4.a + E5 * k5.a + E6 * k6.a + E7 * k7.a),
                h * (E1 * k1.b + E3 * k3.b + E4 * k4.b + E5 * k5.b + E6 * k6.b + E7 * k7.b),
                h * (E1 * k1.c + E3 * k3.c + E4 * k4.c + E5 * k5.c + E6 * k6.c + E7 * k7.c),
                h * (E1 * k1.d + E3 * k3.d + E4 * k4.d + E5 * k5.d + E6 * k6.d + E7 * k7.d)};
            const complexd* u0c[4] = {&u.a, &u.b, &u.c, &u.d};
            const complexd* u5c[4] = {&u5.a, &u5.b, &u5.c, &u5.d};
            double err2 = 0.0;
            for (int i = 0; i < 4; ++i) {
                const double sc_re =
                    st.abs_tol + st.rel_tol * std::max(std::abs(u0c[i]->real()),
                                                       std::abs(u5c[i]->real()));
                const double sc_im =
                    st.abs_tol + st.rel_tol * std::max(std::abs(u0c[i]->imag()),
                                                       std::abs(u5c[i]->imag()));
                err2 += std::norm(complexd(ec[i].real() / sc_re,
                                           ec[i].imag() / sc_im));
            }
            const double err = std::sqrt(err2 / 8.0);

            if (err <= 1.0) {
                tau = clamped ? tau_cap : tau + h;
                u = u5;
                k1 = k7;  // FSAL
                const double grow =
                    (err < 1e-30) ? 5.0
                                  : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
                h = std::max(h * grow, 1e-14);
                return;
            }
            h = std::max(h * std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0),
                         1e-14);
        }
    }

    void advance_to(double tau_end) {
        while (tau < tau_end) step_to_cap(tau_end);
        // Per-step local errors accumulate roughly linearly with the total
        // span covered since construction; anything beyond that indicates a
        // stepper malfunction.
        const double allowed =
            10.0 * st.rel_tol * std::max(1.0, tau_end - tau_start);
        const double defect = u.unitarity_defect();
        if (!(defect < allowed)) {
            char msg[128];
            std::snprintf(msg, sizeof(msg),
                          "propagate: unitarity defect %.3e exceeds %.3e",
                          defect, allowed);
            throw IntegrationError(msg, tau);
        }
    }
};

}  // namespace

Mat2 propagate(const DriveConfig& cfg, const StaticField& field, double tau0,
               double tau1, const IntegratorSettings& settings) {
    if (!(tau1 >= tau0)) throw DomainError("propagate: requires tau1 >= tau0");
    Stepper s(cfg, field, settings, tau0);
    s.advance_to(tau1);
    return s.u;
}

std::vector<Mat2> propagate_sampled(const DriveConfig& cfg,
                                    const StaticField& field,
                                    const std::vector<double>& taus,
                                    const IntegratorSettings& settings) {
    for (size_t i = 0; i < taus.size(); ++i) {
        if (taus[i] < 0.0 || (i > 0 && taus[i] < taus[i - 1]))
            throw DomainError("propagate_sampled: taus must be ascending and >= 0");
    }
    std::vector<Mat2> out;
    out.reserve(taus.size());
    Stepper s(cfg, field, settings, 0.0);
    for (double t : taus) {
        s.advance_to(t);
        out.push_back(s.u);
    }
    return out;
}

}  // namespace dualdress
