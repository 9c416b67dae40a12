#include "dualdress/dynamics.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdlib>

#include "dualdress/propagator.hpp"
#include "dualdress/spinmath.hpp"

namespace dualdress {

namespace {

void check_taus(const std::vector<double>& taus) {
    if (taus.empty()) throw DomainError("trajectory: empty tau grid");
    double prev = 0.0;
    for (double t : taus) {
        if (!std::isfinite(t) || t < 0.0)
            throw DomainError("trajectory: tau samples must be finite and >= 0");
        if (t < prev)
            throw DomainError("trajectory: tau samples must be non-decreasing");
        prev = t;
    }
}

}  // namespace

SpinTrajectory trajectory_exact(const DriveConfig& cfg, const StaticField& field,
                                const Vec3& initial,
                                const std::vector<double>& taus,
                                const IntegratorSettings& settings) {
    if (!initial.finite() || std::abs(initial.norm() - 1.0) > 1e-10)
        throw DomainError("trajectory_exact: initial Bloch vector must be unit");
    check_taus(taus);

    const Mat2 rho0{complexd(0.5 * (1.0 + initial.z), 0.0),
                    0.5 * complexd(initial.x, -initial.y),
                    0.5 * complexd(initial.x, initial.y),
                    complexd(0.5 * (1.0 - initial.z), 0.0)};

    SpinTrajectory out;
    out.method = TrajectoryMethod::ExactNumeric;
    out.tau_samples = taus;
    out.sx.reserve(taus.size());
    out.sy.reserve(taus.size());
    out.sz.reserve(taus.size());
    const std::vector<Mat2> us = propagate_sampled(cfg, field, taus, settings);
    for (const Mat2& u : us) {
        const Mat2 m = u * rho0 * u.adjoint();
        out.sx.push_back(2.0 * m.b.real());
        out.sy.push_back(-2.0 * m.b.imag());
        out.sz.push_back((m.a - m.d).real());
    }
    return out;
}

SpinTrajectory trajectory_analytic(const DriveConfig& cfg, double OmegaL,
                                   const Vec3& u,
                                   const std::vector<double>& taus) {
    cfg.validate();
    if (!std::isfinite(OmegaL) || OmegaL < 0.0)
        throw DomainError("trajectory_analytic: OmegaL must be finite and >= 0");
    if (!u.finite() || (OmegaL > 0.0 && std::abs(u.norm() - 1.0) > 1e-6))
        throw DomainError("trajectory_analytic: u must be a unit vector");
    check_taus(taus);

    SpinTrajectory out;
    out.method = TrajectoryMethod::AnalyticFirstOrder;
    out.tau_samples = taus;
    out.sx.reserve(taus.size());
    out.sy.reserve(taus.size());
    out.sz.reserve(taus.size());
    for (double tau : taus) {
        const double th = OmegaL * tau;
        const double c = std::cos(th), s = std::sin(th), v = 1.0 - c;
        const double phi = cfg.phi_x(tau);
        const double cp = std::cos(phi), sp = std::sin(phi);
        // Precession about u in the rotating frame, carried to the lab frame
        // by the drive rotation about x through phi_x(tau).
        out.sx.push_back((1.0 - u.x * u.x) * c + u.x * u.x);
        out.sy.push_back((u.y * sp + u.z * cp) * s +
                         (u.x * u.y * cp - u.x * u.z * sp) * v);
        out.sz.push_back((u.z * sp - u.y * cp) * s +
                         (u.x * u.y * sp + u.x * u.z * cp) * v);
    }
    return out;
}

SpinTrajectory trajectory_analytic(const DriveConfig& cfg,
                                   const StaticField& field,
                                   const std::vector<double>& taus) {
    const FloquetSolution sol = solve_floquet(cfg, field);
    const Vec3 axis = sol.u ? *sol.u : Vec3{0.0, 0.0, 1.0};
    return trajectory_analytic(cfg, sol.larmor, axis, taus);
}

Mat2 micromotion_operator(const DriveConfig& cfg, const StaticField& field,
                          double tau, const SeriesFunctions& sf) {
    const Vec3 kick = kick_vector(cfg, field, tau, sf);
    return su2_exp(Vec3{cfg.phi_x(tau), 0.0, 0.0}) * su2_exp(kick);
}

Mat2 micromotion_operator(const DriveConfig& cfg, const StaticField& field,
                          double tau) {
    cfg.validate();
    field.validate();
    return micromotion_operator(cfg, field, tau,
                                SeriesFunctions{fourier_coeffs(cfg)});
}

LandreDetection landre_detection(double Omega_x, double omega0y, double psi,
                                 const std::vector<double>& taus) {
    if (!std::isfinite(Omega_x) || Omega_x < 0.0)
        throw DomainError("landre_detection: Omega_x must be finite and >= 0");
    if (!std::isfinite(omega0y) || omega0y <= 0.0)
        throw DomainError("landre_detection: omega0y must be positive");
    if (!std::isfinite(psi)) throw DomainError("landre_detection: psi not finite");
    check_taus(taus);

    const double j0 = bessel_j(0, Omega_x);
    const double sgn = (j0 >= 0.0) ? 1.0 : -1.0;
    const double psi_tilde = Omega_x * std::sin(psi);

    LandreDetection det;
    det.larmor = omega0y * std::abs(j0);
    det.u = Vec3{0.0, sgn * std::cos(psi_tilde), sgn * std::sin(psi_tilde)};

    DriveConfig cfg;
    cfg.omega_x_amp = Omega_x;
    cfg.omega_y_amp = 0.0;
    cfg.harmonic_p = 1;
    cfg.phase_Phi = 0.0;
    cfg.phase_psi = psi;
    cfg.waveform =
        (psi == 0.0) ? Waveform::CosinePair : Waveform::ShiftedCosinePair;

    const SpinTrajectory traj = trajectory_analytic(cfg, det.larmor, det.u, taus);

    // Harmonic cutoff: include every order whose Bessel weight is resolvable.
    int kmax = static_cast<int>(std::ceil(Omega_x)) + 8;
    while (kmax < 64 && std::abs(bessel_j(kmax, Omega_x)) >= 1e-13) ++kmax;

    std::vector<int> odd_k, even_k;
    for (int k = 1; k <= kmax; k += 2) odd_k.push_back(k);
    for (int k = 0; k <= kmax; k += 2) even_k.push_back(k);

    const auto n = static_cast<Eigen::Index>(taus.size());
    const std::size_t need =
        2 * std::max(odd_k.size(), even_k.size()) + 4;
    if (taus.size() < need)
        throw DomainError("landre_detection: tau grid too short for the "
                          "sideband projection");

    // Least-squares projection onto sin(OmegaL tau) * {sin,cos}(k (tau+psi)).
    auto project = [&](const std::vector<int>& ks, const std::vector<double>& sig,
                       bool use_sin) {
        Eigen::MatrixXd a(n, static_cast<Eigen::Index>(ks.size()));
        Eigen::VectorXd b(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double tau = taus[static_cast<std::size_t>(i)];
            const double envelope = std::sin(det.larmor * tau);
            for (std::size_t j = 0; j < ks.size(); ++j) {
                const double arg = ks[j] * (tau + psi);
                a(i, static_cast<Eigen::Index>(j)) =
                    envelope * (use_sin ? std::sin(arg) : std::cos(arg));
            }
            b(i) = sig[static_cast<std::size_t>(i)];
        }
        return Eigen::VectorXd{a.colPivHouseholderQr().solve(b)};
    };

    const Eigen::VectorXd cy = project(odd_k, traj.sy, /*use_sin=*/true);
    const Eigen::VectorXd cz = project(even_k, traj.sz, /*use_sin=*/false);
    for (std::size_t j = 0; j < odd_k.size(); ++j)
        det.sideband_amplitudes[odd_k[j]] = cy(static_cast<Eigen::Index>(j));
    for (std::size_t j = 0; j < even_k.size(); ++j)
        det.sideband_amplitudes[even_k[j]] = cz(static_cast<Eigen::Index>(j));
    return det;
}

DetectionReport cs_detection(const DriveConfig& cfg, const StaticField& field) {
    cfg.validate();
    field.validate();
    if (cfg.waveform != Waveform::CosinePair || cfg.harmonic_p != 1)
        throw DomainError("cs_detection: requires the p = 1 cosine pair drive");
    if (field.omega0.y != 0.0)
        throw DomainError("cs_detection: requires omega0y = 0");

    const double j0 = bessel_j(0, cfg.omega_x_amp);
    const double j1 = bessel_j(1, cfg.omega_x_amp);
    const double hz = j0 * field.omega0.z +
                      j1 * cfg.omega_y_amp * std::sin(cfg.phase_Phi);
    const double l1 = std::hypot(field.omega0.x, hz);
    if (l1 == 0.0)
        throw DegenerateOrientationError(
            "cs_detection: first-order field vanishes; orientation undefined");

    DetectionReport rep;
    rep.larmor_1 = l1;
    rep.u = Vec3{field.omega0.x / l1, 0.0, hz / l1};
    rep.dc_offset = (field.omega0.x / l1) * (field.omega0.x / l1);
    rep.A_x = 1.0 - rep.dc_offset;
    rep.sideband_amplitudes[0] = rep.A_x;
    return rep;
}

}  // namespace dualdress
