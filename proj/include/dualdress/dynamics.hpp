#pragma once

// Spin expectation-value trajectories, the first-order micromotion operator,
// and the two detection scenarios (single-dressing sideband detection and
// dual-dressing carrier detection).

#include <map>
#include <vector>

#include "dualdress/floquet.hpp"
#include "dualdress/perturbation.hpp"
#include "dualdress/types.hpp"

namespace dualdress {

enum class TrajectoryMethod { ExactNumeric, AnalyticFirstOrder };

struct SpinTrajectory {
    std::vector<double> tau_samples;
    std::vector<double> sx, sy, sz;  // <sigma_x>, <sigma_y>, <sigma_z>
    TrajectoryMethod method{TrajectoryMethod::ExactNumeric};
};

// Exact trajectory: <sigma_i(tau)> = tr(sigma_i U rho0 U^dagger) with
// rho0 = (I + initial.sigma)/2, propagated once with dense sampling.
// Preconditions: |initial| = 1 within 1e-10; taus non-decreasing, >= 0.
SpinTrajectory trajectory_exact(const DriveConfig& cfg, const StaticField& field,
                                const Vec3& initial,
                                const std::vector<double>& taus,
                                const IntegratorSettings& settings = {});

// First-order closed form for the initial state +x: precession about the
// dressed axis u at rate OmegaL, carried back to the lab frame by the drive
// rotation phi_x(tau). The kick operator is neglected.
SpinTrajectory trajectory_analytic(const DriveConfig& cfg, double OmegaL,
                                   const Vec3& u,
                                   const std::vector<double>& taus);

// Convenience overload: OmegaL and u are taken from the full Floquet solution
// of (cfg, field).
SpinTrajectory trajectory_analytic(const DriveConfig& cfg,
                                   const StaticField& field,
                                   const std::vector<double>& taus);

// First-order micromotion operator
//   M(tau) = su2_exp((phi_x(tau), 0, 0)) . exp(-i K1(tau)),
// the periodic factor of U(tau) = M(tau) exp(-i Lambda tau). M(0) = I.
Mat2 micromotion_operator(const DriveConfig& cfg, const StaticField& field,
                          double tau);

// Same, reusing a precomputed series table (for sampling loops).
Mat2 micromotion_operator(const DriveConfig& cfg, const StaticField& field,
                          double tau, const SeriesFunctions& sf);

struct LandreDetection {
    double larmor = 0.0;            // OmegaL = omega0y * |J0(Omega_x)|
    Vec3 u{};                       // sgn(J0) * (0, cos PsiTilde, sin PsiTilde)
    std::map<int, double> sideband_amplitudes;  // harmonic k -> amplitude
};

// Single-dressing detection: x drive Omega_x cos(tau + psi), static field
// (0, omega0y, 0). Returns the dressed frequency, the precession axis and the
// harmonic content of the first-order signals, extracted by least-squares
// projection onto the product basis
//   <sigma_y>: sin(OmegaL tau) * sin(k (tau + psi)),  k odd,
//   <sigma_z>: sin(OmegaL tau) * cos(k (tau + psi)),  k even (k = 0 carrier).
// Odd and even harmonics live on disjoint channels, so a single map holds
// both. taus is the sampling grid for the projection.
LandreDetection landre_detection(double Omega_x, double omega0y, double psi,
                                 const std::vector<double>& taus);

struct DetectionReport {
    double larmor_1 = 0.0;  // first-order dressed frequency
    Vec3 u{};               // precession axis
    double A_x = 0.0;       // oscillation amplitude of <sigma_x>
    double dc_offset = 0.0; // (omega0x / larmor_1)^2; A_x + dc_offset = 1
    std::map<int, double> sideband_amplitudes;  // 0 -> carrier amplitude
};

// Dual-dressing detection (p = 1 cosine pair, omega0y = 0): the y drive
// shifts the dressed frequency while <sigma_x> carries a single line at
// OmegaL^(1) of amplitude A_x over a DC offset. Harmonic 0 in the sideband
// map is that carrier; sigma_x has no drive-harmonic sidebands at this order.
// Throws DegenerateOrientationError when the first-order field vanishes.
DetectionReport cs_detection(const DriveConfig& cfg, const StaticField& field);

}  // namespace dualdress
