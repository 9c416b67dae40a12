#pragma once

#include <vector>

#include "dualdress/types.hpp"

// Time evolution of the dimensionless Schroedinger equation
//   i dU/dtau = H(tau) U,  H = (1/2)[omega0.sigma + Omega_x s_x sigma_x
//                                     + (Omega_y s_y + extras) sigma_y],
// integrated with an adaptive embedded Dormand-Prince 5(4) scheme on the
// eight real components of U. Unitarity is asserted, never projected, so
// integration error stays visible.

namespace dualdress {

// H(tau): Hermitian, traceless.
Mat2 instantaneous_hamiltonian(const DriveConfig& cfg, const StaticField& field,
                               double tau);

// U(tau1, tau0) with U(tau0, tau0) = I. Requires tau1 >= tau0. Throws
// IntegrationError (carrying the tau reached) if the step budget runs out or
// the unitarity defect exceeds 10*rel_tol.
Mat2 propagate(const DriveConfig& cfg, const StaticField& field, double tau0,
               double tau1, const IntegratorSettings& settings = {});

// U(tau_k, 0) for an increasing sample list, computed in one adaptive pass
// with steps clamped to land exactly on each sample. Requires taus sorted
// ascending and taus.front() >= 0.
std::vector<Mat2> propagate_sampled(const DriveConfig& cfg,
                                    const StaticField& field,
                                    const std::vector<double>& taus,
                                    const IntegratorSettings& settings = {});

}  // namespace dualdress
