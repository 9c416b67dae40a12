#pragma once

#include <optional>

#include "dualdress/types.hpp"

// Stroboscopic analysis of the one-period monodromy U(2*pi):
//   U(2*pi) = exp(-i 2*pi Lambda),  Lambda = (1/2) h.sigma,
// with eigenphases folded into the first zone (-1/2, 1/2]. The dressed
// precession frequency is Omega_L = |h| = lambda_+ - lambda_- <= 1.
// Numerical g (Jacobian) and f (Hessian) response tensors of h over the
// static field at zero field complete the module.

namespace dualdress {

// Larmor values above this are treated as fold-suspect: the eigenphases sit
// close to the zone boundary, where h flips sign under small perturbations.
inline constexpr double kFoldGuard = 0.999;

struct FloquetSolution {
    Mat2 monodromy;       // U(2*pi)
    double lambda_plus;   // folded eigenphases, lambda_+ >= lambda_-
    double lambda_minus;
    Mat2 Lambda;          // (1/2) h.sigma, Hermitian traceless
    Vec3 h;               // effective field
    double larmor;        // |h| in [0, 1]
    std::optional<Vec3> u;  // h/|h|; absent when larmor < 1e-9
    // True only at the zone boundary (monodromy = -I): the eigenbasis is
    // arbitrary there and Lambda is fixed to (1/2) sigma_z by convention,
    // with both eigenphases reported as +1/2.
    bool degenerate = false;
};

FloquetSolution solve_floquet(const DriveConfig& cfg, const StaticField& field,
                              const IntegratorSettings& settings = {});

// Central-difference Jacobian g_ij = d h_i / d omega0_j at omega0 = 0, with
// one Richardson level by default: g = (4 D(delta/2) - D(delta)) / 3.
// Requires 1e-6 <= delta <= 1e-2. Throws FoldAmbiguityError when any stencil
// point has larmor > 0.999 (the field flips sign across the zone boundary,
// so the difference quotient is meaningless).
Mat3 g_tensor_numeric(const DriveConfig& cfg,
                      const IntegratorSettings& settings = {},
                      double delta = 1e-4, bool richardson = true);

// Central second differences of h over omega0 at 0, symmetrized in (j,k),
// one Richardson level by default. Requires 1e-4 <= delta <= 1e-1.
Tensor3 f_tensor_numeric(const DriveConfig& cfg,
                         const IntegratorSettings& settings = {},
                         double delta = 3e-3, bool richardson = true);

struct ResponseTensors {
    Mat3 g;
    Tensor3 f;  // symmetric in the trailing index pair
    Vec3 h_s;   // synthetic field: h at omega0 = 0
};

ResponseTensors response_tensors(const DriveConfig& cfg,
                                 const IntegratorSettings& settings = {},
                                 double delta_g = 1e-4, double delta_f = 3e-3);

enum class PrincipalKind { ThreeReal, OneRealOnePair };

struct PrincipalValues {
    std::array<complexd, 3> values;  // eigenvalues of g (conjugate pairs only)
    PrincipalKind kind;
    // Rotation angle of the yz block, reported when g has the first-order
    // block form diag(1, .) with an orthogonal-scaled 2x2 yz block:
    // eta0 = atan2(g_yz, g_yy).
    std::optional<double> eta0;
};

PrincipalValues principal_values(const Mat3& g);

}  // namespace dualdress
