#pragma once

// Parameter-space scans, Larmor acceleration, static-field compensation and
// the second-order magic-point search.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dualdress/types.hpp"

namespace dualdress {

// Parameters a scan axis or a magic search can vary.
enum class ScanParameter {
    OmegaX,   // x drive amplitude
    OmegaY,   // y drive amplitude
    Phi,      // y drive phase
    Psi,      // common initial phase (upgrades CosinePair to ShiftedCosinePair)
    Omega0X,  // static field components
    Omega0Y,
    Omega0Z,
};

struct ScanAxis {
    ScanParameter param = ScanParameter::OmegaX;
    double lo = 0.0;
    double hi = 0.0;
    int count = 2;
};

struct ScanGrid {
    ScanAxis axis1;  // rows
    ScanAxis axis2;  // columns
    DriveConfig base_cfg;
    StaticField base_field;
    IntegratorSettings settings{};

    void validate() const;
};

enum class ScanQuantity {
    HX,
    HY,
    HZ,
    Larmor,
    Acceleration,          // larmor / |omega0|
    PrincipalValuesKind,   // 0 = three real, 1 = one real + conjugate pair
};

struct ScanResult {
    ScanQuantity quantity = ScanQuantity::Larmor;
    ScanGrid grid;                      // echo of the request
    std::vector<double> axis1_values;   // size n1
    std::vector<double> axis2_values;   // size n2
    std::vector<double> values;         // row-major, axis1 index major; n1*n2
    std::vector<std::uint8_t> failed;   // 1 where the node evaluation failed
    std::vector<std::string> messages;  // failure reason per node ("" when ok)
    std::vector<std::uint8_t> fold_flag;  // eigenphase-fold suspicion per node

    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(i) * axis2_values.size() +
               static_cast<std::size_t>(j);
    }
    double value_at(int i, int j) const { return values[index(i, j)]; }
};

// Evaluates the quantity over the full grid. Per-node failures are recorded
// in-band (failed/messages), never thrown. Nodes where the Floquet eigenphase
// approaches the fold boundary, or where the dressed axis reverses against a
// grid neighbour, carry fold_flag = 1. Deterministic.
ScanResult scan2d(const ScanGrid& grid, ScanQuantity quantity);

// Dressed Larmor frequency over the static-field magnitude, from the full
// Floquet solution. Throws DomainError when |omega0| = 0. Never exceeds
// 1/|omega0|.
double acceleration(const DriveConfig& cfg, const StaticField& field);

// Local maximisation of a smooth objective with a Nelder-Mead simplex,
// confined to [lo1,hi1] x [lo2,hi2]. Used by refine_max; exposed for direct
// use and testing. tol is the simplex-diameter stopping tolerance in
// parameter units.
struct NelderMaxResult {
    double x1 = 0.0, x2 = 0.0;
    double value = -std::numeric_limits<double>::infinity();
    int evaluations = 0;
};
NelderMaxResult nelder_mead_max(const std::function<double(double, double)>& f,
                                double x1, double x2, double step1, double step2,
                                double lo1, double hi1, double lo2, double hi2,
                                double tol = 1e-4, int max_eval = 800);

struct RefineResult {
    double axis1 = 0.0;
    double axis2 = 0.0;
    double value = 0.0;
    bool on_boundary = false;  // best grid node sat on the grid edge; value
                               // reported unrefined in that case
};

// Refines the largest scanned value by re-evaluating the quantity
// continuously around the best (interior, non-failed) grid node.
RefineResult refine_max(const ScanResult& scan, double tol = 1e-4);

// Same, restricted to grid nodes whose parameters lie in
// [lo1,hi1] x [lo2,hi2] (for picking one basin among several).
RefineResult refine_max(const ScanResult& scan, double lo1, double hi1,
                        double lo2, double hi2, double tol = 1e-4);

// Magic-point search controls: vary Omega_x over [lo,hi], re-solving the
// compensation at each value and minimising the summed squared sensitivity
// of the first-order design response.
struct MagicSearch {
    double lo = 0.0;
    double hi = 0.0;
    int coarse_points = 29;         // coarse localisation nodes
    double reference = std::numeric_limits<double>::quiet_NaN();
    // Omega_x at which the off-magic sensitivity is measured for the magic
    // flag; defaults to lo when NaN.
    double step = 1e-3;             // central-difference step in Omega_x
};

struct CompensationProblem {
    DriveConfig base;            // baseline drive; adjustable terms are added
                                 // on top as y-axis harmonics
    StaticField static_field;
    std::vector<HarmonicTerm> adjustable;  // amplitudes here are ignored; the
                                           // solver resolves them
    std::vector<int> target_components;    // h components to null: 0=x,1=y,2=z
    std::vector<int> sensitivity_components;  // components whose derivative
                                              // w.r.t. Omega_x is tracked;
                                              // empty = target_components
    std::optional<std::vector<double>> seed;  // explicit amplitude seed;
                                              // otherwise first-order design
    std::optional<MagicSearch> magic;
    IntegratorSettings settings{};

    void validate() const;
};

struct CompensationSolution {
    std::vector<double> amplitudes;  // resolved adjustable amplitudes
    Vec3 residual{};                 // achieved effective field h
    std::vector<double> sensitivity;  // d h_c / d Omega_x of the first-order
                                      // design response, with the first-order
                                      // amplitudes held fixed across the
                                      // stencil; one entry per tracked
                                      // component
    bool magic = false;
    bool converged = false;
    int iterations = 0;
    std::vector<double> residual_history;  // max-abs target residual per
                                           // accepted damped-Newton iterate;
                                           // strictly decreasing
    double located_parameter = std::numeric_limits<double>::quiet_NaN();
    // Omega_x selected by magic_point; NaN from plain compensate().
};

// Nulls the targeted components of the exact effective field by adjusting the
// free harmonic amplitudes: damped Newton with a central-difference Jacobian,
// seeded by the first-order closed form (or the explicit seed). Convergence
// means every targeted |h| component < 1e-9 within 100 iterations; on
// non-convergence the best iterate is returned with converged = false.
// Throws SeedDegeneracyError when the first-order design matrix is singular.
CompensationSolution compensate(const CompensationProblem& problem);

// Locates the Omega_x in problem.magic->[lo,hi] minimising the summed squared
// design sensitivity of the compensated solution (coarse scan with
// continuation seeding, then golden-section). The magic flag is set when
// every tracked |sensitivity| drops below 1e-3 of its value at the reference
// Omega_x. Throws NotFoundError when no interior minimum exists in the
// bracket.
CompensationSolution magic_point(const CompensationProblem& problem);

}  // namespace dualdress
