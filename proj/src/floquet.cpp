#include "dualdress/floquet.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "dualdress/propagator.hpp"
#include "dualdress/spinmath.hpp"

namespace dualdress {

FloquetSolution solve_floquet(const DriveConfig& cfg, const StaticField& field,
                              const IntegratorSettings& settings) {
    FloquetSolution sol;
    sol.monodromy = propagate(cfg, field, 0.0, kTwoPi, settings);

    // Special-unitary decomposition U = q0 I - i q.sigma (all real): the
    // closed-form eigensystem of a 2x2 unitary with det 1. Eigenvalues are
    // exp(-/+ i theta/2) with theta = 2 atan2(|q|, q0) in [0, 2*pi], giving
    // folded eigenphases +/- theta/(4*pi) directly; no branch cuts.
    const Mat2& U = sol.monodromy;
    const double q0 = 0.5 * (U.a.real() + U.d.real());
    const Vec3 q{-0.5 * (U.b.imag() + U.c.imag()),
                 0.5 * (U.c.real() - U.b.real()),
                 0.5 * (U.d.imag() - U.a.imag())};
    const double r = q.norm();
    const double theta = 2.0 * std::atan2(r, q0);

    sol.larmor = theta / kTwoPi;  // |h| in [0, 1]
    if (q0 < 0.0 && r < 3e-9) {
        // Within integration noise of the zone boundary (monodromy = -I):
        // both eigenphases sit on the +1/2 zone edge and the axis is
        // arbitrary, so fix it to z by convention.
        sol.degenerate = true;
        sol.larmor = 1.0;
        sol.lambda_plus = sol.lambda_minus = 0.5;
        sol.h = {0.0, 0.0, 1.0};
    } else {
        // h = (theta / (2*pi*r)) q, with the smooth r -> 0 limit q/(pi*q0).
        const double scale =
            (r < 1e-8 * std::abs(q0)) ? 1.0 / (kPi * q0) : theta / (kTwoPi * r);
        sol.h = q * scale;
        sol.lambda_plus = 0.5 * sol.larmor;
        sol.lambda_minus = -0.5 * sol.larmor;
    }
    sol.Lambda = dot_sigma(sol.h * 0.5);
    if (sol.larmor >= 1e-9) sol.u = sol.h * (1.0 / sol.larmor);
    return sol;
}

namespace {

// h(omega0) for stencil evaluation, guarding against the zone boundary.
Vec3 h_at(const DriveConfig& cfg, const Vec3& w0,
          const IntegratorSettings& settings) {
    const FloquetSolution s = solve_floquet(cfg, {w0}, settings);
    if (s.larmor > kFoldGuard)
        throw FoldAmbiguityError(
            "finite-difference stencil touches the eigenphase zone boundary "
            "(larmor > 0.999); the field sign is ambiguous there");
    return s.h;
}

Mat3 g_central(const DriveConfig& cfg, const IntegratorSettings& st, double d) {
    Mat3 g;
    for (int j = 0; j < 3; ++j) {
        Vec3 e;
        e[j] = d;
        const Vec3 hp = h_at(cfg, e, st);
        const Vec3 hm = h_at(cfg, -e, st);
        for (int i = 0; i < 3; ++i) g(i, j) = (hp[i] - hm[i]) / (2.0 * d);
    }
    return g;
}

Tensor3 f_central(const DriveConfig& cfg, const IntegratorSettings& st,
                  double d) {
    Tensor3 f;
    const Vec3 h0 = h_at(cfg, {}, st);
    Vec3 hp[3], hm[3];
    for (int j = 0; j < 3; ++j) {
        Vec3 e;
        e[j] = d;
        hp[j] = h_at(cfg, e, st);
        hm[j] = h_at(cfg, -e, st);
    }
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            f(i, j, j) = (hp[j][i] - 2.0 * h0[i] + hm[j][i]) / (d * d);
    for (int j = 0; j < 3; ++j) {
        for (int k = j + 1; k < 3; ++k) {
            Vec3 ej, ek;
            ej[j] = d;
            ek[k] = d;
            const Vec3 hpp = h_at(cfg, ej + ek, st);
            const Vec3 hpm = h_at(cfg, ej - ek, st);
            const Vec3 hmp = h_at(cfg, -ej + ek, st);
            const Vec3 hmm = h_at(cfg, -ej - ek, st);
            for (int i = 0; i < 3; ++i) {
                const double v =
                    (hpp[i] - hpm[i] - hmp[i] + hmm[i]) / (4.0 * d * d);
                f(i, j, k) = v;
                f(i, k, j) = v;
            }
        }
    }
    return f;
}

}  // namespace

Mat3 g_tensor_numeric(const DriveConfig& cfg, const IntegratorSettings& settings,
                      double delta, bool richardson) {
    if (!(delta >= 1e-6 && delta <= 1e-2))
        throw DomainError("g_tensor_numeric: delta outside [1e-6, 1e-2]");
    const Mat3 gd = g_central(cfg, settings, delta);
    if (!richardson) return gd;
    const Mat3 gh = g_central(cfg, settings, 0.5 * delta);
    Mat3 g;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            g(i, j) = (4.0 * gh(i, j) - gd(i, j)) / 3.0;
    return g;
}

Tensor3 f_tensor_numeric(const DriveConfig& cfg,
                         const IntegratorSettings& settings, double delta,
                         bool richardson) {
    if (!(delta >= 1e-4 && delta <= 1e-1))
        throw DomainError("f_tensor_numeric: delta outside [1e-4, 1e-1]");
    const Tensor3 fd = f_central(cfg, settings, delta);
    if (!richardson) return fd;
    const Tensor3 fh = f_central(cfg, settings, 0.5 * delta);
    Tensor3 f;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                f(i, j, k) = (4.0 * fh(i, j, k) - fd(i, j, k)) / 3.0;
    return f;
}

ResponseTensors response_tensors(const DriveConfig& cfg,
                                 const IntegratorSettings& settings,
                                 double delta_g, double delta_f) {
    ResponseTensors rt;
    rt.h_s = solve_floquet(cfg, {}, settings).h;
    rt.g = g_tensor_numeric(cfg, settings, delta_g);
    rt.f = f_tensor_numeric(cfg, settings, delta_f);
    return rt;
}

PrincipalValues principal_values(const Mat3& g) {
    Eigen::Matrix3d m;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            if (!std::isfinite(g(i, j)))
                throw DomainError("principal_values: non-finite entry");
            m(i, j) = g(i, j);
        }
    const Eigen::EigenSolver<Eigen::Matrix3d> es(m);
    PrincipalValues pv;
    const double scale = std::max(1.0, g.max_abs());
    int n_complex = 0;
    for (int i = 0; i < 3; ++i) {
        complexd v(es.eigenvalues()(i).real(), es.eigenvalues()(i).imag());
        if (std::abs(v.imag()) < 1e-12 * scale) v = complexd(v.real(), 0.0);
        if (v.imag() != 0.0) ++n_complex;
        pv.values[i] = v;
    }
    pv.kind = n_complex ? PrincipalKind::OneRealOnePair : PrincipalKind::ThreeReal;

    // First-order block form: x decoupled, yz block = |a0| * rotation.
    const double off = std::max(std::max(std::abs(g(0, 1)), std::abs(g(0, 2))),
                                std::max(std::abs(g(1, 0)), std::abs(g(2, 0))));
    const bool block = off < 1e-7 * scale &&
                       std::abs(g(1, 1) - g(2, 2)) < 1e-7 * scale &&
                       std::abs(g(1, 2) + g(2, 1)) < 1e-7 * scale &&
                       (g(1, 1) != 0.0 || g(1, 2) != 0.0);
    if (block) pv.eta0 = std::atan2(g(1, 2), g(1, 1));
    return pv;
}

}  // namespace dualdress
