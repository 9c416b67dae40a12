#include "dualdress/applications.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <thread>

#include "dualdress/floquet.hpp"
#include "dualdress/perturbation.hpp"

namespace dualdress {

namespace {

std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> v(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        v[static_cast<std::size_t>(i)] =
            lo + (hi - lo) * static_cast<double>(i) /
                     static_cast<double>(count - 1);
    return v;
}

void apply_parameter(DriveConfig& cfg, StaticField& field, ScanParameter p,
                     double v) {
    switch (p) {
        case ScanParameter::OmegaX: cfg.omega_x_amp = v; break;
        case ScanParameter::OmegaY: cfg.omega_y_amp = v; break;
        case ScanParameter::Phi: cfg.phase_Phi = v; break;
        case ScanParameter::Psi:
            cfg.phase_psi = v;
            if (v != 0.0 && cfg.waveform == Waveform::CosinePair)
                cfg.waveform = Waveform::ShiftedCosinePair;
            break;
        case ScanParameter::Omega0X: field.omega0.x = v; break;
        case ScanParameter::Omega0Y: field.omega0.y = v; break;
        case ScanParameter::Omega0Z: field.omega0.z = v; break;
    }
}

bool is_amplitude(ScanParameter p) {
    return p == ScanParameter::OmegaX || p == ScanParameter::OmegaY;
}

struct NodeEval {
    double value = 0.0;
    double larmor = 0.0;
    std::optional<Vec3> u;
};

NodeEval eval_node(const ScanGrid& g, ScanQuantity q, double v1, double v2) {
    DriveConfig cfg = g.base_cfg;
    StaticField field = g.base_field;
    apply_parameter(cfg, field, g.axis1.param, v1);
    apply_parameter(cfg, field, g.axis2.param, v2);

    if (q == ScanQuantity::PrincipalValuesKind) {
        const Mat3 gt = g_tensor_numeric(cfg, g.settings);
        const PrincipalValues pv = principal_values(gt);
        return {pv.kind == PrincipalKind::OneRealOnePair ? 1.0 : 0.0, 0.0, {}};
    }

    const FloquetSolution sol = solve_floquet(cfg, field, g.settings);
    NodeEval out;
    out.larmor = sol.larmor;
    out.u = sol.u;
    switch (q) {
        case ScanQuantity::HX: out.value = sol.h.x; break;
        case ScanQuantity::HY: out.value = sol.h.y; break;
        case ScanQuantity::HZ: out.value = sol.h.z; break;
        case ScanQuantity::Larmor: out.value = sol.larmor; break;
        case ScanQuantity::Acceleration: {
            const double n0 = field.omega0.norm();
            if (n0 == 0.0)
                throw DomainError("acceleration: |omega0| must be positive");
            out.value = sol.larmor / n0;
            if (out.value > (1.0 + 1e-9) / n0)
                throw Error("acceleration exceeds the 1/|omega0| bound");
            break;
        }
        default: break;
    }
    return out;
}

}  // namespace

void ScanGrid::validate() const {
    base_cfg.validate();
    base_field.validate();
    settings.validate();
    for (const ScanAxis* ax : {&axis1, &axis2}) {
        if (ax->count < 2) throw DomainError("scan axis needs >= 2 samples");
        if (!std::isfinite(ax->lo) || !std::isfinite(ax->hi) || ax->lo > ax->hi)
            throw DomainError("scan axis range must be finite with lo <= hi");
        if (is_amplitude(ax->param) && ax->lo < 0.0)
            throw DomainError("amplitude scan axes must stay >= 0");
    }
    if (axis1.param == axis2.param)
        throw DomainError("scan axes must vary different parameters");
}

ScanResult scan2d(const ScanGrid& grid, ScanQuantity quantity) {
    grid.validate();
    const int n1 = grid.axis1.count;
    const int n2 = grid.axis2.count;
    const std::size_t total = static_cast<std::size_t>(n1) *
                              static_cast<std::size_t>(n2);

    ScanResult r;
    r.quantity = quantity;
    r.grid = grid;
    r.axis1_values = linspace(grid.axis1.lo, grid.axis1.hi, n1);
    r.axis2_values = linspace(grid.axis2.lo, grid.axis2.hi, n2);
    r.values.assign(total, std::numeric_limits<double>::quiet_NaN());
    r.failed.assign(total, 0);
    r.messages.assign(total, std::string{});
    r.fold_flag.assign(total, 0);

    std::vector<double> larmors(total, 0.0);
    std::vector<std::optional<Vec3>> axes(total);

    auto run_rows = [&](int row_begin, int row_end) {
        for (int i = row_begin; i < row_end; ++i) {
            for (int j = 0; j < n2; ++j) {
                const std::size_t k = r.index(i, j);
                try {
                    const NodeEval ev = eval_node(grid, quantity,
                                                  r.axis1_values[static_cast<std::size_t>(i)],
                                                  r.axis2_values[static_cast<std::size_t>(j)]);
                    r.values[k] = ev.value;
                    larmors[k] = ev.larmor;
                    axes[k] = ev.u;
                } catch (const std::exception& e) {
                    r.failed[k] = 1;
                    r.messages[k] = e.what();
                }
            }
        }
    };

    unsigned hw = std::thread::hardware_concurrency();
    int workers = static_cast<int>(std::clamp(hw, 1u, 8u));
    workers = std::min(workers, n1);
    if (workers <= 1) {
        run_rows(0, n1);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        const int chunk = (n1 + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const int b = w * chunk;
            const int e = std::min(n1, b + chunk);
            if (b >= e) break;
            pool.emplace_back(run_rows, b, e);
        }
        for (std::thread& t : pool) t.join();
    }

    // Fold suspicion: eigenphases close to the zone boundary, or the dressed
    // axis reversing between adjacent nodes.
    for (int i = 0; i < n1; ++i) {
        for (int j = 0; j < n2; ++j) {
            const std::size_t k = r.index(i, j);
            if (r.failed[k]) continue;
            if (larmors[k] > kFoldGuard) r.fold_flag[k] = 1;
            if (!axes[k]) continue;
            const std::pair<int, int> nbs[2] = {{i + 1, j}, {i, j + 1}};
            for (const auto& [ni, nj] : nbs) {
                if (ni >= n1 || nj >= n2) continue;
                const std::size_t kn = r.index(ni, nj);
                if (r.failed[kn] || !axes[kn]) continue;
                if (axes[k]->dot(*axes[kn]) < 0.0) {
                    r.fold_flag[k] = 1;
                    r.fold_flag[kn] = 1;
                }
            }
        }
    }
    return r;
}

double acceleration(const DriveConfig& cfg, const StaticField& field) {
    cfg.validate();
    field.validate();
    const double n0 = field.omega0.norm();
    if (n0 == 0.0)
        throw DomainError("acceleration: |omega0| must be positive");
    return solve_floquet(cfg, field).larmor / n0;
}

NelderMaxResult nelder_mead_max(const std::function<double(double, double)>& f,
                                double x1, double x2, double step1, double step2,
                                double lo1, double hi1, double lo2, double hi2,
                                double tol, int max_eval) {
    if (!(lo1 <= x1 && x1 <= hi1 && lo2 <= x2 && x2 <= hi2))
        throw DomainError("nelder_mead_max: start point outside the box");
    struct Pt {
        double a, b, v;
    };
    int evals = 0;
    auto eval = [&](double a, double b) -> double {
        if (a < lo1 || a > hi1 || b < lo2 || b > hi2)
            return -std::numeric_limits<double>::infinity();
        ++evals;
        try {
            const double v = f(a, b);
            return std::isfinite(v) ? v
                                    : -std::numeric_limits<double>::infinity();
        } catch (const std::exception&) {
            return -std::numeric_limits<double>::infinity();
        }
    };

    auto safe_step = [](double x, double s, double lo, double hi) {
        if (s <= 0.0) s = std::max(1e-6, 1e-3 * (hi - lo));
        return (x + s <= hi) ? s : -s;
    };
    const double s1 = safe_step(x1, step1, lo1, hi1);
    const double s2 = safe_step(x2, step2, lo2, hi2);

    Pt simplex[3] = {{x1, x2, eval(x1, x2)},
                     {x1 + s1, x2, eval(x1 + s1, x2)},
                     {x1, x2 + s2, eval(x1, x2 + s2)}};
    Pt best = simplex[0];

    auto sort_simplex = [&]() {
        std::sort(std::begin(simplex), std::end(simplex),
                  [](const Pt& p, const Pt& q) { return p.v > q.v; });
        if (simplex[0].v > best.v) best = simplex[0];
    };
    sort_simplex();

    while (evals < max_eval) {
        const double d1 = std::max({std::abs(simplex[0].a - simplex[1].a),
                                    std::abs(simplex[0].a - simplex[2].a),
                                    std::abs(simplex[1].a - simplex[2].a)});
        const double d2 = std::max({std::abs(simplex[0].b - simplex[1].b),
                                    std::abs(simplex[0].b - simplex[2].b),
                                    std::abs(simplex[1].b - simplex[2].b)});
        if (d1 < tol && d2 < tol) break;

        const double ca = 0.5 * (simplex[0].a + simplex[1].a);
        const double cb = 0.5 * (simplex[0].b + simplex[1].b);
        const Pt& worst = simplex[2];

        Pt refl{ca + (ca - worst.a), cb + (cb - worst.b), 0.0};
        refl.v = eval(refl.a, refl.b);
        if (refl.v > simplex[0].v) {
            Pt exp_{ca + 2.0 * (ca - worst.a), cb + 2.0 * (cb - worst.b), 0.0};
            exp_.v = eval(exp_.a, exp_.b);
            simplex[2] = (exp_.v > refl.v) ? exp_ : refl;
        } else if (refl.v > simplex[1].v) {
            simplex[2] = refl;
        } else {
            Pt con{ca + 0.5 * (worst.a - ca), cb + 0.5 * (worst.b - cb), 0.0};
            con.v = eval(con.a, con.b);
            if (con.v > worst.v) {
                simplex[2] = con;
            } else {
                for (int i = 1; i < 3; ++i) {
                    simplex[i].a = simplex[0].a + 0.5 * (simplex[i].a - simplex[0].a);
                    simplex[i].b = simplex[0].b + 0.5 * (simplex[i].b - simplex[0].b);
                    simplex[i].v = eval(simplex[i].a, simplex[i].b);
                }
            }
        }
        sort_simplex();
    }
    return {best.a, best.b, best.v, evals};
}

namespace {

RefineResult refine_max_impl(const ScanResult& scan, double lo1, double hi1,
                             double lo2, double hi2, double tol) {
    const int n1 = static_cast<int>(scan.axis1_values.size());
    const int n2 = static_cast<int>(scan.axis2_values.size());
    if (n1 < 2 || n2 < 2 ||
        scan.values.size() != static_cast<std::size_t>(n1) * n2)
        throw DomainError("refine_max: malformed scan result");

    int bi = -1, bj = -1;
    double bv = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n1; ++i) {
        const double a = scan.axis1_values[static_cast<std::size_t>(i)];
        if (a < lo1 || a > hi1) continue;
        for (int j = 0; j < n2; ++j) {
            const double b = scan.axis2_values[static_cast<std::size_t>(j)];
            if (b < lo2 || b > hi2) continue;
            const std::size_t k = scan.index(i, j);
            if (scan.failed[k] || !std::isfinite(scan.values[k])) continue;
            if (scan.values[k] > bv) {
                bv = scan.values[k];
                bi = i;
                bj = j;
            }
        }
    }
    if (bi < 0)
        throw NotFoundError("refine_max: no successful node in the window");

    RefineResult out;
    out.axis1 = scan.axis1_values[static_cast<std::size_t>(bi)];
    out.axis2 = scan.axis2_values[static_cast<std::size_t>(bj)];
    out.value = bv;
    if (bi == 0 || bi == n1 - 1 || bj == 0 || bj == n2 - 1) {
        out.on_boundary = true;  // grid edge: report the node unrefined
        return out;
    }

    const double glo1 = std::max(lo1, scan.grid.axis1.lo);
    const double ghi1 = std::min(hi1, scan.grid.axis1.hi);
    const double glo2 = std::max(lo2, scan.grid.axis2.lo);
    const double ghi2 = std::min(hi2, scan.grid.axis2.hi);
    const double step1 = (scan.grid.axis1.hi - scan.grid.axis1.lo) /
                         static_cast<double>(n1 - 1);
    const double step2 = (scan.grid.axis2.hi - scan.grid.axis2.lo) /
                         static_cast<double>(n2 - 1);
    auto f = [&](double a, double b) {
        return eval_node(scan.grid, scan.quantity, a, b).value;
    };
    const NelderMaxResult nm =
        nelder_mead_max(f, out.axis1, out.axis2, step1, step2, glo1, ghi1,
                        glo2, ghi2, tol);
    if (nm.value >= bv) {
        out.axis1 = nm.x1;
        out.axis2 = nm.x2;
        out.value = nm.value;
    }
    return out;
}

}  // namespace

RefineResult refine_max(const ScanResult& scan, double tol) {
    return refine_max_impl(scan, -std::numeric_limits<double>::infinity(),
                           std::numeric_limits<double>::infinity(),
                           -std::numeric_limits<double>::infinity(),
                           std::numeric_limits<double>::infinity(), tol);
}

RefineResult refine_max(const ScanResult& scan, double lo1, double hi1,
                        double lo2, double hi2, double tol) {
    return refine_max_impl(scan, lo1, hi1, lo2, hi2, tol);
}

// ---------------------------------------------------------------------------
// Compensation
// ---------------------------------------------------------------------------

void CompensationProblem::validate() const {
    base.validate();
    static_field.validate();
    settings.validate();
    auto check_components = [](const std::vector<int>& cs, const char* what) {
        for (std::size_t i = 0; i < cs.size(); ++i) {
            if (cs[i] < 0 || cs[i] > 2)
                throw DomainError(std::string(what) +
                                  ": components must be 0, 1 or 2");
            for (std::size_t j = 0; j < i; ++j)
                if (cs[i] == cs[j])
                    throw DomainError(std::string(what) +
                                      ": duplicate component");
        }
    };
    check_components(target_components, "compensation targets");
    check_components(sensitivity_components, "sensitivity components");
    for (const HarmonicTerm& t : adjustable) {
        if (t.order < 1)
            throw DomainError("adjustable harmonic orders must be >= 1");
        if (!std::isfinite(t.phase))
            throw DomainError("adjustable harmonic phase must be finite");
    }
    if (adjustable.size() < target_components.size())
        throw DomainError("need at least as many adjustable amplitudes as "
                          "target components");
    if (seed && seed->size() != adjustable.size())
        throw DomainError("seed size must match the adjustable term count");
    if (seed)
        for (double s : *seed)
            if (!std::isfinite(s)) throw DomainError("seed must be finite");
    if (magic) {
        if (!std::isfinite(magic->lo) || !std::isfinite(magic->hi) ||
            magic->lo < 0.0 || magic->lo >= magic->hi)
            throw DomainError("magic search bracket must satisfy 0 <= lo < hi");
        if (magic->coarse_points < 5)
            throw DomainError("magic search needs >= 5 coarse points");
        if (!(magic->step > 0.0) || magic->step > 0.1)
            throw DomainError("magic search step must be in (0, 0.1]");
        if (std::isfinite(magic->reference) && magic->reference < 0.0)
            throw DomainError("magic reference Omega_x must be >= 0");
        if (target_components.empty() && sensitivity_components.empty())
            throw DomainError("magic search requires sensitivity or target "
                              "components");
    }
}

namespace {

const std::vector<int>& tracked_components(const CompensationProblem& p) {
    return p.sensitivity_components.empty() ? p.target_components
                                            : p.sensitivity_components;
}

DriveConfig working_cfg(const CompensationProblem& p,
                        const std::vector<double>& amps, double omega_x) {
    DriveConfig cfg = p.base;
    cfg.omega_x_amp = omega_x;
    if (!p.adjustable.empty()) {
        if (cfg.waveform == Waveform::CosinePair ||
            cfg.waveform == Waveform::ShiftedCosinePair)
            cfg.waveform = Waveform::HarmonicSum;
        for (std::size_t j = 0; j < p.adjustable.size(); ++j) {
            HarmonicTerm t = p.adjustable[j];
            t.amplitude = amps[j];
            cfg.extra_y.push_back(t);
        }
    }
    return cfg;
}

Vec3 exact_h(const CompensationProblem& p, const std::vector<double>& amps,
             double omega_x) {
    return solve_floquet(working_cfg(p, amps, omega_x), p.static_field,
                         p.settings)
        .h;
}

Vec3 design_h1(const CompensationProblem& p, const std::vector<double>& amps,
               double omega_x) {
    return h_first_order(working_cfg(p, amps, omega_x), p.static_field).h1;
}

// First-order closed-form seed: the design response is affine in the
// amplitudes, so columns are exact differences against the zero-amplitude
// baseline. Throws SeedDegeneracyError when the design matrix cannot resolve
// the targets (e.g. a Bessel factor vanishing at this Omega_x).
std::vector<double> first_order_seed(const CompensationProblem& p,
                                     double omega_x) {
    const std::size_t na = p.adjustable.size();
    const std::size_t nt = p.target_components.size();
    if (na == 0 || nt == 0) return std::vector<double>(na, 0.0);

    const std::vector<double> zero(na, 0.0);
    const Vec3 h0 = design_h1(p, zero, omega_x);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(nt),
                      static_cast<Eigen::Index>(na));
    Eigen::VectorXd c(static_cast<Eigen::Index>(nt));
    for (std::size_t t = 0; t < nt; ++t)
        c(static_cast<Eigen::Index>(t)) = h0[p.target_components[t]];
    for (std::size_t j = 0; j < na; ++j) {
        std::vector<double> unit = zero;
        unit[j] = 1.0;
        const Vec3 hj = design_h1(p, unit, omega_x);
        for (std::size_t t = 0; t < nt; ++t)
            m(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) =
                hj[p.target_components[t]] - h0[p.target_components[t]];
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.singularValues()(static_cast<Eigen::Index>(nt) - 1) < 1e-9)
        throw SeedDegeneracyError(
            "first-order design matrix is singular at this Omega_x");
    const Eigen::VectorXd a = svd.solve(-c);
    std::vector<double> out(na);
    for (std::size_t j = 0; j < na; ++j)
        out[j] = a(static_cast<Eigen::Index>(j));
    return out;
}

std::vector<double> residual_vector(const CompensationProblem& p,
                                    const std::vector<double>& amps,
                                    double omega_x) {
    const Vec3 h = exact_h(p, amps, omega_x);
    std::vector<double> r(p.target_components.size());
    for (std::size_t t = 0; t < r.size(); ++t)
        r[t] = h[p.target_components[t]];
    return r;
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

std::vector<double> design_sensitivity(const CompensationProblem& p,
                                       const std::vector<double>& amps,
                                       double omega_x, double step) {
    const Vec3 hp = design_h1(p, amps, omega_x + step);
    const Vec3 hm = design_h1(p, amps, omega_x - step);
    const std::vector<int>& comps = tracked_components(p);
    std::vector<double> s(comps.size());
    for (std::size_t i = 0; i < comps.size(); ++i)
        s[i] = (hp[comps[i]] - hm[comps[i]]) / (2.0 * step);
    return s;
}

constexpr double kResidualTol = 1e-9;
constexpr int kMaxNewtonIters = 100;

// Damped Newton on the exact effective field. Accepted steps strictly
// decrease the max-abs target residual; stalls return the best iterate.
CompensationSolution newton_solve(const CompensationProblem& p,
                                  std::vector<double> amps, double omega_x) {
    CompensationSolution sol;
    const std::size_t nt = p.target_components.size();
    const std::size_t na = p.adjustable.size();

    std::vector<double> r = residual_vector(p, amps, omega_x);
    double rn = max_abs(r);
    sol.residual_history.push_back(rn);

    while (rn >= kResidualTol && sol.iterations < kMaxNewtonIters && nt > 0) {
        ++sol.iterations;

        Eigen::MatrixXd jac(static_cast<Eigen::Index>(nt),
                            static_cast<Eigen::Index>(na));
        for (std::size_t j = 0; j < na; ++j) {
            const double dj = std::max(1e-6, 1e-3 * std::abs(amps[j]));
            std::vector<double> ap = amps, am = amps;
            ap[j] += dj;
            am[j] -= dj;
            const std::vector<double> rp = residual_vector(p, ap, omega_x);
            const std::vector<double> rm = residual_vector(p, am, omega_x);
            for (std::size_t t = 0; t < nt; ++t)
                jac(static_cast<Eigen::Index>(t),
                    static_cast<Eigen::Index>(j)) =
                    (rp[t] - rm[t]) / (2.0 * dj);
        }
        Eigen::VectorXd rhs(static_cast<Eigen::Index>(nt));
        for (std::size_t t = 0; t < nt; ++t)
            rhs(static_cast<Eigen::Index>(t)) = -r[t];
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(
            jac, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Eigen::VectorXd step = svd.solve(rhs);
        if (!step.allFinite() || step.norm() < 1e-300) break;

        bool accepted = false;
        double damp = 1.0;
        for (int bt = 0; bt < 30 && !accepted; ++bt, damp *= 0.5) {
            std::vector<double> trial = amps;
            for (std::size_t j = 0; j < na; ++j)
                trial[j] += damp * step(static_cast<Eigen::Index>(j));
            std::vector<double> rt;
            try {
                rt = residual_vector(p, trial, omega_x);
            } catch (const Error&) {
                continue;  // shrink further
            }
            const double rtn = max_abs(rt);
            if (rtn < rn) {
                amps = std::move(trial);
                r = std::move(rt);
                rn = rtn;
                sol.residual_history.push_back(rn);
                accepted = true;
            }
        }
        if (!accepted) break;  // stalled; keep the best iterate
    }

    sol.amplitudes = std::move(amps);
    sol.converged = rn < kResidualTol;
    sol.residual = exact_h(p, sol.amplitudes, omega_x);
    return sol;
}

CompensationSolution solve_at(const CompensationProblem& p, double omega_x,
                              const std::optional<std::vector<double>>& seed) {
    std::vector<double> a0 =
        seed ? *seed
             : (p.seed ? *p.seed : first_order_seed(p, omega_x));
    CompensationSolution sol = newton_solve(p, std::move(a0), omega_x);
    if (p.magic)
        // The tracked derivative lives entirely in the first-order design
        // model: amplitudes are the design's own (re-derived at this
        // Omega_x, then held fixed across the stencil). The exact-solve
        // amplitudes absorb higher-order mixing and would shift the
        // stationary points of the design response.
        sol.sensitivity = design_sensitivity(p, first_order_seed(p, omega_x),
                                             omega_x, p.magic->step);
    return sol;
}

double objective(const std::vector<double>& sens) {
    double f = 0.0;
    for (double s : sens) f += s * s;
    return f;
}

}  // namespace

CompensationSolution compensate(const CompensationProblem& problem) {
    problem.validate();
    return solve_at(problem, problem.base.omega_x_amp, std::nullopt);
}

CompensationSolution magic_point(const CompensationProblem& problem) {
    problem.validate();
    if (!problem.magic)
        throw DomainError("magic_point: problem has no magic search block");
    const MagicSearch& m = *problem.magic;

    // The evaluation below re-solves the compensation at a given Omega_x,
    // preferring continuation from the last converged amplitudes.
    std::optional<std::vector<double>> cont;
    auto eval_at = [&](double x) -> std::optional<CompensationSolution> {
        try {
            CompensationSolution s = solve_at(problem, x, cont);
            if (!s.converged && cont) {
                // Continuation seed failed; retry from the design seed.
                s = solve_at(problem, x, std::nullopt);
            }
            if (!s.converged) return std::nullopt;
            cont = s.amplitudes;
            return s;
        } catch (const Error&) {
            return std::nullopt;
        }
    };

    const std::vector<double> xs = linspace(m.lo, m.hi, m.coarse_points);
    std::vector<double> fs(xs.size(),
                           std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (auto s = eval_at(xs[i])) fs[i] = objective(s->sensitivity);
    }
    std::size_t bi = 0;
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (fs[i] < fs[bi]) bi = i;
    if (!std::isfinite(fs[bi]))
        throw NotFoundError("magic_point: compensation failed across the "
                            "whole bracket");
    if (bi == 0 || bi + 1 == xs.size())
        throw NotFoundError("magic_point: no interior minimum of the "
                            "sensitivity norm in the bracket");

    // Golden-section refinement over the bracketing interval, tracking the
    // best value ever seen so a non-unimodal stretch cannot lose it.
    double a = xs[bi - 1], b = xs[bi + 1];
    double best_x = xs[bi], best_f = fs[bi];
    auto probe = [&](double x) -> double {
        if (auto s = eval_at(x)) {
            const double f = objective(s->sensitivity);
            if (f < best_f) {
                best_f = f;
                best_x = x;
            }
            return f;
        }
        return std::numeric_limits<double>::infinity();
    };
    const double invphi = 0.6180339887498949;
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    double fc = probe(c), fd = probe(d);
    for (int it = 0; it < 80 && (b - a) > 1e-6; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = probe(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = probe(d);
        }
    }

    CompensationSolution sol = solve_at(problem, best_x, cont);
    if (!sol.converged) sol = solve_at(problem, best_x, std::nullopt);
    sol.located_parameter = best_x;

    // Magic flag: every tracked sensitivity at the located point must drop
    // below 1e-3 of its off-magic reference value.
    const double xr = std::isfinite(m.reference) ? m.reference : m.lo;
    try {
        std::optional<std::vector<double>> no_cont;
        const CompensationSolution ref = solve_at(problem, xr, no_cont);
        if (ref.converged && ref.sensitivity.size() == sol.sensitivity.size()) {
            bool ok = !sol.sensitivity.empty();
            for (std::size_t i = 0; i < sol.sensitivity.size(); ++i) {
                const double r = std::abs(ref.sensitivity[i]);
                const double s = std::abs(sol.sensitivity[i]);
                if (r == 0.0 ? s != 0.0 : s >= 1e-3 * r) ok = false;
            }
            sol.magic = ok;
        }
    } catch (const Error&) {
        sol.magic = false;
    }
    return sol;
}

}  // namespace dualdress
