// Command-line front end for the dualdress library. Subcommands cover single
// Floquet evaluations, perturbative cross-checks, response tensors, spin
// trajectories, detection models, 2-D parameter scans, acceleration-maximum
// refinement, and static-field compensation with an optional magic-point
// search. Exit codes: 0 success, 1 usage error, 2 numerical failure.
#include <CLI11.hpp>

#include <cmath>
#include <cstddef>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "cli_support.hpp"
#include "dualdress/applications.hpp"
#include "dualdress/dynamics.hpp"
#include "dualdress/floquet.hpp"
#include "dualdress/perturbation.hpp"
#include "dualdress/types.hpp"

using namespace dualdress;

namespace {

// ---------------------------------------------------------------- options --

struct CommonOpts {
    double omega_x = 0.0;
    double omega_y = 0.0;
    int p = 1;
    std::string phi = "0";
    std::string psi = "0";
    std::vector<std::string> extra;  // "order:amplitude:phase"
    std::vector<double> b0{0.0, 0.0, 0.0};
    double rel_tol = 1e-11;
    double abs_tol = 1e-13;
    std::string out;
    std::string format = "auto";
};

void add_common(CLI::App* sub, CommonOpts& o, bool with_drive = true) {
    // Lets a trailing --config (a root option) be picked up even when it is
    // written after the subcommand name.
    sub->fallthrough();
    if (with_drive) {
        sub->add_option("--omega-x", o.omega_x,
                        "x-axis drive amplitude (units of the drive frequency)");
        sub->add_option("--omega-y", o.omega_y, "y-axis drive amplitude");
        sub->add_option("--p", o.p, "y-drive harmonic order (>= 1)");
        sub->add_option("--phi", o.phi,
                        "relative drive phase, radians or a pi fraction "
                        "such as pi/2");
        sub->add_option("--psi", o.psi,
                        "common drive phase offset, radians or a pi fraction");
        sub->add_option("--extra", o.extra,
                        "additional y harmonic 'order:amplitude:phase' "
                        "(repeatable)");
    }
    sub->add_option("--b0", o.b0, "static field omega0 as 'x,y,z'")
        ->delimiter(',')
        ->expected(3);
    sub->add_option("--rel-tol", o.rel_tol, "integrator relative tolerance");
    sub->add_option("--abs-tol", o.abs_tol, "integrator absolute tolerance");
    sub->add_option("--out", o.out, "write machine-readable output to this file");
    sub->add_option("--format", o.format, "output file format")
        ->check(CLI::IsMember({"auto", "csv", "json"}));
}

DriveConfig make_cfg(const CommonOpts& o) {
    DriveConfig c;
    c.omega_x_amp = o.omega_x;
    c.omega_y_amp = o.omega_y;
    c.harmonic_p = o.p;
    c.phase_Phi = cli::parse_angle(o.phi);
    c.phase_psi = cli::parse_angle(o.psi);
    for (const std::string& e : o.extra) {
        const std::vector<std::string> parts = cli::split(e, ':');
        if (parts.size() != 3)
            throw DomainError("--extra needs 'order:amplitude:phase': '" + e +
                              "'");
        HarmonicTerm t;
        t.order = static_cast<int>(cli::parse_double(parts[0]));
        t.amplitude = cli::parse_double(parts[1]);
        t.phase = cli::parse_angle(parts[2]);
        c.extra_y.push_back(t);
    }
    if (!c.extra_y.empty())
        c.waveform = Waveform::HarmonicSum;
    else if (c.phase_psi != 0.0)
        c.waveform = Waveform::ShiftedCosinePair;
    c.validate();
    return c;
}

StaticField make_field(const CommonOpts& o) {
    if (o.b0.size() != 3)
        throw DomainError("--b0 needs exactly three components");
    StaticField f;
    f.omega0 = {o.b0[0], o.b0[1], o.b0[2]};
    f.validate();
    return f;
}

IntegratorSettings make_settings(const CommonOpts& o) {
    IntegratorSettings s;
    s.rel_tol = o.rel_tol;
    s.abs_tol = o.abs_tol;
    s.validate();
    return s;
}

std::string vec_str(const Vec3& v) {
    return "(" + cli::fmt(v.x) + ", " + cli::fmt(v.y) + ", " + cli::fmt(v.z) +
           ")";
}

void echo_common(cli::Document& d, const DriveConfig& c, const StaticField& f,
                 const IntegratorSettings& s) {
    d.param("omega_x", c.omega_x_amp);
    d.param("omega_y", c.omega_y_amp);
    d.param("p", c.harmonic_p);
    d.param("phi", c.phase_Phi);
    d.param("psi", c.psi());
    for (const HarmonicTerm& t : c.extra_y)
        d.param("extra",
                std::to_string(t.order) + ":" + cli::fmt(t.amplitude) + ":" +
                    cli::fmt(t.phase));
    d.param("b0", cli::fmt(f.omega0.x) + "," + cli::fmt(f.omega0.y) + "," +
                      cli::fmt(f.omega0.z));
    d.param("rel_tol", s.rel_tol);
    d.param("abs_tol", s.abs_tol);
}

void finish(cli::Document& d, const CommonOpts& o) {
    if (o.out.empty()) return;
    std::string format = o.format;
    if (format == "auto") {
        const bool json = o.out.size() >= 5 &&
                          o.out.compare(o.out.size() - 5, 5, ".json") == 0;
        format = json ? "json" : "csv";
    }
    d.write(o.out, format);
    std::cout << "wrote " << o.out << " (" << format << ")\n";
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        v[static_cast<std::size_t>(i)] =
            lo + (hi - lo) * static_cast<double>(i) / (n > 1 ? n - 1 : 1);
    return v;
}

// ------------------------------------------------------------- subcommands --

int run_floquet(const CommonOpts& o) {
    const DriveConfig cfg = make_cfg(o);
    const StaticField field = make_field(o);
    const IntegratorSettings settings = make_settings(o);
    const FloquetSolution sol = solve_floquet(cfg, field, settings);

    std::cout << "h = " << vec_str(sol.h) << "\n";
    std::cout << "lambda_plus = " << cli::fmt(sol.lambda_plus)
              << "\nlambda_minus = " << cli::fmt(sol.lambda_minus) << "\n";
    std::cout << "larmor = " << cli::fmt(sol.larmor) << "\n";
    if (sol.u)
        std::cout << "u = " << vec_str(*sol.u) << "\n";
    else
        std::cout << "u = (undefined: larmor below threshold)\n";
    std::cout << "degenerate = " << (sol.degenerate ? "true" : "false") << "\n";

    cli::Document d;
    d.subcommand = "floquet";
    echo_common(d, cfg, field, settings);
    d.columns = {"quantity", "value"};
    d.scalar("h_x", sol.h.x);
    d.scalar("h_y", sol.h.y);
    d.scalar("h_z", sol.h.z);
    d.scalar("lambda_plus", sol.lambda_plus);
    d.scalar("lambda_minus", sol.lambda_minus);
    d.scalar("larmor", sol.larmor);
    if (sol.u) {
        d.scalar("u_x", sol.u->x);
        d.scalar("u_y", sol.u->y);
        d.scalar("u_z", sol.u->z);
    }
    d.row({"degenerate", sol.degenerate ? "1" : "0"});

    d.payload["h"] = cli::to_json(sol.h);
    d.payload["lambda_plus"] = sol.lambda_plus;
    d.payload["lambda_minus"] = sol.lambda_minus;
    d.payload["larmor"] = sol.larmor;
    d.payload["u"] = sol.u ? cli::to_json(*sol.u) : nlohmann::json();
    d.payload["degenerate"] = sol.degenerate;
    finish(d, o);
    return 0;
}

int run_perturb(const CommonOpts& o) {
    const DriveConfig cfg = make_cfg(o);
    const StaticField field = make_field(o);
    const FirstOrder fo = h_first_order(cfg, field);
    const SecondOrder so = h_second_order(cfg, field);
    const QCoefficients q = q_coefficients(cfg);
    const Vec3 hm = h_magnus(cfg, field);

    std::cout << "hs1 = " << vec_str(fo.hs1) << "\n";
    std::cout << "h1 = " << vec_str(fo.h1) << "\n";
    std::cout << "hs2 = " << vec_str(so.hs2) << "\n";
    std::cout << "h2 = " << vec_str(so.h2) << "\n";
    std::cout << "h_magnus = " << vec_str(hm) << "\n";
    std::cout << "Q_xy = " << cli::fmt(q.Q_xy) << ", Q_xz = " << cli::fmt(q.Q_xz)
              << ", Q_yx = " << cli::fmt(q.Q_yx)
              << ", Q_zx = " << cli::fmt(q.Q_zx) << "\n";
    std::cout << "q0 = " << cli::fmt(q.q0) << ", qc = " << cli::fmt(q.qc)
              << ", qs = " << cli::fmt(q.qs) << "\n";

    cli::Document d;
    d.subcommand = "perturb";
    echo_common(d, cfg, field, make_settings(o));
    d.columns = {"quantity", "value"};
    const char* ax = "xyz";
    for (int i = 0; i < 3; ++i)
        d.scalar(std::string("hs1_") + ax[i], fo.hs1[i]);
    for (int i = 0; i < 3; ++i) d.scalar(std::string("h1_") + ax[i], fo.h1[i]);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            d.scalar(std::string("g1_") + ax[i] + ax[j], fo.g1(i, j));
    for (int i = 0; i < 3; ++i)
        d.scalar(std::string("hs2_") + ax[i], so.hs2[i]);
    for (int i = 0; i < 3; ++i) d.scalar(std::string("h2_") + ax[i], so.h2[i]);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            d.scalar(std::string("g2_") + ax[i] + ax[j], so.g2(i, j));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                d.scalar(std::string("f2_") + ax[i] + ax[j] + ax[k],
                         so.f2(i, j, k));
    for (int i = 0; i < 3; ++i)
        d.scalar(std::string("h_magnus_") + ax[i], hm[i]);
    d.scalar("Q_x", q.Q_x);
    d.scalar("Q_xy", q.Q_xy);
    d.scalar("Q_xz", q.Q_xz);
    d.scalar("Q_yx", q.Q_yx);
    d.scalar("Q_zx", q.Q_zx);
    d.scalar("q0", q.q0);
    d.scalar("qc", q.qc);
    d.scalar("qs", q.qs);

    d.payload["hs1"] = cli::to_json(fo.hs1);
    d.payload["h1"] = cli::to_json(fo.h1);
    d.payload["g1"] = cli::to_json(fo.g1);
    d.payload["hs2"] = cli::to_json(so.hs2);
    d.payload["h2"] = cli::to_json(so.h2);
    d.payload["g2"] = cli::to_json(so.g2);
    d.payload["f2"] = cli::to_json(so.f2);
    d.payload["h_magnus"] = cli::to_json(hm);
    d.payload["q"] = {{"Q_x", q.Q_x},   {"Q_xy", q.Q_xy}, {"Q_xz", q.Q_xz},
                      {"Q_yx", q.Q_yx}, {"Q_zx", q.Q_zx}, {"q0", q.q0},
                      {"qc", q.qc},     {"qs", q.qs}};
    finish(d, o);
    return 0;
}

struct TensorOpts {
    double delta_g = 1e-4;
    double delta_f = 3e-3;
};

int run_tensors(const CommonOpts& o, const TensorOpts& t) {
    const DriveConfig cfg = make_cfg(o);
    const IntegratorSettings settings = make_settings(o);
    const ResponseTensors rt =
        response_tensors(cfg, settings, t.delta_g, t.delta_f);
    const PrincipalValues pv = principal_values(rt.g);

    const char* ax = "xyz";
    for (int i = 0; i < 3; ++i) {
        std::cout << "g_" << ax[i] << " = (" << cli::fmt(rt.g(i, 0)) << ", "
                  << cli::fmt(rt.g(i, 1)) << ", " << cli::fmt(rt.g(i, 2))
                  << ")\n";
    }
    std::cout << "h_s = " << vec_str(rt.h_s) << "\n";
    std::cout << "principal kind = "
              << (pv.kind == PrincipalKind::OneRealOnePair ? "one_real_one_pair"
                                                           : "three_real")
              << "\n";
    for (int i = 0; i < 3; ++i)
        std::cout << "principal_" << i << " = " << cli::fmt(pv.values[static_cast<std::size_t>(i)].real())
                  << (pv.values[static_cast<std::size_t>(i)].imag() < 0 ? " - " : " + ")
                  << cli::fmt(std::abs(pv.values[static_cast<std::size_t>(i)].imag())) << "i\n";
    if (pv.eta0) std::cout << "eta0 = " << cli::fmt(*pv.eta0) << "\n";

    cli::Document d;
    d.subcommand = "tensors";
    echo_common(d, cfg, StaticField{}, settings);
    d.param("delta_g", t.delta_g);
    d.param("delta_f", t.delta_f);
    d.columns = {"quantity", "value"};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            d.scalar(std::string("g_") + ax[i] + ax[j], rt.g(i, j));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                d.scalar(std::string("f_") + ax[i] + ax[j] + ax[k],
                         rt.f(i, j, k));
    for (int i = 0; i < 3; ++i)
        d.scalar(std::string("h_s_") + ax[i], rt.h_s[i]);
    for (std::size_t i = 0; i < 3; ++i) {
        d.scalar("pv" + std::to_string(i) + "_re", pv.values[i].real());
        d.scalar("pv" + std::to_string(i) + "_im", pv.values[i].imag());
    }
    d.row({"kind", pv.kind == PrincipalKind::OneRealOnePair
                       ? "one_real_one_pair"
                       : "three_real"});
    if (pv.eta0) d.scalar("eta0", *pv.eta0);

    d.payload["g"] = cli::to_json(rt.g);
    d.payload["f"] = cli::to_json(rt.f);
    d.payload["h_s"] = cli::to_json(rt.h_s);
    nlohmann::json pvj;
    pvj["values"] = nlohmann::json::array();
    for (std::size_t i = 0; i < 3; ++i)
        pvj["values"].push_back(nlohmann::json::array(
            {pv.values[i].real(), pv.values[i].imag()}));
    pvj["kind"] = pv.kind == PrincipalKind::OneRealOnePair ? "one_real_one_pair"
                                                           : "three_real";
    pvj["eta0"] = pv.eta0 ? nlohmann::json(*pv.eta0) : nlohmann::json();
    d.payload["principal"] = pvj;
    finish(d, o);
    return 0;
}

struct TrajOpts {
    std::vector<double> s0{1.0, 0.0, 0.0};
    double tau_end = 4.0 * kPi;
    int samples = 201;
    std::string method = "both";  // exact | analytic | both
};

int run_traj(const CommonOpts& o, const TrajOpts& t) {
    const DriveConfig cfg = make_cfg(o);
    const StaticField field = make_field(o);
    const IntegratorSettings settings = make_settings(o);
    if (t.samples < 2) throw DomainError("--samples must be >= 2");
    if (!(t.tau_end > 0.0)) throw DomainError("--tau-end must be positive");
    if (t.s0.size() != 3)
        throw DomainError("--s0 needs exactly three components");
    const Vec3 s0{t.s0[0], t.s0[1], t.s0[2]};
    const std::vector<double> taus = linspace(0.0, t.tau_end, t.samples);

    const bool want_exact = t.method != "analytic";
    const bool want_analytic = t.method != "exact";
    if (want_analytic && (s0.x != 1.0 || s0.y != 0.0 || s0.z != 0.0))
        throw DomainError(
            "the analytic trajectory is defined for the +x initial state; "
            "use --method exact for other initial states");

    SpinTrajectory ex, an;
    if (want_exact) ex = trajectory_exact(cfg, field, s0, taus, settings);
    if (want_analytic) an = trajectory_analytic(cfg, field, taus);

    cli::Document d;
    d.subcommand = "traj";
    echo_common(d, cfg, field, settings);
    d.param("s0", cli::fmt(s0.x) + "," + cli::fmt(s0.y) + "," + cli::fmt(s0.z));
    d.param("tau_end", t.tau_end);
    d.param("samples", t.samples);
    d.param("method", t.method);
    d.columns = {"tau"};
    if (want_exact) {
        d.columns.push_back("sx");
        d.columns.push_back("sy");
        d.columns.push_back("sz");
    }
    if (want_analytic) {
        d.columns.push_back("sx_1");
        d.columns.push_back("sy_1");
        d.columns.push_back("sz_1");
    }
    for (std::size_t k = 0; k < taus.size(); ++k) {
        std::vector<std::string> row{cli::fmt(taus[k])};
        if (want_exact) {
            row.push_back(cli::fmt(ex.sx[k]));
            row.push_back(cli::fmt(ex.sy[k]));
            row.push_back(cli::fmt(ex.sz[k]));
        }
        if (want_analytic) {
            row.push_back(cli::fmt(an.sx[k]));
            row.push_back(cli::fmt(an.sy[k]));
            row.push_back(cli::fmt(an.sz[k]));
        }
        d.row(std::move(row));
    }

    d.payload["tau"] = taus;
    if (want_exact)
        d.payload["exact"] = {{"sx", ex.sx}, {"sy", ex.sy}, {"sz", ex.sz}};
    if (want_analytic)
        d.payload["analytic"] = {{"sx", an.sx}, {"sy", an.sy}, {"sz", an.sz}};

    std::cout << taus.size() << " samples over tau in [0, "
              << cli::fmt(t.tau_end) << "]\n";
    if (want_exact)
        std::cout << "final exact s = (" << cli::fmt(ex.sx.back()) << ", "
                  << cli::fmt(ex.sy.back()) << ", " << cli::fmt(ex.sz.back())
                  << ")\n";
    if (want_analytic)
        std::cout << "final analytic s = (" << cli::fmt(an.sx.back()) << ", "
                  << cli::fmt(an.sy.back()) << ", " << cli::fmt(an.sz.back())
                  << ")\n";
    finish(d, o);
    return 0;
}

struct SampleOpts {
    double tau_end = 300.0;
    int samples = 1201;
};

int run_landre(const CommonOpts& o, const SampleOpts& t) {
    const StaticField field = make_field(o);
    if (o.omega_y != 0.0 || !o.extra.empty())
        throw DomainError("landre: single dressing only (no y drive)");
    if (field.omega0.x != 0.0 || field.omega0.z != 0.0)
        throw DomainError("landre: the static field must be (0, b0y, 0)");
    if (t.samples < 2) throw DomainError("--samples must be >= 2");
    const double psi = cli::parse_angle(o.psi);
    const std::vector<double> taus = linspace(0.0, t.tau_end, t.samples);
    const LandreDetection ld =
        landre_detection(o.omega_x, field.omega0.y, psi, taus);

    std::cout << "larmor = " << cli::fmt(ld.larmor) << "\n";
    std::cout << "u = " << vec_str(ld.u) << "\n";
    for (const auto& [k, a] : ld.sideband_amplitudes)
        std::cout << "sideband[" << k << "] = " << cli::fmt(a) << "\n";

    cli::Document d;
    d.subcommand = "landre";
    d.param("omega_x", o.omega_x);
    d.param("psi", psi);
    d.param("b0y", field.omega0.y);
    d.param("tau_end", t.tau_end);
    d.param("samples", t.samples);
    d.columns = {"quantity", "value"};
    d.scalar("larmor", ld.larmor);
    d.scalar("u_x", ld.u.x);
    d.scalar("u_y", ld.u.y);
    d.scalar("u_z", ld.u.z);
    nlohmann::json sb = nlohmann::json::object();
    for (const auto& [k, a] : ld.sideband_amplitudes) {
        d.scalar("sideband_" + std::to_string(k), a);
        sb[std::to_string(k)] = a;
    }
    d.payload["larmor"] = ld.larmor;
    d.payload["u"] = cli::to_json(ld.u);
    d.payload["sidebands"] = sb;
    finish(d, o);
    return 0;
}

int run_cs(const CommonOpts& o) {
    const DriveConfig cfg = make_cfg(o);
    const StaticField field = make_field(o);
    const DetectionReport rep = cs_detection(cfg, field);

    std::cout << "larmor_1 = " << cli::fmt(rep.larmor_1) << "\n";
    std::cout << "u = " << vec_str(rep.u) << "\n";
    std::cout << "A_x = " << cli::fmt(rep.A_x)
              << ", dc_offset = " << cli::fmt(rep.dc_offset) << "\n";

    cli::Document d;
    d.subcommand = "cs";
    echo_common(d, cfg, field, make_settings(o));
    d.columns = {"quantity", "value"};
    d.scalar("larmor_1", rep.larmor_1);
    d.scalar("u_x", rep.u.x);
    d.scalar("u_y", rep.u.y);
    d.scalar("u_z", rep.u.z);
    d.scalar("A_x", rep.A_x);
    d.scalar("dc_offset", rep.dc_offset);
    nlohmann::json sb = nlohmann::json::object();
    for (const auto& [k, a] : rep.sideband_amplitudes) {
        d.scalar("sideband_" + std::to_string(k), a);
        sb[std::to_string(k)] = a;
    }
    d.payload["larmor_1"] = rep.larmor_1;
    d.payload["u"] = cli::to_json(rep.u);
    d.payload["A_x"] = rep.A_x;
    d.payload["dc_offset"] = rep.dc_offset;
    d.payload["sidebands"] = sb;
    finish(d, o);
    return 0;
}

// scan / accelerate -----------------------------------------------------------

ScanParameter parse_param(const std::string& name) {
    if (name == "omega_x") return ScanParameter::OmegaX;
    if (name == "omega_y") return ScanParameter::OmegaY;
    if (name == "phi") return ScanParameter::Phi;
    if (name == "psi") return ScanParameter::Psi;
    if (name == "b0x") return ScanParameter::Omega0X;
    if (name == "b0y") return ScanParameter::Omega0Y;
    if (name == "b0z") return ScanParameter::Omega0Z;
    throw DomainError("unknown scan parameter '" + name +
                      "' (omega_x, omega_y, phi, psi, b0x, b0y, b0z)");
}

std::string param_name(ScanParameter p) {
    switch (p) {
        case ScanParameter::OmegaX: return "omega_x";
        case ScanParameter::OmegaY: return "omega_y";
        case ScanParameter::Phi: return "phi";
        case ScanParameter::Psi: return "psi";
        case ScanParameter::Omega0X: return "b0x";
        case ScanParameter::Omega0Y: return "b0y";
        case ScanParameter::Omega0Z: return "b0z";
    }
    return "?";
}

ScanAxis parse_axis(const std::string& spec) {
    const std::vector<std::string> parts = cli::split(spec, ':');
    if (parts.size() != 4)
        throw DomainError("axis spec needs 'param:lo:hi:count': '" + spec +
                          "'");
    ScanAxis ax;
    ax.param = parse_param(parts[0]);
    ax.lo = ax.param == ScanParameter::Phi || ax.param == ScanParameter::Psi
                ? cli::parse_angle(parts[1])
                : cli::parse_double(parts[1]);
    ax.hi = ax.param == ScanParameter::Phi || ax.param == ScanParameter::Psi
                ? cli::parse_angle(parts[2])
                : cli::parse_double(parts[2]);
    ax.count = static_cast<int>(cli::parse_double(parts[3]));
    return ax;
}

std::pair<ScanAxis, ScanAxis> parse_grid(const std::vector<std::string>& axes) {
    if (axes.size() != 2)
        throw DomainError("--grid needs exactly two axis specs separated by "
                          "a comma");
    return {parse_axis(axes[0]), parse_axis(axes[1])};
}

std::string join(const std::vector<std::string>& parts, char sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

ScanQuantity parse_quantity(const std::string& q) {
    if (q == "h_x") return ScanQuantity::HX;
    if (q == "h_y") return ScanQuantity::HY;
    if (q == "h_z") return ScanQuantity::HZ;
    if (q == "larmor") return ScanQuantity::Larmor;
    if (q == "acceleration") return ScanQuantity::Acceleration;
    if (q == "pv_kind") return ScanQuantity::PrincipalValuesKind;
    throw DomainError("unknown quantity '" + q +
                      "' (h_x, h_y, h_z, larmor, acceleration, pv_kind)");
}

struct ScanOpts {
    std::string quantity = "larmor";
    std::vector<std::string> grid;
};

int run_scan(const CommonOpts& o, const ScanOpts& sc) {
    ScanGrid g;
    g.base_cfg = make_cfg(o);
    g.base_field = make_field(o);
    g.settings = make_settings(o);
    std::tie(g.axis1, g.axis2) = parse_grid(sc.grid);
    const ScanQuantity q = parse_quantity(sc.quantity);

    const ScanResult r = scan2d(g, q);

    std::size_t failures = 0, folds = 0;
    double vmin = std::numeric_limits<double>::infinity();
    double vmax = -vmin;
    for (std::size_t k = 0; k < r.values.size(); ++k) {
        if (r.failed[k]) ++failures;
        if (r.fold_flag[k]) ++folds;
        if (!r.failed[k] && std::isfinite(r.values[k])) {
            vmin = std::min(vmin, r.values[k]);
            vmax = std::max(vmax, r.values[k]);
        }
    }
    std::cout << "scanned " << r.axis1_values.size() << " x "
              << r.axis2_values.size() << " nodes: " << failures
              << " failed, " << folds << " fold-flagged\n";
    if (std::isfinite(vmin))
        std::cout << sc.quantity << " in [" << cli::fmt(vmin) << ", "
                  << cli::fmt(vmax) << "]\n";

    cli::Document d;
    d.subcommand = "scan";
    echo_common(d, g.base_cfg, g.base_field, g.settings);
    d.param("quantity", sc.quantity);
    d.param("grid", join(sc.grid, ','));
    const std::string n1 = param_name(g.axis1.param);
    const std::string n2 = param_name(g.axis2.param);
    d.columns = {n1, n2, sc.quantity, "failed", "fold_flag"};
    for (std::size_t i = 0; i < r.axis1_values.size(); ++i) {
        for (std::size_t j = 0; j < r.axis2_values.size(); ++j) {
            const std::size_t k =
                r.index(static_cast<int>(i), static_cast<int>(j));
            d.row({cli::fmt(r.axis1_values[i]), cli::fmt(r.axis2_values[j]),
                   cli::fmt(r.values[k]), std::to_string(r.failed[k]),
                   std::to_string(r.fold_flag[k])});
        }
    }

    d.payload["quantity"] = sc.quantity;
    d.payload["axis1"] = {{"param", n1}, {"values", r.axis1_values}};
    d.payload["axis2"] = {{"param", n2}, {"values", r.axis2_values}};
    d.payload["values"] = r.values;
    d.payload["failed"] = r.failed;
    d.payload["fold_flag"] = r.fold_flag;
    d.payload["messages"] = r.messages;
    finish(d, o);
    return 0;
}

struct AccelOpts {
    std::vector<std::string> grid;
    double tol = 1e-4;
};

int run_accelerate(const CommonOpts& o, const AccelOpts& ac) {
    ScanGrid g;
    g.base_cfg = make_cfg(o);
    g.base_field = make_field(o);
    g.settings = make_settings(o);
    std::tie(g.axis1, g.axis2) = parse_grid(ac.grid);

    const ScanResult r = scan2d(g, ScanQuantity::Acceleration);
    const RefineResult best = refine_max(r, ac.tol);

    std::size_t failures = 0;
    for (std::size_t k = 0; k < r.values.size(); ++k)
        if (r.failed[k]) ++failures;

    const std::string n1 = param_name(g.axis1.param);
    const std::string n2 = param_name(g.axis2.param);
    std::cout << "max acceleration = " << cli::fmt(best.value) << " at " << n1
              << " = " << cli::fmt(best.axis1) << ", " << n2 << " = "
              << cli::fmt(best.axis2)
              << (best.on_boundary ? " (grid edge, unrefined)\n" : "\n");

    cli::Document d;
    d.subcommand = "accelerate";
    echo_common(d, g.base_cfg, g.base_field, g.settings);
    d.param("grid", join(ac.grid, ','));
    d.param("tol", ac.tol);
    d.columns = {"quantity", "value"};
    d.scalar(n1, best.axis1);
    d.scalar(n2, best.axis2);
    d.scalar("acceleration", best.value);
    d.row({"on_boundary", best.on_boundary ? "1" : "0"});
    d.row({"failed_nodes", std::to_string(failures)});

    d.payload["axis1"] = {{"param", n1}, {"value", best.axis1}};
    d.payload["axis2"] = {{"param", n2}, {"value", best.axis2}};
    d.payload["acceleration"] = best.value;
    d.payload["on_boundary"] = best.on_boundary;
    d.payload["failed_nodes"] = failures;
    finish(d, o);
    return 0;
}

// compensate -------------------------------------------------------------------

int parse_component(const std::string& s) {
    const std::string t = cli::trimmed(s);
    if (t == "x" || t == "0") return 0;
    if (t == "y" || t == "1") return 1;
    if (t == "z" || t == "2") return 2;
    throw DomainError("unknown field component '" + s + "' (x, y or z)");
}

std::vector<int> parse_components(const std::vector<std::string>& parts) {
    std::vector<int> out;
    out.reserve(parts.size());
    for (const std::string& part : parts) out.push_back(parse_component(part));
    return out;
}

struct CompOpts {
    std::vector<std::string> adjust;  // "order:phase"
    std::vector<std::string> target;
    std::vector<std::string> sens;
    std::vector<double> seed;
    bool magic = false;
    double magic_lo = 0.0;
    double magic_hi = 0.0;
    int magic_points = 29;
    double magic_ref = std::numeric_limits<double>::quiet_NaN();
    double magic_step = 1e-3;
};

int run_compensate(const CommonOpts& o, const CompOpts& co) {
    CompensationProblem p;
    p.base = make_cfg(o);
    p.static_field = make_field(o);
    p.settings = make_settings(o);
    for (const std::string& a : co.adjust) {
        const std::vector<std::string> parts = cli::split(a, ':');
        if (parts.size() != 2)
            throw DomainError("--adjust needs 'order:phase': '" + a + "'");
        HarmonicTerm t;
        t.order = static_cast<int>(cli::parse_double(parts[0]));
        t.phase = cli::parse_angle(parts[1]);
        p.adjustable.push_back(t);
    }
    p.target_components = parse_components(co.target);
    p.sensitivity_components = parse_components(co.sens);
    if (!co.seed.empty()) p.seed = co.seed;
    if (co.magic) {
        MagicSearch m;
        m.lo = co.magic_lo;
        m.hi = co.magic_hi;
        m.coarse_points = co.magic_points;
        m.reference = co.magic_ref;
        m.step = co.magic_step;
        p.magic = m;
    }

    const CompensationSolution s = co.magic ? magic_point(p) : compensate(p);

    for (std::size_t i = 0; i < s.amplitudes.size(); ++i)
        std::cout << "amplitude[" << p.adjustable[i].order
                  << "] = " << cli::fmt(s.amplitudes[i]) << "\n";
    std::cout << "residual h = " << vec_str(s.residual) << "\n";
    for (std::size_t i = 0; i < s.sensitivity.size(); ++i)
        std::cout << "sensitivity[" << i << "] = " << cli::fmt(s.sensitivity[i])
                  << "\n";
    std::cout << "converged = " << (s.converged ? "true" : "false")
              << ", iterations = " << s.iterations << "\n";
    if (co.magic)
        std::cout << "located omega_x = " << cli::fmt(s.located_parameter)
                  << ", magic = " << (s.magic ? "true" : "false") << "\n";

    cli::Document d;
    d.subcommand = "compensate";
    echo_common(d, p.base, p.static_field, p.settings);
    for (const HarmonicTerm& t : p.adjustable)
        d.param("adjust", std::to_string(t.order) + ":" + cli::fmt(t.phase));
    d.param("target", join(co.target, ','));
    d.param("sens", join(co.sens, ','));
    if (co.magic) {
        d.param("magic_lo", co.magic_lo);
        d.param("magic_hi", co.magic_hi);
        d.param("magic_points", co.magic_points);
        d.param("magic_step", co.magic_step);
    }
    d.columns = {"quantity", "value"};
    for (std::size_t i = 0; i < s.amplitudes.size(); ++i)
        d.scalar("amplitude_" + std::to_string(p.adjustable[i].order),
                 s.amplitudes[i]);
    d.scalar("residual_x", s.residual.x);
    d.scalar("residual_y", s.residual.y);
    d.scalar("residual_z", s.residual.z);
    for (std::size_t i = 0; i < s.sensitivity.size(); ++i)
        d.scalar("sensitivity_" + std::to_string(i), s.sensitivity[i]);
    d.row({"converged", s.converged ? "1" : "0"});
    d.row({"iterations", std::to_string(s.iterations)});
    d.row({"magic", s.magic ? "1" : "0"});
    d.scalar("located_parameter", s.located_parameter);

    d.payload["amplitudes"] = s.amplitudes;
    d.payload["residual"] = cli::to_json(s.residual);
    d.payload["sensitivity"] = s.sensitivity;
    d.payload["converged"] = s.converged;
    d.payload["iterations"] = s.iterations;
    d.payload["magic"] = s.magic;
    d.payload["located_parameter"] =
        std::isfinite(s.located_parameter) ? nlohmann::json(s.located_parameter)
                                           : nlohmann::json();
    d.payload["residual_history"] = s.residual_history;
    finish(d, o);

    if (!s.converged) {
        std::cerr << "compensation did not converge (residual "
                  << cli::fmt(s.residual_history.empty()
                                  ? std::numeric_limits<double>::quiet_NaN()
                                  : s.residual_history.back())
                  << ")\n";
        return 2;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Spin-1/2 under bichromatic harmonic dressing: Floquet effective "
        "fields, perturbative cross-checks, trajectories, detection models, "
        "parameter scans, and static-field compensation"};
    app.set_version_flag("--version",
                         std::string(cli::kToolName) + " " + cli::kToolVersion);
    app.set_config("--config", "",
                   "read defaults from a file: 'key = value' lines mirroring "
                   "the flags, grouped under a [subcommand] section; flags "
                   "given on the command line override the file");
    app.require_subcommand(1);

    CommonOpts floq_o, pert_o, tens_o, traj_o, land_o, cs_o, scan_o, acc_o,
        comp_o;
    TensorOpts tens_t;
    TrajOpts traj_t;
    SampleOpts land_t;
    ScanOpts scan_s;
    AccelOpts acc_a;
    CompOpts comp_c;

    CLI::App* floq = app.add_subcommand(
        "floquet", "effective field, eigenphases and dressed axis");
    add_common(floq, floq_o);

    CLI::App* pert = app.add_subcommand(
        "perturb", "first/second-order fields, tensors and Q coefficients");
    add_common(pert, pert_o);

    CLI::App* tens = app.add_subcommand(
        "tensors", "numeric g and f response tensors with principal values");
    add_common(tens, tens_o);
    tens->add_option("--delta-g", tens_t.delta_g,
                     "finite-difference step for the g tensor");
    tens->add_option("--delta-f", tens_t.delta_f,
                     "finite-difference step for the f tensor");

    CLI::App* traj = app.add_subcommand(
        "traj", "exact and/or first-order analytic spin trajectories");
    add_common(traj, traj_o);
    traj->add_option("--s0", traj_t.s0, "initial Bloch vector 'x,y,z'")
        ->delimiter(',')
        ->expected(3);
    traj->add_option("--tau-end", traj_t.tau_end, "final time (drive phase)");
    traj->add_option("--samples", traj_t.samples, "number of samples");
    traj->add_option("--method", traj_t.method, "trajectory method")
        ->check(CLI::IsMember({"exact", "analytic", "both"}));

    CLI::App* land = app.add_subcommand(
        "landre", "single-dressing detection report (transverse field)");
    add_common(land, land_o);
    land->add_option("--tau-end", land_t.tau_end, "projection window length");
    land->add_option("--samples", land_t.samples, "projection sample count");

    CLI::App* cs = app.add_subcommand(
        "cs", "dual-dressing carrier report (in-plane static field)");
    add_common(cs, cs_o);

    CLI::App* scan = app.add_subcommand(
        "scan", "2-D parameter scan of a dressed-field quantity");
    add_common(scan, scan_o);
    scan->add_option("--quantity", scan_s.quantity,
                     "h_x, h_y, h_z, larmor, acceleration or pv_kind");
    scan->add_option("--grid", scan_s.grid,
                     "two axis specs 'param:lo:hi:count,param:lo:hi:count'")
        ->delimiter(',')
        ->expected(2)
        ->required();

    CLI::App* acc = app.add_subcommand(
        "accelerate", "acceleration-ratio scan with simplex refinement");
    add_common(acc, acc_o);
    acc->add_option("--grid", acc_a.grid,
                    "two axis specs 'param:lo:hi:count,param:lo:hi:count'")
        ->delimiter(',')
        ->expected(2)
        ->required();
    acc->add_option("--tol", acc_a.tol, "refinement tolerance");

    CLI::App* comp = app.add_subcommand(
        "compensate", "null chosen h components with extra y harmonics");
    add_common(comp, comp_o);
    comp->add_option("--adjust", comp_c.adjust,
                     "adjustable harmonic 'order:phase' (repeatable)");
    comp->add_option("--target", comp_c.target,
                     "components to null, e.g. 'y,z'")
        ->delimiter(',');
    comp->add_option("--sens", comp_c.sens,
                     "components whose drive-amplitude derivative is tracked")
        ->delimiter(',');
    comp->add_option("--seed", comp_c.seed,
                     "explicit seed amplitudes 'a1,a2,...'")
        ->delimiter(',');
    comp->add_flag("--magic", comp_c.magic,
                   "search for the sensitivity-minimizing drive amplitude");
    comp->add_option("--magic-lo", comp_c.magic_lo, "search bracket lower end");
    comp->add_option("--magic-hi", comp_c.magic_hi, "search bracket upper end");
    comp->add_option("--magic-points", comp_c.magic_points,
                     "coarse scan points");
    comp->add_option("--magic-ref", comp_c.magic_ref,
                     "reference drive amplitude for the suppression ratio");
    comp->add_option("--magic-step", comp_c.magic_step,
                     "derivative finite-difference step");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (floq->parsed()) return run_floquet(floq_o);
        if (pert->parsed()) return run_perturb(pert_o);
        if (tens->parsed()) return run_tensors(tens_o, tens_t);
        if (traj->parsed()) return run_traj(traj_o, traj_t);
        if (land->parsed()) return run_landre(land_o, land_t);
        if (cs->parsed()) return run_cs(cs_o);
        if (scan->parsed()) return run_scan(scan_o, scan_s);
        if (acc->parsed()) return run_accelerate(acc_o, acc_a);
        if (comp->parsed()) return run_compensate(comp_o, comp_c);
    } catch (const DomainError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
