#include "dualdress/perturbation.hpp"

#include <cmath>

#include "dualdress/spinmath.hpp"

namespace dualdress {

namespace {

constexpr int kQuadSamples = 4096;

// Pairwise (+n, -n) accumulation preserves the alternating cancellation of
// the 1/n series.
template <typename F>
complexd sum_pairs(int N, F term) {
    complexd s(0.0);
    for (int n = 1; n <= N; ++n) s += term(n) + term(-n);
    return s;
}

}  // namespace

double FourierCoeffs::parseval_defect() const {
    double s = 0.0;
    for (const complexd& a : alpha_) s += std::norm(a);
    return std::abs(1.0 - s);
}

int truncation_order(const DriveConfig& cfg) {
    const double ox = cfg.omega_x_amp;
    const int cx = static_cast<int>(std::ceil(ox));
    int n = std::max(cfg.harmonic_p + 5,
                     cx + static_cast<int>(std::ceil(10.0 * std::cbrt(cx + 1.0))) + 10);
    for (const auto& t : cfg.extra_y) n = std::max(n, t.order + 5);
    while (std::abs(bessel_j(n, ox)) >= 1e-16) ++n;
    return n;
}

FourierCoeffs fourier_coeffs(const DriveConfig& cfg, int N) {
    cfg.validate();
    const int n_min = truncation_order(cfg);
    if (N < 0) N = n_min;
    if (N < n_min)
        throw DomainError("fourier_coeffs: N below the truncation rule minimum");

    FourierCoeffs fc;
    fc.truncation_N = N;
    fc.alpha_.assign(2 * N + 1, complexd(0.0));
    fc.beta_.assign(2 * N + 1, complexd(0.0));
    fc.w_.assign(2 * N + 1, complexd(0.0));

    if (cfg.waveform == Waveform::CosinePair) {
        fc.source = FourierCoeffs::Source::ClosedFormCosine;
        const int p = cfg.harmonic_p;
        const complexd ep(std::cos(cfg.phase_Phi), std::sin(cfg.phase_Phi));
        for (int n = -N; n <= N; ++n) {
            fc.alpha_[n + N] = bessel_j(n, cfg.omega_x_amp);
            fc.beta_[n + N] = 0.5 * (ep * bessel_j(n - p, cfg.omega_x_amp) +
                                     std::conj(ep) * bessel_j(n + p, cfg.omega_x_amp));
            fc.w_[n + N] = cfg.omega_y_amp * fc.beta_[n + N];
        }
    } else {
        // Uniform-grid quadrature over one period; exact for band-limited
        // periodic integrands sampled well above their bandwidth.
        fc.source = FourierCoeffs::Source::Quadrature;
        const int M = kQuadSamples;
        std::vector<complexd> e(M), se(M), ye(M);
        for (int m = 0; m < M; ++m) {
            const double tau = kTwoPi * m / M;
            const double phi = cfg.phi_x(tau);
            const complexd ei(std::cos(phi), std::sin(phi));
            const double sy =
                std::cos(cfg.harmonic_p * (tau + cfg.psi()) + cfg.phase_Phi);
            e[m] = ei;
            se[m] = sy * ei;
            ye[m] = cfg.y_drive(tau) * ei;
        }
        for (int n = -N; n <= N; ++n) {
            complexd a(0.0), b(0.0), w(0.0);
            for (int m = 0; m < M; ++m) {
                const double ang = -kTwoPi * n * m / static_cast<double>(M);
                const complexd f(std::cos(ang), std::sin(ang));
                a += e[m] * f;
                b += se[m] * f;
                w += ye[m] * f;
            }
            fc.alpha_[n + N] = a / static_cast<double>(M);
            fc.beta_[n + N] = b / static_cast<double>(M);
            fc.w_[n + N] = w / static_cast<double>(M);
        }
    }
    if (fc.parseval_defect() > 1e-8)
        throw TruncationError("fourier_coeffs: Parseval defect above 1e-8");
    return fc;
}

// ---------------------------------------------------------------------------
// SeriesFunctions

namespace {

complexd series_eval(const FourierCoeffs& fc, const std::vector<complexd>& c,
                     double tau) {
    const int N = fc.truncation_N;
    complexd s = c[N];  // n = 0
    for (int n = 1; n <= N; ++n) {
        const complexd e(std::cos(n * tau), std::sin(n * tau));
        s += c[n + N] * e + c[-n + N] * std::conj(e);
    }
    return s;
}

// Primitive of sum c_n e^{i n tau}: c_0 tau + sum_{n!=0} c_n (e^{i n tau}-1)/(i n).
complexd series_prim(const FourierCoeffs& fc, const std::vector<complexd>& c,
                     double tau) {
    const int N = fc.truncation_N;
    complexd s = c[N] * tau;
    for (int n = 1; n <= N; ++n) {
        const complexd e(std::cos(n * tau), std::sin(n * tau));
        const complexd in(0.0, static_cast<double>(n));
        s += c[n + N] * (e - 1.0) / in + c[-n + N] * (std::conj(e) - 1.0) / (-in);
    }
    return s;
}

}  // namespace

complexd SeriesFunctions::e0(double tau) const {
    return series_eval(fc_, fc_.alpha_, tau);
}
complexd SeriesFunctions::e1(double tau) const {
    return series_eval(fc_, fc_.beta_, tau);
}
complexd SeriesFunctions::prim0(double tau) const {
    return series_prim(fc_, fc_.alpha_, tau);
}
complexd SeriesFunctions::prim1(double tau) const {
    return series_prim(fc_, fc_.beta_, tau);
}
complexd SeriesFunctions::prim0_tilde(double tau) const {
    return prim0(tau) - tau * fc_.alpha(0);
}
complexd SeriesFunctions::prim1_tilde(double tau) const {
    return prim1(tau) - tau * fc_.beta(0);
}
complexd SeriesFunctions::primw(double tau) const {
    return series_prim(fc_, fc_.w_, tau);
}
complexd SeriesFunctions::primw_tilde(double tau) const {
    return primw(tau) - tau * fc_.w(0);
}

// ---------------------------------------------------------------------------
// Second-order coefficients

namespace {

struct QSeries {
    double Q_x, Q_xy, Q_xz, Q_yx, Q_zx;  // weighted (absolute amplitude) form
    double q0, qc, qs;
};

// Defining series with the amplitude-weighted W_n in place of Omega_y*beta_n:
//   Q_x^W  = sum (|W_n|^2 - 2 Re(W_0* W_n))/n
//   Q_ij^W = the mixed alpha/W sums
//   q's    = alpha-only sums (amplitude independent).
// getter selects beta_n (unit amplitude) or W_n (amplitude weighted).
QSeries q_series(const FourierCoeffs& fc, bool weighted) {
    const int N = fc.truncation_N;
    const auto y = [&](int n) { return weighted ? fc.w(n) : fc.beta(n); };
    QSeries q;
    const complexd a0 = fc.alpha(0), y0 = y(0);
    q.Q_x = sum_pairs(N, [&](int n) {
                return complexd(
                    (std::norm(y(n)) - 2.0 * (std::conj(y0) * y(n)).real()) / n);
            }).real();
    const complexd mixed = sum_pairs(N, [&](int n) {
        return (y(n) * std::conj(fc.alpha(n)) - y0 * std::conj(fc.alpha(n)) -
                std::conj(a0) * y(n)) /
               static_cast<double>(n);
    });
    q.Q_xy = 2.0 * mixed.real();
    q.Q_xz = -2.0 * mixed.imag();
    const complexd ysum =
        sum_pairs(N, [&](int n) { return y(n) / static_cast<double>(n); });
    q.Q_yx = 2.0 * ysum.real();
    q.Q_zx = -2.0 * ysum.imag();
    const complexd asum =
        sum_pairs(N, [&](int n) { return fc.alpha(n) / static_cast<double>(n); });
    q.qc = -asum.imag();
    q.qs = asum.real();
    q.q0 = sum_pairs(N, [&](int n) {
               return complexd((std::norm(fc.alpha(n)) -
                                2.0 * (fc.alpha(n) * std::conj(a0)).real()) /
                               n);
           }).real();
    return q;
}

}  // namespace

QCoefficients q_coefficients(const DriveConfig& cfg) {
    cfg.validate();
    if (cfg.waveform != Waveform::CosinePair)
        throw DomainError("q_coefficients: closed forms exist for the cosine pair only");

    const FourierCoeffs fc = fourier_coeffs(cfg);
    const int N = fc.truncation_N;
    const int p = cfg.harmonic_p;
    const double ox = cfg.omega_x_amp;
    const auto J = [&](int n) { return bessel_j(n, ox); };

    QCoefficients out{};

    // Defining-series route on the unit-amplitude beta_n.
    const QSeries qs = q_series(fc, /*weighted=*/false);
    out.Q_x_series = qs.Q_x;
    out.Q_xy_series = qs.Q_xy;
    out.Q_xz_series = qs.Q_xz;
    out.Q_yx_series = qs.Q_yx;
    out.Q_zx_series = qs.Q_zx;
    out.q0_series = qs.q0;
    out.qc_series = qs.qc;
    out.qs_series = qs.qs;

    // Closed-form Bessel sums.
    const double cosP = std::cos(cfg.phase_Phi);
    const double sinP = std::sin(cfg.phase_Phi);
    const double sgp = (p % 2) ? -1.0 : 1.0;  // (-1)^p
    double A = 0.0, B = 0.0, C = 0.0, D = 0.0, X1 = 0.0, X2 = 0.0;
    for (int n = 1; n <= N; ++n) {
        A += (J(n - p) * J(n) - J(n) * J(-p) - J(0) * J(n - p)) / n +
             (J(-n - p) * J(-n) - J(-n) * J(-p) - J(0) * J(-n - p)) / (-n);
        B += (J(n + p) * J(n) - J(n) * J(p) - J(0) * J(n + p)) / n +
             (J(-n + p) * J(-n) - J(-n) * J(p) - J(0) * J(-n + p)) / (-n);
        C += (J(p + n) - J(p - n) + J(n - p) - J(-n - p)) / n;
        D += (J(-p + n) - J(-p - n) - J(n + p) + J(p - n)) / n;
        X1 += (J(n + p) - J(p - n)) / n;
        X2 += (J(n - p) - J(-p - n)) / n;
    }
    out.A = A;
    out.B = B;
    out.C = C;
    out.D = D;
    const double cos2P = std::cos(2.0 * cfg.phase_Phi);
    out.Q_x = -0.5 * J(p) * (1.0 + sgp * cos2P) * X1 -
              0.5 * J(p) * (sgp + cos2P) * X2;
    out.Q_xy = (A + B) * cosP;
    out.Q_xz = -(A - B) * sinP;
    out.Q_yx = C * cosP;
    out.Q_zx = -D * sinP;

    double S = 0.0;  // sum J_{2k+1}/(2k+1)
    for (int k = 0; 2 * k + 1 <= N; ++k) S += J(2 * k + 1) / (2 * k + 1);
    out.qs = 2.0 * S;
    out.qc = 0.0;
    out.q0 = -2.0 * J(0) * out.qs;

    const double pairs[8][2] = {
        {out.Q_x, out.Q_x_series},   {out.Q_xy, out.Q_xy_series},
        {out.Q_xz, out.Q_xz_series}, {out.Q_yx, out.Q_yx_series},
        {out.Q_zx, out.Q_zx_series}, {out.q0, out.q0_series},
        {out.qc, out.qc_series},     {out.qs, out.qs_series}};
    for (const auto& pr : pairs)
        if (std::abs(pr[0] - pr[1]) > 1e-11)
            throw TruncationError(
                "q_coefficients: closed-form and defining-series routes disagree");
    return out;
}

// ---------------------------------------------------------------------------
// Magnus orders

FirstOrder h_first_order(const DriveConfig& cfg, const StaticField& field) {
    cfg.validate();
    field.validate();
    const FourierCoeffs fc = fourier_coeffs(cfg);
    FirstOrder r;
    const complexd a0 = fc.alpha(0), w0 = fc.w(0);
    r.hs1 = {0.0, w0.real(), -w0.imag()};
    r.g1 = Mat3::identity();
    r.g1(1, 1) = a0.real();
    r.g1(1, 2) = a0.imag();
    r.g1(2, 1) = -a0.imag();
    r.g1(2, 2) = a0.real();
    r.h1 = r.hs1 + r.g1 * field.omega0;
    return r;
}

SecondOrder h_second_order(const DriveConfig& cfg, const StaticField& field) {
    cfg.validate();
    field.validate();
    const FourierCoeffs fc = fourier_coeffs(cfg);
    const QSeries q = q_series(fc, /*weighted=*/true);

    SecondOrder r;
    r.hs2 = {0.5 * q.Q_x, 0.0, 0.0};
    r.g2 = Mat3{};
    r.g2(0, 1) = 0.5 * q.Q_xy;
    r.g2(0, 2) = 0.5 * q.Q_xz;
    r.g2(1, 0) = 0.5 * q.Q_yx;
    r.g2(2, 0) = 0.5 * q.Q_zx;
    r.f2 = Tensor3{};
    r.f2(0, 1, 1) = q.q0;
    r.f2(0, 2, 2) = q.q0;
    r.f2(1, 0, 1) = r.f2(1, 1, 0) = q.qs;
    r.f2(1, 0, 2) = r.f2(1, 2, 0) = -q.qc;
    r.f2(2, 0, 1) = r.f2(2, 1, 0) = q.qc;
    r.f2(2, 0, 2) = r.f2(2, 2, 0) = q.qs;
    r.h2 = r.hs2 + r.g2 * field.omega0 + r.f2.half_contract(field.omega0);
    return r;
}

Vec3 h_magnus(const DriveConfig& cfg, const StaticField& field) {
    return h_first_order(cfg, field).h1 + h_second_order(cfg, field).h2;
}

ShiftedFirstOrder shifted_first_order(const DriveConfig& cfg) {
    cfg.validate();
    if (cfg.waveform != Waveform::ShiftedCosinePair)
        throw DomainError("shifted_first_order: requires ShiftedCosinePair");
    const FourierCoeffs fc = fourier_coeffs(cfg);
    ShiftedFirstOrder r;
    r.beta0 = fc.beta(0);
    r.psi_tilde = cfg.omega_x_amp * std::sin(cfg.phase_psi);
    const complexd a0 = fc.alpha(0);
    r.g1 = Mat3::identity();
    r.g1(1, 1) = a0.real();
    r.g1(1, 2) = a0.imag();
    r.g1(2, 1) = -a0.imag();
    r.g1(2, 2) = a0.real();
    return r;
}

// ---------------------------------------------------------------------------
// Frame field, primitive, kick

FmrField fmr_field(const DriveConfig& cfg, const StaticField& field, double tau,
                   const SeriesFunctions& sf) {
    if (!std::isfinite(tau)) throw DomainError("fmr_field: non-finite tau");
    const Vec3 w0 = field.omega0;

    // Instantaneous frame field, exact trig: the x rotation by phi_x leaves
    // x alone and rotates (y, z) through the complex phase exp(i phi_x).
    const double phi = cfg.phi_x(tau);
    const complexd e(std::cos(phi), std::sin(phi));
    const complexd P = cfg.y_drive(tau) * e;
    FmrField r;
    r.h = {w0.x, P.real() + e.real() * w0.y + e.imag() * w0.z,
           -P.imag() - e.imag() * w0.y + e.real() * w0.z};

    // Primitive via the harmonic series.
    const complexd E = sf.prim0(tau);   // C0 + i S0
    const complexd PW = sf.primw(tau);  // primitive of the weighted product
    r.H = {w0.x * tau, PW.real() + E.real() * w0.y + E.imag() * w0.z,
           -PW.imag() - E.imag() * w0.y + E.real() * w0.z};
    return r;
}

FmrField fmr_field(const DriveConfig& cfg, const StaticField& field, double tau) {
    cfg.validate();
    field.validate();
    return fmr_field(cfg, field, tau, SeriesFunctions{fourier_coeffs(cfg)});
}

Vec3 kick_vector(const DriveConfig& /*cfg*/, const StaticField& field,
                 double tau, const SeriesFunctions& sf) {
    if (!std::isfinite(tau)) throw DomainError("kick_vector: non-finite tau");
    const complexd Et = sf.prim0_tilde(tau);   // Ct0 + i St0
    const complexd PWt = sf.primw_tilde(tau);  // weighted Ct1 + i St1
    const Vec3 w0 = field.omega0;
    return {0.0, PWt.real() + Et.real() * w0.y + Et.imag() * w0.z,
            -PWt.imag() - Et.imag() * w0.y + Et.real() * w0.z};
}

Vec3 kick_vector(const DriveConfig& cfg, const StaticField& field, double tau) {
    cfg.validate();
    field.validate();
    return kick_vector(cfg, field, tau, SeriesFunctions{fourier_coeffs(cfg)});
}

Mat2 kick_first_order(const DriveConfig& cfg, const StaticField& field,
                      double tau) {
    return dot_sigma(kick_vector(cfg, field, tau) * 0.5);
}

}  // namespace dualdress
