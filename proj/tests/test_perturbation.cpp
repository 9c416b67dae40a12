// Closed-form Magnus series: Fourier coefficient tables, series evaluators,
// first/second-order fields, Q coefficients, frame fields, kick generator.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>

#include "doctest.h"
#include "dualdress/floquet.hpp"
#include "dualdress/perturbation.hpp"
#include "dualdress/spinmath.hpp"
#include "oracles.hpp"

using namespace dualdress;

namespace {

DriveConfig pair_cfg(double ox, double oy, int p, double Phi) {
    DriveConfig c;
    c.omega_x_amp = ox;
    c.omega_y_amp = oy;
    c.harmonic_p = p;
    c.phase_Phi = Phi;
    return c;
}

double cdiff(complexd a, std::complex<long double> b) {
    return std::abs(a - complexd(static_cast<double>(b.real()),
                                 static_cast<double>(b.imag())));
}

constexpr double kJ1_1p2 = 4.9828905756721542e-01;
constexpr double kJ0_1p2 = 6.7113274426436265e-01;

}  // namespace

TEST_CASE("closed-form Fourier coefficients match direct quadrature") {
    for (double ox : {0.5, 1.833, 3.5, 5.11}) {
        for (int p : {1, 2, 3}) {
            for (double Phi : {0.0, kPi / 2.0, 1.2}) {
                const DriveConfig c = pair_cfg(ox, 0.8, p, Phi);
                const FourierCoeffs fc = fourier_coeffs(c);
                CHECK(fc.source == FourierCoeffs::Source::ClosedFormCosine);
                CAPTURE(ox);
                CAPTURE(p);
                CAPTURE(Phi);
                for (int n = -8; n <= 8; ++n) {
                    CHECK(cdiff(fc.alpha(n), oracle::alpha_coeff(c, n)) < 1e-12);
                    CHECK(cdiff(fc.beta(n), oracle::beta_coeff(c, n)) < 1e-12);
                    CHECK(cdiff(fc.w(n), oracle::w_coeff(c, n)) < 1e-12);
                    // For the plain pair the weighted coefficient is just
                    // Omega_y * beta_n.
                    CHECK(std::abs(fc.w(n) - c.omega_y_amp * fc.beta(n)) < 1e-14);
                }
            }
        }
    }
}

TEST_CASE("degenerate drives have trivial spectra") {
    // No x drive: exp(i phi_x) = 1.
    const DriveConfig c = pair_cfg(0.0, 1.0, 1, 0.0);
    const FourierCoeffs fc = fourier_coeffs(c);
    CHECK(std::abs(fc.alpha(0) - complexd(1.0)) < 1e-15);
    for (int n = 1; n <= 6; ++n) {
        CHECK(std::abs(fc.alpha(n)) < 1e-15);
        CHECK(std::abs(fc.alpha(-n)) < 1e-15);
    }
    // cos(tau) spectrum: beta_{+1} = beta_{-1} = 1/2.
    CHECK(std::abs(fc.beta(1) - complexd(0.5)) < 1e-15);
    CHECK(std::abs(fc.beta(-1) - complexd(0.5)) < 1e-15);
    CHECK(std::abs(fc.beta(0)) < 1e-15);
    CHECK(std::abs(fc.beta(2)) < 1e-15);
}

TEST_CASE("the quadrature path reproduces the closed forms") {
    // Same physical drive, forced through the generic integration path by
    // using a zero shift.
    const DriveConfig closed = pair_cfg(2.3, 0.7, 2, kPi / 6.0);
    DriveConfig quad = closed;
    quad.waveform = Waveform::ShiftedCosinePair;
    quad.phase_psi = 0.0;

    const FourierCoeffs a = fourier_coeffs(closed);
    const FourierCoeffs b = fourier_coeffs(quad);
    CHECK(a.source == FourierCoeffs::Source::ClosedFormCosine);
    CHECK(b.source == FourierCoeffs::Source::Quadrature);
    for (int n = -30; n <= 30; ++n) {
        CHECK(std::abs(a.alpha(n) - b.alpha(n)) < 1e-11);
        CHECK(std::abs(a.beta(n) - b.beta(n)) < 1e-11);
        CHECK(std::abs(a.w(n) - b.w(n)) < 1e-11);
    }
}

TEST_CASE("quadrature coefficients handle shifted and multi-harmonic drives") {
    DriveConfig sh = pair_cfg(1.2, 0.5, 2, 0.3);
    sh.waveform = Waveform::ShiftedCosinePair;
    sh.phase_psi = 0.8;
    const FourierCoeffs fs = fourier_coeffs(sh);
    for (int n = -6; n <= 6; ++n) {
        CHECK(cdiff(fs.alpha(n), oracle::alpha_coeff(sh, n)) < 1e-10);
        CHECK(cdiff(fs.w(n), oracle::w_coeff(sh, n)) < 1e-10);
    }
    // alpha_0 picks up exactly a unit-modulus phase from the shift.
    CHECK(std::abs(std::abs(fs.alpha(0)) - kJ0_1p2) < 1e-10);

    DriveConfig hs = pair_cfg(1.0, 0.4, 1, 0.0);
    hs.waveform = Waveform::HarmonicSum;
    hs.phase_psi = 0.2;
    hs.extra_y = {{0.3, 5, kPi / 2.0}, {0.1, 2, 0.4}};
    const FourierCoeffs fh = fourier_coeffs(hs);
    for (int n = -8; n <= 8; ++n) {
        CHECK(cdiff(fh.alpha(n), oracle::alpha_coeff(hs, n)) < 1e-10);
        CHECK(cdiff(fh.w(n), oracle::w_coeff(hs, n)) < 1e-10);
    }
}

TEST_CASE("the coefficient table satisfies Parseval's identity") {
    for (double ox : {0.0, 1.0, 3.5, 8.0}) {
        const DriveConfig c = pair_cfg(ox, 0.5, 1, kPi / 2.0);
        CHECK(std::abs(fourier_coeffs(c).parseval_defect()) < 1e-10);
    }
    DriveConfig sh = pair_cfg(2.5, 0.5, 2, 0.7);
    sh.waveform = Waveform::ShiftedCosinePair;
    sh.phase_psi = -0.6;
    CHECK(std::abs(fourier_coeffs(sh).parseval_defect()) < 1e-10);
}

TEST_CASE("truncation orders below the rule minimum are rejected") {
    const DriveConfig c = pair_cfg(3.5, 0.5, 1, 0.0);
    CHECK_THROWS_AS(fourier_coeffs(c, 2), DomainError);
    // An explicit N at or above the rule is accepted and complete.
    const FourierCoeffs fc = fourier_coeffs(c, truncation_order(c) + 4);
    CHECK(std::abs(fc.parseval_defect()) < 1e-10);
}

TEST_CASE("automatic truncation covers the drive bandwidth") {
    const DriveConfig narrow = pair_cfg(0.5, 0.5, 3, 0.0);
    const int n1 = truncation_order(narrow);
    CHECK(n1 >= narrow.harmonic_p + 5);
    CHECK(std::abs(bessel_j(n1, narrow.omega_x_amp)) < 1e-16);

    const DriveConfig wide = pair_cfg(8.0, 0.5, 1, 0.0);
    const int n2 = truncation_order(wide);
    CHECK(n2 >= 8 + 10);
    CHECK(std::abs(bessel_j(n2, wide.omega_x_amp)) < 1e-16);

    DriveConfig hs = pair_cfg(1.0, 0.4, 1, 0.0);
    hs.waveform = Waveform::HarmonicSum;
    hs.extra_y = {{0.2, 9, 0.0}};
    CHECK(truncation_order(hs) > 9);
}

TEST_CASE("series evaluators reproduce the exact frame waveforms") {
    const DriveConfig c = pair_cfg(1.8, 0.7, 2, 0.9);
    const SeriesFunctions sf{fourier_coeffs(c)};
    const FourierCoeffs& fc = sf.coeffs();

    for (int k = 0; k <= 16; ++k) {
        const double tau = kTwoPi * k / 16.0;
        const complexd e0 = sf.e0(tau);
        const complexd want0 = std::exp(complexd(0.0, c.phi_x(tau)));
        CHECK(std::abs(e0 - want0) < 1e-10);
        CHECK(std::abs(std::abs(e0) - 1.0) < 1e-10);

        const complexd e1 = sf.e1(tau);
        const complexd want1 = want0 * std::cos(c.harmonic_p * tau + c.phase_Phi);
        CHECK(std::abs(e1 - want1) < 1e-10);

        // Primitives differentiate back to the waveforms.
        const double d = 1e-5;
        const complexd dp0 = (sf.prim0(tau + d) - sf.prim0(tau - d)) / (2.0 * d);
        CHECK(std::abs(dp0 - e0) < 1e-6);
        const complexd dpw = (sf.primw(tau + d) - sf.primw(tau - d)) / (2.0 * d);
        CHECK(std::abs(dpw - c.omega_y_amp * e1) < 1e-6);
    }

    CHECK(std::abs(sf.prim0(0.0)) < 1e-14);
    CHECK(std::abs(sf.prim1(0.0)) < 1e-14);
    CHECK(std::abs(sf.prim0(kTwoPi) - kTwoPi * fc.alpha(0)) < 1e-10);
    CHECK(std::abs(sf.prim1(kTwoPi) - kTwoPi * fc.beta(0)) < 1e-10);
    // Mean-removed primitives vanish at both stroboscopic endpoints.
    CHECK(std::abs(sf.prim0_tilde(0.0)) < 1e-14);
    CHECK(std::abs(sf.prim0_tilde(kTwoPi)) < 1e-10);
    CHECK(std::abs(sf.prim1_tilde(kTwoPi)) < 1e-10);
    CHECK(std::abs(sf.primw_tilde(kTwoPi)) < 1e-10);
}

TEST_CASE("the phase waveform series holds at large amplitude") {
    const DriveConfig c = pair_cfg(8.0, 0.0, 1, 0.0);
    const SeriesFunctions sf{fourier_coeffs(c)};
    for (int k = 0; k < 64; ++k) {
        const double tau = kTwoPi * k / 64.0;
        const complexd want = std::exp(complexd(0.0, 8.0 * std::sin(tau)));
        CHECK(std::abs(sf.e0(tau) - want) < 1e-10);
    }
}

TEST_CASE("first-order fields assemble from the zeroth coefficients") {
    // Odd harmonic in quadrature: synthetic field along z.
    const DriveConfig c1 = pair_cfg(1.2, 0.6, 1, kPi / 2.0);
    const FirstOrder f1 = h_first_order(c1, {{0.02, -0.01, 0.03}});
    CHECK(std::abs(f1.hs1[0]) < 1e-14);
    CHECK(std::abs(f1.hs1[1]) < 1e-14);
    CHECK(f1.hs1[2] == doctest::Approx(0.6 * kJ1_1p2).epsilon(1e-12));

    // Even harmonic: synthetic field along y with the cos(Phi) factor.
    const DriveConfig c2 = pair_cfg(1.5, 0.4, 2, kPi / 6.0);
    const FirstOrder f2 = h_first_order(c2, {});
    const double j2 = bessel_j(2, 1.5);
    CHECK(f2.hs1[1] == doctest::Approx(0.4 * j2 * std::cos(kPi / 6.0)).epsilon(1e-12));
    CHECK(std::abs(f2.hs1[2]) < 1e-14);

    // g1 is the J0 contraction for the plain pair and ties h1 together.
    const double j0 = bessel_j(0, 1.2);
    CHECK(f1.g1(0, 0) == 1.0);
    CHECK(f1.g1(1, 1) == doctest::Approx(j0).epsilon(1e-12));
    CHECK(f1.g1(2, 2) == doctest::Approx(j0).epsilon(1e-12));
    CHECK(f1.g1(1, 2) == 0.0);
    CHECK(f1.g1(2, 1) == 0.0);
    const Vec3 w0{0.02, -0.01, 0.03};
    for (int i = 0; i < 3; ++i) {
        double gi = 0.0;
        for (int j = 0; j < 3; ++j) gi += f1.g1(i, j) * w0[j];
        CHECK(f1.h1[i] == doctest::Approx(f1.hs1[i] + gi).epsilon(1e-12));
    }

    // No dressing at all: identity response.
    const FirstOrder f0 = h_first_order(pair_cfg(0.0, 0.0, 1, 0.0), {});
    CHECK(f0.g1(0, 0) == 1.0);
    CHECK(f0.g1(1, 1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(f0.g1(2, 2) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("synthetic fields scale linearly and quadratically with the y amplitude") {
    const DriveConfig base = pair_cfg(1.7, 0.3, 1, kPi / 2.0);
    DriveConfig twice = base;
    twice.omega_y_amp = 0.6;

    const Vec3 s1 = h_first_order(base, {}).hs1;
    const Vec3 s1x2 = h_first_order(twice, {}).hs1;
    CHECK(s1x2[2] == doctest::Approx(2.0 * s1[2]).epsilon(1e-12));

    const Vec3 s2 = h_second_order(base, {}).hs2;
    const Vec3 s2x2 = h_second_order(twice, {}).hs2;
    CHECK(s2x2[0] == doctest::Approx(4.0 * s2[0]).epsilon(1e-12));
}

TEST_CASE("second-order pieces vanish without a y drive") {
    const DriveConfig c = pair_cfg(2.1, 0.0, 1, 0.0);
    const SecondOrder s = h_second_order(c, {{0.1, 0.2, 0.3}});
    CHECK(s.hs2.norm() < 1e-14);
    double g2max = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) g2max = std::max(g2max, std::abs(s.g2(i, j)));
    CHECK(g2max < 1e-14);
    // The Hessian part survives and depends only on the x amplitude.
    double fmax = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) fmax = std::max(fmax, std::abs(s.f2(i, j, k)));
    CHECK(fmax > 0.1);
}

TEST_CASE("second-order coefficients agree along both derivation routes") {
    for (double ox : {0.0, 1.0, 2.3, 3.5, 5.0, 6.5, 8.0}) {
        for (int p : {1, 2, 3}) {
            for (double Phi : {0.0, kPi / 6.0, kPi / 2.0}) {
                const DriveConfig c = pair_cfg(ox, 0.5, p, Phi);
                CAPTURE(ox);
                CAPTURE(p);
                CAPTURE(Phi);
                QCoefficients q{};
                CHECK_NOTHROW(q = q_coefficients(c));
                CHECK(std::abs(q.Q_x - q.Q_x_series) < 1e-11);
                CHECK(std::abs(q.Q_xy - q.Q_xy_series) < 1e-11);
                CHECK(std::abs(q.Q_xz - q.Q_xz_series) < 1e-11);
                CHECK(std::abs(q.Q_yx - q.Q_yx_series) < 1e-11);
                CHECK(std::abs(q.Q_zx - q.Q_zx_series) < 1e-11);
                CHECK(std::abs(q.q0 - q.q0_series) < 1e-11);
                CHECK(std::abs(q.qc - q.qc_series) < 1e-11);
                CHECK(std::abs(q.qs - q.qs_series) < 1e-11);
            }
        }
    }
}

TEST_CASE("Q coefficients carry the drive phase through trigonometric factors") {
    const double ox = 1.5;
    const QCoefficients q0 = q_coefficients(pair_cfg(ox, 0.5, 1, 0.0));
    CHECK(q0.Q_xz == 0.0);
    CHECK(q0.Q_zx == 0.0);
    CHECK(q0.Q_xy == doctest::Approx(q0.A + q0.B).epsilon(1e-13));
    CHECK(q0.Q_yx == doctest::Approx(q0.C).epsilon(1e-13));

    const QCoefficients q9 = q_coefficients(pair_cfg(ox, 0.5, 1, kPi / 2.0));
    CHECK(std::abs(q9.Q_xy) < 1e-13);
    CHECK(std::abs(q9.Q_yx) < 1e-13);
    CHECK(q9.Q_xz == doctest::Approx(-(q9.A - q9.B)).epsilon(1e-13));
    CHECK(q9.Q_zx == doctest::Approx(-q9.D).epsilon(1e-13));

    // The scalar q's tie together for the cosine drive.
    const QCoefficients qq = q_coefficients(pair_cfg(2.0, 0.5, 1, 0.0));
    CHECK(std::abs(qq.qc) < 1e-13);
    CHECK(std::abs(qq.q0 + 2.0 * bessel_j(0, 2.0) * qq.qs) < 1e-11);
}

TEST_CASE("perturbative fields track the exact effective field order by order") {
    const double eps = 1e-3;
    const DriveConfig c = pair_cfg(1.833, eps, 1, kPi / 2.0);
    const StaticField f{{0.0, 0.0, eps}};
    const Vec3 h_exact = solve_floquet(c, f).h;

    const Vec3 h1 = h_first_order(c, f).h1;
    const Vec3 d1 = h_exact - h1;
    CHECK(d1.norm() < 5.0 * eps * eps);  // first order accurate to O(eps^2)

    const Vec3 hm = h_magnus(c, f);
    const Vec3 d2 = h_exact - hm;
    CHECK(d2.norm() < 10.0 * eps * eps * eps);  // second order to O(eps^3)

    // And the two-order sum is literally h1 + h2.
    const Vec3 h2 = h_second_order(c, f).h2;
    CHECK(std::abs(hm[0] - (h1[0] + h2[0])) < 1e-15);
    CHECK(std::abs(hm[1] - (h1[1] + h2[1])) < 1e-15);
    CHECK(std::abs(hm[2] - (h1[2] + h2[2])) < 1e-15);
}

TEST_CASE("the shifted drive's first-order tensor factorizes") {
    DriveConfig c = pair_cfg(1.2, 0.3, 1, kPi / 2.0);
    c.waveform = Waveform::ShiftedCosinePair;
    c.phase_psi = 0.4;
    const ShiftedFirstOrder sh = shifted_first_order(c);
    const double pt = 1.2 * std::sin(0.4);
    CHECK(sh.psi_tilde == doctest::Approx(pt).epsilon(1e-12));
    CHECK(sh.g1(0, 0) == 1.0);
    CHECK(sh.g1(1, 1) == doctest::Approx(kJ0_1p2 * std::cos(pt)).epsilon(1e-10));
    CHECK(sh.g1(2, 2) == doctest::Approx(kJ0_1p2 * std::cos(pt)).epsilon(1e-10));
    CHECK(sh.g1(1, 2) == doctest::Approx(-kJ0_1p2 * std::sin(pt)).epsilon(1e-10));
    CHECK(sh.g1(2, 1) == doctest::Approx(kJ0_1p2 * std::sin(pt)).epsilon(1e-10));
    // The shift multiplies beta_0 by a pure phase.
    CHECK(std::abs(std::abs(sh.beta0) - std::abs(bessel_j(1, 1.2))) < 1e-10);

    DriveConfig zero = c;
    zero.phase_psi = 0.0;
    const ShiftedFirstOrder s0 = shifted_first_order(zero);
    CHECK(s0.g1(1, 2) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(s0.g1(1, 1) == doctest::Approx(kJ0_1p2).epsilon(1e-10));

    DriveConfig pi_shift = c;
    pi_shift.phase_psi = kPi;
    const ShiftedFirstOrder spi = shifted_first_order(pi_shift);
    CHECK(std::abs(spi.psi_tilde) < 1e-12);
    CHECK(std::abs(spi.g1(1, 2)) < 1e-10);
}

TEST_CASE("the frame field averages to the first-order field over a period") {
    DriveConfig c = pair_cfg(1.6, 0.5, 2, 0.7);
    const StaticField f{{0.03, -0.02, 0.05}};

    const FmrField at0 = fmr_field(c, f, 0.0);
    CHECK(at0.H.norm() < 1e-14);
    CHECK(at0.h[0] == doctest::Approx(0.03).epsilon(1e-12));
    CHECK(at0.h[1] ==
          doctest::Approx(-0.02 + 0.5 * std::cos(0.7)).epsilon(1e-12));
    CHECK(at0.h[2] == doctest::Approx(0.05).epsilon(1e-12));

    // The x component is never touched by the x rotation.
    for (double tau : {0.3, 1.1, 2.9, 5.5}) {
        const FmrField ft = fmr_field(c, f, tau);
        CHECK(ft.h[0] == doctest::Approx(0.03).epsilon(1e-12));
        // The primitive differentiates back to the instantaneous field.
        const double d = 1e-5;
        const Vec3 dh = (fmr_field(c, f, tau + d).H -
                         fmr_field(c, f, tau - d).H) * (1.0 / (2.0 * d));
        CHECK((dh - ft.h).norm() < 1e-6);
    }

    const Vec3 mean = fmr_field(c, f, kTwoPi).H * (1.0 / kTwoPi);
    const Vec3 h1 = h_first_order(c, f).h1;
    CHECK((mean - h1).norm() < 1e-10);

    // Precomputed-table overload gives the identical field.
    const SeriesFunctions sf{fourier_coeffs(c)};
    const FmrField a = fmr_field(c, f, 2.9);
    const FmrField b = fmr_field(c, f, 2.9, sf);
    CHECK((a.h - b.h).norm() == 0.0);
    CHECK((a.H - b.H).norm() < 1e-14);
}

TEST_CASE("the kick generator vanishes at stroboscopic times") {
    const DriveConfig c = pair_cfg(2.0, 0.4, 1, kPi / 2.0);
    const StaticField f{{0.01, 0.02, 0.03}};

    CHECK(kick_vector(c, f, 0.0).norm() < 1e-14);
    CHECK(kick_vector(c, f, kTwoPi).norm() < 1e-9);
    CHECK(kick_first_order(c, f, 0.0).fnorm() < 1e-14);
    CHECK(kick_first_order(c, f, kTwoPi).fnorm() < 1e-9);

    // Matrix and vector forms describe the same generator.
    const Vec3 kv = kick_vector(c, f, 1.3);
    const Vec3 km = pauli_decompose(kick_first_order(c, f, 1.3));
    CHECK((kv - km).norm() < 1e-13);

    // Precomputed-table overload is identical.
    const SeriesFunctions sf{fourier_coeffs(c)};
    CHECK((kick_vector(c, f, 1.3, sf) - kv).norm() == 0.0);
}

TEST_CASE("the kick reduces to the static-field form without a y drive") {
    const DriveConfig c = pair_cfg(2.0, 0.0, 1, 0.0);
    const StaticField f{{0.0, 1e-3, 0.0}};
    const SeriesFunctions sf{fourier_coeffs(c)};

    const double tau = kPi;
    const complexd p0 = sf.prim0_tilde(tau);  // Ct0 + i St0
    const Mat2 want =
        (dot_sigma({0.0, p0.real(), 0.0}) - dot_sigma({0.0, 0.0, p0.imag()})) *
        complexd(0.5 * 1e-3, 0.0);
    CHECK((kick_first_order(c, f, tau) - want).fnorm() < 1e-12);
}

TEST_CASE("first-order parity selects the synthetic field component") {
    for (int p : {1, 2, 3}) {
        const DriveConfig c = pair_cfg(1.4, 0.5, p, 0.9);
        const Vec3 hs = h_first_order(c, {}).hs1;
        CAPTURE(p);
        CHECK(hs[0] == 0.0);
        if (p % 2 == 1) {
            CHECK(std::abs(hs[1]) < 1e-14);  // odd p: z only
        } else {
            CHECK(std::abs(hs[2]) < 1e-14);  // even p: y only
        }
    }
}
