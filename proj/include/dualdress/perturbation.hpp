#pragma once

#include <vector>

#include "dualdress/types.hpp"

// Closed-form Magnus perturbation theory in the frame rotating with the
// accumulated x-drive phase phi_x(tau). The frame field is expanded in the
// drive harmonics,
//   exp(i phi_x(tau))          = sum_n alpha_n exp(i n tau),
//   s_y(tau) exp(i phi_x(tau)) = sum_n beta_n  exp(i n tau),
// and the first two Magnus orders give the synthetic field, the g (Jacobian)
// and f (Hessian) response tensors, and the first-order kick operator. For
// drives with extra y harmonics the amplitude-weighted coefficients
//   W_n = Fourier coefficients of [total y-drive](tau) exp(i phi_x(tau))
// replace Omega_y*beta_n throughout.

namespace dualdress {

struct FourierCoeffs {
    enum class Source { ClosedFormCosine, Quadrature };

    int truncation_N = 0;
    Source source = Source::ClosedFormCosine;

    complexd alpha(int n) const { return get(alpha_, n); }
    complexd beta(int n) const { return get(beta_, n); }
    // Amplitude-weighted total y-drive coefficient; Omega_y*beta_n for the
    // plain pair.
    complexd w(int n) const { return get(w_, n); }

    // 1 - sum |alpha_n|^2; |exp(i phi_x)| = 1 makes the full sum exactly 1.
    double parseval_defect() const;

    std::vector<complexd> alpha_, beta_, w_;  // index n + truncation_N

  private:
    complexd get(const std::vector<complexd>& v, int n) const {
        const int i = n + truncation_N;
        return (i < 0 || i >= static_cast<int>(v.size())) ? complexd(0.0)
                                                          : v[i];
    }
};

// Series truncation: N = max(p+5, ceil(Ox) + ceil(10*(ceil(Ox)+1)^(1/3)) + 10),
// extended until |J_N(Ox)| < 1e-16 and past any extra harmonic order.
int truncation_order(const DriveConfig& cfg);

// Coefficients for the configured waveform. CosinePair uses the closed forms
// alpha_n = J_n(Ox), beta_n = (exp(i Phi) J_{n-p} + exp(-i Phi) J_{n+p})/2;
// other waveforms use 4096-sample uniform-grid quadrature of the defining
// integrals (spectrally accurate for these smooth periodic integrands).
// Throws TruncationError if the Parseval defect exceeds 1e-8.
FourierCoeffs fourier_coeffs(const DriveConfig& cfg, int N = -1);

// Harmonic series evaluators built on a coefficient table: the frame
// waveforms c0 + i s0 = exp(i phi_x), c1 + i s1 = s_y exp(i phi_x), their
// primitives (C0 + i S0)(tau) = int_0^tau (c0 + i s0), and the mean-removed
// primitives Ct0 = C0 - tau*<c0> etc., which vanish at tau = 0 and 2*pi.
// The weighted variants use W_n.
struct SeriesFunctions {
    explicit SeriesFunctions(FourierCoeffs fc) : fc_(std::move(fc)) {}

    complexd e0(double tau) const;        // c0 + i s0
    complexd e1(double tau) const;        // c1 + i s1
    complexd prim0(double tau) const;     // C0 + i S0
    complexd prim1(double tau) const;     // C1 + i S1
    complexd prim0_tilde(double tau) const;
    complexd prim1_tilde(double tau) const;
    complexd primw(double tau) const;     // primitive of sum W_n e^{i n tau}
    complexd primw_tilde(double tau) const;

    const FourierCoeffs& coeffs() const { return fc_; }

  private:
    FourierCoeffs fc_;
};

// Second-order series coefficients for the cosine pair, by two routes: the
// defining alpha/beta series (fields *_series) and the closed-form Bessel
// sums A, B, C, D (primary fields). Cross-checked within 1e-11 at
// construction; TruncationError on disagreement.
//
// The q's obey q_c = 0 and q_0 = -2 J_0(Ox) q_s for the cosine drive
// (proportionality constant pinned by the defining series and the numerical
// Hessian; see the q_coefficients tests).
struct QCoefficients {
    double Q_x, Q_xy, Q_xz, Q_yx, Q_zx;  // closed-form route
    double q0, qc, qs;
    double A, B, C, D;  // the four Bessel sums behind Q_xy..Q_zx
    double Q_x_series, Q_xy_series, Q_xz_series, Q_yx_series, Q_zx_series;
    double q0_series, qc_series, qs_series;
};

QCoefficients q_coefficients(const DriveConfig& cfg);

struct FirstOrder {
    Vec3 h1;   // hs1 + g1*omega0
    Vec3 hs1;  // (0, Re W_0, -Im W_0)
    Mat3 g1;   // [[1,0,0],[0,Re a0,Im a0],[0,-Im a0,Re a0]]
};

FirstOrder h_first_order(const DriveConfig& cfg, const StaticField& field);

struct SecondOrder {
    Vec3 h2;   // hs2 + g2*omega0 + (1/2) f2 : omega0 omega0
    Vec3 hs2;
    Mat3 g2;
    Tensor3 f2;
};

SecondOrder h_second_order(const DriveConfig& cfg, const StaticField& field);

// First plus second Magnus order of the effective field.
Vec3 h_magnus(const DriveConfig& cfg, const StaticField& field);

struct ShiftedFirstOrder {
    complexd beta0;  // from the quadrature path
    Mat3 g1;         // contraction diag(1, J0, J0) times an x rotation
    double psi_tilde;  // rotation angle Ox*sin(psi)
};

ShiftedFirstOrder shifted_first_order(const DriveConfig& cfg);

struct FmrField {
    Vec3 h;  // instantaneous frame field (exact trig)
    Vec3 H;  // its primitive from the harmonic series, H(0) = 0
};

FmrField fmr_field(const DriveConfig& cfg, const StaticField& field, double tau);

// Same, reusing a precomputed series table (for tight evaluation loops).
FmrField fmr_field(const DriveConfig& cfg, const StaticField& field, double tau,
                   const SeriesFunctions& sf);

// First-order kick generator K1(tau) = (1/2)[H(tau) - tau*<h>].sigma as a
// 3-vector (K1 = (1/2) kick.sigma); vanishes at tau = 0 and 2*pi.
Vec3 kick_vector(const DriveConfig& cfg, const StaticField& field, double tau);

// Same, reusing a precomputed series table.
Vec3 kick_vector(const DriveConfig& cfg, const StaticField& field, double tau,
                 const SeriesFunctions& sf);

// K1(tau) as a Hermitian-traceless matrix.
Mat2 kick_first_order(const DriveConfig& cfg, const StaticField& field,
                      double tau);

}  // namespace dualdress
