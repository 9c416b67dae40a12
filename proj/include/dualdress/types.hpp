#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

// Core value types shared by every module. All quantities are dimensionless:
// times are drive phases tau = omega*t, fields are in units of the drive
// angular frequency (omega0 = gamma*B0/omega), and the drive period is 2*pi.

namespace dualdress {

using complexd = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// ---------------------------------------------------------------------------
// Errors

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid argument or violated precondition.
struct DomainError : Error {
    using Error::Error;
};

// Adaptive integration ran out of its step budget; carries the time reached.
struct IntegrationError : Error {
    IntegrationError(const std::string& msg, double reached)
        : Error(msg), tau_reached(reached) {}
    double tau_reached;
};

// A finite-difference stencil straddled the eigenphase zone boundary, where
// the reconstructed field flips sign; the derivative is meaningless there.
struct FoldAmbiguityError : Error {
    using Error::Error;
};

// A truncated series failed its convergence or cross-check tolerance.
struct TruncationError : Error {
    using Error::Error;
};

// Detection-model orientation undefined because the first-order precession
// frequency vanishes.
struct DegenerateOrientationError : Error {
    using Error::Error;
};

// The closed-form seed for a compensation solve is singular (the coupling of
// an adjustable drive term vanishes at the requested operating point).
struct SeedDegeneracyError : Error {
    using Error::Error;
};

// A bracketed search found no interior extremum.
struct NotFoundError : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Vec3: real 3-vector

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3& operator+=(const Vec3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    friend Vec3 operator*(double s, const Vec3& v) { return v * s; }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(dot(*this)); }
    bool finite() const {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
    }
};

// ---------------------------------------------------------------------------
// Mat2: complex 2x2 matrix, row-major {a b; c d}

struct Mat2 {
    complexd a{0.0, 0.0}, b{0.0, 0.0}, c{0.0, 0.0}, d{0.0, 0.0};

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static Mat2 zero() { return {}; }

    Mat2 operator+(const Mat2& o) const {
        return {a + o.a, b + o.b, c + o.c, d + o.d};
    }
    Mat2 operator-(const Mat2& o) const {
        return {a - o.a, b - o.b, c - o.c, d - o.d};
    }
    Mat2 operator*(const Mat2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d,
                c * o.a + d * o.c, c * o.b + d * o.d};
    }
    Mat2 operator*(complexd s) const { return {a * s, b * s, c * s, d * s}; }

    Mat2 adjoint() const {
        return {std::conj(a), std::conj(c), std::conj(b), std::conj(d)};
    }
    complexd trace() const { return a + d; }
    complexd det() const { return a * d - b * c; }
    double fnorm() const {
        return std::sqrt(std::norm(a) + std::norm(b) + std::norm(c) +
                         std::norm(d));
    }
    // ||M^dagger M - I||_F, the unitarity defect.
    double unitarity_defect() const {
        return ((adjoint() * *this) - identity()).fnorm();
    }
};

inline Mat2 pauli_x() { return {0.0, 1.0, 1.0, 0.0}; }
inline Mat2 pauli_y() {
    return {0.0, complexd(0.0, -1.0), complexd(0.0, 1.0), 0.0};
}
inline Mat2 pauli_z() { return {1.0, 0.0, 0.0, -1.0}; }

// v.sigma as a Hermitian traceless matrix.
inline Mat2 dot_sigma(const Vec3& v) {
    return {complexd(v.z, 0.0), complexd(v.x, -v.y),
            complexd(v.x, v.y), complexd(-v.z, 0.0)};
}

// ---------------------------------------------------------------------------
// Mat3 / Tensor3: small real containers for the response tensors

struct Mat3 {
    double m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};

    static Mat3 identity() {
        Mat3 g;
        g.m[0][0] = g.m[1][1] = g.m[2][2] = 1.0;
        return g;
    }
    double& operator()(int i, int j) { return m[i][j]; }
    double operator()(int i, int j) const { return m[i][j]; }

    Vec3 operator*(const Vec3& v) const {
        return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
                m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
                m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
    }
    Mat3 operator-(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i][j] = m[i][j] - o.m[i][j];
        return r;
    }
    double max_abs() const {
        double v = 0.0;
        for (const auto& row : m)
            for (double e : row) v = std::max(v, std::abs(e));
        return v;
    }
};

// Rank-3 tensor t[i][j][k]; the response use case is symmetric in (j,k).
struct Tensor3 {
    double t[3][3][3] = {};

    double& operator()(int i, int j, int k) { return t[i][j][k]; }
    double operator()(int i, int j, int k) const { return t[i][j][k]; }

    // (1/2) t : v v, the quadratic form appearing in second-order fields.
    Vec3 half_contract(const Vec3& v) const {
        Vec3 r;
        for (int i = 0; i < 3; ++i) {
            double s = 0.0;
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k) s += t[i][j][k] * v[j] * v[k];
            r[i] = 0.5 * s;
        }
        return r;
    }
    double max_abs() const {
        double v = 0.0;
        for (const auto& p : t)
            for (const auto& row : p)
                for (double e : row) v = std::max(v, std::abs(e));
        return v;
    }
};

// ---------------------------------------------------------------------------
// Drive and field configuration

enum class Waveform { CosinePair, ShiftedCosinePair, HarmonicSum };

// Extra y-axis drive term amplitude*cos(order*(tau+psi) + phase), used by the
// HarmonicSum waveform (multi-harmonic compensation drives).
struct HarmonicTerm {
    double amplitude = 0.0;
    int order = 1;
    double phase = 0.0;
};

// Bichromatic drive: Omega_x*cos(tau+psi) on x and
// Omega_y*cos(p*(tau+psi)+Phi) on y, plus optional extra y harmonics.
// CosinePair fixes psi = 0.
struct DriveConfig {
    double omega_x_amp = 0.0;  // Omega_x
    double omega_y_amp = 0.0;  // Omega_y
    int harmonic_p = 1;        // p >= 1
    double phase_Phi = 0.0;    // Phi
    double phase_psi = 0.0;    // psi (ShiftedCosinePair / HarmonicSum only)
    Waveform waveform = Waveform::CosinePair;
    std::vector<HarmonicTerm> extra_y;  // HarmonicSum only

    void validate() const {
        if (harmonic_p < 1) throw DomainError("harmonic_p must be >= 1");
        if (!(omega_x_amp >= 0.0) || !std::isfinite(omega_x_amp) ||
            !(omega_y_amp >= 0.0) || !std::isfinite(omega_y_amp))
            throw DomainError("drive amplitudes must be finite and >= 0");
        if (!std::isfinite(phase_Phi) || !std::isfinite(phase_psi))
            throw DomainError("drive phases must be finite");
        if (waveform == Waveform::CosinePair && phase_psi != 0.0)
            throw DomainError("CosinePair has no initial phase; use ShiftedCosinePair");
        if (waveform != Waveform::HarmonicSum && !extra_y.empty())
            throw DomainError("extra harmonic terms require the HarmonicSum waveform");
        for (const auto& h : extra_y) {
            if (h.order < 1)
                throw DomainError("harmonic term orders must be positive integers");
            // Signed amplitudes are allowed here (a sign is a phase flip);
            // solvers that adjust these terms rely on that.
            if (!std::isfinite(h.amplitude) || !std::isfinite(h.phase))
                throw DomainError("harmonic term amplitude/phase invalid");
        }
    }

    // Effective initial phase (zero for the plain cosine pair).
    double psi() const {
        return waveform == Waveform::CosinePair ? 0.0 : phase_psi;
    }
    // Accumulated x rotation phi_x(tau) = int_0^tau Omega_x*cos(t'+psi) dt',
    // fixed to phi_x(0) = 0.
    double phi_x(double tau) const {
        const double ps = psi();
        return omega_x_amp * (std::sin(tau + ps) - std::sin(ps));
    }
    // Instantaneous y-axis drive amplitude (all terms).
    double y_drive(double tau) const {
        const double ps = psi();
        double v = omega_y_amp * std::cos(harmonic_p * (tau + ps) + phase_Phi);
        for (const auto& h : extra_y)
            v += h.amplitude * std::cos(h.order * (tau + ps) + h.phase);
        return v;
    }
};

struct StaticField {
    Vec3 omega0;  // gamma*B0/omega

    void validate() const {
        if (!omega0.finite()) throw DomainError("static field must be finite");
    }
};

struct IntegratorSettings {
    double rel_tol = 1e-11;
    double abs_tol = 1e-13;
    long max_steps = 10'000'000;

    void validate() const {
        if (!(rel_tol > 0.0 && rel_tol < 1e-3) ||
            !(abs_tol > 0.0 && abs_tol < 1e-3))
            throw DomainError("integrator tolerances must lie in (0, 1e-3)");
        if (max_steps <= 0) throw DomainError("max_steps must be positive");
    }
};

}  // namespace dualdress
