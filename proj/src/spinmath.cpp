#include "dualdress/spinmath.hpp"

#include <cmath>
#include <cstdlib>

namespace dualdress {

namespace {

// Ascending power series; accurate for |x| <= 1 where it converges in a few
// terms with no cancellation.
double bessel_series(int n, double x) {
    // term_0 = (x/2)^n / n!
    double term = 1.0;
    for (int k = 1; k <= n; ++k) term *= 0.5 * x / k;
    double sum = term;
    const double x2 = -0.25 * x * x;
    for (int k = 1; k < 64; ++k) {
        term *= x2 / (static_cast<double>(k) * (n + k));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum) + 1e-300) break;
    }
    return sum;
}

// Miller's backward recurrence: run J_{k-1} = (2k/x) J_k - J_{k+1} down from
// an order well past the turning point, then normalize with
// J_0 + 2 sum_{k>=1} J_{2k} = 1. Stable because the downward direction damps
// the unwanted (Y_n) solution.
double bessel_miller(int n, double x) {
    const int top0 = std::max(n, static_cast<int>(std::ceil(x)));
    int m = top0 + static_cast<int>(std::ceil(12.0 * std::cbrt(top0 + 1.0))) + 18;
    if (m % 2) ++m;  // even start keeps the normalization sum aligned

    double jp1 = 0.0;   // J_{k+1} (scaled)
    double j = 1e-30;   // J_k (scaled)
    double sum = 0.0;   // J_0 + 2 sum J_{2k} (scaled)
    double result = 0.0;
    for (int k = m; k >= 1; --k) {
        const double jm1 = (2.0 * k / x) * j - jp1;
        jp1 = j;
        j = jm1;
        if (k - 1 == n) result = j;
        if ((k - 1) % 2 == 0) sum += (k - 1 == 0) ? j : 2.0 * j;
        // Rescale before overflow; ratios are all that matter.
        if (std::abs(j) > 1e250) {
            j *= 1e-250;
            jp1 *= 1e-250;
            sum *= 1e-250;
            result *= 1e-250;
        }
    }
    return result / sum;
}

}  // namespace

double bessel_j(int n, double x) {
    if (!std::isfinite(x)) throw DomainError("bessel_j: non-finite argument");
    if (std::abs(n) > 10'000) throw DomainError("bessel_j: |n| > 1e4 unsupported");

    double sign = 1.0;
    if (n < 0) {  // J_{-n} = (-1)^n J_n
        n = -n;
        if (n % 2) sign = -sign;
    }
    if (x < 0.0) {  // J_n(-x) = (-1)^n J_n(x)
        x = -x;
        if (n % 2) sign = -sign;
    }
    if (x == 0.0) return n == 0 ? sign : 0.0;
    if (x <= 1.0) return sign * bessel_series(n, x);
    return sign * bessel_miller(n, x);
}

Mat2 su2_exp(const Vec3& v) {
    const double r = v.norm();
    // sin(r/2)/r with its r -> 0 limit 1/2 - r^2/48.
    const double s = (r < 1e-6) ? 0.5 - r * r / 48.0 : std::sin(0.5 * r) / r;
    const double c = std::cos(0.5 * r);
    return {complexd(c, -s * v.z), complexd(-s * v.y, -s * v.x),
            complexd(s * v.y, -s * v.x), complexd(c, s * v.z)};
}

Vec3 pauli_decompose(const Mat2& M) {
    const double scale = std::max(1.0, M.fnorm());
    const double herm_defect = (M - M.adjoint()).fnorm();
    const double trace_defect = std::abs(M.trace());
    if (herm_defect > 1e-10 * scale || trace_defect > 1e-10 * scale)
        throw DomainError("pauli_decompose: matrix not Hermitian-traceless");
    // M = (1/2) h.sigma  =>  h = (2 Re M01, -2 Im M01, 2 Re M00).
    return {2.0 * M.b.real(), -2.0 * M.b.imag(), 2.0 * M.a.real()};
}

}  // namespace dualdress
