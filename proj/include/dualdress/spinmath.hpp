#pragma once

#include "dualdress/types.hpp"

// Exact small-scale spin-1/2 algebra and Bessel functions of the first kind.
// Pure functions, safe for unrestricted concurrent use.

namespace dualdress {

// J_n(x) with J_{-n}(x) = (-1)^n J_n(x). Absolute error < 1e-13 for |x| <= 50,
// |n| <= 1e4. Power series for |x| <= 1, Miller's backward recurrence with
// sum normalization (J_0 + 2*sum J_{2k} = 1) otherwise. Throws DomainError on
// non-finite x or |n| > 1e4.
double bessel_j(int n, double x);

// exp(-i v.sigma/2) = cos(|v|/2) I - i sin(|v|/2) (v.sigma)/|v|; the |v| -> 0
// limit returns the identity. Always special-unitary.
Mat2 su2_exp(const Vec3& v);

// Inverse of M = (1/2) h.sigma: h_j = trace(M sigma_j). Throws DomainError if
// M is not Hermitian-traceless within 1e-10 (Frobenius on the defect parts).
Vec3 pauli_decompose(const Mat2& M);

}  // namespace dualdress
