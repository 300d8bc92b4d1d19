#pragma once

#include <array>
#include <vector>

#include "hpa/errors.hpp"
#include "hpa/polynomial.hpp"

namespace hpa {

/// Routh-Hurwitz verdict: all leading principal minors of the Hurwitz matrix.
/// For a polynomial with positive leading coefficient, stable (all roots in
/// the open left half-plane) iff every minor is positive.
struct HurwitzVerdict {
    bool stable = false;
    std::vector<double> minors;
};

namespace detail {

/// Determinant by cofactor expansion; n <= 6 so exactness beats pivoting noise.
inline double cofactor_det(const std::array<std::array<double, 6>, 6>& m, int n) {
    if (n == 1) return m[0][0];
    double det = 0.0;
    double sign = 1.0;
    for (int col = 0; col < n; ++col) {
        std::array<std::array<double, 6>, 6> sub{};
        for (int i = 1; i < n; ++i) {
            int sj = 0;
            for (int j = 0; j < n; ++j) {
                if (j == col) continue;
                sub[i - 1][sj++] = m[i][j];
            }
        }
        det += sign * m[0][col] * cofactor_det(sub, n - 1);
        sign = -sign;
    }
    return det;
}

} // namespace detail

/// Hurwitz criterion for degree 1..6 with positive leading coefficient.
/// The matrix is built from descending coefficients a0..an (a0 = leading):
/// H[i][j] = a_{2(j+1)-(i+1)}, zero outside 0..n.
inline HurwitzVerdict hurwitz(const Polynomial& p) {
    const int n = p.degree();
    if (n < 1 || n > 6)
        throw UnsupportedDegree("hurwitz: degree must be in 1..6, got " + std::to_string(n));
    if (!(p.leading() > 0))
        throw std::invalid_argument("hurwitz: leading coefficient must be positive");

    // a[k] = coefficient of x^{n-k} (descending order)
    std::array<double, 7> a{};
    for (int k = 0; k <= n; ++k) a[static_cast<size_t>(k)] = p[n - k];

    std::array<std::array<double, 6>, 6> H{};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const int k = 2 * (j + 1) - (i + 1);
            H[i][j] = (k >= 0 && k <= n) ? a[static_cast<size_t>(k)] : 0.0;
        }

    HurwitzVerdict v;
    v.minors.reserve(static_cast<size_t>(n));
    for (int k = 1; k <= n; ++k) {
        std::array<std::array<double, 6>, 6> sub{};
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) sub[i][j] = H[i][j];
        v.minors.push_back(detail::cofactor_det(sub, k));
    }
    v.stable = true;
    for (double m : v.minors) v.stable = v.stable && (m > 0.0);
    return v;
}

} // namespace hpa
