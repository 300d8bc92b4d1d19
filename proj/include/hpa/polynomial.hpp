#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "hpa/errors.hpp"

namespace hpa {

/// Dense real polynomial, coefficients in ascending degree order.
/// Trailing exact zeros are trimmed; the zero polynomial has an empty
/// coefficient vector and degree -1.
class Polynomial {
public:
    Polynomial() = default;

    explicit Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) { trim(); }

    Polynomial(std::initializer_list<double> coeffs) : c_(coeffs) { trim(); }

    static Polynomial from_roots(std::span<const double> roots) {
        Polynomial p{1.0};
        for (double r : roots) p = p * Polynomial{-r, 1.0};
        return p;
    }

    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    const std::vector<double>& coeffs() const { return c_; }

    /// Coefficient of x^k; zero outside the stored range.
    double operator[](int k) const {
        return (k >= 0 && k < static_cast<int>(c_.size())) ? c_[static_cast<size_t>(k)] : 0.0;
    }

    double leading() const { return c_.empty() ? 0.0 : c_.back(); }

    double max_abs_coeff() const {
        double m = 0;
        for (double v : c_) m = std::max(m, std::abs(v));
        return m;
    }

    double eval(double x) const {
        double r = 0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * x + *it;
        return r;
    }

    std::complex<double> eval(std::complex<double> x) const {
        std::complex<double> r = 0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * x + *it;
        return r;
    }

    Polynomial derivative() const {
        if (c_.size() <= 1) return Polynomial{};
        std::vector<double> d(c_.size() - 1);
        for (size_t k = 1; k < c_.size(); ++k) d[k - 1] = static_cast<double>(k) * c_[k];
        return Polynomial(std::move(d));
    }

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
        std::vector<double> r(std::max(a.c_.size(), b.c_.size()), 0.0);
        for (size_t i = 0; i < a.c_.size(); ++i) r[i] += a.c_[i];
        for (size_t i = 0; i < b.c_.size(); ++i) r[i] += b.c_[i];
        return Polynomial(std::move(r));
    }

    friend Polynomial operator-(const Polynomial& a, const Polynomial& b) {
        std::vector<double> r(std::max(a.c_.size(), b.c_.size()), 0.0);
        for (size_t i = 0; i < a.c_.size(); ++i) r[i] += a.c_[i];
        for (size_t i = 0; i < b.c_.size(); ++i) r[i] -= b.c_[i];
        return Polynomial(std::move(r));
    }

    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        if (a.is_zero() || b.is_zero()) return Polynomial{};
        std::vector<double> r(a.c_.size() + b.c_.size() - 1, 0.0);
        for (size_t i = 0; i < a.c_.size(); ++i)
            for (size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
        return Polynomial(std::move(r));
    }

    friend Polynomial operator*(double s, const Polynomial& a) {
        std::vector<double> r(a.c_);
        for (double& v : r) v *= s;
        return Polynomial(std::move(r));
    }

private:
    void trim() {
        while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
    }

    std::vector<double> c_;
};

/// Even polynomial M with M(omega^2) = |p(i omega)|^2.
/// Splits p into even part E and odd part O (p(x) = E(x^2) + x O(x^2) after
/// sign-alternating substitution), so p(i w) = E(z) + i w O(z) with z = w^2
/// and |p(i w)|^2 = E(z)^2 + z O(z)^2.
inline Polynomial modulus_squared_on_imaginary_axis(const Polynomial& p) {
    std::vector<double> e, o;
    for (int k = 0; k <= p.degree(); ++k) {
        const double sign = (((k / 2) % 2) == 0) ? 1.0 : -1.0; // i^k pattern
        if (k % 2 == 0)
            e.push_back(sign * p[k]);
        else
            o.push_back(sign * p[k]);
    }
    Polynomial E(std::move(e)), O(std::move(o));
    return E * E + Polynomial{0.0, 1.0} * O * O;
}

/// All complex roots via the companion matrix of the monic normalization.
inline std::vector<std::complex<double>> complex_roots(const Polynomial& p) {
    if (p.is_zero()) throw ZeroPolynomial("complex_roots: zero polynomial");
    const int n = p.degree();
    if (n < 1) return {};
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) companion(i, n - 1) = -p[i] / p.leading();
    Eigen::EigenSolver<Eigen::MatrixXd> es(companion, /*computeEigenvectors=*/false);
    std::vector<std::complex<double>> out(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<size_t>(i)] = es.eigenvalues()(i);
    return out;
}

/// Real roots of p inside [lo, hi], deduplicated and Newton-polished.
/// Residual gate: |p(r)| <= 1e-12 * max(1, max|coeff|); candidates that
/// cannot be polished below the gate are dropped (they are almost always
/// near-real projections of a complex pair).
inline std::vector<double> real_roots(const Polynomial& p, double lo, double hi) {
    if (p.is_zero()) throw ZeroPolynomial("real_roots: zero polynomial");
    if (p.degree() < 1) return {};
    if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi))
        throw NumericalError("real_roots: domain must be a finite interval");

    const Polynomial dp = p.derivative();
    const double scale = std::max(1.0, p.max_abs_coeff());
    const double residual_gate = 1e-12 * scale;

    std::vector<double> cand;
    for (const auto& z : complex_roots(p)) {
        if (std::abs(z.imag()) <= 1e-8 * std::max(1.0, std::abs(z))) cand.push_back(z.real());
    }

    std::vector<double> out;
    for (double r : cand) {
        // Newton polish; bounded steps so a near-multiple root cannot fling us away.
        for (int it = 0; it < 64; ++it) {
            const double f = p.eval(r);
            if (std::abs(f) <= 0.01 * residual_gate) break;
            const double d = dp.eval(r);
            if (d == 0.0) break;
            double step = f / d;
            const double cap = 0.1 * (std::abs(r) + 1.0);
            step = std::clamp(step, -cap, cap);
            r -= step;
            if (std::abs(step) < 1e-17 * std::max(1.0, std::abs(r))) break;
        }
        if (std::abs(p.eval(r)) > residual_gate) continue;
        const double edge = 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
        if (r < lo - edge || r > hi + edge) continue;
        out.push_back(std::clamp(r, lo, hi));
    }

    std::sort(out.begin(), out.end());
    std::vector<double> dedup;
    for (double r : out) {
        if (dedup.empty() || std::abs(r - dedup.back()) > 1e-9)
            dedup.push_back(r);
    }
    return dedup;
}

} // namespace hpa
