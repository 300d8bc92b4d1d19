#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hpa/errors.hpp"
#include "hpa/hurwitz.hpp"
#include "hpa/kernels.hpp"
#include "hpa/model.hpp"
#include "hpa/polynomial.hpp"

namespace hpa {

enum class Verdict { Stable, Unstable, HopfCritical };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Stable: return "Stable";
        case Verdict::Unstable: return "Unstable";
        default: return "HopfCritical";
    }
}

/// One purely imaginary characteristic root: frequency omega0 together with
/// the parameter value (a critical delay, or the gamma rate a0) at which it occurs.
struct CriticalPair {
    double omega0 = 0;
    double value = 0;
};

struct StabilityReport {
    Verdict verdict = Verdict::Stable;
    std::vector<CriticalPair> critical;
    std::optional<int> transversality;          ///< sign of Re d(lambda)/d(parameter) at omega0
    std::optional<std::vector<double>> minors;  ///< Hurwitz minors when a polynomial case applies
    /// Values of the four no-delay stability inequalities (each > 0 iff satisfied):
    /// r3, r1+s1, r0+s0, r3(r2+s2)(r1+s1) - (r1+s1)^2 - r3^2(r0+s0).
    std::optional<std::array<double, 4>> inequalities;
};

inline void to_json(nlohmann::ordered_json& j, const StabilityReport& r) {
    j = nlohmann::ordered_json{};
    j["verdict"] = to_string(r.verdict);
    j["critical"] = nlohmann::ordered_json::array();
    for (const auto& c : r.critical)
        j["critical"].push_back(nlohmann::ordered_json{{"omega0", c.omega0}, {"value", c.value}});
    if (r.transversality) j["transversality"] = *r.transversality;
    if (r.minors) j["minors"] = *r.minors;
    if (r.inequalities) j["inequalities"] = *r.inequalities;
}

/// P(lambda) = lambda^4 + r3 l^3 + r2 l^2 + r1 l + r0
inline Polynomial char_poly_p(const LinearizationCoeffs& c) {
    return Polynomial{c.r0, c.r1, c.r2, c.r3, 1.0};
}

/// Q(lambda) = s2 l^2 + s1 l + s0
inline Polynomial char_poly_q(const LinearizationCoeffs& c) {
    return Polynomial{c.s0, c.s1, c.s2};
}

/// Transcendental characteristic function Delta(lambda) =
/// P(lambda) + Q(lambda) K1(lambda) K2(lambda), with each kernel integral
/// replaced by its Laplace transform.
inline std::complex<double> char_residual(const LinearizationCoeffs& c,
                                          const std::pair<DelayKernel, DelayKernel>& kernels,
                                          std::complex<double> lambda) {
    return char_poly_p(c).eval(lambda) +
           char_poly_q(c).eval(lambda) * laplace(kernels.first, lambda) *
               laplace(kernels.second, lambda);
}

/// No-delay quartic: lambda^4 + r3 l^3 + (r2+s2) l^2 + (r1+s1) l + (r0+s0).
inline Polynomial no_delay_quartic(const LinearizationCoeffs& c) {
    return Polynomial{c.r0 + c.s0, c.r1 + c.s1, c.r2 + c.s2, c.r3, 1.0};
}

/// Hurwitz stability of the no-delay system, reporting the minors and the
/// four textbook inequality values.
inline StabilityReport no_delay_stability(const LinearizationCoeffs& c) {
    StabilityReport rep;
    const auto v = hurwitz(no_delay_quartic(c));
    rep.minors = v.minors;
    rep.verdict = v.stable ? Verdict::Stable : Verdict::Unstable;
    const double q1 = c.r1 + c.s1, q0 = c.r0 + c.s0, q2 = c.r2 + c.s2;
    rep.inequalities = {c.r3, q1, q0, c.r3 * q2 * q1 - q1 * q1 - c.r3 * c.r3 * q0};
    return rep;
}

namespace detail {

/// Smallest positive root of the even polynomial h (in z = omega^2),
/// or nullopt when none exists. Roots below 1e-12 are spurious.
inline std::optional<double> smallest_positive_root(const Polynomial& h) {
    double bound = 1.0;
    for (int k = 0; k < h.degree(); ++k)
        bound = std::max(bound, std::abs(h[k] / h.leading()));
    const auto roots = real_roots(h, 1e-12, 1.0 + bound);
    for (double z : roots)
        if (z > 1e-12) return z;
    return std::nullopt;
}

/// Quadrant-correct angle theta in [0, 2pi) with e^{-i theta} = -Pv/(scale*Qv).
inline double recover_angle(std::complex<double> Pv, std::complex<double> Qv, double scale) {
    const std::complex<double> denom = scale * Qv;
    if (std::abs(denom) < 1e-14 * std::max(1.0, std::abs(Pv)))
        throw NumericalError("critical-delay angle recovery: Q(i omega0) vanishes");
    const std::complex<double> unit = -Pv / denom; // e^{-i theta}
    double theta = -std::arg(unit);
    if (theta < 0) theta += 2 * std::numbers::pi;
    return theta;
}

/// Sign of dh/dz at z0; the transversality sign of the crossing.
inline int transversality_sign(const Polynomial& h, double z0) {
    const double d = h.derivative().eval(z0);
    if (std::abs(d) < 1e-10)
        throw TransversalityDegenerate("dh/dz vanishes at z0; crossing direction undetermined");
    return d > 0 ? 1 : -1;
}

/// Shared Case-1/Case-2 flow: given the polynomial part `big` (P, or (l+a20)P)
/// and the delayed part scale*Q, find the smallest crossing frequency and the
/// delay ladder value_j = theta/omega0 + 2 pi j / omega0.
inline StabilityReport critical_delays(const Polynomial& big, const Polynomial& q, double scale,
                                       int j_max, const StabilityReport& zero_delay_verdict) {
    const Polynomial h =
        modulus_squared_on_imaginary_axis(big) -
        (scale * scale) * modulus_squared_on_imaginary_axis(q);

    StabilityReport rep;
    const auto z0 = smallest_positive_root(h);
    if (!z0) {
        // No imaginary-axis crossing at any delay: stability is delay-independent.
        rep.verdict = zero_delay_verdict.verdict;
        rep.minors = zero_delay_verdict.minors;
        return rep;
    }
    const double omega0 = std::sqrt(*z0);
    const std::complex<double> iw(0.0, omega0);
    const double theta = recover_angle(big.eval(iw), q.eval(iw), scale);
    rep.verdict = Verdict::HopfCritical;
    for (int j = 0; j <= j_max; ++j)
        rep.critical.push_back({omega0, (theta + 2 * std::numbers::pi * j) / omega0});
    rep.transversality = transversality_sign(h, *z0);
    return rep;
}

} // namespace detail

/// Case 1 (both kernels Dirac): crossings of Delta = P + Q e^{-lambda tau},
/// tau = tau1 + tau2. Emits tau_j for j = 0..j_max at the smallest crossing
/// frequency. With no positive root of |P|^2 - |Q|^2 the verdict equals the
/// no-delay verdict for every delay.
inline StabilityReport dirac_critical_delays(const LinearizationCoeffs& c, int j_max) {
    return detail::critical_delays(char_poly_p(c), char_poly_q(c), 1.0, j_max,
                                   no_delay_stability(c));
}

/// Case 2 (h1 Dirac, h2 exponential with rate a20): crossings of
/// (lambda + a20) P + a20 Q e^{-lambda tau1}. Emits tau1_j.
inline StabilityReport mixed_critical_delays(const LinearizationCoeffs& c, double a20,
                                             int j_max) {
    if (!(a20 > 0)) throw ConfigError("mixed_critical_delays: a20 must be positive");
    const Polynomial p5 = char_poly_p(c) * Polynomial{a20, 1.0};

    StabilityReport zero_delay;
    const auto v = hurwitz(p5 + a20 * char_poly_q(c));
    zero_delay.minors = v.minors;
    zero_delay.verdict = v.stable ? Verdict::Stable : Verdict::Unstable;

    return detail::critical_delays(p5, char_poly_q(c), a20, j_max, zero_delay);
}

/// Case 3 sextic (both kernels exponential with rate a):
/// (lambda + a)^2 P(lambda) + a^2 Q(lambda).
inline Polynomial weak_gamma_sextic(const LinearizationCoeffs& c, double a) {
    return char_poly_p(c) * Polynomial{a * a, 2 * a, 1.0} + (a * a) * char_poly_q(c);
}

/// Case 3: Hurwitz verdict of the exact sextic at rate a.
inline StabilityReport weak_gamma_stability(const LinearizationCoeffs& c, double a) {
    if (!(a > 0)) throw ConfigError("weak_gamma_stability: a must be positive");
    StabilityReport rep;
    const auto v = hurwitz(weak_gamma_sextic(c, a));
    rep.minors = v.minors;
    rep.verdict = v.stable ? Verdict::Stable : Verdict::Unstable;
    return rep;
}

struct GammaHopf {
    double a0 = 0;     ///< kernel rate at the crossing
    double omega0 = 0; ///< frequency of the imaginary pair there
};

/// Scan the next-to-last Hurwitz minor of the Case-3 sextic for a sign change
/// over [a_lo, a_hi]; bisect to the crossing; verify the lower minors stay
/// positive and that the crossing is simple. Returns nullopt when the minor
/// keeps one sign over the whole bracket.
inline std::optional<GammaHopf> gamma_hopf_search(const LinearizationCoeffs& c, double a_lo,
                                                  double a_hi) {
    if (!(0 < a_lo && a_lo < a_hi)) throw ConfigError("gamma_hopf_search: need 0 < lo < hi");

    auto next_to_last = [&](double a) {
        const auto v = hurwitz(weak_gamma_sextic(c, a));
        return v.minors[v.minors.size() - 2];
    };

    const int grid_n = 512;
    const double llo = std::log(a_lo), lhi = std::log(a_hi);
    auto grid = [&](int i) { return std::exp(llo + (lhi - llo) * i / double(grid_n)); };

    double xa = grid(0), fa = next_to_last(xa);
    for (int i = 1; i <= grid_n; ++i) {
        const double xb = grid(i);
        const double fb = next_to_last(xb);
        if (fa * fb < 0.0) {
            double lo = xa, hi = xb, flo = fa;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = next_to_last(mid);
                if (std::abs(fm) < 1e-10 || (hi - lo) < 4e-16 * std::max(1.0, std::abs(mid)))
                    break;
                if (flo * fm < 0.0)
                    hi = mid;
                else {
                    lo = mid;
                    flo = fm;
                }
            }
            const double a0 = 0.5 * (lo + hi);

            const double step = 1e-6 * std::max(1.0, a0);
            const double slope = (next_to_last(a0 + step) - next_to_last(a0 - step)) / (2 * step);
            if (std::abs(slope) < 1e-10)
                throw DegenerateCrossing("gamma_hopf_search: minor vanishes without simple crossing");

            const auto v = hurwitz(weak_gamma_sextic(c, a0));
            for (size_t k = 0; k + 2 < v.minors.size(); ++k)
                if (!(v.minors[k] > 0))
                    throw DegenerateCrossing(
                        "gamma_hopf_search: lower Hurwitz minor non-positive at crossing");

            // Frequency: the sextic root pair sitting on the imaginary axis.
            GammaHopf out;
            out.a0 = a0;
            double best = std::numeric_limits<double>::infinity();
            for (const auto& z : complex_roots(weak_gamma_sextic(c, a0))) {
                if (std::abs(z.real()) < best && std::abs(z.imag()) > 1e-12) {
                    best = std::abs(z.real());
                    out.omega0 = std::abs(z.imag());
                }
            }
            return out;
        }
        xa = xb;
        fa = fb;
    }
    return std::nullopt;
}

} // namespace hpa
