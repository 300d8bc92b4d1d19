#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "hpa/errors.hpp"
#include "hpa/params.hpp"

namespace hpa {

/// Right-hand side of the delay system with the two convolution integrals
/// replaced by the supplied values: delayed_cort feeds the CRH, ACTH and GR
/// equations, delayed_acth feeds the CORT equation.
inline State vector_field(const ModelParams& p, const State& x, double delayed_cort,
                          double delayed_acth) {
    const double u = x.gr * delayed_cort; // GR-cortisol complex
    State d;
    d.crh = p.a1 / (p.a2 + delayed_cort) - p.a3 * x.crh;
    d.acth = p.b1 * x.crh / (p.b2 + u) - p.b3 * x.acth;
    d.gr = p.c1 * u * u / (p.c2 + u * u) + p.c3 - p.c4 * x.gr;
    d.cort = p.d1 * delayed_acth - p.d2 * x.cort;
    return d;
}

enum class GrLevel { Low, Medium, High };

inline const char* to_string(GrLevel g) {
    switch (g) {
        case GrLevel::Low: return "Low";
        case GrLevel::Medium: return "Medium";
        default: return "High";
    }
}

/// Positive fixed point of the flow.
struct Equilibrium {
    State state;
    double residual = 0;              ///< max |vector_field| component at the state
    GrLevel gr_level = GrLevel::Low;  ///< rank of x3 among coexisting equilibria
};

/// A root of the scalar reduced equation that was discarded, with the reason.
struct RejectedRoot {
    double x2 = 0;
    std::string reason;
};

struct EquilibriaResult {
    std::vector<Equilibrium> equilibria; ///< sorted by gr ascending, tagged Low/Medium/High
    std::vector<RejectedRoot> rejected;
};

namespace detail {

/// Remaining coordinates once x2 is fixed: x4 from the CORT balance,
/// x1 from the CRH balance, x3 from the ACTH balance.
inline State coords_from_x2(const ModelParams& p, double x2) {
    State s;
    s.acth = x2;
    s.cort = p.d1 / p.d2 * x2;
    s.crh = p.a1 / (p.a3 * (p.a2 + s.cort));
    s.gr = (p.b1 * s.crh / (p.b3 * x2) - p.b2) / s.cort;
    return s;
}

/// Scalar reduction G(x2): the GR balance evaluated on the manifold defined
/// by the other three balances. Every positive equilibrium is a positive
/// root of G and vice versa (any root has gr = (c1 u^2/(c2+u^2) + c3)/c4 > 0).
inline double reduced_equation(const ModelParams& p, double x2) {
    const State s = coords_from_x2(p, x2);
    const double u = s.gr * s.cort;
    return p.c1 * u * u / (p.c2 + u * u) + p.c3 - p.c4 * s.gr;
}

inline double equilibrium_residual(const ModelParams& p, const State& s) {
    const State f = vector_field(p, s, s.cort, s.acth);
    return std::max(std::max(std::abs(f.crh), std::abs(f.acth)),
                    std::max(std::abs(f.gr), std::abs(f.cort)));
}

} // namespace detail

/// Find all positive equilibria by sign-scanning the scalar reduction G on a
/// log-spaced grid over x2_bracket and bisecting each bracketing pair, then
/// verifying every survivor against the full system (residual <= 1e-10).
/// Roots closer than 1e-8 in x2 are merged.
inline EquilibriaResult solve_equilibria(const ModelParams& p, double x2_lo, double x2_hi,
                                         int grid_n) {
    p.validate();
    if (!(0 < x2_lo && x2_lo < x2_hi))
        throw ConfigError("solve_equilibria: bracket must satisfy 0 < lo < hi");
    if (grid_n < 100) throw ConfigError("solve_equilibria: grid_n must be >= 100");

    const double llo = std::log(x2_lo), lhi = std::log(x2_hi);
    auto grid_point = [&](int i) {
        return std::exp(llo + (lhi - llo) * static_cast<double>(i) / grid_n);
    };

    std::vector<double> roots;
    double xa = grid_point(0);
    double ga = detail::reduced_equation(p, xa);
    for (int i = 1; i <= grid_n; ++i) {
        const double xb = grid_point(i);
        const double gb = detail::reduced_equation(p, xb);
        if (ga == 0.0) roots.push_back(xa);
        if (ga * gb < 0.0) {
            double lo = xa, hi = xb, flo = ga;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = detail::reduced_equation(p, mid);
                if (std::abs(fm) < 1e-13 || (hi - lo) < 4e-16 * std::max(1.0, std::abs(mid)))
                    break;
                if (flo * fm < 0.0)
                    hi = mid;
                else {
                    lo = mid;
                    flo = fm;
                }
            }
            roots.push_back(0.5 * (lo + hi));
        }
        xa = xb;
        ga = gb;
    }
    if (ga == 0.0) roots.push_back(xa);

    if (roots.empty())
        throw EmptyBracket("solve_equilibria: no sign change of the reduced equation in bracket");

    std::sort(roots.begin(), roots.end());
    std::vector<double> merged;
    for (double r : roots)
        if (merged.empty() || r - merged.back() > 1e-8) merged.push_back(r);

    EquilibriaResult result;
    for (double r : merged) {
        const State s = detail::coords_from_x2(p, r);
        if (!(s.crh > 0 && s.acth > 0 && s.gr > 0 && s.cort > 0)) {
            result.rejected.push_back({r, "non-positive coordinate"});
            continue;
        }
        const double res = detail::equilibrium_residual(p, s);
        if (res > 1e-10) {
            result.rejected.push_back({r, "full-system residual " + std::to_string(res)});
            continue;
        }
        result.equilibria.push_back({s, res, GrLevel::Low});
    }

    std::sort(result.equilibria.begin(), result.equilibria.end(),
              [](const Equilibrium& a, const Equilibrium& b) { return a.state.gr < b.state.gr; });
    const size_t n = result.equilibria.size();
    for (size_t i = 0; i < n; ++i) {
        if (n == 1)
            result.equilibria[i].gr_level = GrLevel::Low;
        else if (n == 2)
            result.equilibria[i].gr_level = (i == 0) ? GrLevel::Low : GrLevel::High;
        else
            result.equilibria[i].gr_level = (i == 0)           ? GrLevel::Low
                                            : (i + 1 == n)     ? GrLevel::High
                                                               : GrLevel::Medium;
    }
    return result;
}

/// Defaults: bracket [1e-6, 1e3 / max(1, d1/d2)], grid 1e5.
inline EquilibriaResult solve_equilibria(const ModelParams& p) {
    return solve_equilibria(p, 1e-6, 1e3 / std::max(1.0, p.d1 / p.d2), 100000);
}

inline const Equilibrium& pick(const EquilibriaResult& r, GrLevel level) {
    for (const auto& e : r.equilibria)
        if (e.gr_level == level) return e;
    throw NumericalError("no equilibrium with requested GR level");
}

/// Coefficients of the linearization at an equilibrium: a_ij multiply the
/// instantaneous state, b_ij the kernel-filtered (delayed) state. r/s are the
/// characteristic polynomial blocks: Delta(lambda) =
///   lambda^4 + r3 l^3 + r2 l^2 + r1 l + r0
///   + (s2 l^2 + s1 l + s0) K1(lambda) K2(lambda).
struct LinearizationCoeffs {
    double a11 = 0, a21 = 0, a22 = 0, a23 = 0, a33 = 0, a44 = 0;
    double b14 = 0, b24 = 0, b34 = 0, b42 = 0;
    double r0 = 0, r1 = 0, r2 = 0, r3 = 0;
    double s0 = 0, s1 = 0, s2 = 0;
};

inline LinearizationCoeffs linearize(const ModelParams& p, const Equilibrium& e) {
    if (!(e.residual <= 1e-10))
        throw std::invalid_argument("linearize: equilibrium residual exceeds 1e-10");
    const double x1 = e.state.crh, x2 = e.state.acth, x3 = e.state.gr, x4 = e.state.cort;
    (void)x2;

    LinearizationCoeffs c;
    const double den_b = p.b2 + x3 * x4;
    const double den_c = p.c2 + x3 * x3 * x4 * x4;

    c.a11 = -p.a3;
    c.b14 = -p.a1 / ((p.a2 + x4) * (p.a2 + x4));
    c.a21 = p.b1 / den_b;
    c.a22 = -p.b3;
    c.a23 = -p.b1 * x1 * x4 / (den_b * den_b);
    c.b24 = -p.b1 * x1 * x3 / (den_b * den_b);
    c.a33 = -p.c4 + 2 * p.c1 * p.c2 * x3 * x4 * x4 / (den_c * den_c);
    c.b34 = 2 * p.c1 * p.c2 * x3 * x3 * x4 / (den_c * den_c);
    c.b42 = p.d1;
    c.a44 = -p.d2;

    c.r3 = -c.a11 - c.a22 - c.a33 - c.a44;
    c.r2 = c.a11 * (c.a22 + c.a33 + c.a44) + c.a33 * c.a44 + c.a22 * (c.a33 + c.a44);
    c.r1 = -c.a33 * c.a44 * (c.a11 + c.a22) - c.a11 * c.a22 * (c.a33 + c.a44);
    c.r0 = c.a11 * c.a22 * c.a33 * c.a44;
    c.s2 = -c.b42 * c.b24;
    c.s1 = -c.b42 * (c.a21 * c.b14 + c.a23 * c.b34 - c.b24 * (c.a11 + c.a33));
    c.s0 = -c.b42 * (-c.a23 * c.b34 * c.a11 - c.a21 * c.b14 * c.a33 + c.b24 * c.a11 * c.a33);
    return c;
}

} // namespace hpa
