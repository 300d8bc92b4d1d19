#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "hpa/errors.hpp"

namespace hpa {

/// One delayed input channel for the fractional solver: the value of state
/// component `component` lagged by `steps` grid points.
struct DelayChannel {
    int component = 0;
    long steps = 0;
};

/// Caputo-derivative Adams-Bashforth-Moulton predictor-corrector on a uniform
/// grid, fractional order q in (0, 1]. Predictor uses the fractional rectangle
/// rule, corrector the fractional trapezoid weights; the full O(N^2) memory
/// sum is kept (no short-memory truncation). One corrector pass per step.
///
/// Rhs signature: void rhs(double t, const std::array<double, N>& y,
///                         const std::array<double, M>& delayed,
///                         std::array<double, N>& dydt)
/// Delayed values are read from already-computed grid nodes; before t = 0 the
/// history is the constant initial state. A channel with steps == 0 reads the
/// state being evaluated (no delay).
template <std::size_t N, std::size_t M, class Rhs>
std::vector<std::array<double, N>> fabm_integrate(Rhs&& rhs, const std::array<double, N>& y0,
                                                  double dt, long n_steps, double q,
                                                  const std::array<DelayChannel, M>& delays) {
    if (!(q > 0.0 && q <= 1.0)) throw ConfigError("fractional order q must lie in (0, 1]");
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");

    std::vector<std::array<double, N>> ys(static_cast<std::size_t>(n_steps) + 1);
    std::vector<std::array<double, N>> fs(static_cast<std::size_t>(n_steps) + 1);
    ys[0] = y0;

    // Predictor weights bw[k] = (k+1)^q - k^q; corrector interior weights
    // aw[k] = (k+2)^{q+1} + k^{q+1} - 2 (k+1)^{q+1}.
    std::vector<double> bw(static_cast<std::size_t>(n_steps) + 1);
    std::vector<double> aw(static_cast<std::size_t>(n_steps) + 1);
    for (long k = 0; k <= n_steps; ++k) {
        const double kd = static_cast<double>(k);
        bw[static_cast<std::size_t>(k)] = std::pow(kd + 1.0, q) - std::pow(kd, q);
        aw[static_cast<std::size_t>(k)] = std::pow(kd + 2.0, q + 1.0) + std::pow(kd, q + 1.0) -
                                          2.0 * std::pow(kd + 1.0, q + 1.0);
    }
    const double wp = std::pow(dt, q) / std::tgamma(q + 1.0);
    const double wc = std::pow(dt, q) / std::tgamma(q + 2.0);

    auto delayed_at = [&](long j, const std::array<double, N>& self) {
        std::array<double, M> d{};
        for (std::size_t ch = 0; ch < M; ++ch) {
            const long src = j - delays[ch].steps;
            const int comp = delays[ch].component;
            if (delays[ch].steps == 0)
                d[ch] = self[static_cast<std::size_t>(comp)];
            else if (src < 0)
                d[ch] = y0[static_cast<std::size_t>(comp)];
            else
                d[ch] = ys[static_cast<std::size_t>(src)][static_cast<std::size_t>(comp)];
        }
        return d;
    };

    rhs(0.0, ys[0], delayed_at(0, ys[0]), fs[0]);

    for (long m = 0; m < n_steps; ++m) {
        const long j = m + 1;
        std::array<double, N> pred_sum{};
        std::array<double, N> corr_sum{};
        // Fused memory sums over i = 1..m (node 0 handled separately: the
        // corrector's first weight is the special a_{0,m+1}).
        {
            const double* bwp = bw.data();
            const double* awp = aw.data();
            for (long i = 1; i <= m; ++i) {
                const double w1 = bwp[m - i];
                const double w2 = awp[m - i];
                const auto& f = fs[static_cast<std::size_t>(i)];
                for (std::size_t c = 0; c < N; ++c) {
                    pred_sum[c] += w1 * f[c];
                    corr_sum[c] += w2 * f[c];
                }
            }
        }
        const double md = static_cast<double>(m);
        const double a0w = std::pow(md, q + 1.0) - (md - q) * std::pow(md + 1.0, q);
        for (std::size_t c = 0; c < N; ++c) {
            pred_sum[c] += bw[static_cast<std::size_t>(m)] * fs[0][c];
            corr_sum[c] += a0w * fs[0][c];
        }

        std::array<double, N> pred;
        for (std::size_t c = 0; c < N; ++c) pred[c] = ys[0][c] + wp * pred_sum[c];

        std::array<double, N> fpred;
        rhs(j * dt, pred, delayed_at(j, pred), fpred);

        auto& y = ys[static_cast<std::size_t>(j)];
        for (std::size_t c = 0; c < N; ++c) y[c] = ys[0][c] + wc * (fpred[c] + corr_sum[c]);

        for (std::size_t c = 0; c < N; ++c)
            if (!std::isfinite(y[c])) throw NonFiniteState("fractional solver: state blew up");

        rhs(j * dt, y, delayed_at(j, y), fs[static_cast<std::size_t>(j)]);
    }
    return ys;
}

} // namespace hpa
