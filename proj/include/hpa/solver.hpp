#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "hpa/errors.hpp"
#include "hpa/fractional.hpp"
#include "hpa/kernels.hpp"
#include "hpa/model.hpp"
#include "hpa/params.hpp"

namespace hpa {

/// Time-domain run configuration. history is the constant value of the
/// initial function on the whole pre-interval.
struct SimConfig {
    double t_end = 5000.0;
    double dt = 0.01;
    double order_q = 1.0; ///< Caputo order; 1 = classical derivative
    DelayKernel kernel1 = DiracKernel{0.0}; ///< CORT feedback kernel (h1)
    DelayKernel kernel2 = DiracKernel{0.0}; ///< ACTH-to-CORT kernel (h2)
    State history;
    double transient_fraction = 0.5;
};

/// Uniformly sampled trajectory. Components are floored at zero; the largest
/// undershoot seen before flooring is recorded (should stay within 1e-9).
struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;
    double max_undershoot = 0;
};

namespace detail {

inline void validate_common(const SimConfig& cfg) {
    if (!(cfg.dt > 0) || !std::isfinite(cfg.dt)) throw ConfigError("dt must be positive");
    if (!(cfg.t_end > 0) || !std::isfinite(cfg.t_end)) throw ConfigError("t_end must be positive");
    validate(cfg.kernel1);
    validate(cfg.kernel2);
    if (!(cfg.transient_fraction >= 0 && cfg.transient_fraction < 1))
        throw ConfigError("transient_fraction must lie in [0, 1)");
    if (!(cfg.history.crh >= 0 && cfg.history.acth >= 0 && cfg.history.gr >= 0 &&
          cfg.history.cort >= 0))
        throw ConfigError("history must be componentwise non-negative");

    double min_dirac = std::numeric_limits<double>::infinity();
    for (const auto* k : {&cfg.kernel1, &cfg.kernel2})
        if (const auto* d = std::get_if<DiracKernel>(k))
            if (d->tau > 0) min_dirac = std::min(min_dirac, d->tau);
    if (std::isfinite(min_dirac) && cfg.dt > min_dirac / 10.0 + 1e-15)
        throw StepTooLarge("dt must not exceed (smallest positive Dirac delay)/10");

    const double mean_max = std::max(mean_delay(cfg.kernel1), mean_delay(cfg.kernel2));
    if (cfg.t_end < 10.0 * mean_max)
        throw ConfigError("t_end must be at least 10x the largest mean delay");
}

/// Clamp tiny negative components to zero, tracking the worst undershoot.
template <std::size_t N>
inline void floor_state(std::array<double, N>& y, double& undershoot) {
    for (double& v : y) {
        if (v < 0.0) {
            undershoot = std::min(undershoot, v);
            v = 0.0;
        }
    }
}

/// Cubic Hermite interpolation over completed solution nodes with constant
/// pre-history. `filled` nodes of ys/fs are valid.
template <std::size_t N>
class DenseHistory {
public:
    DenseHistory(const std::vector<std::array<double, N>>& ys,
                 const std::vector<std::array<double, N>>& fs, const std::array<double, N>& pre,
                 double dt)
        : ys_(ys), fs_(fs), pre_(pre), dt_(dt) {}

    double value(int comp, double tq, std::size_t filled) const {
        if (tq <= 0.0) return pre_[static_cast<std::size_t>(comp)];
        std::size_t i0 = static_cast<std::size_t>(tq / dt_);
        if (i0 + 1 >= filled) i0 = filled - 2;
        const double th = (tq - static_cast<double>(i0) * dt_) / dt_;
        const double y0 = ys_[i0][static_cast<std::size_t>(comp)];
        const double y1 = ys_[i0 + 1][static_cast<std::size_t>(comp)];
        const double m0 = fs_[i0][static_cast<std::size_t>(comp)] * dt_;
        const double m1 = fs_[i0 + 1][static_cast<std::size_t>(comp)] * dt_;
        const double t2 = th * th, t3 = t2 * th;
        return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + th) * m0 +
               (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * m1;
    }

private:
    const std::vector<std::array<double, N>>& ys_;
    const std::vector<std::array<double, N>>& fs_;
    std::array<double, N> pre_;
    double dt_;
};

inline Trajectory pack_trajectory(const std::vector<std::array<double, 4>>& ys, double dt,
                                  double undershoot) {
    Trajectory tr;
    tr.times.resize(ys.size());
    tr.states.resize(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i) {
        tr.times[i] = static_cast<double>(i) * dt;
        tr.states[i] = State::from_array(ys[i]);
    }
    tr.max_undershoot = undershoot;
    return tr;
}

} // namespace detail

/// Method-of-steps integration of the discrete-delay system with the classical
/// 4-stage Runge-Kutta scheme. Delayed CORT/ACTH values at off-grid stage
/// times come from cubic Hermite interpolation of the stored solution; before
/// t = 0 the history is the constant cfg.history. A zero delay reads the
/// current stage state, so tau1 = tau2 = 0 reduces to plain RK4.
inline Trajectory simulate_dde(const ModelParams& p, const SimConfig& cfg) {
    p.validate();
    detail::validate_common(cfg);
    if (!std::holds_alternative<DiracKernel>(cfg.kernel1) ||
        !std::holds_alternative<DiracKernel>(cfg.kernel2))
        throw ConfigError("simulate_dde: both kernels must be Dirac");
    if (cfg.order_q != 1.0) throw ConfigError("simulate_dde: requires q = 1");
    const double tau1 = std::get<DiracKernel>(cfg.kernel1).tau;
    const double tau2 = std::get<DiracKernel>(cfg.kernel2).tau;

    const long n = std::lround(cfg.t_end / cfg.dt);
    const double dt = cfg.dt;
    std::vector<std::array<double, 4>> ys(static_cast<std::size_t>(n) + 1);
    std::vector<std::array<double, 4>> fs(static_cast<std::size_t>(n) + 1);
    const std::array<double, 4> pre = cfg.history.to_array();
    ys[0] = pre;
    detail::DenseHistory<4> hist(ys, fs, pre, dt);

    double undershoot = 0.0;
    auto rhs = [&](double t, const std::array<double, 4>& y, std::size_t filled) {
        const double dc = (tau1 == 0.0) ? y[3] : hist.value(3, t - tau1, filled);
        const double da = (tau2 == 0.0) ? y[1] : hist.value(1, t - tau2, filled);
        const State d = vector_field(p, State::from_array(y), dc, da);
        return d.to_array();
    };

    fs[0] = rhs(0.0, ys[0], 1);
    for (long k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * dt;
        const std::size_t filled = static_cast<std::size_t>(k) + 1;
        const auto& y = ys[static_cast<std::size_t>(k)];
        const auto k1 = fs[static_cast<std::size_t>(k)];
        std::array<double, 4> tmp;
        for (int c = 0; c < 4; ++c) tmp[c] = y[c] + 0.5 * dt * k1[c];
        const auto k2 = rhs(t + 0.5 * dt, tmp, filled);
        for (int c = 0; c < 4; ++c) tmp[c] = y[c] + 0.5 * dt * k2[c];
        const auto k3 = rhs(t + 0.5 * dt, tmp, filled);
        for (int c = 0; c < 4; ++c) tmp[c] = y[c] + dt * k3[c];
        const auto k4 = rhs(t + dt, tmp, filled);
        auto& yn = ys[static_cast<std::size_t>(k) + 1];
        for (int c = 0; c < 4; ++c)
            yn[c] = y[c] + dt / 6.0 * (k1[c] + 2 * k2[c] + 2 * k3[c] + k4[c]);
        detail::floor_state(yn, undershoot);
        for (double v : yn)
            if (!std::isfinite(v)) throw NonFiniteState("simulate_dde: state blew up");
        fs[static_cast<std::size_t>(k) + 1] = rhs(t + dt, yn, filled + 1);
    }
    return detail::pack_trajectory(ys, dt, undershoot);
}

/// Gamma-kernel runs via the linear chain trick: each kernel Gamma(p, beta)
/// becomes p auxiliary first-order stages y' = (upstream - y)/beta, driven by
/// CORT (kernel 1) and ACTH (kernel 2); the last stage of each cascade is the
/// filtered value entering the vector field. Constant history filters to
/// itself, so the chains start at the history values. Returns the full
/// augmented node set (4 primary components first, then the h1 chain, then
/// the h2 chain).
inline std::vector<std::vector<double>> simulate_chain_augmented(const ModelParams& p,
                                                                 const SimConfig& cfg) {
    p.validate();
    detail::validate_common(cfg);
    if (!std::holds_alternative<GammaKernel>(cfg.kernel1) ||
        !std::holds_alternative<GammaKernel>(cfg.kernel2))
        throw ConfigError("simulate_chain: both kernels must be Gamma");
    if (cfg.order_q != 1.0) throw ConfigError("simulate_chain: requires q = 1");
    const auto g1 = std::get<GammaKernel>(cfg.kernel1);
    const auto g2 = std::get<GammaKernel>(cfg.kernel2);

    const std::size_t p1 = static_cast<std::size_t>(g1.p);
    const std::size_t p2 = static_cast<std::size_t>(g2.p);
    const std::size_t dim = 4 + p1 + p2;
    std::vector<double> y(dim);
    const auto h0 = cfg.history.to_array();
    for (int c = 0; c < 4; ++c) y[static_cast<std::size_t>(c)] = h0[static_cast<std::size_t>(c)];
    for (std::size_t i = 0; i < p1; ++i) y[4 + i] = h0[3];
    for (std::size_t i = 0; i < p2; ++i) y[4 + p1 + i] = h0[1];

    auto rhs = [&](const std::vector<double>& v, std::vector<double>& out) {
        const State x{v[0], v[1], v[2], v[3]};
        const double filtered_cort = v[4 + p1 - 1];
        const double filtered_acth = v[4 + p1 + p2 - 1];
        const State d = vector_field(p, x, filtered_cort, filtered_acth);
        out[0] = d.crh;
        out[1] = d.acth;
        out[2] = d.gr;
        out[3] = d.cort;
        for (std::size_t i = 0; i < p1; ++i) {
            const double upstream = (i == 0) ? v[3] : v[4 + i - 1];
            out[4 + i] = (upstream - v[4 + i]) / g1.beta;
        }
        for (std::size_t i = 0; i < p2; ++i) {
            const double upstream = (i == 0) ? v[1] : v[4 + p1 + i - 1];
            out[4 + p1 + i] = (upstream - v[4 + p1 + i]) / g2.beta;
        }
    };

    const long n = std::lround(cfg.t_end / cfg.dt);
    const double dt = cfg.dt;
    std::vector<std::vector<double>> nodes(static_cast<std::size_t>(n) + 1);
    nodes[0] = y;
    std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    for (long k = 0; k < n; ++k) {
        rhs(y, k1);
        for (std::size_t c = 0; c < dim; ++c) tmp[c] = y[c] + 0.5 * dt * k1[c];
        rhs(tmp, k2);
        for (std::size_t c = 0; c < dim; ++c) tmp[c] = y[c] + 0.5 * dt * k2[c];
        rhs(tmp, k3);
        for (std::size_t c = 0; c < dim; ++c) tmp[c] = y[c] + dt * k3[c];
        rhs(tmp, k4);
        for (std::size_t c = 0; c < dim; ++c)
            y[c] += dt / 6.0 * (k1[c] + 2 * k2[c] + 2 * k3[c] + k4[c]);
        for (double v : y)
            if (!std::isfinite(v)) throw NonFiniteState("simulate_chain: state blew up");
        nodes[static_cast<std::size_t>(k) + 1] = y;
    }
    return nodes;
}

inline Trajectory simulate_chain(const ModelParams& p, const SimConfig& cfg) {
    const auto nodes = simulate_chain_augmented(p, cfg);
    Trajectory tr;
    tr.times.resize(nodes.size());
    tr.states.resize(nodes.size());
    double undershoot = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        tr.times[i] = static_cast<double>(i) * cfg.dt;
        std::array<double, 4> s{nodes[i][0], nodes[i][1], nodes[i][2], nodes[i][3]};
        detail::floor_state(s, undershoot);
        tr.states[i] = State::from_array(s);
    }
    tr.max_undershoot = undershoot;
    return tr;
}

/// Fractional-order run (Caputo ABM, see fractional.hpp) with discrete delays
/// that must sit on the grid: tau_i/dt within 1e-9 of an integer.
inline Trajectory simulate_fractional(const ModelParams& p, const SimConfig& cfg) {
    p.validate();
    detail::validate_common(cfg);
    if (!std::holds_alternative<DiracKernel>(cfg.kernel1) ||
        !std::holds_alternative<DiracKernel>(cfg.kernel2))
        throw ConfigError("simulate_fractional: both kernels must be Dirac");
    const double tau1 = std::get<DiracKernel>(cfg.kernel1).tau;
    const double tau2 = std::get<DiracKernel>(cfg.kernel2).tau;

    auto steps_of = [&](double tau) {
        const double ratio = tau / cfg.dt;
        const double r = std::round(ratio);
        if (std::abs(ratio - r) > 1e-9)
            throw DelayNotGridAligned("simulate_fractional: tau/dt must be an integer");
        return std::lround(r);
    };
    const std::array<DelayChannel, 2> delays{DelayChannel{3, steps_of(tau1)},
                                             DelayChannel{1, steps_of(tau2)}};

    double undershoot = 0.0;
    auto rhs = [&](double /*t*/, const std::array<double, 4>& y, const std::array<double, 2>& del,
                   std::array<double, 4>& out) {
        const State d = vector_field(p, State::from_array(y), del[0], del[1]);
        out = d.to_array();
    };
    const long n = std::lround(cfg.t_end / cfg.dt);
    auto ys = fabm_integrate<4, 2>(rhs, cfg.history.to_array(), cfg.dt, n, cfg.order_q, delays);
    for (auto& y : ys) detail::floor_state(y, undershoot);
    return detail::pack_trajectory(ys, cfg.dt, undershoot);
}

/// Dispatch on (kernels, q) the way the CLI does: Gamma kernels use the chain
/// solver, Dirac kernels use RK4 at q = 1 and the fractional ABM otherwise.
inline Trajectory simulate(const ModelParams& p, const SimConfig& cfg) {
    if (std::holds_alternative<GammaKernel>(cfg.kernel1) ||
        std::holds_alternative<GammaKernel>(cfg.kernel2)) {
        if (cfg.order_q != 1.0)
            throw ConfigError("gamma kernels are supported only at q = 1");
        return simulate_chain(p, cfg);
    }
    return (cfg.order_q == 1.0) ? simulate_dde(p, cfg) : simulate_fractional(p, cfg);
}

enum class TailClass { Converging, Oscillating, Undetermined };

inline const char* to_string(TailClass c) {
    switch (c) {
        case TailClass::Converging: return "Converging";
        case TailClass::Oscillating: return "Oscillating";
        default: return "Undetermined";
    }
}

struct TailReport {
    TailClass cls = TailClass::Undetermined;
    double amplitude = 0; ///< CORT peak-to-peak in the final half-window
};

/// Drop the transient, split the rest in two halves, and compare CORT
/// peak-to-peak amplitudes A1, A2: decayed if the amplitude halved or is
/// negligible, sustained if it is sizeable and flat.
inline TailReport classify_tail(const Trajectory& traj, double transient_fraction) {
    if (!(transient_fraction >= 0 && transient_fraction < 1))
        throw ConfigError("transient_fraction must lie in [0, 1)");
    const std::size_t n = traj.states.size();
    const std::size_t start = static_cast<std::size_t>(transient_fraction * n);
    if (n - start <= 100) throw TooShort("classify_tail: too few samples after transient cut");

    auto peak_to_peak = [&](std::size_t lo, std::size_t hi) {
        double mn = traj.states[lo].cort, mx = mn;
        for (std::size_t i = lo; i < hi; ++i) {
            mn = std::min(mn, traj.states[i].cort);
            mx = std::max(mx, traj.states[i].cort);
        }
        return mx - mn;
    };
    const std::size_t mid = start + (n - start) / 2;
    const double a1 = peak_to_peak(start, mid);
    const double a2 = peak_to_peak(mid, n);

    TailReport rep;
    rep.amplitude = a2;
    if (a2 < std::max(1e-4, 0.5 * a1))
        rep.cls = TailClass::Converging;
    else if (a2 > 1e-3 && std::abs(a2 - a1) < 0.2 * a1)
        rep.cls = TailClass::Oscillating;
    else
        rep.cls = TailClass::Undetermined;
    return rep;
}

/// Mean upward-crossing period of CORT in the post-transient window, or
/// nullopt with fewer than three crossings.
inline std::optional<double> tail_period(const Trajectory& traj, double transient_fraction) {
    const std::size_t n = traj.states.size();
    const std::size_t start = static_cast<std::size_t>(transient_fraction * n);
    if (n - start <= 100) return std::nullopt;
    double mean = 0;
    for (std::size_t i = start; i < n; ++i) mean += traj.states[i].cort;
    mean /= static_cast<double>(n - start);

    std::vector<double> crossings;
    for (std::size_t i = start; i + 1 < n; ++i) {
        const double f0 = traj.states[i].cort - mean;
        const double f1 = traj.states[i + 1].cort - mean;
        if (f0 < 0 && f1 >= 0) {
            const double frac = f0 / (f0 - f1);
            crossings.push_back(traj.times[i] + frac * (traj.times[i + 1] - traj.times[i]));
        }
    }
    if (crossings.size() < 3) return std::nullopt;
    return (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
}

/// Bisection on tau2 (kernel2's lag) between a decaying and an oscillating
/// run; stops at bracket width 0.25 min and returns the midpoint. Probes that
/// classify Undetermined count as "below onset".
inline double hopf_onset_search(const ModelParams& p, const SimConfig& base, double tau2_lo,
                                double tau2_hi) {
    if (!(tau2_lo < tau2_hi)) throw ConfigError("hopf_onset_search: need lo < hi");
    auto classify_at = [&](double tau2) {
        SimConfig cfg = base;
        cfg.kernel2 = DiracKernel{tau2};
        const Trajectory tr = simulate(p, cfg);
        return classify_tail(tr, cfg.transient_fraction).cls;
    };
    if (classify_at(tau2_lo) != TailClass::Converging)
        throw BracketInvalid("hopf_onset_search: lower endpoint does not converge");
    if (classify_at(tau2_hi) != TailClass::Oscillating)
        throw BracketInvalid("hopf_onset_search: upper endpoint does not oscillate");
    double lo = tau2_lo, hi = tau2_hi;
    while (hi - lo > 0.25) {
        const double mid = 0.5 * (lo + hi);
        if (classify_at(mid) == TailClass::Oscillating)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

/// CSV export: header row then one row per grid point, 17 significant digits,
/// LF line endings.
inline void write_csv(const Trajectory& traj, std::ostream& os) {
    os << "t,crh,acth,gr,cort\n";
    char buf[160];
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        const State& s = traj.states[i];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", traj.times[i], s.crh,
                      s.acth, s.gr, s.cort);
        os << buf;
    }
}

} // namespace hpa
