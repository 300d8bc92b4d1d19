#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hpa/solver.hpp"
#include "oracles.hpp"

using Catch::Approx;
using hpa::DiracKernel;
using hpa::GammaKernel;
using hpa::ModelParams;
using hpa::SimConfig;
using hpa::State;
using hpa::TailClass;

namespace {

const ModelParams& gupta() {
    static const ModelParams p = ModelParams::gupta();
    return p;
}

const hpa::EquilibriaResult& equilibria() {
    static const auto r = hpa::solve_equilibria(gupta());
    return r;
}

State perturbed(hpa::GrLevel level, double delta_crh = 1e-3) {
    State s = pick(equilibria(), level).state;
    s.crh += delta_crh;
    return s;
}

SimConfig dirac_cfg(double tau1, double tau2, double t_end, double dt, State hist) {
    SimConfig cfg;
    cfg.kernel1 = DiracKernel{tau1};
    cfg.kernel2 = DiracKernel{tau2};
    cfg.t_end = t_end;
    cfg.dt = dt;
    cfg.history = hist;
    return cfg;
}

/// Plain fixed-step RK4 on the no-delay vector field; the oracle for the
/// zero-delay reduction.
std::vector<State> plain_rk4(const ModelParams& p, State y0, double t_end, double dt) {
    const long n = std::lround(t_end / dt);
    std::vector<State> out;
    out.reserve(static_cast<std::size_t>(n) + 1);
    out.push_back(y0);
    auto f = [&](const State& s) { return hpa::vector_field(p, s, s.cort, s.acth); };
    State y = y0;
    for (long k = 0; k < n; ++k) {
        const State k1 = f(y);
        auto advance = [&](const State& base, const State& slope, double w) {
            return State{base.crh + w * slope.crh, base.acth + w * slope.acth,
                         base.gr + w * slope.gr, base.cort + w * slope.cort};
        };
        const State k2 = f(advance(y, k1, 0.5 * dt));
        const State k3 = f(advance(y, k2, 0.5 * dt));
        const State k4 = f(advance(y, k3, dt));
        y = State{y.crh + dt / 6 * (k1.crh + 2 * k2.crh + 2 * k3.crh + k4.crh),
                  y.acth + dt / 6 * (k1.acth + 2 * k2.acth + 2 * k3.acth + k4.acth),
                  y.gr + dt / 6 * (k1.gr + 2 * k2.gr + 2 * k3.gr + k4.gr),
                  y.cort + dt / 6 * (k1.cort + 2 * k2.cort + 2 * k3.cort + k4.cort)};
        out.push_back(y);
    }
    return out;
}

double sup_diff(const std::vector<State>& a, const hpa::Trajectory& b, std::size_t stride = 1) {
    double worst = 0;
    for (std::size_t i = 0; i < a.size() && i < b.states.size(); i += stride) {
        worst = std::max(worst, std::abs(a[i].crh - b.states[i].crh));
        worst = std::max(worst, std::abs(a[i].acth - b.states[i].acth));
        worst = std::max(worst, std::abs(a[i].gr - b.states[i].gr));
        worst = std::max(worst, std::abs(a[i].cort - b.states[i].cort));
    }
    return worst;
}

} // namespace

TEST_CASE("simulate_dde with zero delays reduces to plain RK4") {
    const auto hist = perturbed(hpa::GrLevel::High);
    const auto traj = hpa::simulate_dde(gupta(), dirac_cfg(0.0, 0.0, 50.0, 0.01, hist));
    const auto ref = plain_rk4(gupta(), hist, 50.0, 0.01);
    CHECK(sup_diff(ref, traj) < 1e-10);
}

TEST_CASE("simulate_dde validates the step-size invariant") {
    CHECK_THROWS_AS(
        hpa::simulate_dde(gupta(), dirac_cfg(1.0, 6.0, 500.0, 0.2, perturbed(hpa::GrLevel::High))),
        hpa::StepTooLarge);
    CHECK_THROWS_AS(
        hpa::simulate_dde(gupta(), dirac_cfg(25.0, 6.0, 100.0, 0.01, perturbed(hpa::GrLevel::High))),
        hpa::ConfigError); // t_end below 10x mean delay
}

TEST_CASE("equilibrium histories are invariant under all three solvers") {
    const State e = pick(equilibria(), hpa::GrLevel::High).state;
    auto max_dev = [&](const hpa::Trajectory& tr) {
        double worst = 0;
        for (const auto& s : tr.states) {
            worst = std::max(worst, std::abs(s.crh - e.crh));
            worst = std::max(worst, std::abs(s.acth - e.acth));
            worst = std::max(worst, std::abs(s.gr - e.gr));
            worst = std::max(worst, std::abs(s.cort - e.cort));
        }
        return worst;
    };
    CHECK(max_dev(hpa::simulate_dde(gupta(), dirac_cfg(25.0, 6.0, 1000.0, 0.02, e))) < 1e-8);

    SimConfig chain = dirac_cfg(0, 0, 1000.0, 0.02, e);
    chain.kernel1 = GammaKernel{1, 50.0};
    chain.kernel2 = GammaKernel{2, 10.0};
    CHECK(max_dev(hpa::simulate_chain(gupta(), chain)) < 1e-8);

    SimConfig frac = dirac_cfg(25.0, 6.0, 1000.0, 0.02, e);
    frac.order_q = 0.8;
    CHECK(max_dev(hpa::simulate_fractional(gupta(), frac)) < 1e-8);
}

TEST_CASE("DDE self-convergence: 4th order without delays, at least 3rd with") {
    const auto hist = perturbed(hpa::GrLevel::High);
    auto ratio = [&](double tau1, double tau2) {
        const double T = 20.0;
        const auto a = hpa::simulate_dde(gupta(), dirac_cfg(tau1, tau2, T, 0.04, hist));
        const auto b = hpa::simulate_dde(gupta(), dirac_cfg(tau1, tau2, T, 0.02, hist));
        const auto c = hpa::simulate_dde(gupta(), dirac_cfg(tau1, tau2, T, 0.01, hist));
        double e1 = 0, e2 = 0;
        for (std::size_t i = 0; i < a.states.size(); ++i) {
            const auto sa = a.states[i].to_array();
            const auto sb = b.states[2 * i].to_array();
            const auto sc = c.states[4 * i].to_array();
            for (int k = 0; k < 4; ++k) {
                e1 = std::max(e1, std::abs(sa[static_cast<size_t>(k)] - sc[static_cast<size_t>(k)]));
                e2 = std::max(e2, std::abs(sb[static_cast<size_t>(k)] - sc[static_cast<size_t>(k)]));
            }
        }
        return e1 / e2;
    };
    // error(h)/error(h/2) against an h/4 reference: (4^p-1)/(2^p-1), i.e. 17
    // for p = 4 and 9 for p = 3.
    CHECK(ratio(0.0, 0.0) > 12.0);
    CHECK(ratio(0.4, 0.8) > 7.0);
}

TEST_CASE("positivity: non-negative histories stay non-negative within tolerance") {
    // Start near zero so trajectories brush the axis.
    const State hist{1e-6, 1e-6, 1e-6, 1e-6};
    const auto traj = hpa::simulate_dde(gupta(), dirac_cfg(5.0, 2.0, 500.0, 0.05, hist));
    CHECK(traj.max_undershoot >= -1e-9);
    for (const auto& s : traj.states) {
        CHECK(s.crh >= 0.0);
        CHECK(s.acth >= 0.0);
        CHECK(s.gr >= 0.0);
        CHECK(s.cort >= 0.0);
    }
}

TEST_CASE("below the first crossing the high point attracts; just above, a cycle") {
    // Total delay 7 < 7.4718 < 8: verified against the linearized spectrum.
    const auto conv =
        hpa::simulate_dde(gupta(), dirac_cfg(5.0, 2.0, 3000.0, 0.02, perturbed(hpa::GrLevel::High)));
    const auto rc = hpa::classify_tail(conv, 0.5);
    CHECK(rc.cls == TailClass::Converging);
    const auto& high = pick(equilibria(), hpa::GrLevel::High).state;
    CHECK(conv.states.back().gr == Approx(high.gr).margin(1e-4));

    const auto osc =
        hpa::simulate_dde(gupta(), dirac_cfg(5.0, 3.0, 3000.0, 0.02, perturbed(hpa::GrLevel::High)));
    const auto ro = hpa::classify_tail(osc, 0.5);
    CHECK(ro.cls == TailClass::Oscillating);
    CHECK(ro.amplitude > 1e-3);
}

TEST_CASE("chain solver: exponential kernel matches the quadrature oracle") {
    // a = 0.1 keeps the high-GR point attracting, so the filtered signal has
    // genuine structure during the transient.
    SimConfig cfg;
    cfg.kernel1 = GammaKernel{1, 10.0};
    cfg.kernel2 = GammaKernel{1, 10.0};
    cfg.t_end = 400.0;
    cfg.dt = 0.01;
    cfg.history = perturbed(hpa::GrLevel::High, 5e-3);
    const auto nodes = hpa::simulate_chain_augmented(gupta(), cfg);

    std::vector<double> times(nodes.size()), cort(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        times[i] = static_cast<double>(i) * cfg.dt;
        cort[i] = nodes[i][3];
    }
    const double a = 1.0 / 10.0;
    for (std::size_t at : {nodes.size() / 4, nodes.size() / 2, nodes.size() - 1}) {
        const double oracle =
            oracles::filtered_exponential(times, cort, a, cfg.history.cort, at);
        CHECK(nodes[at][4] == Approx(oracle).margin(1e-4)); // first chain variable
    }
}

TEST_CASE("chain solver: beta -> 0 approaches the zero-delay ODE flow") {
    SimConfig cfg;
    cfg.kernel1 = GammaKernel{1, 1e-3};
    cfg.kernel2 = GammaKernel{1, 1e-3};
    cfg.t_end = 50.0;
    cfg.dt = 5e-4; // resolve the fast chain stages
    cfg.history = perturbed(hpa::GrLevel::High);
    const auto traj = hpa::simulate_chain(gupta(), cfg);
    const auto ref = plain_rk4(gupta(), cfg.history, cfg.t_end, cfg.dt);
    CHECK(sup_diff(ref, traj) < 1e-3);
}

TEST_CASE("chain solver rejects Dirac kernels and fractional orders") {
    SimConfig cfg;
    cfg.history = perturbed(hpa::GrLevel::High);
    CHECK_THROWS_AS(hpa::simulate_chain(gupta(), cfg), hpa::ConfigError);
    cfg.kernel1 = GammaKernel{1, 10.0};
    cfg.kernel2 = GammaKernel{1, 10.0};
    cfg.order_q = 0.8;
    cfg.t_end = 1000.0;
    CHECK_THROWS_AS(hpa::simulate_chain(gupta(), cfg), hpa::ConfigError);
}

TEST_CASE("classify_tail on synthetic inputs") {
    hpa::Trajectory flat;
    for (int i = 0; i < 1000; ++i) {
        flat.times.push_back(i * 0.1);
        flat.states.push_back(State{1, 1, 1, 0.25});
    }
    const auto rc = hpa::classify_tail(flat, 0.5);
    CHECK(rc.cls == TailClass::Converging);
    CHECK(rc.amplitude == 0.0);

    hpa::Trajectory wave;
    const double period = 17.0;
    for (int i = 0; i < 20000; ++i) {
        const double t = i * 0.05;
        wave.times.push_back(t);
        wave.states.push_back(
            State{1, 1, 1, 0.25 + 0.01 * std::sin(2 * std::numbers::pi * t / period)});
    }
    const auto rw = hpa::classify_tail(wave, 0.5);
    CHECK(rw.cls == TailClass::Oscillating);
    CHECK(rw.amplitude == Approx(0.02).margin(5e-4));
    const auto per = hpa::tail_period(wave, 0.5);
    REQUIRE(per.has_value());
    CHECK(*per == Approx(period).margin(0.05));

    hpa::Trajectory tiny;
    for (int i = 0; i < 50; ++i) {
        tiny.times.push_back(i * 0.1);
        tiny.states.push_back(State{});
    }
    CHECK_THROWS_AS(hpa::classify_tail(tiny, 0.5), hpa::TooShort);
}

TEST_CASE("hopf_onset_search brackets the first crossing at q = 1") {
    SimConfig base = dirac_cfg(5.0, 2.0, 1600.0, 0.02, perturbed(hpa::GrLevel::High));
    const double onset = hpa::hopf_onset_search(gupta(), base, 2.0, 3.4);
    // True crossing of tau1 + tau2 is 7.4718, so tau2* = 2.4718.
    CHECK(onset == Approx(2.4718).margin(0.3));
}

TEST_CASE("hopf_onset_search rejects non-straddling brackets") {
    SimConfig base = dirac_cfg(5.0, 2.0, 1000.0, 0.02, perturbed(hpa::GrLevel::High));
    CHECK_THROWS_AS(hpa::hopf_onset_search(gupta(), base, 1.0, 1.5), hpa::BracketInvalid);
}

TEST_CASE("CSV export format") {
    hpa::Trajectory tr;
    tr.times = {0.0, 0.5};
    tr.states = {State{1, 2, 3, 4}, State{1.5, 2.5, 3.5, 0.0514836844713492}};
    std::ostringstream os;
    hpa::write_csv(tr, os);
    const std::string text = os.str();
    CHECK(text.rfind("t,crh,acth,gr,cort\n", 0) == 0);
    CHECK(text.find('\r') == std::string::npos); // LF endings only
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
    // 17 significant digits round-trip doubles exactly.
    const auto last = text.rfind(',');
    CHECK(std::strtod(text.c_str() + last + 1, nullptr) == 0.0514836844713492);
}
