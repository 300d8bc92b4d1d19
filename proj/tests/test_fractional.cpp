#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>

#include "hpa/fractional.hpp"
#include "hpa/solver.hpp"
#include "oracles.hpp"

using Catch::Approx;
using hpa::DiracKernel;
using hpa::ModelParams;
using hpa::SimConfig;
using hpa::State;

namespace {

const ModelParams& gupta() {
    static const ModelParams p = ModelParams::gupta();
    return p;
}

State perturbed_high(double d = 1e-3) {
    static const auto r = hpa::solve_equilibria(gupta());
    State s = pick(r, hpa::GrLevel::High).state;
    s.crh += d;
    return s;
}

State low_point(double d = 1e-3) {
    static const auto r = hpa::solve_equilibria(gupta());
    State s = pick(r, hpa::GrLevel::Low).state;
    s.crh += d;
    return s;
}

} // namespace

TEST_CASE("scalar Caputo relaxation matches the Mittag-Leffler series") {
    // D^q x = -x, x(0) = 1; exact solution E_q(-t^q).
    const double q = 0.8, dt = 0.01;
    auto rhs = [](double, const std::array<double, 1>& y, const std::array<double, 0>&,
                  std::array<double, 1>& out) { out[0] = -y[0]; };
    const auto ys = hpa::fabm_integrate<1, 0>(rhs, {1.0}, dt, 100, q, {});
    const double got = ys.back()[0];
    const double want = oracles::mittag_leffler_neg(q, 1.0, 200);
    CHECK(got == Approx(want).margin(1e-4));
}

TEST_CASE("scalar Caputo relaxation at q = 1 is the plain exponential") {
    auto rhs = [](double, const std::array<double, 1>& y, const std::array<double, 0>&,
                  std::array<double, 1>& out) { out[0] = -y[0]; };
    const auto ys = hpa::fabm_integrate<1, 0>(rhs, {1.0}, 0.001, 1000, 1.0, {});
    CHECK(ys.back()[0] == Approx(std::exp(-1.0)).margin(1e-6));
}

TEST_CASE("q = 1 fractional run matches the RK4 DDE solver") {
    // Stable configuration (low-GR point attracts for every delay choice), so
    // the comparison is a genuine accuracy statement rather than chaos.
    SimConfig cfg;
    cfg.kernel1 = DiracKernel{25.0};
    cfg.kernel2 = DiracKernel{6.0};
    cfg.t_end = 500.0;
    cfg.dt = 0.01;
    cfg.history = low_point();
    cfg.order_q = 1.0;
    const auto frac = hpa::simulate_fractional(gupta(), cfg);
    const auto dde = hpa::simulate_dde(gupta(), cfg);
    double worst = 0;
    for (std::size_t i = 0; i < frac.states.size(); ++i) {
        const auto a = frac.states[i].to_array();
        const auto b = dde.states[i].to_array();
        for (int k = 0; k < 4; ++k)
            worst = std::max(worst, std::abs(a[static_cast<size_t>(k)] - b[static_cast<size_t>(k)]));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("fractional solver insists on grid-aligned delays") {
    SimConfig cfg;
    cfg.kernel1 = DiracKernel{25.003}; // not a multiple of dt
    cfg.kernel2 = DiracKernel{6.0};
    cfg.t_end = 500.0;
    cfg.dt = 0.01;
    cfg.order_q = 0.8;
    cfg.history = perturbed_high();
    CHECK_THROWS_AS(hpa::simulate_fractional(gupta(), cfg), hpa::DelayNotGridAligned);
}

TEST_CASE("fractional window straddles the q = 0.8 crossing") {
    // Semi-analytic crossing of the fractional characteristic function at
    // q = 0.8 sits at total delay 11.59; totals 11 and 13 straddle it.
    SimConfig cfg;
    cfg.kernel1 = DiracKernel{5.0};
    cfg.t_end = 2000.0;
    cfg.dt = 0.05;
    cfg.order_q = 0.8;
    cfg.history = perturbed_high();

    cfg.kernel2 = DiracKernel{6.0};
    const auto conv = hpa::classify_tail(hpa::simulate_fractional(gupta(), cfg), 0.5);
    CHECK(conv.cls == hpa::TailClass::Converging);

    cfg.kernel2 = DiracKernel{8.0};
    const auto osc = hpa::classify_tail(hpa::simulate_fractional(gupta(), cfg), 0.5);
    CHECK(osc.cls == hpa::TailClass::Oscillating);
}

TEST_CASE("halving dt changes an accepted fractional trajectory below 5e-4") {
    SimConfig cfg;
    cfg.kernel1 = DiracKernel{5.0};
    cfg.kernel2 = DiracKernel{6.0};
    cfg.t_end = 400.0;
    cfg.dt = 0.04;
    cfg.order_q = 0.8;
    cfg.history = perturbed_high();
    const auto coarse = hpa::simulate_fractional(gupta(), cfg);
    cfg.dt = 0.02;
    const auto fine = hpa::simulate_fractional(gupta(), cfg);
    double worst = 0;
    for (std::size_t i = 0; i < coarse.states.size(); ++i) {
        const auto a = coarse.states[i].to_array();
        const auto b = fine.states[2 * i].to_array();
        for (int k = 0; k < 4; ++k)
            worst = std::max(worst, std::abs(a[static_cast<size_t>(k)] - b[static_cast<size_t>(k)]));
    }
    CHECK(worst < 5e-4);
}
