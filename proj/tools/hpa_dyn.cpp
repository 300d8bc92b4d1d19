// hpa-dyn: command-line front end for the HPA-axis delay/fractional model.
//
//   hpa-dyn <equilibria|stability|simulate|sweep> --config <path> [overrides]
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hpa/hpa.hpp"

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void reject_unknown_keys(const json& obj, const char* section,
                         std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw hpa::ConfigError(std::string(section) + " must be a JSON object");
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        bool ok = false;
        for (const char* k : allowed) ok = ok || (key == k);
        if (!ok)
            throw hpa::ConfigError(std::string("unknown key \"") + key + "\" in " + section);
    }
}

hpa::GrLevel parse_level(const std::string& s) {
    if (s == "low") return hpa::GrLevel::Low;
    if (s == "medium") return hpa::GrLevel::Medium;
    if (s == "high") return hpa::GrLevel::High;
    throw hpa::ConfigError("equilibrium must be one of low|medium|high, got \"" + s + "\"");
}

hpa::DelayKernel parse_kernel(const json& j, const char* name) {
    reject_unknown_keys(j, name, {"type", "tau", "p", "beta"});
    const std::string type = j.at("type").get<std::string>();
    if (type == "dirac") return hpa::DiracKernel{j.at("tau").get<double>()};
    if (type == "gamma")
        return hpa::GammaKernel{j.value("p", 1), j.at("beta").get<double>()};
    throw hpa::ConfigError(std::string(name) + ".type must be dirac|gamma");
}

struct Overrides {
    std::optional<double> tau1, tau2, q, a, a20, t_end, dt;
    std::optional<int> grid_n, j_max;
    std::optional<std::string> kernel;
};

hpa::ModelParams params_of(const json& cfg) {
    if (!cfg.contains("params")) throw hpa::ConfigError("config is missing \"params\"");
    return cfg.at("params").get<hpa::ModelParams>();
}

hpa::Equilibrium equilibrium_of(const hpa::ModelParams& p, const json& section) {
    const std::string level = section.value("equilibrium", "high");
    return pick(hpa::solve_equilibria(p), parse_level(level));
}

ordered_json equilibrium_json(const hpa::Equilibrium& e) {
    ordered_json js;
    ordered_json st;
    to_json(st, e.state);
    js["state"] = st;
    js["residual"] = e.residual;
    js["gr_level"] = to_string(e.gr_level);
    return js;
}

int cmd_equilibria(const json& cfg, const Overrides& ov, std::ostream& out) {
    const auto p = params_of(cfg);
    double lo = 1e-6, hi = 1e3 / std::max(1.0, p.d1 / p.d2);
    int grid_n = 100000;
    if (cfg.contains("equilibria")) {
        const auto& sec = cfg.at("equilibria");
        reject_unknown_keys(sec, "equilibria", {"bracket", "grid_n"});
        if (sec.contains("bracket")) {
            lo = sec.at("bracket").at(0).get<double>();
            hi = sec.at("bracket").at(1).get<double>();
        }
        grid_n = sec.value("grid_n", grid_n);
    }
    if (ov.grid_n) grid_n = *ov.grid_n;

    const auto result = hpa::solve_equilibria(p, lo, hi, grid_n);
    ordered_json js;
    js["equilibria"] = ordered_json::array();
    for (const auto& e : result.equilibria) js["equilibria"].push_back(equilibrium_json(e));
    js["rejected"] = ordered_json::array();
    for (const auto& r : result.rejected)
        js["rejected"].push_back(ordered_json{{"x2", r.x2}, {"reason", r.reason}});
    out << js.dump(2) << "\n";
    return 0;
}

int cmd_stability(const json& cfg, const Overrides& ov, std::ostream& out) {
    const auto p = params_of(cfg);
    json sec = cfg.value("stability", json::object());
    reject_unknown_keys(sec, "stability",
                        {"kernel", "equilibrium", "j_max", "a20", "a", "a_bracket"});
    std::string kernel = sec.value("kernel", "dirac");
    if (ov.kernel) kernel = *ov.kernel;
    int j_max = sec.value("j_max", 3);
    if (ov.j_max) j_max = *ov.j_max;

    const auto eq = equilibrium_of(p, sec);
    const auto coeffs = hpa::linearize(p, eq);

    hpa::StabilityReport rep;
    std::optional<hpa::GammaHopf> hopf;
    bool searched = false;
    if (kernel == "none") {
        rep = hpa::no_delay_stability(coeffs);
    } else if (kernel == "dirac") {
        rep = hpa::dirac_critical_delays(coeffs, j_max);
    } else if (kernel == "mixed") {
        double a20 = sec.value("a20", 1.0);
        if (ov.a20) a20 = *ov.a20;
        rep = hpa::mixed_critical_delays(coeffs, a20, j_max);
    } else if (kernel == "gamma") {
        double a = sec.value("a", 1.0);
        if (ov.a) a = *ov.a;
        rep = hpa::weak_gamma_stability(coeffs, a);
        if (sec.contains("a_bracket")) {
            hopf = hpa::gamma_hopf_search(coeffs, sec.at("a_bracket").at(0).get<double>(),
                                          sec.at("a_bracket").at(1).get<double>());
            searched = true;
        }
    } else {
        throw hpa::ConfigError("stability.kernel must be none|dirac|mixed|gamma");
    }

    ordered_json js;
    to_json(js, rep);
    if (searched) {
        if (hopf)
            js["hopf"] = ordered_json{{"a0", hopf->a0}, {"omega0", hopf->omega0}};
        else
            js["hopf"] = nullptr;
    }
    out << js.dump(2) << "\n";
    return 0;
}

struct SimSpec {
    hpa::SimConfig cfg;
    std::string csv;
};

SimSpec parse_sim(const hpa::ModelParams& p, const json& sec, const Overrides& ov) {
    reject_unknown_keys(sec, "simulate",
                        {"q", "kernel1", "kernel2", "t_end", "dt", "equilibrium", "perturb_crh",
                         "history", "transient_fraction", "csv"});
    SimSpec spec;
    spec.cfg.order_q = sec.value("q", 1.0);
    spec.cfg.t_end = sec.value("t_end", 5000.0);
    spec.cfg.dt = sec.value("dt", 0.01);
    spec.cfg.transient_fraction = sec.value("transient_fraction", 0.5);
    if (sec.contains("kernel1")) spec.cfg.kernel1 = parse_kernel(sec.at("kernel1"), "kernel1");
    if (sec.contains("kernel2")) spec.cfg.kernel2 = parse_kernel(sec.at("kernel2"), "kernel2");

    if (ov.q) spec.cfg.order_q = *ov.q;
    if (ov.t_end) spec.cfg.t_end = *ov.t_end;
    if (ov.dt) spec.cfg.dt = *ov.dt;
    if (ov.kernel && *ov.kernel == "gamma") {
        const double a = ov.a ? *ov.a : 1.0;
        spec.cfg.kernel1 = hpa::GammaKernel{1, 1.0 / a};
        spec.cfg.kernel2 = hpa::GammaKernel{1, 1.0 / a};
    } else if (ov.a && std::holds_alternative<hpa::GammaKernel>(spec.cfg.kernel1)) {
        spec.cfg.kernel1 = hpa::GammaKernel{1, 1.0 / *ov.a};
        spec.cfg.kernel2 = hpa::GammaKernel{1, 1.0 / *ov.a};
    }
    if (ov.tau1) spec.cfg.kernel1 = hpa::DiracKernel{*ov.tau1};
    if (ov.tau2) spec.cfg.kernel2 = hpa::DiracKernel{*ov.tau2};

    if (sec.contains("history")) {
        spec.cfg.history = sec.at("history").get<hpa::State>();
    } else {
        const auto eq = equilibrium_of(p, sec);
        spec.cfg.history = eq.state;
        spec.cfg.history.crh += sec.value("perturb_crh", 1e-3);
    }
    spec.csv = sec.value("csv", std::string{});
    return spec;
}

int cmd_simulate(const json& cfg, const Overrides& ov, std::ostream& out) {
    const auto p = params_of(cfg);
    const auto spec = parse_sim(p, cfg.value("simulate", json::object()), ov);
    const hpa::Trajectory traj = hpa::simulate(p, spec.cfg);
    const hpa::TailReport tail = hpa::classify_tail(traj, spec.cfg.transient_fraction);

    if (!spec.csv.empty()) {
        std::ofstream f(spec.csv, std::ios::binary);
        if (!f) throw hpa::ConfigError("cannot open CSV output file: " + spec.csv);
        hpa::write_csv(traj, f);
    }
    ordered_json js;
    js["class"] = to_string(tail.cls);
    js["amplitude"] = tail.amplitude;
    if (const auto period = hpa::tail_period(traj, spec.cfg.transient_fraction))
        js["period"] = *period;
    js["max_undershoot"] = traj.max_undershoot;
    out << js.dump(2) << "\n";
    return 0;
}

int cmd_sweep(const json& cfg, const Overrides& ov, std::ostream& out) {
    const auto p = params_of(cfg);
    json sec = cfg.value("sweep", json::object());
    reject_unknown_keys(sec, "sweep",
                        {"q", "tau1", "tau_total", "t_end", "dt", "equilibrium", "perturb_crh",
                         "transient_fraction", "csv"});
    std::vector<double> qs = sec.value("q", std::vector<double>{1.0});
    std::vector<double> totals = sec.value("tau_total", std::vector<double>{});
    double tau1 = sec.value("tau1", 25.0);
    if (ov.tau1) tau1 = *ov.tau1;

    hpa::SimConfig base;
    base.t_end = sec.value("t_end", 3000.0);
    base.dt = sec.value("dt", 0.02);
    base.transient_fraction = sec.value("transient_fraction", 0.5);
    if (ov.t_end) base.t_end = *ov.t_end;
    if (ov.dt) base.dt = *ov.dt;
    {
        const auto eq = equilibrium_of(p, sec);
        base.history = eq.state;
        base.history.crh += sec.value("perturb_crh", 1e-3);
    }

    struct Cell {
        double q, tau2;
        std::string verdict;
        double amplitude;
    };
    std::vector<Cell> cells;
    for (double q : qs)
        for (double total : totals) cells.push_back({q, total - tau1, "", 0.0});
    if (cells.size() > 10000) throw hpa::ConfigError("sweep grid exceeds 10^4 cells");

    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("HPA_DYN_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1) threads = std::min<unsigned>(threads, static_cast<unsigned>(cap));
    }
    threads = std::min<unsigned>(threads, std::max<std::size_t>(cells.size(), 1));

    std::atomic<std::size_t> next{0};
    std::atomic<bool> numerical_failure{false};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1)) {
            try {
                hpa::SimConfig cfg_i = base;
                cfg_i.order_q = cells[i].q;
                cfg_i.kernel1 = hpa::DiracKernel{tau1};
                cfg_i.kernel2 = hpa::DiracKernel{cells[i].tau2};
                const auto traj = hpa::simulate(p, cfg_i);
                const auto tail = hpa::classify_tail(traj, cfg_i.transient_fraction);
                cells[i].verdict = to_string(tail.cls);
                cells[i].amplitude = tail.amplitude;
            } catch (const std::exception& e) {
                cells[i].verdict = std::string("Error: ") + e.what();
                numerical_failure = true;
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t + 1 < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::ostringstream csv;
    csv << "q,tau1,tau2,tau_total,verdict,amplitude\n";
    char buf[200];
    for (const auto& c : cells) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%s,%.17g\n", c.q, tau1, c.tau2,
                      tau1 + c.tau2, c.verdict.c_str(), c.amplitude);
        csv << buf;
    }
    const std::string csv_path = sec.value("csv", std::string{});
    if (!csv_path.empty()) {
        std::ofstream f(csv_path, std::ios::binary);
        if (!f) throw hpa::ConfigError("cannot open CSV output file: " + csv_path);
        f << csv.str();
    } else {
        out << csv.str();
    }
    if (numerical_failure) throw hpa::NumericalError("one or more sweep cells failed");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"HPA-axis delay/fractional dynamics toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    bool validate_only = false;
    Overrides ov;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--out", out_path, "write the JSON/CSV report here instead of stdout");
        sub->add_flag("--validate", validate_only, "parse and validate the config, then exit");
        sub->add_option("--tau1", ov.tau1, "override: Dirac lag of kernel 1 (CORT feedback)");
        sub->add_option("--tau2", ov.tau2, "override: Dirac lag of kernel 2 (ACTH->CORT)");
        sub->add_option("--q", ov.q, "override: fractional order");
        sub->add_option("--a", ov.a, "override: weak-gamma rate (beta = 1/a)");
        sub->add_option("--a20", ov.a20, "override: mixed-case exponential rate");
        sub->add_option("--kernel", ov.kernel, "override: stability case (none|dirac|mixed|gamma)");
        sub->add_option("--t-end", ov.t_end, "override: simulation length (min)");
        sub->add_option("--dt", ov.dt, "override: step size (min)");
        sub->add_option("--grid-n", ov.grid_n, "override: equilibrium scan grid");
        sub->add_option("--j-max", ov.j_max, "override: number of delay branches");
    };

    CLI::App* eq = app.add_subcommand("equilibria", "find all positive equilibria");
    CLI::App* st = app.add_subcommand("stability", "linear stability / Hopf analysis");
    CLI::App* si = app.add_subcommand("simulate", "integrate one trajectory and classify it");
    CLI::App* sw = app.add_subcommand("sweep", "grid of simulations -> CSV stability map");
    for (CLI::App* sub : {eq, st, si, sw}) add_common(sub);

    CLI11_PARSE(app, argc, argv);

    try {
        std::ifstream f(config_path);
        if (!f) throw hpa::ConfigError("cannot open config file: " + config_path);
        json cfg;
        try {
            cfg = json::parse(f);
        } catch (const json::exception& e) {
            throw hpa::ConfigError(std::string("config is not valid JSON: ") + e.what());
        }
        reject_unknown_keys(cfg, "config", {"params", "equilibria", "stability", "simulate", "sweep"});
        const auto p = params_of(cfg); // validates parameter block up front
        (void)p;
        if (validate_only) {
            std::cout << "ok\n";
            return 0;
        }

        std::ofstream out_file;
        std::ostream* out = &std::cout;
        if (!out_path.empty()) {
            out_file.open(out_path, std::ios::binary);
            if (!out_file) throw hpa::ConfigError("cannot open output file: " + out_path);
            out = &out_file;
        }

        if (eq->parsed()) return cmd_equilibria(cfg, ov, *out);
        if (st->parsed()) return cmd_stability(cfg, ov, *out);
        if (si->parsed()) return cmd_simulate(cfg, ov, *out);
        if (sw->parsed()) return cmd_sweep(cfg, ov, *out);
        return 2;
    } catch (const hpa::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const hpa::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}
