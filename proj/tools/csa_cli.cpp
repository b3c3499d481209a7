// Command-line front end: analysis, simulation and distribution design
// with CSV/JSON emission for external plotting.
//
// Exit status: 0 ok, 2 configuration error, 3 numeric failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "csa/capacity.hpp"
#include "csa/density_evolution.hpp"
#include "csa/ensemble.hpp"
#include "csa/frame_sim.hpp"
#include "csa/optimizer.hpp"
#include "csa/rng.hpp"

namespace {

using nlohmann::json;

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

// All numeric output uses 6 significant digits.
std::string num(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", x);
    return buf;
}

double round_sig(double x) {
    if (x == 0.0 || !std::isfinite(x)) return x;
    std::stringstream ss;
    ss.precision(6);
    ss << x;
    double r;
    ss >> r;
    return r;
}

struct Inputs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::size_t workers = 0;
    double tolerance = 0.0;
    bool tolerance_set = false;

    std::string config_text;
    std::uint64_t config_hash = 0;

    json load_config() {
        std::ifstream in(config_path);
        if (!in) throw std::invalid_argument("cannot open config file: " + config_path);
        std::stringstream ss;
        ss << in.rdbuf();
        config_text = ss.str();
        config_hash = csa::fnv1a64(config_text.data(), config_text.size());
        return json::parse(config_text);
    }
    void hash_synthetic(const std::string& text) {
        config_text = text;
        config_hash = csa::fnv1a64(text.data(), text.size());
    }
    std::string hash_hex() const {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(config_hash));
        return buf;
    }
};

void add_common(CLI::App* cmd, Inputs& in, bool config_required = true) {
    auto* c = cmd->add_option("--config", in.config_path, "input configuration file (JSON)");
    if (config_required) c->required();
    cmd->add_option("--out", in.out_dir, "output directory");
    cmd->add_option("--seed", in.seed, "seed override")->each([&in](const std::string&) { in.seed_set = true; });
    cmd->add_option("--workers", in.workers, "worker thread count");
    cmd->add_option("--tolerance", in.tolerance, "numeric tolerance override")
        ->each([&in](const std::string&) { in.tolerance_set = true; });
}

std::ofstream open_out(const Inputs& in, const std::string& name) {
    std::filesystem::create_directories(in.out_dir);
    const auto path = std::filesystem::path(in.out_dir) / name;
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    return f;
}

// Primary outputs are byte-stable for fixed inputs; wall-clock data
// goes only into this sidecar.
void write_sidecar(const Inputs& in, const std::string& command) {
    if (in.out_dir.empty()) return;
    const auto now = std::chrono::system_clock::now();
    json meta{{"command", command},
              {"config_hash", in.hash_hex()},
              {"unix_time", std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count()}};
    open_out(in, "run_meta.json") << meta.dump(2) << '\n';
}

void emit(const Inputs& in, const std::string& name, const std::string& content) {
    if (!in.out_dir.empty()) open_out(in, name) << content;
}

json verdict_json(csa::DeTrace::Verdict v) {
    switch (v) {
        case csa::DeTrace::Verdict::converged_to_zero: return "converged";
        case csa::DeTrace::Verdict::stalled: return "stalled";
        default: return "iteration-cap";
    }
}

int cmd_threshold(Inputs& in) {
    const json cfg = in.load_config();
    const csa::ComponentDistribution dist = csa::distribution_from_json(cfg);
    const double tol = in.tolerance_set ? in.tolerance : 1e-4;
    const auto r = csa::threshold(dist, tol);
    json probes = json::array();
    for (const auto& [g, v] : r.probes) probes.push_back({{"G", round_sig(g)}, {"verdict", verdict_json(v)}});
    const json out{{"G_star", round_sig(r.g_star)},
                   {"tolerance", r.tolerance},
                   {"lower", round_sig(r.lower)},
                   {"upper", round_sig(r.upper)},
                   {"rate", round_sig(dist.rate())},
                   {"config_hash", in.hash_hex()},
                   {"probes", probes}};
    std::cout << out.dump(2) << '\n';
    emit(in, "threshold.json", out.dump(2) + "\n");
    write_sidecar(in, "threshold");
    return 0;
}

int cmd_stability(Inputs& in) {
    const json cfg = in.load_config();
    const csa::ComponentDistribution dist = csa::distribution_from_json(cfg);
    const double b = csa::stability_bound(dist);
    json out{{"B2", round_sig(dist.b2_mixture())},
             {"k", dist.k()},
             {"rate", round_sig(dist.rate())},
             {"config_hash", in.hash_hex()}};
    out["stability_bound"] = std::isinf(b) ? json() : json(round_sig(b));
    std::cout << out.dump(2) << '\n';
    emit(in, "stability.json", out.dump(2) + "\n");
    write_sidecar(in, "stability");
    return 0;
}

int cmd_bound(Inputs& in, const std::string& grid_expr) {
    std::vector<double> grid;
    if (!in.config_path.empty()) {
        const json cfg = in.load_config();
        grid = cfg.at("grid").get<std::vector<double>>();
    } else if (!grid_expr.empty()) {
        double lo = 0, hi = 0, step = 0;
        if (std::sscanf(grid_expr.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 || step <= 0)
            throw std::invalid_argument("bad --grid (want start:stop:step)");
        for (double r = lo; r <= hi + 1e-12; r += step) grid.push_back(r);
        in.hash_synthetic("bound:" + grid_expr);
    } else {
        throw std::invalid_argument("bound: need --config or --grid");
    }
    std::ostringstream csv;
    csv << "# config_hash=" << in.hash_hex() << "\nR,G_bound\n";
    int status = 0;
    for (double r : grid) {
        try {
            csv << num(r) << ',' << num(csa::capacity_bound(r)) << '\n';
        } catch (const std::exception& e) {
            std::cerr << "bound: R=" << r << ": " << e.what() << '\n';
            status = kExitConfig;
        }
    }
    std::cout << csv.str();
    emit(in, "bound.csv", csv.str());
    write_sidecar(in, "bound");
    return status;
}

int cmd_exit_chart(Inputs& in, double load, std::size_t samples) {
    const json cfg = in.load_config();
    const csa::ComponentDistribution dist = csa::distribution_from_json(cfg);
    const auto chart = csa::exit_chart(dist, load, samples);
    std::ostringstream csv;
    csv << "# config_hash=" << in.hash_hex() << "\n";
    csv << "# G=" << num(load) << " R=" << num(dist.rate()) << " area_bn=" << num(chart.area_bn)
        << " area_sn=" << num(chart.area_sn) << "\n";
    csv << "p,f_b,f_s_inv\n";
    for (const auto& row : chart.rows) csv << num(row.p) << ',' << num(row.f_b) << ',' << num(row.f_s_inv) << '\n';
    std::cout << csv.str();
    emit(in, "exit_chart.csv", csv.str());
    write_sidecar(in, "exit-chart");
    return 0;
}

std::string campaign_csv(const Inputs& in, const csa::CampaignConfig& cfg, const csa::CampaignReport& rep) {
    std::ostringstream csv;
    csv << "# config_hash=" << in.hash_hex() << "\n";
    const bool both = cfg.decoder == csa::CampaignConfig::Decoder::both;
    csv << "load,S,PLR,ci_half,iters_mean,frames,load_realized";
    if (both) csv << ",genie_S,genie_PLR";
    csv << "\n";
    for (const auto& p : rep.points) {
        csv << num(p.offered_load) << ',' << num(p.throughput) << ',' << num(p.plr) << ',' << num(p.ci_half) << ','
            << num(p.iters_mean) << ',' << p.frames << ',' << num(p.load_realized);
        if (both) csv << ',' << num(p.genie_throughput) << ',' << num(p.genie_plr);
        csv << '\n';
    }
    return csv.str();
}

int cmd_simulate(Inputs& in) {
    const json cfg_json = in.load_config();
    csa::CampaignConfig cfg = csa::campaign_config_from_json(cfg_json);
    if (in.seed_set) cfg.seed = in.seed;
    if (in.workers > 0) cfg.workers = in.workers;
    const auto rep = csa::run_campaign(cfg);
    const std::string csv = campaign_csv(in, cfg, rep);
    json j = csa::campaign_report_to_json(cfg, rep);
    j["config_hash"] = in.hash_hex();
    j["seed"] = cfg.seed;
    for (auto& p : j["points"])
        for (auto& [key, value] : p.items())
            if (value.is_number_float()) value = round_sig(value.get<double>());
    std::cout << csv;
    emit(in, "campaign.csv", csv);
    emit(in, "campaign.json", j.dump(2) + "\n");
    write_sidecar(in, "simulate");
    return 0;
}

int cmd_optimize(Inputs& in) {
    const json cfg = in.load_config();
    csa::DesignProblem problem = csa::design_problem_from_json(cfg);
    if (in.seed_set) problem.seed = in.seed;
    if (in.workers > 0) problem.workers = in.workers;
    if (in.tolerance_set) problem.threshold_tolerance = in.tolerance;
    const auto result = csa::optimize(problem);
    json j = csa::design_result_to_json(problem, result);
    j["config_hash"] = in.hash_hex();
    j["threshold"] = round_sig(result.threshold);
    j["rate"] = round_sig(result.rate);
    j["stability_bound"] = std::isinf(result.stability_bound) ? json() : json(round_sig(result.stability_bound));
    std::cout << j.dump(2) << '\n';
    emit(in, "design.json", j.dump(2) + "\n");
    std::ostringstream csv;
    csv << "# config_hash=" << in.hash_hex() << "\ngeneration,best_threshold\n";
    for (std::size_t g = 0; g < result.trajectory.size(); ++g) csv << g << ',' << num(result.trajectory[g]) << '\n';
    emit(in, "trajectory.csv", csv.str());
    write_sidecar(in, "optimize");
    return 0;
}

int cmd_ensemble(Inputs& in, std::size_t n, std::size_t k, std::uint64_t samples) {
    if (!in.config_path.empty()) {
        const json cfg = in.load_config();
        n = cfg.at("n").get<std::size_t>();
        k = cfg.at("k").get<std::size_t>();
        samples = cfg.value("samples", std::uint64_t{0});
    } else {
        std::ostringstream key;
        key << "ensemble:" << n << ':' << k << ':' << samples << ':' << (in.seed_set ? in.seed : 0);
        in.hash_synthetic(key.str());
    }
    if (n == 0 || k == 0) throw std::invalid_argument("ensemble: need n and k");
    csa::EnsembleExpectation ee;
    if (samples == 0 && k * n <= 24)
        ee = csa::enumerate_random_ensemble(n, k);
    else
        ee = csa::sample_random_ensemble(n, k, samples ? samples : 200'000, in.seed_set ? in.seed : 0xC5A05EEDULL);
    json e = json::array(), se = json::array();
    for (double v : ee.e) e.push_back(round_sig(v));
    for (double v : ee.e_stderr) se.push_back(round_sig(v));
    const json out{{"n", ee.n},
                   {"k", ee.k},
                   {"exact", ee.exact},
                   {"members", ee.member_count},
                   {"samples", ee.samples},
                   {"E_e", e},
                   {"E_e_stderr", se},
                   {"E_B2", round_sig(ee.b2)},
                   {"E_B2_stderr", round_sig(ee.b2_stderr)},
                   {"config_hash", in.hash_hex()}};
    std::cout << out.dump(2) << '\n';
    emit(in, "ensemble.json", out.dump(2) + "\n");
    write_sidecar(in, "ensemble");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coded slotted ALOHA analysis, simulation and design toolkit"};
    app.require_subcommand(1);

    Inputs in;
    double load = 0.0;
    std::size_t samples = 201;
    std::string grid_expr;
    std::size_t ens_n = 0, ens_k = 0;
    std::uint64_t ens_samples = 0;

    auto* c_threshold = app.add_subcommand("threshold", "asymptotic threshold of a distribution");
    add_common(c_threshold, in);
    auto* c_stability = app.add_subcommand("stability", "stability upper bound of a distribution");
    add_common(c_stability, in);
    auto* c_bound = app.add_subcommand("bound", "capacity bound over a rate grid");
    add_common(c_bound, in, false);
    c_bound->add_option("--grid", grid_expr, "rate grid start:stop:step");
    auto* c_chart = app.add_subcommand("exit-chart", "EXIT chart table at a given load");
    add_common(c_chart, in);
    c_chart->add_option("--load", load, "channel load G")->required();
    c_chart->add_option("--samples", samples, "grid points (default 201)");
    auto* c_sim = app.add_subcommand("simulate", "Monte Carlo campaign");
    add_common(c_sim, in);
    auto* c_opt = app.add_subcommand("optimize", "distribution design by differential evolution");
    add_common(c_opt, in);
    auto* c_ens = app.add_subcommand("ensemble", "random-ensemble expectations");
    add_common(c_ens, in, false);
    c_ens->add_option("--n", ens_n, "code length");
    c_ens->add_option("--k", ens_k, "code dimension");
    c_ens->add_option("--samples", ens_samples, "force sampling with this many draws");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (c_threshold->parsed()) return cmd_threshold(in);
        if (c_stability->parsed()) return cmd_stability(in);
        if (c_bound->parsed()) return cmd_bound(in, grid_expr);
        if (c_chart->parsed()) return cmd_exit_chart(in, load, samples);
        if (c_sim->parsed()) return cmd_simulate(in);
        if (c_opt->parsed()) return cmd_optimize(in);
        if (c_ens->parsed()) return cmd_ensemble(in, ens_n, ens_k, ens_samples);
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumeric;
    }
    return 0;
}
