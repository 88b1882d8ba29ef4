// Command-line driver: batch experiments in, CSV + manifest (+ SVG) out.
// Every run is fully determined by (config, master seed); the manifest
// embeds both so `replay` can reproduce the outputs byte for byte.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "taseplab/blocks.hpp"
#include "taseplab/concentration.hpp"
#include "taseplab/csvio.hpp"
#include "taseplab/disorder.hpp"
#include "taseplab/errors.hpp"
#include "taseplab/lpp.hpp"
#include "taseplab/maxcurrent.hpp"
#include "taseplab/parallel.hpp"
#include "taseplab/reference.hpp"
#include "taseplab/renorm.hpp"
#include "taseplab/rng.hpp"
#include "taseplab/tasep.hpp"

#include "verify_suite.hpp"

#ifndef TASEPLAB_VERSION
#define TASEPLAB_VERSION "0.1.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace taseplab;

namespace {

struct RunContext {
    std::string subcommand;
    json config;
    std::uint64_t seed = 1;
    fs::path out_dir = ".";
    int workers = 0;
    bool plot = false;
    std::vector<fs::path> outputs;

    fs::path emit(const std::string& name, const std::string& content) {
        const fs::path p = out_dir / name;
        std::ofstream f(p, std::ios::binary);
        if (!f) throw validation_error("cannot open output file " + p.string());
        f << content;
        outputs.push_back(p);
        return p;
    }
    void note_output(const fs::path& p) { outputs.push_back(p); }
};

void reject_unknown_keys(const json& j, const std::vector<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw validation_error(where + ": expected a JSON object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        bool ok = false;
        for (const auto& a : allowed)
            if (key == a) ok = true;
        if (!ok) throw validation_error(where + ": unknown key '" + key + "'");
    }
}

DisorderSpec spec_from_config(const json& j, std::uint64_t default_seed) {
    DisorderSpec spec = DisorderSpec::from_json(j.dump());
    if (!j.contains("seed")) spec.seed = default_seed;
    return spec;
}

RenormParams params_from_config(const json& j, const std::string& where) {
    reject_unknown_keys(j, {"r", "a", "b", "beta", "c", "gamma", "C_fluct", "epsilon", "K1"}, where);
    RenormParams p;
    if (j.contains("r")) p.r = j["r"].get<double>();
    if (j.contains("a")) p.a = j["a"].get<double>();
    if (j.contains("b")) p.b = j["b"].get<double>();
    if (j.contains("beta")) p.beta = j["beta"].get<double>();
    if (j.contains("c")) p.c = j["c"].get<double>();
    if (j.contains("gamma")) p.gamma = j["gamma"].get<double>();
    if (j.contains("C_fluct")) p.C_fluct = j["C_fluct"].get<double>();
    if (j.contains("epsilon")) p.epsilon = j["epsilon"].get<double>();
    if (j.contains("K1")) p.K1 = j["K1"].get<std::int64_t>();
    p.validate();
    return p;
}

std::vector<double> densities_from_config(const json& j) {
    std::vector<double> out;
    if (j.is_array()) {
        for (const auto& v : j) out.push_back(v.get<double>());
    } else {
        reject_unknown_keys(j, {"from", "to", "step"}, "densities");
        const double from = j["from"].get<double>(), to = j["to"].get<double>(), step = j["step"].get<double>();
        if (!(step > 0.0)) throw validation_error("densities.step must be positive");
        for (double rho = from; rho <= to + 1e-12; rho += step) out.push_back(rho);
    }
    if (out.empty()) throw validation_error("densities: empty");
    return out;
}

// --- subcommand bodies ------------------------------------------------------

void run_flux_curve(RunContext& ctx) {
    reject_unknown_keys(ctx.config, {"spec", "densities", "L", "t_max", "replicas"}, "flux-curve");
    const DisorderSpec spec = spec_from_config(ctx.config.at("spec"), ctx.seed);
    const auto densities = densities_from_config(ctx.config.at("densities"));
    const auto L = ctx.config.value("L", std::int64_t{1024});
    const double t_max = ctx.config.value("t_max", 2e4);
    const int replicas = ctx.config.value("replicas", 4);

    const FluxCurveResult curve = flux_curve(spec, densities, L, t_max, replicas, ctx.seed);
    CsvWriter csv({"rho", "flux", "stderr", "replicas", "L", "t_max", "seed"});
    for (const auto& s : curve.samples)
        csv.begin_row().col(s.rho).col(s.flux).col(s.stderr_).col(replicas).col(L).col(t_max).col(ctx.seed);
    const fs::path p = ctx.emit("flux_curve.csv", csv.str());
    if (ctx.plot) {
        svg_plot_from_csv(p.string(), (ctx.out_dir / "flux_curve.svg").string(), "rho", {"flux"}, "flux curve");
        ctx.note_output(ctx.out_dir / "flux_curve.svg");
    }
    std::printf("flux-curve: %zu densities, symmetry defect %.3g (pooled se %.3g)\n", curve.samples.size(),
                curve.symmetry_defect, curve.symmetry_pooled_se);
}

void run_shape(RunContext& ctx) {
    reject_unknown_keys(ctx.config, {"spec", "x", "y", "N", "replicas"}, "shape");
    const DisorderSpec spec = spec_from_config(ctx.config.at("spec"), ctx.seed);
    const double x = ctx.config.at("x").get<double>(), y = ctx.config.at("y").get<double>();
    const auto N = ctx.config.at("N").get<std::int64_t>();
    const int replicas = ctx.config.value("replicas", 8);

    const MeanEstimate est = shape_estimate(spec, x, y, N, replicas, ctx.seed);
    CsvWriter csv({"x", "y", "N", "replicas", "tau_hat", "stderr"});
    csv.begin_row().col(x).col(y).col(N).col(replicas).col(est.value).col(est.stderr_);
    ctx.emit("shape.csv", csv.str());
    std::printf("shape: tau_hat(%g,%g) = %.6f +- %.6f at N=%lld\n", x, y, est.value, est.stderr_,
                static_cast<long long>(N));
}

void run_max_current(RunContext& ctx) {
    reject_unknown_keys(ctx.config, {"spec", "rate", "sizes", "mode", "t_max"}, "max-current");
    std::vector<int> sizes;
    for (const auto& v : ctx.config.at("sizes")) sizes.push_back(v.get<int>());
    const std::string mode = ctx.config.value("mode", std::string("exact"));
    const double t_max = ctx.config.value("t_max", 2e5);

    CsvWriter csv({"N", "current", "half_width", "residual", "bond_spread", "mode"});
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        const int N = sizes[i];
        OpenSystem sys;
        if (ctx.config.contains("rate")) {
            sys = OpenSystem::homogeneous(N, ctx.config["rate"].get<double>());
        } else {
            DisorderSpec spec = spec_from_config(ctx.config.at("spec"), ctx.seed);
            spec.seed = derive_seed(spec.seed, "max-current", i);
            sys = OpenSystem::from_box(sample_environment(spec, {0, N}), {0, N});
        }
        if (mode == "exact") {
            const auto ec = stationary_current_exact(sys);
            csv.begin_row().col(N).col(ec.current).col(0.0).col(ec.residual).col(ec.bond_spread).col(mode);
        } else if (mode == "mc") {
            const auto est = stationary_current_mc(sys, t_max, derive_seed(ctx.seed, "max-current-mc", i));
            csv.begin_row().col(N).col(est.value).col(est.half_width).col(0.0).col(0.0).col(mode);
        } else {
            throw validation_error("max-current: mode must be 'exact' or 'mc'");
        }
    }
    const fs::path p = ctx.emit("max_current.csv", csv.str());
    if (ctx.plot) {
        svg_plot_from_csv(p.string(), (ctx.out_dir / "max_current.svg").string(), "N", {"current"},
                          "maximal current");
        ctx.note_output(ctx.out_dir / "max_current.svg");
    }
}

void run_assumption_h(RunContext& ctx) {
    reject_unknown_keys(ctx.config, {"spec", "a", "b", "beta", "c", "sizes", "replicas"}, "assumption-h");
    DisorderSpec spec = spec_from_config(ctx.config.at("spec"), ctx.seed);
    std::vector<int> sizes;
    for (const auto& v : ctx.config.at("sizes")) sizes.push_back(v.get<int>());
    const auto rows = assumption_h_probe(spec, ctx.config.value("a", 1.0), ctx.config.value("b", 1.0),
                                         ctx.config.value("beta", 1.0), ctx.config.value("c", 1.0), sizes,
                                         ctx.config.value("replicas", 200));
    CsvWriter csv({"N", "threshold", "p_hat", "ci_lo", "ci_hi", "bound_cN_beta", "verdict"});
    for (const auto& row : rows)
        csv.begin_row()
            .col(row.N)
            .col(row.threshold)
            .col(row.p_hat)
            .col(row.ci_lo)
            .col(row.ci_hi)
            .col(row.bound)
            .col(std::string(h_verdict_name(row.verdict)));
    const fs::path p = ctx.emit("assumption_h.csv", csv.str());
    if (ctx.plot) {
        svg_plot_from_csv(p.string(), (ctx.out_dir / "assumption_h.svg").string(), "N",
                          {"p_hat", "bound_cN_beta"}, "current-decay probe");
        ctx.note_output(ctx.out_dir / "assumption_h.svg");
    }
}

json constants_json(const ScaleTable& scales) {
    json c;
    c["K_star_eps"] = scales.constants.K_star_eps;
    c["K_star_low"] = scales.constants.K_star_low;
    c["gamma0"] = scales.constants.gamma0;
    c["eps0"] = scales.constants.eps0;
    c["approximate"] = scales.approximate;
    return c;
}

void run_renorm(RunContext& ctx) {
    reject_unknown_keys(ctx.config, {"params", "levels", "y_cap_factor"}, "renorm");
    const RenormParams p = params_from_config(ctx.config.at("params"), "renorm.params");
    const int levels = ctx.config.value("levels", 8);
    const SequenceReport rep = rho_J_sequences(p, levels, ctx.config.value("y_cap_factor", 10.0));

    CsvWriter csv({"n", "K_n", "l_n", "J_n", "y_n", "y_n_analytic", "rho_p1", "rho_m1", "rho_n", "Delta_n",
                   "Delta_bound", "recursion_ok", "in_regime"});
    for (const auto& row : rep.rows) {
        const ScaleRow& sc = rep.scales.at(row.level);
        csv.begin_row()
            .col(row.level)
            .col(sc.K)
            .col(sc.l)
            .col(row.J)
            .col(row.y_curve_plus)
            .col(row.y_analytic_plus)
            .col(row.rho_plus)
            .col(row.rho_minus)
            .col(row.rho)
            .col(row.delta_n)
            .col(row.delta_bound)
            .col(static_cast<int>(row.recursion_ok_plus && row.recursion_ok_minus))
            .col(static_cast<int>(row.in_regime));
    }
    const fs::path p_csv = ctx.emit("renorm_sequences.csv", csv.str());
    json extra = constants_json(rep.scales);
    extra["fitted_delta_constant"] = rep.fitted_delta_constant;
    extra["y_cap"] = rep.y_cap;
    ctx.emit("renorm_constants.json", extra.dump(2) + "\n");
    if (ctx.plot) {
        svg_plot_from_csv(p_csv.string(), (ctx.out_dir / "renorm_sequences.svg").string(), "n",
                          {"J_n", "rho_n"}, "renormalization sequences");
        ctx.note_output(ctx.out_dir / "renorm_sequences.svg");
    }
}

void run_dilute_scan(RunContext& ctx) {
    reject_unknown_keys(ctx.config, {"params_template", "epsilon_list", "levels", "y_eval_frac"}, "dilute-scan");
    const RenormParams tmpl = params_from_config(ctx.config.at("params_template"), "dilute-scan.params_template");
    std::vector<double> eps;
    for (const auto& v : ctx.config.at("epsilon_list")) eps.push_back(v.get<double>());
    const auto rows = dilute_scan(tmpl, eps, ctx.config.value("levels", 6), ctx.config.value("y_eval_frac", 0.5));

    CsvWriter csv({"epsilon", "K1", "flagged", "rho_1", "rho_limit", "J_last", "y1_plus", "y1_minus",
                   "product_defect", "y_eval", "g_defect"});
    for (const auto& row : rows)
        csv.begin_row()
            .col(row.epsilon)
            .col(row.K1)
            .col(static_cast<int>(row.flagged))
            .col(row.rho1)
            .col(row.rho_limit)
            .col(row.J_last)
            .col(row.y1_plus)
            .col(row.y1_minus)
            .col(row.product_defect)
            .col(row.y_eval)
            .col(row.g_defect);
    const fs::path p = ctx.emit("dilute_scan.csv", csv.str());
    if (ctx.plot) {
        svg_plot_from_csv(p.string(), (ctx.out_dir / "dilute_scan.svg").string(), "epsilon", {"rho_1"},
                          "dilution scan");
        ctx.note_output(ctx.out_dir / "dilute_scan.svg");
    }
}

void run_flat_segment(RunContext& ctx) {
    reject_unknown_keys(ctx.config, {"curve_csv", "r", "band"}, "flat-segment");
    const CsvTable table = read_csv(ctx.config.at("curve_csv").get<std::string>());
    FluxCurveData data;
    data.rho = table.numeric_column("rho");
    data.value = table.numeric_column("flux");
    data.stderr_ = table.numeric_column("stderr");
    data.provenance = "simulated";
    const double r = ctx.config.at("r").get<double>();
    const double band = ctx.config.value("band", std::max(0.01 * r / 4.0, 1e-4));
    const PlateauEstimate est = detect_flat_segment(data, r, band);

    CsvWriter csv({"found", "rho_hat", "uncertainty", "band", "r"});
    csv.begin_row().col(static_cast<int>(est.found)).col(est.rho_hat).col(est.uncertainty).col(est.band).col(r);
    ctx.emit("flat_segment.csv", csv.str());
    if (est.found)
        std::printf("flat-segment: rho_c ~ %.4f +- %.4f at band %.4g\n", est.rho_hat, est.uncertainty, est.band);
    else
        std::printf("flat-segment: no plateau detected at band %.4g\n", est.band);
}

void dispatch(RunContext& ctx) {
    if (ctx.subcommand == "flux-curve") run_flux_curve(ctx);
    else if (ctx.subcommand == "shape") run_shape(ctx);
    else if (ctx.subcommand == "max-current") run_max_current(ctx);
    else if (ctx.subcommand == "assumption-h") run_assumption_h(ctx);
    else if (ctx.subcommand == "renorm") run_renorm(ctx);
    else if (ctx.subcommand == "dilute-scan") run_dilute_scan(ctx);
    else if (ctx.subcommand == "flat-segment") run_flat_segment(ctx);
    else throw validation_error("unknown subcommand '" + ctx.subcommand + "'");
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

int run_with_manifest(RunContext& ctx) {
    const auto t0 = std::chrono::steady_clock::now();
    fs::create_directories(ctx.out_dir);
    try {
        dispatch(ctx);
    } catch (...) {
        for (const auto& p : ctx.outputs) {
            std::error_code ec;
            fs::remove(p, ec);
        }
        throw;
    }
    json manifest;
    manifest["subcommand"] = ctx.subcommand;
    manifest["config"] = ctx.config;
    manifest["config_hash"] = fnv1a64(ctx.config.dump());
    manifest["master_seed"] = ctx.seed;
    manifest["workers"] = ctx.workers;
    manifest["plot"] = ctx.plot;
    manifest["code_version"] = TASEPLAB_VERSION;
    manifest["wall_clock_utc"] = utc_timestamp();
    manifest["duration_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json files = json::array();
    for (const auto& p : ctx.outputs) files.push_back(p.filename().string());
    manifest["outputs"] = files;
    std::ofstream f(ctx.out_dir / "manifest.json", std::ios::binary);
    f << manifest.dump(2) << "\n";
    return 0;
}

json load_json_file(const std::string& path, const char* what) {
    std::ifstream f(path);
    if (!f) throw validation_error(std::string(what) + ": cannot open " + path);
    json j;
    try {
        f >> j;
    } catch (const json::parse_error& e) {
        throw validation_error(std::string(what) + ": " + e.what());
    }
    return j;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"disordered exclusion / last-passage laboratory"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_dir = "runs/latest", manifest_path;
    std::uint64_t seed = 1;
    int workers = 0;
    bool plot = false;
    app.add_option("--config", config_path, "JSON config file")->envname("TASEPLAB_CONFIG");
    app.add_option("--seed", seed, "master seed")->envname("TASEPLAB_SEED");
    app.add_option("--out", out_dir, "output directory")->envname("TASEPLAB_OUT");
    app.add_option("--workers", workers, "worker threads (0 = hardware)")->envname("TASEPLAB_WORKERS");
    app.add_flag("--plot", plot, "emit SVG plots from the CSV outputs")->envname("TASEPLAB_PLOT");

    for (const char* name : {"flux-curve", "shape", "max-current", "assumption-h", "renorm", "dilute-scan",
                             "flat-segment"})
        app.add_subcommand(name);
    auto* verify_cmd = app.add_subcommand("verify", "run the invariant suites");
    auto* replay_cmd = app.add_subcommand("replay", "re-run a recorded manifest");
    replay_cmd->add_option("--manifest", manifest_path, "manifest.json of a previous run")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (workers > 0) set_worker_count(workers);
        if (verify_cmd->parsed()) return taseplab::tools::run_verify_suite();

        RunContext ctx;
        ctx.out_dir = out_dir;
        ctx.workers = workers;
        ctx.plot = plot;
        if (replay_cmd->parsed()) {
            const json manifest = load_json_file(manifest_path, "replay");
            ctx.subcommand = manifest.at("subcommand").get<std::string>();
            ctx.config = manifest.at("config");
            ctx.seed = manifest.at("master_seed").get<std::uint64_t>();
        } else {
            ctx.subcommand = app.get_subcommands().front()->get_name();
            if (config_path.empty()) throw validation_error("--config is required for this subcommand");
            ctx.config = load_json_file(config_path, "config");
            ctx.seed = seed;
        }
        return run_with_manifest(ctx);
    } catch (const validation_error& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 2;
    } catch (const regime_error& e) {
        std::fprintf(stderr, "regime violation: %s\n", e.what());
        return 3;
    } catch (const budget_error& e) {
        std::fprintf(stderr, "budget exceeded: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
