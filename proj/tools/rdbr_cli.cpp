// rdbr: synthesis, transform inspection, decomposition and benchmarks.

#include "rdbr/core.hpp"
#include "rdbr/decompose.hpp"
#include "rdbr/diagnostics.hpp"
#include "rdbr/io.hpp"
#include "rdbr/pipeline.hpp"
#include "rdbr/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunConfig {
    std::uint64_t seed = 1;
    std::string out = "rdbr_out";

    // synthesis
    std::string preset = "ex1";
    std::string shape = "cosine";
    std::size_t L = 65536;
    double N = 100.0;
    double sigma2 = 0.0;
    std::optional<double> snr;
    std::string grid = "uniform";

    // transform and ridges
    double s_geom = 0.66;
    double rad = 1.0;
    int red = 8;
    double eps_sst = 1e-3;
    double a_min = 1.0;
    double a_max = 512.0;
    std::size_t num_times = 512;
    int nfreq = 0;
    int max_ridges = 8;
    double ridge_penalty = -1.0;
    int band = 3;
    double harmonic_tol = 0.1;
    std::string phase_source = "argument";
    std::string amp_source = "peak";
    std::size_t amp_smooth = 0;
    int k = 1;

    // regression and RDBR
    std::string method = "partition";
    int nbins = 50;
    int nk = 20;
    double krf = 1.01;
    int ord = 3;
    int knot_iters = 20;
    std::size_t shape_grid = rdbr::kDefaultShapeGrid;
    int max_iter = 200;
    double eps = 1e-6;
    std::string schedule = "sequential";
    double M = 1.0;
};

json config_json(const RunConfig& c) {
    json j;
    j["seed"] = c.seed;
    j["out"] = c.out;
    j["preset"] = c.preset;
    j["shape"] = c.shape;
    j["L"] = c.L;
    j["N"] = c.N;
    j["sigma2"] = c.sigma2;
    j["snr"] = c.snr ? json(*c.snr) : json(nullptr);
    j["grid"] = c.grid;
    j["s_geom"] = c.s_geom;
    j["rad"] = c.rad;
    j["red"] = c.red;
    j["eps_sst"] = c.eps_sst;
    j["a_min"] = c.a_min;
    j["a_max"] = c.a_max;
    j["num_times"] = c.num_times;
    j["nfreq"] = c.nfreq;
    j["max_ridges"] = c.max_ridges;
    j["ridge_penalty"] = c.ridge_penalty;
    j["band"] = c.band;
    j["harmonic_tol"] = c.harmonic_tol;
    j["phase_source"] = c.phase_source;
    j["amp_source"] = c.amp_source;
    j["amp_smooth"] = c.amp_smooth;
    j["k"] = c.k;
    j["method"] = c.method;
    j["nbins"] = c.nbins;
    j["nk"] = c.nk;
    j["krf"] = c.krf;
    j["ord"] = c.ord;
    j["knot_iters"] = c.knot_iters;
    j["shape_grid"] = c.shape_grid;
    j["max_iter"] = c.max_iter;
    j["eps"] = c.eps;
    j["schedule"] = c.schedule;
    j["M"] = c.M;
    return j;
}

rdbr::RdbrConfig rdbr_config(const RunConfig& c) {
    rdbr::RdbrConfig r;
    r.max_iter = c.max_iter;
    r.eps = c.eps;
    r.schedule = rdbr::update_schedule_from_string(c.schedule);
    r.regression.method = rdbr::regression_method_from_string(c.method);
    r.regression.nbins = c.nbins;
    r.regression.nk = c.nk;
    r.regression.krf = c.krf;
    r.regression.ord = c.ord;
    r.regression.knot_iters = c.knot_iters;
    r.regression.shape_grid = c.shape_grid;
    r.validate();
    return r;
}

rdbr::SswptOptions sswpt_options(const RunConfig& c, std::size_t L) {
    rdbr::SswptOptions o;
    o.wp.s_geom = c.s_geom;
    o.wp.rad = c.rad;
    o.wp.red = c.red;
    o.wp.eps_sst = c.eps_sst;
    o.wp.a_min = c.a_min;
    o.wp.a_max = std::min(c.a_max, static_cast<double>(L / 2));
    o.wp.num_times = std::min(c.num_times, L);
    o.wp.validate();
    o.nfreq = c.nfreq;
    o.max_ridges = c.max_ridges;
    o.ridge_penalty = c.ridge_penalty;
    o.harmonic_tol = c.harmonic_tol;
    o.profile.band_halfwidth = c.band;
    o.profile.amp_smooth = c.amp_smooth;
    if (c.phase_source == "argument") o.profile.phase_source = rdbr::PhaseSource::component_argument;
    else if (c.phase_source == "ridge") o.profile.phase_source = rdbr::PhaseSource::ridge_integral;
    else throw std::invalid_argument("unknown phase_source '" + c.phase_source + "' (argument, ridge)");
    if (c.amp_source == "peak") o.profile.amplitude_source = rdbr::AmplitudeSource::ridge_peak;
    else if (c.amp_source == "band") o.profile.amplitude_source = rdbr::AmplitudeSource::inverse_band;
    else throw std::invalid_argument("unknown amp_source '" + c.amp_source + "' (peak, band)");
    return o;
}

std::vector<rdbr::ModeSpec> specs_for(const RunConfig& c, const std::string& preset, double N) {
    if (preset == "single") {
        return {{rdbr::builtin_shape(c.shape, c.shape_grid),
                 {rdbr::AmpSpec::Kind::constant, 0.0, 1.0},
                 {rdbr::PhaseSpec::Kind::sin, N, 0.006, 0.0}}};
    }
    return rdbr::preset_specs(preset, N, c.shape_grid);
}

struct Synthesized {
    rdbr::SynthResult result;
    double sigma2 = 0.0;
};

Synthesized synthesize(const RunConfig& c, const std::string& preset, double N, std::size_t L,
                       std::optional<double> snr, double sigma2) {
    const auto specs = specs_for(c, preset, N);
    const auto grid = rdbr::sample_grid(rdbr::grid_kind_from_string(c.grid), L, c.seed);
    Synthesized s;
    s.sigma2 = sigma2;
    if (snr) s.sigma2 = rdbr::sigma2_for_snr(rdbr::generate(specs, grid, 0.0, c.seed).modes, *snr);
    // Noise uses a stream derived from the seed so it differs from the grid draw.
    s.result = rdbr::generate(specs, grid, s.sigma2, c.seed + 0x9e3779b97f4a7c15ULL);
    return s;
}

json rates_json(const rdbr::RdbrReport& rep) { return rdbr::io::report_json(rep); }

// Flat key = value echo of the resolved configuration, loadable with --config.
void write_echo(const fs::path& dir, const RunConfig& c) {
    fs::create_directories(dir);
    std::ofstream f(dir / "config.toml");
    const json j = config_json(c);
    for (const auto& [key, value] : j.items())
        if (!value.is_null()) f << key << " = " << value.dump() << '\n';
}

int cmd_synth(const RunConfig& c) {
    const auto s = synthesize(c, c.preset, c.N, c.L, c.snr, c.sigma2);
    const fs::path out = c.out;
    fs::create_directories(out);
    rdbr::io::write_signal_csv(out / "signal.csv", s.result.signal);
    for (std::size_t k = 0; k < s.result.modes.size(); ++k) {
        const auto idx = std::to_string(k + 1);
        rdbr::io::write_signal_csv(out / ("mode_" + idx + ".csv"), s.result.modes[k]);
        rdbr::io::write_profile_csv(out / ("profile_" + idx + ".csv"), s.result.signal.grid(), s.result.profiles[k]);
    }
    json meta;
    meta["preset"] = c.preset;
    meta["K"] = s.result.modes.size();
    meta["L"] = c.L;
    meta["sigma2"] = s.sigma2;
    meta["snr"] = s.sigma2 > 0.0 ? json(rdbr::snr_db(s.result.modes, s.sigma2)) : json("inf");
    json norms = json::array();
    for (const auto& m : s.result.modes) norms.push_back(rdbr::l2_norm(m));
    meta["mode_norms"] = norms;
    meta["config"] = config_json(c);
    rdbr::io::write_json(out / "meta.json", meta);
    write_echo(out, c);
    std::cout << "wrote " << s.result.modes.size() << " modes to " << out.string() << '\n';
    return 0;
}

int cmd_sswpt(const RunConfig& c, const std::string& in) {
    const auto sig = rdbr::io::read_signal_csv(in);
    if (!sig.grid().is_uniform()) throw std::runtime_error(in + ": transform needs a uniform grid, resample first");
    const auto res = rdbr::estimate_profiles(sig, c.k, sswpt_options(c, sig.size()));
    const fs::path out = c.out;
    fs::create_directories(out);
    rdbr::io::write_tf_csv(out / "tf.csv", res.tf);
    rdbr::io::write_tf_binary(out / "tf.bin", res.tf);
    rdbr::io::write_ridges_csv(out / "ridges.csv", res.ridges, &res.classes);
    for (std::size_t k = 0; k < res.profiles.size(); ++k)
        rdbr::io::write_profile_csv(out / ("profile_" + std::to_string(k + 1) + ".csv"), sig.grid(), res.profiles[k]);
    json meta;
    json ridges = json::array();
    for (std::size_t r = 0; r < res.ridges.size(); ++r)
        ridges.push_back({{"mean_freq", res.ridges[r].mean_freq()},
                          {"mean_energy", res.ridges[r].mean_energy()},
                          {"group", res.classes.group[r] + 1},
                          {"harmonic", res.classes.harmonic[r]}});
    meta["ridges"] = ridges;
    json fund = json::array();
    for (const auto& p : res.profiles) fund.push_back(p.fundamental_freq_hint);
    meta["fundamental_freqs"] = fund;
    meta["nfreq"] = res.tf.freqs.size();
    meta["ntime"] = res.tf.times.size();
    meta["config"] = config_json(c);
    rdbr::io::write_json(out / "meta.json", meta);
    write_echo(out, c);
    std::cout << "found " << res.ridges.size() << " ridges, " << res.profiles.size() << " fundamentals\n";
    return 0;
}

int cmd_decompose(const RunConfig& c, const std::string& in, const std::vector<std::string>& profile_files, bool autop) {
    const auto sig = rdbr::io::read_signal_csv(in);
    std::vector<rdbr::InstProfile> profiles;
    json extra;
    if (autop) {
        if (!sig.grid().is_uniform()) throw std::runtime_error(in + ": --auto needs a uniform grid");
        auto res = rdbr::estimate_profiles(sig, c.k, sswpt_options(c, sig.size()));
        profiles = std::move(res.profiles);
        json fund = json::array();
        for (const auto& p : profiles) fund.push_back(p.fundamental_freq_hint);
        extra["auto_fundamental_freqs"] = fund;
    } else {
        if (profile_files.empty()) throw std::runtime_error("decompose needs --profiles or --auto");
        for (const auto& f : profile_files) {
            rdbr::TimeGrid g;
            profiles.push_back(rdbr::io::read_profile_csv(f, &g));
            if (!rdbr::same_grid(g, sig.grid(), 1e-12))
                throw std::runtime_error("profile/signal grid mismatch: " + f + " vs " + in);
        }
    }
    const auto dec = rdbr::rdbr_decompose(sig, profiles, rdbr_config(c));

    extra["config"] = config_json(c);
    extra["relative_residual"] = rdbr::l2_norm(dec.residual) / std::max(dec.report.initial_norm, 1e-300);
    const auto wd = rdbr::well_differentiation(profiles, sig.grid(), c.nbins, c.M);
    extra["well_differentiation"] = rdbr::io::well_diff_json(wd);
    json chi2 = json::array();
    for (const auto& p : profiles) chi2.push_back(rdbr::fold_uniformity(p, sig.grid(), c.nbins).chi2);
    extra["chi2"] = chi2;
    rdbr::io::write_decomposition(c.out, dec, extra);
    write_echo(c.out, c);
    std::cout << "rdbr: " << dec.report.iterations << " iterations, stop " << rdbr::to_string(dec.report.stop_reason)
              << ", residual " << rdbr::io::fmt_double(dec.report.residual_norms.back()) << '\n';
    return 0;
}

struct BenchCell {
    std::string preset;
    double N = 0.0;
    std::size_t L = 0;
    std::optional<double> snr;
};

json run_cell(const RunConfig& c, const BenchCell& cell) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto s = synthesize(c, cell.preset, cell.N, cell.L, cell.snr, 0.0);
    const auto dec = rdbr::rdbr_decompose(s.result.signal, s.result.profiles, rdbr_config(c));
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json j = rates_json(dec.report);
    j["preset"] = cell.preset;
    j["N"] = cell.N;
    j["L"] = cell.L;
    j["snr"] = cell.snr ? json(*cell.snr) : json("inf");
    j["final_residual"] = dec.report.residual_norms.back();
    json errs = json::array();
    for (std::size_t k = 0; k < dec.shapes.size(); ++k)
        errs.push_back(rdbr::shape_relative_error(dec.shapes[k], s.result.shapes[k]));
    j["shape_errors"] = errs;
    j["wall_time"] = wall;
    return j;
}

int cmd_bench(const RunConfig& c, const std::string& suite) {
    std::vector<BenchCell> cells;
    if (suite == "rate_vs_N") {
        for (double N : {2.0, 10.0, 50.0, 100.0, 200.0}) cells.push_back({"ex2", N, c.L, std::nullopt});
    } else if (suite == "err_vs_L") {
        for (int e = 7; e <= 12; ++e) cells.push_back({"ex2", c.N, std::size_t{1} << e, std::nullopt});
    } else if (suite == "noise") {
        const double snr = c.snr.value_or(-3.0);
        for (const char* p : {"ecg_pair", "ex3"}) {
            cells.push_back({p, c.N, c.L, std::nullopt});
            cells.push_back({p, c.N, c.L, snr});
        }
    } else {
        throw std::invalid_argument("unknown suite '" + suite + "' (rate_vs_N, err_vs_L, noise)");
    }

    // Cells are independent; run them on a small pool.
    const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    std::vector<json> results(cells.size());
    for (std::size_t start = 0; start < cells.size(); start += workers) {
        std::vector<std::future<json>> batch;
        for (std::size_t i = start; i < std::min(cells.size(), start + workers); ++i)
            batch.push_back(std::async(std::launch::async, run_cell, std::cref(c), cells[i]));
        for (std::size_t i = 0; i < batch.size(); ++i) results[start + i] = batch[i].get();
    }
    json out;
    out["suite"] = suite;
    out["cells"] = results;
    out["config"] = config_json(c);
    rdbr::io::write_json(fs::path(c.out) / "bench.json", out);
    write_echo(c.out, c);
    for (const auto& r : results)
        std::cout << r["preset"].get<std::string>() << " N=" << r["N"] << " L=" << r["L"] << " snr=" << r["snr"]
                  << " final=" << r["final_residual"] << " iters=" << r["iterations"] << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Recursive diffeomorphism-based regression toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "Flat key = value config file; flags override it");

    RunConfig c;
    app.add_option("--seed", c.seed, "Seed for every random draw")->capture_default_str();
    app.add_option("--out", c.out, "Output directory")->capture_default_str();

    app.add_option("--preset", c.preset, "ex1 | ex2 | ex3 | ecg_pair | pwc_pair | single")->capture_default_str();
    app.add_option("--shape", c.shape, "Builtin shape for the single preset")->capture_default_str();
    app.add_option("--L", c.L, "Number of samples")->capture_default_str()->check(CLI::Range(2ul, 1ul << 26));
    app.add_option("--N", c.N, "Fundamental frequency for ex2 and single")->capture_default_str();
    app.add_option("--sigma2", c.sigma2, "Noise variance")->capture_default_str()->check(CLI::NonNegativeNumber);
    app.add_option("--snr", c.snr, "Target SNR in dB (overrides --sigma2)");
    app.add_option("--grid", c.grid, "uniform | iid_uniform")->capture_default_str();

    app.add_option("--s_geom", c.s_geom, "Wave packet geometric scaling")->capture_default_str();
    app.add_option("--rad", c.rad, "Mother packet support radius")->capture_default_str();
    app.add_option("--red", c.red, "Scales per support width")->capture_default_str();
    app.add_option("--eps_sst", c.eps_sst, "Synchrosqueezing threshold")->capture_default_str();
    app.add_option("--a_min", c.a_min, "Lowest scale")->capture_default_str();
    app.add_option("--a_max", c.a_max, "Highest scale (capped at L/2)")->capture_default_str();
    app.add_option("--num_times", c.num_times, "Transform time samples (capped at L)")->capture_default_str();
    app.add_option("--nfreq", c.nfreq, "Frequency bins, 0: unit width")->capture_default_str();
    app.add_option("--max_ridges", c.max_ridges, "Ridges to extract")->capture_default_str();
    app.add_option("--ridge_penalty", c.ridge_penalty, "Ridge smoothness penalty, <0: 0.05 * nfreq")->capture_default_str();
    app.add_option("--band", c.band, "Mask half-width around a ridge, in bins")->capture_default_str();
    app.add_option("--harmonic_tol", c.harmonic_tol, "Tolerance of the harmonic ratio test")->capture_default_str();
    app.add_option("--phase_source", c.phase_source, "argument | ridge")->capture_default_str();
    app.add_option("--amp_source", c.amp_source, "peak | band")->capture_default_str();
    app.add_option("--amp_smooth", c.amp_smooth, "Amplitude smoothing window, 0: one period")->capture_default_str();
    app.add_option("--k", c.k, "Number of modes for ridge grouping")->capture_default_str();

    app.add_option("--method", c.method, "partition | spline")->capture_default_str();
    app.add_option("--nbins", c.nbins, "Partition bins")->capture_default_str();
    app.add_option("--nk", c.nk, "Spline knots")->capture_default_str();
    app.add_option("--krf", c.krf, "Knot removal factor")->capture_default_str();
    app.add_option("--ord", c.ord, "Spline degree")->capture_default_str();
    app.add_option("--knot_iters", c.knot_iters, "Knot optimisation steps, 0: fixed uniform knots")->capture_default_str();
    app.add_option("--shape_grid", c.shape_grid, "Shape samples per period")->capture_default_str();
    app.add_option("--max_iter", c.max_iter, "Iteration cap")->capture_default_str();
    app.add_option("--eps", c.eps, "Accuracy parameter")->capture_default_str();
    app.add_option("--schedule", c.schedule, "sequential | simultaneous")->capture_default_str();
    app.add_option("--M", c.M, "Shape class bound used in the contraction factor")->capture_default_str();

    auto* synth = app.add_subcommand("synth", "Generate a preset signal, its modes and exact profiles");

    std::string in;
    auto* sswpt = app.add_subcommand("sswpt", "Synchrosqueezed transform, ridges and fundamental profiles");
    sswpt->add_option("--in", in, "Signal CSV")->required();

    std::string din;
    std::vector<std::string> profile_files;
    bool autop = false;
    auto* decompose = app.add_subcommand("decompose", "Recover shapes from a signal");
    decompose->add_option("--in", din, "Signal CSV")->required();
    decompose->add_option("--profiles", profile_files, "Profile CSVs, one per mode");
    decompose->add_flag("--auto", autop, "Estimate profiles with the transform first (uses --k)");

    std::string suite;
    auto* bench = app.add_subcommand("bench", "Convergence and robustness sweeps");
    bench->add_option("--suite", suite, "rate_vs_N | err_vs_L | noise")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) return cmd_synth(c);
        if (*sswpt) return cmd_sswpt(c, in);
        if (*decompose) return cmd_decompose(c, din, profile_files, autop);
        if (*bench) return cmd_bench(c, suite);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
