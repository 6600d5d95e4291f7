#include "rdbr/decompose.hpp"
#include "rdbr/diagnostics.hpp"
#include "rdbr/pipeline.hpp"
#include "rdbr/regress.hpp"
#include "rdbr/synth.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

namespace py = pybind11;
using namespace py::literals;

namespace {

using Vec = std::vector<double>;

py::array_t<double> as_array(const Vec& v) { return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data()); }

py::array_t<double> stack(const std::vector<Vec>& rows) {
    const auto n = static_cast<py::ssize_t>(rows.size());
    const auto m = static_cast<py::ssize_t>(rows.empty() ? 0 : rows.front().size());
    py::array_t<double> out({n, m});
    auto a = out.mutable_unchecked<2>();
    for (py::ssize_t i = 0; i < n; ++i)
        for (py::ssize_t j = 0; j < m; ++j) a(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return out;
}

py::object optional_list(const std::vector<std::optional<double>>& v) {
    py::list out;
    for (const auto& x : v) out.append(x ? py::object(py::float_(*x)) : py::object(py::none()));
    return out;
}

rdbr::TimeGrid grid_from(const Vec& t) { return rdbr::TimeGrid::from_points(t); }

std::vector<rdbr::InstProfile> profiles_from(const std::vector<Vec>& phases, const std::vector<Vec>& amplitudes) {
    if (phases.size() != amplitudes.size()) throw std::invalid_argument("phases and amplitudes differ in length");
    std::vector<rdbr::InstProfile> out;
    for (std::size_t k = 0; k < phases.size(); ++k) out.push_back({phases[k], amplitudes[k], 0.0});
    return out;
}

py::dict synth_result(const rdbr::SynthResult& r) {
    std::vector<Vec> modes, phases, amps, shapes;
    for (const auto& m : r.modes) modes.push_back(m.real());
    for (const auto& p : r.profiles) {
        phases.push_back(p.phase);
        amps.push_back(p.amplitude);
    }
    for (const auto& s : r.shapes) shapes.push_back(s.samples);
    return py::dict("t"_a = as_array(r.signal.grid().points()), "signal"_a = as_array(r.signal.real()),
                    "modes"_a = stack(modes), "phases"_a = stack(phases), "amplitudes"_a = stack(amps),
                    "shapes"_a = stack(shapes));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Recursive diffeomorphism-based regression for generalized mode decomposition";

    m.def("builtin_shape_names", &rdbr::builtin_shape_names);
    m.def("preset_names", &rdbr::preset_names);
    m.def(
        "builtin_shape", [](const std::string& name, std::size_t G) { return as_array(rdbr::builtin_shape(name, G).samples); },
        "name"_a, "G"_a = rdbr::kDefaultShapeGrid);

    m.def(
        "synth",
        [](const std::string& preset, std::size_t L, double N, double sigma2, std::uint64_t seed,
           const std::string& grid) {
            auto g = rdbr::sample_grid(rdbr::grid_kind_from_string(grid), L, seed);
            return synth_result(rdbr::generate(rdbr::preset_specs(preset, N), g, sigma2, seed));
        },
        "preset"_a, "L"_a, "N"_a = 100.0, "sigma2"_a = 0.0, "seed"_a = 1, "grid"_a = "uniform",
        "Generate a preset signal with its clean modes and exact phases/amplitudes.");

    m.def(
        "decompose",
        [](const Vec& t, const Vec& signal, const std::vector<Vec>& phases, const std::vector<Vec>& amplitudes,
           const std::string& method, int nbins, int nk, double krf, int ord, int knot_iters, std::size_t shape_grid,
           int max_iter, double eps, const std::string& schedule) {
            rdbr::RdbrConfig cfg;
            cfg.max_iter = max_iter;
            cfg.eps = eps;
            cfg.schedule = rdbr::update_schedule_from_string(schedule);
            cfg.regression.method = rdbr::regression_method_from_string(method);
            cfg.regression.nbins = nbins;
            cfg.regression.nk = nk;
            cfg.regression.krf = krf;
            cfg.regression.ord = ord;
            cfg.regression.knot_iters = knot_iters;
            cfg.regression.shape_grid = shape_grid;
            rdbr::Decomposition d;
            {
                py::gil_scoped_release release;
                d = rdbr::rdbr_decompose(rdbr::Signal(grid_from(t), signal), profiles_from(phases, amplitudes), cfg);
            }
            std::vector<Vec> shapes, modes;
            for (const auto& s : d.shapes) shapes.push_back(s.samples);
            for (const auto& md : d.modes) modes.push_back(md.real());
            return py::dict("shapes"_a = stack(shapes), "modes"_a = stack(modes),
                            "residual"_a = as_array(d.residual.real()),
                            "residual_norms"_a = as_array(d.report.residual_norms),
                            "initial_norm"_a = d.report.initial_norm, "iterations"_a = d.report.iterations,
                            "stop_reason"_a = std::string(rdbr::to_string(d.report.stop_reason)));
        },
        "t"_a, "signal"_a, "phases"_a, "amplitudes"_a, "method"_a = "partition", "nbins"_a = 50, "nk"_a = 20,
        "krf"_a = 1.01, "ord"_a = 3, "knot_iters"_a = 20, "shape_grid"_a = rdbr::kDefaultShapeGrid,
        "max_iter"_a = 200, "eps"_a = 1e-6, "schedule"_a = "sequential");

    m.def(
        "estimate_profiles",
        [](const Vec& signal, int k, double s_geom, double eps_sst, double a_max, std::size_t num_times) {
            rdbr::SswptOptions o;
            o.wp.s_geom = s_geom;
            o.wp.eps_sst = eps_sst;
            o.wp.a_max = a_max;
            o.wp.num_times = num_times;
            o.profile.phase_source = rdbr::PhaseSource::component_argument;
            o.profile.amplitude_source = rdbr::AmplitudeSource::ridge_peak;
            rdbr::SswptResult r;
            {
                py::gil_scoped_release release;
                r = rdbr::estimate_profiles(rdbr::Signal(rdbr::TimeGrid::uniform(signal.size()), signal), k, o);
            }
            std::vector<Vec> phases, amps, energy;
            for (const auto& p : r.profiles) {
                phases.push_back(p.phase);
                amps.push_back(p.amplitude);
            }
            for (Eigen::Index i = 0; i < r.tf.energy.rows(); ++i) {
                Vec row(static_cast<std::size_t>(r.tf.energy.cols()));
                for (Eigen::Index j = 0; j < r.tf.energy.cols(); ++j) row[static_cast<std::size_t>(j)] = r.tf.energy(i, j);
                energy.push_back(std::move(row));
            }
            return py::dict("phases"_a = stack(phases), "amplitudes"_a = stack(amps), "tf"_a = stack(energy),
                            "freqs"_a = as_array(r.tf.freqs), "times"_a = as_array(r.tf.times));
        },
        "signal"_a, "k"_a, "s_geom"_a = 0.66, "eps_sst"_a = 1e-3, "a_max"_a = 0.0, "num_times"_a = 0,
        "Transform, extract ridges and build k fundamental profiles from uniformly sampled data.");

    m.def(
        "regress",
        [](const Vec& xs, const Vec& ys, const std::string& method, int nbins, int nk, std::size_t shape_grid) {
            rdbr::RegressionConfig cfg;
            cfg.method = rdbr::regression_method_from_string(method);
            cfg.nbins = nbins;
            cfg.nk = nk;
            cfg.shape_grid = shape_grid;
            rdbr::FoldedSamples fs{xs, ys, xs};
            return as_array(rdbr::regress(fs, cfg).samples);
        },
        "xs"_a, "ys"_a, "method"_a = "partition", "nbins"_a = 50, "nk"_a = 20,
        "shape_grid"_a = rdbr::kDefaultShapeGrid);

    m.def(
        "convergence_rates",
        [](const Vec& norms) {
            auto cr = rdbr::convergence_rates(norms);
            return py::make_tuple(optional_list(cr.mu), optional_list(cr.eta));
        },
        "norms"_a, "Returns (mu, eta); entries are None where the difference vanishes.");

    m.def(
        "snr_db",
        [](const Vec& t, const std::vector<Vec>& modes, double sigma2) {
            std::vector<rdbr::Signal> sigs;
            const auto g = grid_from(t);
            for (const auto& md : modes) sigs.emplace_back(g, md);
            return rdbr::snr_db(sigs, sigma2);
        },
        "t"_a, "modes"_a, "sigma2"_a);

    m.def(
        "well_differentiation",
        [](const Vec& t, const std::vector<Vec>& phases, int nbins, double M) {
            std::vector<rdbr::InstProfile> ps;
            for (const auto& p : phases) ps.push_back({p, Vec(p.size(), 1.0), 0.0});
            auto wd = rdbr::well_differentiation(ps, grid_from(t), nbins, M);
            return py::dict("gamma"_a = wd.gamma ? py::object(py::int_(*wd.gamma)) : py::object(py::none()),
                            "beta"_a = wd.beta, "beta_normalized"_a = wd.beta_normalized,
                            "contraction"_a = wd.contraction);
        },
        "t"_a, "phases"_a, "nbins"_a = 50, "M"_a = 1.0);
}
