#include "rdbr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>

namespace rdbr {

namespace {

double wrap_dist(double x, double c) {
    double d = x - c;
    return d - std::round(d);
}

std::function<double(double)> ecg(double h0, double h1, double h2, double c0, double c1, double c2) {
    return [=](double x) {
        const double hs[3] = {h0, h1, h2}, cs[3] = {c0, c1, c2}, ws[3] = {0.03, 0.01, 0.05};
        double y = 0.0;
        for (int i = 0; i < 3; ++i) {
            const double d = wrap_dist(x, cs[i]);
            y += hs[i] * std::exp(-d * d / (2.0 * ws[i] * ws[i]));
        }
        return y;
    };
}

std::function<double(double)> raw_shape(const std::string& name) {
    if (name == "ecg1") return ecg(0.2, 1.0, 0.3, 0.2, 0.5, 0.8);
    if (name == "ecg2") return ecg(0.3, 1.0, 0.2, 0.25, 0.45, 0.7);
    if (name == "pwc1") return [](double x) { return (x >= 0.3 && x < 0.7) ? 1.0 : -1.0; };
    if (name == "pwc2")
        return [](double x) {
            const double lv[4] = {1.0, -1.0, 0.5, -0.5};
            return lv[std::min(3, static_cast<int>(x * 4.0))];
        };
    if (name == "pwl_triangle") return [](double x) { return x < 0.5 ? 4.0 * x - 1.0 : 3.0 - 4.0 * x; };
    if (name == "pwl_saw") return [](double x) { return x < 0.8 ? x / 0.8 : (1.0 - x) / 0.2; };
    if (name == "cosine") return [](double x) { return std::cos(kTwoPi * x); };
    std::string list;
    for (const auto& n : builtin_shape_names()) list += (list.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown shape '" + name + "' (builtins: " + list + ")");
}

}  // namespace

const std::vector<std::string>& builtin_shape_names() {
    static const std::vector<std::string> names = {"ecg1", "ecg2", "pwc1", "pwc2", "pwl_triangle", "pwl_saw", "cosine"};
    return names;
}

ShapeEstimate builtin_shape(const std::string& name, std::size_t G) {
    if (G < 2) throw std::invalid_argument("shape grid must have at least 2 points");
    const auto f = raw_shape(name);
    ShapeEstimate s;
    s.samples.resize(G);
    for (std::size_t n = 0; n < G; ++n) s.samples[n] = f(static_cast<double>(n) / static_cast<double>(G));
    s = shape_mean_remove(s);
    const double norm = s.l2_norm();
    for (double& v : s.samples) v /= norm;
    return s;
}

double AmpSpec::operator()(double t) const {
    switch (kind) {
        case Kind::constant: return 1.0 + a;
        case Kind::sin: return 1.0 + a * std::sin(kTwoPi * b * t);
        case Kind::cos: return 1.0 + a * std::cos(kTwoPi * b * t);
    }
    return 1.0;
}

double PhaseSpec::operator()(double t) const {
    switch (kind) {
        case Kind::sin: return N * (t + c * std::sin(kTwoPi * t));
        case Kind::cos: return N * (t + c * std::cos(kTwoPi * t));
        case Kind::shifted_sin: return N * (t + t0 + c * std::sin(kTwoPi * (t + t0)));
    }
    return 0.0;
}

void PhaseSpec::validate() const {
    if (!(N > 0.0)) throw std::invalid_argument("phase: N must be > 0");
    if (!(std::abs(c) < 1.0 / kTwoPi)) throw std::invalid_argument("phase: |c| must be < 1/(2 pi)");
}

SynthResult generate(const std::vector<ModeSpec>& specs, const TimeGrid& grid, double noise_sigma2,
                     std::uint64_t seed) {
    if (specs.empty()) throw std::invalid_argument("generate: no mode specs");
    if (noise_sigma2 < 0.0) throw std::invalid_argument("generate: noise variance must be >= 0");
    const std::size_t L = grid.size();
    SynthResult out;
    std::vector<double> sum(L, 0.0);
    for (const auto& spec : specs) {
        spec.phase.validate();
        InstProfile prof;
        prof.phase.resize(L);
        prof.amplitude.resize(L);
        prof.fundamental_freq_hint = spec.phase.N;
        std::vector<double> v(L);
        for (std::size_t l = 0; l < L; ++l) {
            prof.phase[l] = spec.phase(grid[l]);
            prof.amplitude[l] = spec.amp(grid[l]);
            v[l] = prof.amplitude[l] * eval_shape(spec.shape, prof.phase[l]);
            sum[l] += v[l];
        }
        out.modes.emplace_back(grid, std::move(v));
        out.profiles.push_back(std::move(prof));
        out.shapes.push_back(spec.shape);
    }
    if (noise_sigma2 > 0.0) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> nd(0.0, std::sqrt(noise_sigma2));
        for (double& v : sum) v += nd(rng);
    }
    out.signal = Signal(grid, std::move(sum));
    return out;
}

GridKind grid_kind_from_string(const std::string& name) {
    if (name == "uniform") return GridKind::uniform;
    if (name == "iid_uniform") return GridKind::iid_uniform;
    throw std::invalid_argument("unknown grid kind '" + name + "' (uniform, iid_uniform)");
}

TimeGrid sample_grid(GridKind kind, std::size_t L, std::uint64_t seed) {
    if (L < 2) throw std::invalid_argument("sample_grid: L must be >= 2");
    if (kind == GridKind::uniform) return TimeGrid::uniform(L);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    std::vector<double> pts(L);
    for (double& p : pts) p = ud(rng);
    std::ranges::sort(pts);
    // Ties have probability ~L^2 2^-53; nudge them apart.
    for (std::size_t i = 1; i < L; ++i)
        if (!(pts[i] > pts[i - 1])) pts[i] = std::nextafter(pts[i - 1], 2.0);
    return TimeGrid::from_points(std::move(pts));
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {"ex1", "ex2", "ex3", "ecg_pair", "pwc_pair"};
    return names;
}

std::vector<ModeSpec> preset_specs(const std::string& name, double N, std::size_t G) {
    using AK = AmpSpec::Kind;
    using PK = PhaseSpec::Kind;
    auto ex1_like = [&](const char* s1, const char* s2) {
        return std::vector<ModeSpec>{
            {builtin_shape(s1, G), {AK::sin, 0.05, 2.0}, {PK::sin, 60.0, 0.01, 0.0}},
            {builtin_shape(s2, G), {AK::sin, 0.1, 1.0}, {PK::cos, 90.0, 0.01, 0.0}},
        };
    };
    if (name == "ex1" || name == "ecg_pair") return ex1_like("ecg1", "ecg2");
    if (name == "pwc_pair") return ex1_like("pwc1", "pwc2");
    if (name == "ex2")
        return {
            {builtin_shape("pwl_triangle", G), {AK::sin, 0.05, 2.0}, {PK::sin, N, 0.006, 0.0}},
            {builtin_shape("pwl_saw", G), {AK::cos, 0.05, 1.0}, {PK::cos, N, 0.006, 0.0}},
        };
    if (name == "ex3") {
        const char* shapes[4] = {"pwl_triangle", "pwl_saw", "ecg1", "cosine"};
        std::vector<ModeSpec> out;
        for (int k = 0; k < 4; ++k)
            out.push_back({builtin_shape(shapes[k], G), {AK::constant, 0.0, 1.0}, {PK::shifted_sin, 200.0, 0.01, 0.05 * k}});
        return out;
    }
    std::string list;
    for (const auto& n : preset_names()) list += (list.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown preset '" + name + "' (" + list + ")");
}

}  // namespace rdbr
