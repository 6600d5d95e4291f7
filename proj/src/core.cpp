#include "rdbr/core.hpp"

#include "fft.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <ranges>
#include <stdexcept>
#include <utility>

namespace rdbr {

TimeGrid TimeGrid::uniform(std::size_t L) {
    if (L == 0) throw std::invalid_argument("uniform grid needs at least one point");
    TimeGrid g;
    g.points_.resize(L);
    for (std::size_t l = 0; l < L; ++l) g.points_[l] = static_cast<double>(l) / static_cast<double>(L);
    g.uniform_ = true;
    g.step_ = 1.0 / static_cast<double>(L);
    return g;
}

TimeGrid TimeGrid::from_points(std::vector<double> points) {
    if (points.empty()) throw std::invalid_argument("time grid is empty");
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double t = points[i];
        if (!std::isfinite(t) || t < 0.0 || t > 1.0)
            throw std::invalid_argument("time grid point " + std::to_string(i) + " outside [0,1]");
        if (i > 0 && !(t > points[i - 1]))
            throw std::invalid_argument("time grid not strictly increasing at index " + std::to_string(i));
    }
    TimeGrid g;
    const auto L = static_cast<double>(points.size());
    g.uniform_ = std::ranges::all_of(std::views::iota(std::size_t{0}, points.size()),
                                     [&](std::size_t l) { return std::abs(points[l] - l / L) <= 1e-12; });
    g.step_ = g.uniform_ ? 1.0 / L : 0.0;
    g.points_ = std::move(points);
    return g;
}

bool same_grid(const TimeGrid& a, const TimeGrid& b, double tol) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > tol) return false;
    return true;
}

namespace {

void check_finite(std::span<const double> v, const char* what) {
    for (std::size_t i = 0; i < v.size(); ++i)
        if (!std::isfinite(v[i]))
            throw std::invalid_argument(std::string(what) + " sample " + std::to_string(i) + " is not finite");
}

}  // namespace

Signal::Signal(TimeGrid grid, std::vector<double> values) : grid_(std::move(grid)), re_(std::move(values)) {
    if (re_.size() != grid_.size())
        throw std::invalid_argument("signal length " + std::to_string(re_.size()) + " does not match grid length " +
                                    std::to_string(grid_.size()));
    check_finite(re_, "signal");
}

Signal::Signal(TimeGrid grid, std::vector<double> re, std::vector<double> im)
    : grid_(std::move(grid)), re_(std::move(re)), im_(std::move(im)) {
    if (re_.size() != grid_.size() || (!im_.empty() && im_.size() != re_.size()))
        throw std::invalid_argument("signal length does not match grid length");
    check_finite(re_, "signal (real part)");
    check_finite(im_, "signal (imaginary part)");
}

Signal Signal::from_complex(TimeGrid grid, std::span<const std::complex<double>> values) {
    std::vector<double> re(values.size()), im(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        re[i] = values[i].real();
        im[i] = values[i].imag();
    }
    return Signal(std::move(grid), std::move(re), std::move(im));
}

Signal Signal::zeros(TimeGrid grid) {
    std::vector<double> v(grid.size(), 0.0);
    return Signal(std::move(grid), std::move(v));
}

std::vector<std::complex<double>> Signal::complex_values() const {
    std::vector<std::complex<double>> out(size());
    for (std::size_t i = 0; i < size(); ++i) out[i] = value(i);
    return out;
}

namespace {

Signal combine(const Signal& a, const Signal& b, double sign) {
    if (a.size() != b.size()) throw std::invalid_argument("signal lengths differ");
    std::vector<double> re(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) re[i] = a.real()[i] + sign * b.real()[i];
    if (!a.is_complex() && !b.is_complex()) return Signal(a.grid(), std::move(re));
    std::vector<double> im(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) im[i] = a.value(i).imag() + sign * b.value(i).imag();
    return Signal(a.grid(), std::move(re), std::move(im));
}

}  // namespace

Signal operator+(const Signal& a, const Signal& b) { return combine(a, b, 1.0); }
Signal operator-(const Signal& a, const Signal& b) { return combine(a, b, -1.0); }

Signal operator*(double c, const Signal& s) {
    std::vector<double> re(s.real());
    for (double& v : re) v *= c;
    if (!s.is_complex()) return Signal(s.grid(), std::move(re));
    std::vector<double> im(s.imag());
    for (double& v : im) v *= c;
    return Signal(s.grid(), std::move(re), std::move(im));
}

void InstProfile::validate() const {
    if (phase.size() != amplitude.size())
        throw std::invalid_argument("profile phase and amplitude lengths differ");
    for (std::size_t i = 1; i < phase.size(); ++i)
        if (!(phase[i] > phase[i - 1]))
            throw std::invalid_argument("profile phase not strictly increasing at index " + std::to_string(i));
    for (std::size_t i = 0; i < amplitude.size(); ++i)
        if (!(amplitude[i] > 1e-8) || !std::isfinite(amplitude[i]))
            throw std::invalid_argument("profile amplitude not bounded away from zero at index " +
                                        std::to_string(i));
}

double ShapeEstimate::mean() const {
    if (samples.empty()) return 0.0;
    return std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
}

double ShapeEstimate::l2_norm() const {
    if (samples.empty()) return 0.0;
    double acc = 0.0;
    for (double v : samples) acc += v * v;
    return std::sqrt(acc / static_cast<double>(samples.size()));
}

void ModelParams::validate() const {
    if (!(M >= 1.0)) throw std::invalid_argument("M must be >= 1");
    if (K < 1) throw std::invalid_argument("K must be >= 1");
    if (K0 < 1) throw std::invalid_argument("K0 must be >= 1");
    if (!(d > 0.0 && d <= 1.0)) throw std::invalid_argument("d must lie in (0,1]");
}

double l2_norm(const Signal& sig) {
    if (sig.empty()) throw std::invalid_argument("l2_norm of an empty signal");
    const auto& g = sig.grid();
    auto sq = [&](std::size_t i) { return std::norm(sig.value(i)); };
    double integral = 0.0;
    if (g.is_uniform()) {
        for (std::size_t i = 0; i < sig.size(); ++i) integral += sq(i);
        integral *= g.step();
    } else {
        // Trapezoid between samples, constant extension to the ends of [0,1].
        integral += sq(0) * g[0] + sq(sig.size() - 1) * (1.0 - g[sig.size() - 1]);
        for (std::size_t i = 1; i < sig.size(); ++i) integral += 0.5 * (sq(i) + sq(i - 1)) * (g[i] - g[i - 1]);
    }
    return std::sqrt(integral);
}

ShapeEstimate shape_mean_remove(const ShapeEstimate& s) {
    ShapeEstimate out = s;
    const double m = s.mean();
    for (double& v : out.samples) v -= m;
    return out;
}

double eval_shape(const ShapeEstimate& s, double x) {
    const std::size_t G = s.samples.size();
    if (G == 0) return 0.0;
    double frac = x - std::floor(x);
    double pos = frac * static_cast<double>(G);
    auto i0 = static_cast<std::size_t>(pos);
    if (i0 >= G) i0 = G - 1;  // frac rounded up to 1.0
    const double w = pos - static_cast<double>(i0);
    const std::size_t i1 = (i0 + 1 == G) ? 0 : i0 + 1;
    return (1.0 - w) * s.samples[i0] + w * s.samples[i1];
}

ShapeClassReport validate_shape_class(const ShapeEstimate& s, const ModelParams& params, double mean_tol) {
    ShapeClassReport r;
    const std::size_t G = s.samples.size();
    if (G == 0) return r;

    detail::FftPlan plan(G, detail::FftPlan::Direction::forward);
    auto buf = plan.buffer();
    for (std::size_t i = 0; i < G; ++i) buf[i] = s.samples[i];
    plan.execute();

    std::vector<double> mag(G);
    for (std::size_t i = 0; i < G; ++i) mag[i] = std::abs(buf[i]) / static_cast<double>(G);
    const double peak = *std::ranges::max_element(mag);
    const double spectral_tol = 1e-6 * peak;

    r.mean_coefficient = mag[0];
    r.coefficient_l1 = std::accumulate(mag.begin(), mag.end(), 0.0);
    r.sup_norm = 0.0;
    for (double v : s.samples) r.sup_norm = std::max(r.sup_norm, std::abs(v));

    int g = 0;
    for (std::size_t i = 1; i < G; ++i) {
        if (mag[i] > spectral_tol && peak > 0.0) {
            const auto n = static_cast<int>(std::min(i, G - i));
            g = std::gcd(g, n);
        }
    }
    r.active_gcd = g;
    r.zero_mean = r.mean_coefficient < mean_tol;
    r.coefficient_bound = r.coefficient_l1 <= params.M;
    r.sup_bound = r.sup_norm <= params.M;
    r.gcd_one = (g == 1);
    return r;
}

double shape_relative_error(const ShapeEstimate& estimate, const ShapeEstimate& truth) {
    if (estimate.samples.size() != truth.samples.size())
        throw std::invalid_argument("shape grids differ");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < truth.samples.size(); ++i) {
        const double d = estimate.samples[i] - truth.samples[i];
        num += d * d;
        den += truth.samples[i] * truth.samples[i];
    }
    if (den == 0.0) return std::sqrt(num);
    return std::sqrt(num / den);
}

namespace {

WarningSink& sink() {
    static WarningSink s = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
    return s;
}

}  // namespace

void set_warning_sink(WarningSink s) { sink() = std::move(s); }

void warn(const std::string& message) {
    if (sink()) sink()(message);
}

}  // namespace rdbr
