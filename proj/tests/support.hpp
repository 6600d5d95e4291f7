#pragma once

// Small builders shared by the test binaries.

#include "rdbr/core.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

namespace rdbr::testing {

inline Signal sampled(std::size_t L, const std::function<double(double)>& f) {
    TimeGrid g = TimeGrid::uniform(L);
    std::vector<double> v(L);
    for (std::size_t i = 0; i < L; ++i) v[i] = f(g[i]);
    return Signal(g, std::move(v));
}

inline Signal sampled_complex(std::size_t L, const std::function<std::complex<double>(double)>& f) {
    TimeGrid g = TimeGrid::uniform(L);
    std::vector<std::complex<double>> v(L);
    for (std::size_t i = 0; i < L; ++i) v[i] = f(g[i]);
    return Signal::from_complex(g, v);
}

inline Signal tone(std::size_t L, double freq, double amp = 1.0) {
    return sampled_complex(L, [&](double t) { return amp * std::polar(1.0, kTwoPi * freq * t); });
}

inline InstProfile profile_of(const TimeGrid& g, const std::function<double(double)>& phase,
                              const std::function<double(double)>& amp) {
    InstProfile p;
    for (double t : g.points()) {
        p.phase.push_back(phase(t));
        p.amplitude.push_back(amp(t));
    }
    return p;
}

inline ShapeEstimate shape_of(std::size_t G, const std::function<double(double)>& s) {
    ShapeEstimate out;
    out.samples.resize(G);
    for (std::size_t i = 0; i < G; ++i) out.samples[i] = s(static_cast<double>(i) / static_cast<double>(G));
    return out;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double relative_l2(const Signal& est, const Signal& truth) {
    return l2_norm(est - truth) / l2_norm(truth);
}

inline ShapeEstimate unit_cosine(std::size_t G = kDefaultShapeGrid) {
    return shape_of(G, [](double x) { return std::sqrt(2.0) * std::cos(kTwoPi * x); });
}

}  // namespace rdbr::testing
