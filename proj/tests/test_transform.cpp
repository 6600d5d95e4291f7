#include "support.hpp"

#include "rdbr/transform.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace rdbr;
using namespace rdbr::testing;

namespace {

// Unit-width bins centred on the integers 1..fmax.
TfDistribution unit_bins(const WpCoefficients& wp, const WavePacketConfig& cfg, int fmax) {
    return synchrosqueeze(wp, cfg, fmax, 1.0, static_cast<double>(fmax));
}

Eigen::Index column_argmax(const TfDistribution& tf, Eigen::Index j) {
    Eigen::Index m = 0;
    tf.energy.col(j).maxCoeff(&m);
    return m;
}

}  // namespace

TEST_SUITE("transform") {

TEST_CASE("mother packet shape and normalisation") {
    WavePacketConfig cfg;
    for (double d : {1.0, 0.5}) {
        cfg.rad = d;
        CHECK(mother_wavepacket_hat(d, cfg) == 0.0);
        CHECK(mother_wavepacket_hat(-d, cfg) == 0.0);
        const double peak = mother_wavepacket_hat(0.0, cfg);
        for (double x : {-0.9, -0.3, 0.1, 0.5, 0.99}) CHECK(mother_wavepacket_hat(x * d, cfg) < peak);
        const int n = 400000;
        const double h = 2.0 * d / n;
        double acc = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double w = mother_wavepacket_hat(-d + i * h, cfg);
            acc += w * w * h;
        }
        CHECK(acc == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("scale ladder follows the geometric step") {
    WavePacketConfig cfg;
    auto a = scale_ladder(cfg, 100.0);
    REQUIRE(a.size() > 10);
    CHECK(a.front() == 1.0);
    CHECK(a.back() <= 100.0);
    for (std::size_t i = 1; i < a.size(); ++i)
        CHECK(a[i] - a[i - 1] == doctest::Approx(std::pow(a[i - 1], cfg.s_geom) / cfg.red));
}

TEST_CASE("pure tone magnitude peaks next to its frequency") {
    WavePacketConfig cfg;
    auto wp = forward_wp(tone(1024, 60.0), cfg);
    std::size_t nearest = 0;
    for (std::size_t i = 0; i < wp.scales.size(); ++i)
        if (std::abs(wp.scales[i] - 60.0) < std::abs(wp.scales[nearest] - 60.0)) nearest = i;
    for (Eigen::Index j = 0; j < wp.coeffs.cols(); j += 37) {
        Eigen::Index best = 0;
        wp.coeffs.col(j).cwiseAbs().maxCoeff(&best);
        CHECK(std::abs(static_cast<long>(best) - static_cast<long>(nearest)) <= 1);
    }
}

TEST_CASE("zero signal gives zero coefficients and no frequency information") {
    WavePacketConfig cfg;
    auto wp = forward_wp(Signal::zeros(TimeGrid::uniform(256)), cfg);
    CHECK(wp.coeffs.cwiseAbs().maxCoeff() == 0.0);
    auto v = inst_freq_info(wp, cfg);
    CHECK(v.array().isInf().all());
    auto tf = unit_bins(wp, cfg, 128);
    CHECK(tf.energy.maxCoeff() == 0.0);
}

TEST_CASE("forward_wp is linear") {
    WavePacketConfig cfg;
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    Signal f = sampled(512, [&](double) { return nd(rng); });
    Signal g = sampled(512, [&](double) { return nd(rng); });
    const double c = -0.7;
    auto wf = forward_wp(f, cfg);
    auto wg = forward_wp(g, cfg);
    auto wsum = forward_wp(f + c * g, cfg);
    const double scale = wsum.coeffs.cwiseAbs().maxCoeff();
    CHECK((wsum.coeffs - wf.coeffs - c * wg.coeffs).cwiseAbs().maxCoeff() < 1e-12 * scale);
}

TEST_CASE("instantaneous frequency is exact for a pure tone") {
    WavePacketConfig cfg;
    auto wp = forward_wp(tone(1024, 60.0), cfg);
    auto v = inst_freq_info(wp, cfg);
    int finite = 0;
    for (Eigen::Index i = 0; i < v.rows(); ++i)
        for (Eigen::Index j = 0; j < v.cols(); ++j)
            if (std::isfinite(v(i, j))) {
                ++finite;
                CHECK(std::abs(v(i, j) - 60.0) < 1e-6);
            }
    CHECK(finite > 0);
}

TEST_CASE("pure tone energy concentrates near 60") {
    WavePacketConfig cfg;
    auto wp = forward_wp(tone(1024, 60.0), cfg);
    auto tf = unit_bins(wp, cfg, 256);
    const Eigen::Index centre = 59;  // bin of v = 60
    for (Eigen::Index j = 0; j < tf.energy.cols(); ++j) {
        const double total = tf.energy.col(j).sum();
        const double near = tf.energy.col(j).segment(centre - 2, 5).sum();
        CHECK(near >= 0.95 * total);
    }
    CHECK(tf.freqs[centre] == doctest::Approx(60.0));
}

TEST_CASE("two tones give two separated ridges") {
    WavePacketConfig cfg;
    auto wp = forward_wp(tone(1024, 60.0) + tone(1024, 90.0), cfg);
    auto tf = unit_bins(wp, cfg, 256);
    for (Eigen::Index j = 0; j < tf.energy.cols(); j += 50) {
        Eigen::VectorXd col = tf.energy.col(j);
        const double e60 = col.segment(57, 5).sum();
        const double e90 = col.segment(87, 5).sum();
        const double between = col.segment(66, 16).sum();
        CHECK(e60 > 0.3 * col.sum());
        CHECK(e90 > 0.3 * col.sum());
        CHECK(between < 0.01 * col.sum());
    }
}

TEST_CASE("total synchrosqueezed energy equals thresholded coefficient energy") {
    WavePacketConfig cfg;
    auto sig = sampled(512, [](double t) { return std::cos(kTwoPi * 40 * (t + 0.01 * std::sin(kTwoPi * t))); });
    auto wp = forward_wp(sig, cfg);
    const double lo = 1.0, hi = 200.0;
    const int nb = 100;
    auto tf = synchrosqueeze(wp, cfg, nb, lo, hi);

    // Independent sum over R_eps, restricted to the binned range.
    const double dv = (hi - lo) / (nb - 1);
    double expect = 0.0;
    for (Eigen::Index i = 0; i < wp.coeffs.rows(); ++i) {
        const double thr = std::sqrt(cfg.eps_sst) * std::pow(wp.scales[i], -cfg.s_geom / 2);
        for (Eigen::Index j = 0; j < wp.coeffs.cols(); ++j) {
            const auto w = wp.coeffs(i, j);
            if (std::abs(w) < thr || w == 0.0) continue;
            const double v = (wp.dcoeffs(i, j) / (std::complex<double>(0, kTwoPi) * w)).real();
            if (v < lo - dv / 2 || v >= hi + dv / 2) continue;
            expect += std::norm(w) * wp.scale_weights[i];
        }
    }
    CHECK(tf.energy.minCoeff() >= 0.0);
    CHECK(tf.energy.sum() == doctest::Approx(expect).epsilon(1e-12));
    CHECK(thresholded_energy(wp, cfg, nb, lo, hi) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("ridge of a slowly modulated mode tracks its frequency") {
    // Fundamental at about 100 with a single harmonic; deviation bound is sqrt(eps) * 10.
    WavePacketConfig cfg;
    const double N = 100.0, c = 0.01;
    auto sig = sampled_complex(2048, [&](double t) {
        return (1.0 + 0.05 * std::sin(kTwoPi * t)) * std::polar(1.0, kTwoPi * N * (t + c * std::sin(kTwoPi * t)));
    });
    auto wp = forward_wp(sig, cfg);
    auto tf = unit_bins(wp, cfg, 512);
    int good = 0;
    for (Eigen::Index j = 0; j < tf.energy.cols(); ++j) {
        const double b = tf.times[j];
        const double truth = N * (1 + c * kTwoPi * std::cos(kTwoPi * b));
        const double est = tf.freqs[column_argmax(tf, j)];
        if (std::abs(est - truth) / truth < std::sqrt(cfg.eps_sst) * 10) ++good;
    }
    CHECK(good >= static_cast<int>(0.99 * tf.energy.cols()));
}

TEST_CASE("inverse on the full support reproduces the signal") {
    WavePacketConfig cfg;
    Signal f = tone(1024, 60.0);
    auto wp = forward_wp(f, cfg);
    BoolMatrix all = BoolMatrix::Constant(wp.coeffs.rows(), wp.coeffs.cols(), true);
    CHECK(relative_l2(invert_on_support(wp, all, cfg), f) < 1e-2);

    BoolMatrix none = BoolMatrix::Constant(wp.coeffs.rows(), wp.coeffs.cols(), false);
    CHECK(l2_norm(invert_on_support(wp, none, cfg)) == 0.0);
}

TEST_CASE("inverse on a band separates two tones") {
    WavePacketConfig cfg;
    Signal t60 = tone(1024, 60.0);
    auto wp = forward_wp(t60 + tone(1024, 90.0), cfg);
    auto v = inst_freq_info(wp, cfg);
    BoolMatrix band = (v.array() - 60.0).abs() <= 5.0;
    CHECK(relative_l2(invert_on_support(wp, band, cfg), t60) < 5e-2);
}

TEST_CASE("configuration errors") {
    WavePacketConfig cfg;
    cfg.s_geom = 0.4;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.a_max = 600;
    CHECK_THROWS_AS(forward_wp(tone(1024, 60.0), cfg), std::invalid_argument);
    CHECK_THROWS_AS(forward_wp(Signal(), WavePacketConfig{}), std::invalid_argument);
    Signal irregular(TimeGrid::from_points({0.0, 0.1, 0.7}), std::vector<double>{1, 2, 3});
    CHECK_THROWS_AS(forward_wp(irregular, WavePacketConfig{}), std::invalid_argument);
}

}
