#include "rdbr/ridge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace rdbr {

double RidgeCurve::mean_freq() const {
    if (freqs.empty()) return 0.0;
    return std::accumulate(freqs.begin(), freqs.end(), 0.0) / static_cast<double>(freqs.size());
}

double RidgeCurve::mean_energy() const {
    if (energy.empty()) return 0.0;
    return std::accumulate(energy.begin(), energy.end(), 0.0) / static_cast<double>(energy.size());
}

namespace {

// out(m) = min_q g(q) + lambda (m - q)^2 with argmin, via the lower envelope of parabolas.
void quadratic_min_convolution(const std::vector<double>& g, double lambda, std::vector<double>& out,
                               std::vector<int>& arg) {
    const int n = static_cast<int>(g.size());
    out.assign(g.size(), 0.0);
    arg.assign(g.size(), 0);
    if (lambda <= 0.0) {
        const auto it = std::ranges::min_element(g);
        std::ranges::fill(out, *it);
        std::ranges::fill(arg, static_cast<int>(it - g.begin()));
        return;
    }
    std::vector<int> v(g.size());
    std::vector<double> z(g.size() + 1);
    int k = 0;
    v[0] = 0;
    z[0] = -std::numeric_limits<double>::infinity();
    z[1] = std::numeric_limits<double>::infinity();
    auto key = [&](int q) { return g[static_cast<std::size_t>(q)] + lambda * q * static_cast<double>(q); };
    for (int q = 1; q < n; ++q) {
        double s = 0.0;
        while (true) {
            const int r = v[static_cast<std::size_t>(k)];
            s = (key(q) - key(r)) / (2.0 * lambda * (q - r));
            if (s <= z[static_cast<std::size_t>(k)] && k > 0) {
                --k;
                continue;
            }
            break;
        }
        if (s <= z[static_cast<std::size_t>(k)]) {
            // k == 0 and the new parabola dominates everywhere.
            v[0] = q;
            z[1] = std::numeric_limits<double>::infinity();
            continue;
        }
        ++k;
        v[static_cast<std::size_t>(k)] = q;
        z[static_cast<std::size_t>(k)] = s;
        z[static_cast<std::size_t>(k) + 1] = std::numeric_limits<double>::infinity();
    }
    k = 0;
    for (int m = 0; m < n; ++m) {
        while (z[static_cast<std::size_t>(k) + 1] < m) ++k;
        const int q = v[static_cast<std::size_t>(k)];
        out[static_cast<std::size_t>(m)] = g[static_cast<std::size_t>(q)] + lambda * (m - q) * static_cast<double>(m - q);
        arg[static_cast<std::size_t>(m)] = q;
    }
}

std::vector<int> best_path(const RealMatrix& energy, double floor, double penalty) {
    const auto nf = static_cast<std::size_t>(energy.rows());
    const auto nt = static_cast<std::size_t>(energy.cols());
    std::vector<std::vector<int>> back(nt, std::vector<int>(nf, 0));
    std::vector<double> score(nf), neg(nf), conv;
    std::vector<int> arg;
    for (std::size_t m = 0; m < nf; ++m) score[m] = std::log(energy(static_cast<Eigen::Index>(m), 0) + floor);
    for (std::size_t j = 1; j < nt; ++j) {
        for (std::size_t m = 0; m < nf; ++m) neg[m] = -score[m];
        quadratic_min_convolution(neg, penalty, conv, arg);
        for (std::size_t m = 0; m < nf; ++m) {
            score[m] = -conv[m] + std::log(energy(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j)) + floor);
            back[j][m] = arg[m];
        }
    }
    std::vector<int> path(nt);
    path[nt - 1] = static_cast<int>(std::ranges::max_element(score) - score.begin());
    for (std::size_t j = nt - 1; j > 0; --j) path[j - 1] = back[j][static_cast<std::size_t>(path[j])];
    return path;
}

}  // namespace

std::vector<RidgeCurve> extract_ridges(const TfDistribution& tf, int max_ridges, double smoothness_penalty,
                                       const RidgeOptions& opts) {
    if (max_ridges < 1) throw std::invalid_argument("extract_ridges: max_ridges must be >= 1");
    if (tf.energy.size() == 0) throw std::invalid_argument("extract_ridges: empty distribution");
    std::vector<RidgeCurve> ridges;
    RealMatrix work = tf.energy;
    const double peak = work.maxCoeff();
    if (!(peak > 0.0)) return ridges;
    const double floor = 1e-12 * peak;
    const Eigen::Index nf = work.rows();

    double first_mean = 0.0;
    for (int r = 0; r < max_ridges; ++r) {
        if (!(work.maxCoeff() > 0.0)) break;
        const std::vector<int> path = best_path(work, floor, smoothness_penalty);
        RidgeCurve c;
        c.times = tf.times;
        c.freqs.resize(path.size());
        c.energy.resize(path.size());
        for (std::size_t j = 0; j < path.size(); ++j) {
            c.freqs[j] = tf.freqs[static_cast<std::size_t>(path[j])];
            c.energy[j] = work(path[j], static_cast<Eigen::Index>(j));
        }
        const double mean_e = c.mean_energy();
        if (r == 0) first_mean = mean_e;
        else if (mean_e < opts.stop_ratio * first_mean) break;
        for (std::size_t j = 0; j < path.size(); ++j) {
            const Eigen::Index lo = std::max<Eigen::Index>(0, path[j] - opts.band_halfwidth);
            const Eigen::Index hi = std::min<Eigen::Index>(nf - 1, path[j] + opts.band_halfwidth);
            for (Eigen::Index m = lo; m <= hi; ++m) work(m, static_cast<Eigen::Index>(j)) = 0.0;
        }
        ridges.push_back(std::move(c));
    }
    return ridges;
}

namespace {

double mean_ratio(const RidgeCurve& num, const RidgeCurve& den) {
    if (num.freqs.size() != den.freqs.size() || num.freqs.empty()) return num.mean_freq() / den.mean_freq();
    double acc = 0.0;
    for (std::size_t j = 0; j < num.freqs.size(); ++j) acc += num.freqs[j] / den.freqs[j];
    return acc / static_cast<double>(num.freqs.size());
}

}  // namespace

RidgeClassification classify_fundamentals(const std::vector<RidgeCurve>& ridges, int k, double tol) {
    if (ridges.empty()) throw std::invalid_argument("classify_fundamentals: no ridges");
    if (k < 1) throw std::invalid_argument("classify_fundamentals: k must be >= 1");

    std::vector<std::size_t> order(ridges.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::ranges::stable_sort(order, {}, [&](std::size_t i) { return ridges[i].mean_freq(); });

    RidgeClassification out;
    out.group.assign(ridges.size(), -1);
    out.harmonic.assign(ridges.size(), 0);
    std::vector<std::size_t> seeds;

    for (std::size_t idx : order) {
        // Best match: smallest harmonic index among groups within tolerance, then smallest deviation.
        int best_group = -1, best_n = 0;
        double best_dev = std::numeric_limits<double>::infinity();
        bool best_within = false;
        for (std::size_t g = 0; g < seeds.size(); ++g) {
            const double ratio = mean_ratio(ridges[idx], ridges[seeds[g]]);
            const int n = std::max(1, static_cast<int>(std::lround(ratio)));
            const double dev = std::abs(ratio - n);
            const bool within = dev <= tol;
            const bool better = (within && !best_within) || (within == best_within && within && n < best_n) ||
                                (within == best_within && (!within || n == best_n) && dev < best_dev);
            if (best_group < 0 || better) {
                best_group = static_cast<int>(g);
                best_n = n;
                best_dev = dev;
                best_within = within;
            }
        }
        const bool is_harmonic = best_group >= 0 && best_within && best_n >= 2;
        if (static_cast<int>(seeds.size()) < k && !is_harmonic) {
            out.group[idx] = static_cast<int>(seeds.size());
            out.harmonic[idx] = 1;
            seeds.push_back(idx);
        } else {
            out.group[idx] = best_group;
            out.harmonic[idx] = best_n;
        }
    }
    if (static_cast<int>(seeds.size()) < k)
        throw std::invalid_argument("classify_fundamentals: cannot seed " + std::to_string(k) + " groups from " +
                                    std::to_string(ridges.size()) + " ridges");

    out.fundamentals.resize(seeds.size());
    out.fundamental_source.resize(seeds.size());
    out.fundamental_harmonic.resize(seeds.size());
    for (std::size_t g = 0; g < seeds.size(); ++g) {
        std::size_t src = seeds[g];
        for (std::size_t i = 0; i < ridges.size(); ++i)
            if (out.group[i] == static_cast<int>(g) && out.harmonic[i] < out.harmonic[src]) src = i;
        RidgeCurve f = ridges[src];
        const double n = out.harmonic[src];
        for (double& v : f.freqs) v /= n;
        out.fundamentals[g] = std::move(f);
        out.fundamental_source[g] = static_cast<int>(src);
        out.fundamental_harmonic[g] = out.harmonic[src];
    }
    return out;
}

namespace {

// Linear interpolation of samples at times j/nb, periodic in [0,1).
double periodic_interp(const std::vector<double>& values, double t) {
    const std::size_t n = values.size();
    const double pos = (t - std::floor(t)) * static_cast<double>(n);
    auto i0 = static_cast<std::size_t>(pos);
    if (i0 >= n) i0 = n - 1;
    const double w = pos - static_cast<double>(i0);
    return (1.0 - w) * values[i0] + w * values[(i0 + 1) % n];
}

}  // namespace

InstProfile profile_from_fundamental(const RidgeCurve& curve, const WpCoefficients& wp, const WavePacketConfig& cfg,
                                     const TimeGrid& grid, const ProfileOptions& opts) {
    if (curve.freqs.size() != wp.times.size() || curve.freqs.empty())
        throw std::invalid_argument("profile_from_fundamental: curve has " + std::to_string(curve.freqs.size()) +
                                    " samples, transform has " + std::to_string(wp.times.size()) + " times");
    if (grid.size() != wp.signal_length || !grid.is_uniform())
        throw std::invalid_argument("profile_from_fundamental: grid does not match the transformed signal");
    if (opts.harmonic < 1) throw std::invalid_argument("profile_from_fundamental: harmonic must be >= 1");

    const std::size_t L = grid.size();
    InstProfile prof;

    const RealMatrix v = inst_freq_info(wp, cfg);
    BoolMatrix mask = BoolMatrix::Constant(v.rows(), v.cols(), false);
    const double half = opts.band_halfwidth * opts.bin_width;
    std::vector<double> col_freq = curve.freqs;
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
        const double centre = opts.harmonic * curve.freqs[static_cast<std::size_t>(j)];
        double wsum = 0.0, vsum = 0.0;
        for (Eigen::Index i = 0; i < v.rows(); ++i) {
            mask(i, j) = std::isfinite(v(i, j)) && std::abs(v(i, j) - centre) <= half;
            if (mask(i, j)) {
                const double w = std::norm(wp.coeffs(i, j)) * wp.scale_weights[static_cast<std::size_t>(i)];
                wsum += w;
                vsum += w * v(i, j);
            }
        }
        // Energy-weighted mean of v_f under the mask: sub-bin frequency estimate.
        if (opts.refine && wsum > 0.0) col_freq[static_cast<std::size_t>(j)] = vsum / wsum / opts.harmonic;
    }

    std::vector<double> freq(L);
    for (std::size_t l = 0; l < L; ++l) freq[l] = periodic_interp(col_freq, grid[l]);
    prof.phase.assign(L, 0.0);
    for (std::size_t l = 1; l < L; ++l) prof.phase[l] = prof.phase[l - 1] + 0.5 * (freq[l] + freq[l - 1]) * (grid[l] - grid[l - 1]);
    prof.fundamental_freq_hint = std::accumulate(col_freq.begin(), col_freq.end(), 0.0) / static_cast<double>(col_freq.size());

    const Signal component = invert_on_support(wp, mask, cfg);

    std::size_t window = opts.amp_smooth;
    if (window == 0) {
        const double period = prof.fundamental_freq_hint > 0.0 ? static_cast<double>(L) / prof.fundamental_freq_hint : 1.0;
        window = static_cast<std::size_t>(std::max(1.0, std::round(period)));
    }
    window = std::min(window, L);

    std::vector<double> mag(L);
    for (std::size_t l = 0; l < L; ++l) mag[l] = std::abs(component.value(l));
    // Circular moving average centred on each sample.
    std::vector<double> prefix(2 * L + 1, 0.0);
    for (std::size_t i = 0; i < 2 * L; ++i) prefix[i + 1] = prefix[i] + mag[i % L];
    prof.amplitude.resize(L);
    const std::size_t left = window / 2;
    for (std::size_t l = 0; l < L; ++l) {
        const std::size_t start = l + L - left;  // index into the doubled sequence
        const std::size_t s = start % L;
        const double sum = prefix[s + window] - prefix[s];
        prof.amplitude[l] = sum / static_cast<double>(window);
    }
    if (opts.phase_source == PhaseSource::component_argument) {
        // Unwrapped argument of the band component, divided by the harmonic index.
        double prev = std::arg(component.value(0)) / kTwoPi, acc = 0.0;
        prof.phase[0] = 0.0;
        for (std::size_t l = 1; l < L; ++l) {
            const double a = std::arg(component.value(l)) / kTwoPi;
            double d = a - prev;
            d -= std::round(d);
            acc += d;
            prev = a;
            prof.phase[l] = acc / opts.harmonic;
        }
    }
    if (opts.amplitude_source == AmplitudeSource::ridge_peak) {
        // max_a |W(a,b)| a^{s/2} over scales near the ridge, at each transform time.
        std::vector<double> peak(wp.times.size(), 0.0);
        for (std::size_t j = 0; j < wp.times.size(); ++j) {
            const double centre = opts.harmonic * col_freq[j];
            for (std::size_t i = 0; i < wp.scales.size(); ++i) {
                if (std::abs(wp.scales[i] - centre) > half) continue;
                const double m = std::abs(wp.coeffs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) *
                                 std::pow(wp.scales[i], 0.5 * wp.s_geom);
                peak[j] = std::max(peak[j], m);
            }
        }
        for (std::size_t l = 0; l < L; ++l) mag[l] = periodic_interp(peak, grid[l]);
        for (std::size_t i = 0; i < 2 * L; ++i) prefix[i + 1] = prefix[i] + mag[i % L];
        for (std::size_t l = 0; l < L; ++l) {
            const std::size_t s = (l + L - left) % L;
            prof.amplitude[l] = (prefix[s + window] - prefix[s]) / static_cast<double>(window);
        }
    }
    const double amax = *std::ranges::max_element(prof.amplitude);
    if (!(amax > 0.0)) throw std::runtime_error("profile_from_fundamental: no energy under the ridge mask");
    for (double& a : prof.amplitude) a = std::max(a, 1e-6 * amax);
    return prof;
}

}  // namespace rdbr
