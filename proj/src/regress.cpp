#include "rdbr/regress.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rdbr {

void RegressionConfig::validate() const {
    if (nbins < 2) throw std::invalid_argument("nbins must be >= 2");
    if (nk < 2) throw std::invalid_argument("nk must be >= 2");
    if (ord < 1 || ord > 3) throw std::invalid_argument("ord must be 1, 2 or 3");
    if (!(krf >= 1.0)) throw std::invalid_argument("krf must be >= 1");
    if (shape_grid < 2) throw std::invalid_argument("shape grid must have at least 2 points");
    if (knot_iters < 0) throw std::invalid_argument("knot_iters must be >= 0");
}

const char* to_string(RegressionMethod m) { return m == RegressionMethod::spline ? "spline" : "partition"; }

RegressionMethod regression_method_from_string(const std::string& name) {
    if (name == "partition") return RegressionMethod::partition;
    if (name == "spline") return RegressionMethod::spline;
    throw std::invalid_argument("unknown regression method '" + name + "' (partition, spline)");
}

FoldedSamples warp_and_fold(const Signal& residual, const InstProfile& profile) {
    if (residual.size() != profile.phase.size() || residual.size() != profile.amplitude.size())
        throw std::invalid_argument("warp_and_fold: residual has " + std::to_string(residual.size()) +
                                    " samples, profile has " + std::to_string(profile.phase.size()));
    FoldedSamples fs;
    const std::size_t L = residual.size();
    fs.xs.resize(L);
    fs.ys.resize(L);
    fs.source_times = residual.grid().points();
    for (std::size_t l = 0; l < L; ++l) {
        const double a = profile.amplitude[l];
        if (!(std::abs(a) >= 1e-8))
            throw std::invalid_argument("warp_and_fold: amplitude " + std::to_string(a) + " too small at t=" +
                                        std::to_string(fs.source_times[l]));
        double x = profile.phase[l] - std::floor(profile.phase[l]);
        if (x >= 1.0) x = 0.0;
        fs.xs[l] = x;
        fs.ys[l] = residual.real()[l] / a;
    }
    return fs;
}

namespace {

std::size_t bin_of(double x, int nbins) {
    const auto b = static_cast<long>(std::floor(x * nbins));
    return static_cast<std::size_t>(std::clamp<long>(b, 0, nbins - 1));
}

// Periodic linear interpolation of values given at centres (sorted, in [0,1)) onto x.
double periodic_lerp(const std::vector<double>& centres, const std::vector<double>& values, double x) {
    const std::size_t n = centres.size();
    if (n == 1) return values[0];
    const auto it = std::upper_bound(centres.begin(), centres.end(), x);
    std::size_t hi = static_cast<std::size_t>(it - centres.begin());
    double x0, x1, v0, v1;
    if (hi == 0) {
        x0 = centres[n - 1] - 1.0; v0 = values[n - 1];
        x1 = centres[0]; v1 = values[0];
    } else if (hi == n) {
        x0 = centres[n - 1]; v0 = values[n - 1];
        x1 = centres[0] + 1.0; v1 = values[0];
    } else {
        x0 = centres[hi - 1]; v0 = values[hi - 1];
        x1 = centres[hi]; v1 = values[hi];
    }
    const double w = (x - x0) / (x1 - x0);
    return (1.0 - w) * v0 + w * v1;
}

}  // namespace

BinMeans partition_bin_means(const FoldedSamples& fs, int nbins) {
    if (nbins < 2) throw std::invalid_argument("nbins must be >= 2");
    if (fs.xs.size() != fs.ys.size()) throw std::invalid_argument("folded samples: xs and ys lengths differ");
    BinMeans bm;
    bm.means.assign(static_cast<std::size_t>(nbins), 0.0);
    bm.counts.assign(static_cast<std::size_t>(nbins), 0);
    for (std::size_t l = 0; l < fs.xs.size(); ++l) {
        const std::size_t b = bin_of(fs.xs[l], nbins);
        bm.means[b] += fs.ys[l];
        ++bm.counts[b];
    }
    for (std::size_t b = 0; b < bm.means.size(); ++b)
        if (bm.counts[b] > 0) bm.means[b] /= static_cast<double>(bm.counts[b]);
    return bm;
}

ShapeEstimate partition_regress(const FoldedSamples& fs, const RegressionConfig& cfg) {
    cfg.validate();
    if (fs.size() == 0) throw std::invalid_argument("partition_regress: no samples");
    const BinMeans bm = partition_bin_means(fs, cfg.nbins);
    const auto nb = static_cast<std::size_t>(cfg.nbins);

    std::vector<double> centres, values;
    for (std::size_t b = 0; b < nb; ++b) {
        if (bm.counts[b] == 0) continue;
        centres.push_back((static_cast<double>(b) + 0.5) / static_cast<double>(nb));
        values.push_back(bm.means[b]);
    }
    if (centres.empty()) throw std::invalid_argument("partition_regress: all bins empty");

    std::vector<double> full(nb), all_centres(nb);
    for (std::size_t b = 0; b < nb; ++b) {
        all_centres[b] = (static_cast<double>(b) + 0.5) / static_cast<double>(nb);
        full[b] = bm.counts[b] > 0 ? bm.means[b] : periodic_lerp(centres, values, all_centres[b]);
    }

    ShapeEstimate s;
    s.samples.resize(cfg.shape_grid);
    for (std::size_t n = 0; n < cfg.shape_grid; ++n)
        s.samples[n] = periodic_lerp(all_centres, full, static_cast<double>(n) / static_cast<double>(cfg.shape_grid));
    return shape_mean_remove(s);
}

namespace {

// Periodic B-spline space of the given degree on sorted knots u in [0,1).
class PeriodicSpline {
public:
    PeriodicSpline(std::vector<double> knots, int degree) : u_(std::move(knots)), p_(degree) {
        const int n = static_cast<int>(u_.size());
        ext_.resize(static_cast<std::size_t>(n + 2 * p_ + 1));
        for (int k = 0; k < n + 2 * p_ + 1; ++k) {
            const int j = k - p_;
            const int q = j >= 0 ? j / n : -((-j + n - 1) / n);
            ext_[static_cast<std::size_t>(k)] = u_[static_cast<std::size_t>(j - q * n)] + q;
        }
    }

    std::size_t dim() const { return u_.size(); }

    // Writes the p+1 nonzero basis values at x and their column indices.
    void eval(double x, double* vals, int* cols) const {
        const int n = static_cast<int>(u_.size());
        const double t0 = u_.front();
        double y = x - std::floor(x - t0);  // y in [t0, t0 + 1)
        if (y >= t0 + 1.0) y -= 1.0;
        // span s with t_s <= y < t_{s+1}, s in [0, n-1]
        const auto first = ext_.begin() + p_;
        int s = static_cast<int>(std::upper_bound(first, first + n + 1, y) - first) - 1;
        s = std::clamp(s, 0, n - 1);
        auto t = [&](int i) { return ext_[static_cast<std::size_t>(i + p_)]; };
        double left[4], right[4];
        vals[0] = 1.0;
        for (int j = 1; j <= p_; ++j) {
            left[j] = y - t(s + 1 - j);
            right[j] = t(s + j) - y;
            double saved = 0.0;
            for (int r = 0; r < j; ++r) {
                const double denom = right[r + 1] + left[j - r];
                const double tmp = denom > 0.0 ? vals[r] / denom : 0.0;
                vals[r] = saved + right[r + 1] * tmp;
                saved = left[j - r] * tmp;
            }
            vals[j] = saved;
        }
        for (int r = 0; r <= p_; ++r) cols[r] = ((s - p_ + r) % n + n) % n;
    }

    // Least-squares coefficients; returns the RMS residual.
    double fit(const FoldedSamples& fs, Eigen::VectorXd& coef) const {
        const auto n = static_cast<Eigen::Index>(dim());
        Eigen::MatrixXd ata = Eigen::MatrixXd::Zero(n, n);
        Eigen::VectorXd aty = Eigen::VectorXd::Zero(n);
        double vals[4];
        int cols[4];
        for (std::size_t l = 0; l < fs.size(); ++l) {
            eval(fs.xs[l], vals, cols);
            for (int r = 0; r <= p_; ++r) {
                aty(cols[r]) += vals[r] * fs.ys[l];
                for (int c = 0; c <= p_; ++c) ata(cols[r], cols[c]) += vals[r] * vals[c];
            }
        }
        const double ridge = 1e-12 * (ata.trace() / static_cast<double>(n) + 1e-300);
        ata.diagonal().array() += ridge;
        coef = ata.ldlt().solve(aty);
        double sse = 0.0;
        for (std::size_t l = 0; l < fs.size(); ++l) {
            const double d = fs.ys[l] - value(coef, fs.xs[l]);
            sse += d * d;
        }
        return std::sqrt(sse / static_cast<double>(fs.size()));
    }

    double value(const Eigen::VectorXd& coef, double x) const {
        double vals[4];
        int cols[4];
        eval(x, vals, cols);
        double v = 0.0;
        for (int r = 0; r <= p_; ++r) v += vals[r] * coef(cols[r]);
        return v;
    }

private:
    std::vector<double> u_;
    int p_;
    std::vector<double> ext_;  // ext_[k] = t_{k-p}, periodic extension of u_
};

}  // namespace

namespace {

// Knots on the circle from a shift and gap weights: u_0 = frac(shift), gaps = floor + softmax(z) share.
std::vector<double> knots_from_params(const Eigen::VectorXd& q) {
    const auto n = q.size() - 1;
    const double gmin = 0.01 / static_cast<double>(n);
    const double zmax = q.tail(n).maxCoeff();
    Eigen::ArrayXd w = (q.tail(n).array() - zmax).exp();
    w = gmin + (1.0 - static_cast<double>(n) * gmin) * w / w.sum();
    std::vector<double> u(static_cast<std::size_t>(n));
    double pos = q(0) - std::floor(q(0));
    for (Eigen::Index i = 0; i < n; ++i) {
        u[static_cast<std::size_t>(i)] = pos;
        pos += w(i);
    }
    // Rotate so the list starts at the smallest position in [0,1).
    for (double& v : u) v -= std::floor(v);
    std::sort(u.begin(), u.end());
    return u;
}

Eigen::VectorXd fit_residuals(const FoldedSamples& fs, const std::vector<double>& knots, int ord) {
    const PeriodicSpline sp(knots, ord);
    Eigen::VectorXd coef;
    sp.fit(fs, coef);
    Eigen::VectorXd r(static_cast<Eigen::Index>(fs.size()));
    for (std::size_t l = 0; l < fs.size(); ++l) r(static_cast<Eigen::Index>(l)) = fs.ys[l] - sp.value(coef, fs.xs[l]);
    return r;
}

// Levenberg-Marquardt on the knot parameters of the projected least-squares residual.
std::vector<double> optimise_knots(const FoldedSamples& fs, std::size_t nk, int ord, int max_iter) {
    const auto n = static_cast<Eigen::Index>(nk);
    Eigen::VectorXd q = Eigen::VectorXd::Zero(n + 1);
    q(0) = 0.0;
    Eigen::VectorXd r = fit_residuals(fs, knots_from_params(q), ord);
    double sse = r.squaredNorm();
    double lambda = 1e-3;
    const double h = 1e-6;
    Eigen::MatrixXd J(r.size(), n + 1);
    for (int it = 0; it < max_iter && sse > 0.0; ++it) {
        for (Eigen::Index k = 0; k <= n; ++k) {
            Eigen::VectorXd qk = q;
            qk(k) += h;
            J.col(k) = (fit_residuals(fs, knots_from_params(qk), ord) - r) / h;
        }
        const Eigen::MatrixXd jtj = J.transpose() * J;
        const Eigen::VectorXd jtr = J.transpose() * r;
        bool improved = false;
        for (int tries = 0; tries < 8 && !improved; ++tries) {
            Eigen::MatrixXd a = jtj;
            a.diagonal() += lambda * (jtj.diagonal().array() + 1e-12).matrix();
            const Eigen::VectorXd step = a.ldlt().solve(-jtr);
            const Eigen::VectorXd qn = q + step;
            Eigen::VectorXd rn = fit_residuals(fs, knots_from_params(qn), ord);
            const double sn = rn.squaredNorm();
            if (std::isfinite(sn) && sn < sse) {
                const double gain = (sse - sn) / sse;
                q = qn;
                r = std::move(rn);
                sse = sn;
                lambda = std::max(lambda / 3.0, 1e-9);
                improved = true;
                if (gain < 1e-6) return knots_from_params(q);
            } else {
                lambda *= 10.0;
            }
        }
        if (!improved) break;
    }
    return knots_from_params(q);
}

}  // namespace

ShapeEstimate spline_regress(const FoldedSamples& fs, const RegressionConfig& cfg) {
    cfg.validate();
    const std::size_t required = static_cast<std::size_t>(cfg.nk) * static_cast<std::size_t>(cfg.ord + 1);
    if (fs.size() < required)
        throw std::invalid_argument("spline_regress: " + std::to_string(fs.size()) + " samples, need at least " +
                                    std::to_string(required));
    const auto min_knots = static_cast<std::size_t>(cfg.ord + 1);
    const auto nk = static_cast<std::size_t>(std::max(cfg.nk, cfg.ord + 1));
    std::vector<double> knots(nk);
    for (std::size_t i = 0; i < nk; ++i) knots[i] = static_cast<double>(i) / static_cast<double>(nk);
    if (cfg.knot_iters > 0) knots = optimise_knots(fs, nk, cfg.ord, cfg.knot_iters);

    Eigen::VectorXd coef;
    const double rms_full = PeriodicSpline(knots, cfg.ord).fit(fs, coef);
    const double limit = cfg.krf * rms_full + 1e-14;
    // Single sweep: drop each knot whose removal keeps the RMS within krf of the full fit.
    for (std::size_t i = 0; i < knots.size() && knots.size() > min_knots;) {
        std::vector<double> trial = knots;
        trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(i));
        Eigen::VectorXd c;
        if (PeriodicSpline(trial, cfg.ord).fit(fs, c) <= limit) knots = std::move(trial);
        else ++i;
    }
    const PeriodicSpline sp(knots, cfg.ord);
    sp.fit(fs, coef);

    ShapeEstimate s;
    s.samples.resize(cfg.shape_grid);
    for (std::size_t n = 0; n < cfg.shape_grid; ++n)
        s.samples[n] = sp.value(coef, static_cast<double>(n) / static_cast<double>(cfg.shape_grid));
    return shape_mean_remove(s);
}

ShapeEstimate regress(const FoldedSamples& fs, const RegressionConfig& cfg) {
    return cfg.method == RegressionMethod::spline ? spline_regress(fs, cfg) : partition_regress(fs, cfg);
}

}  // namespace rdbr
