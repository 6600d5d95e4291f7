#include "rdbr/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace rdbr {

namespace {

Eigen::Index fold_bin(double p, int nbins) {
    const double x = p - std::floor(p);
    return std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor(x * nbins)), 0, nbins - 1);
}

}  // namespace

WellDiffReport well_differentiation(const std::vector<InstProfile>& profiles, const TimeGrid& grid, int nbins,
                                    double M) {
    if (nbins < 1) throw std::invalid_argument("well_differentiation: nbins must be >= 1");
    if (profiles.empty()) throw std::invalid_argument("well_differentiation: no profiles");
    const std::size_t L = grid.size();
    for (const auto& p : profiles)
        if (p.phase.size() != L) throw std::invalid_argument("well_differentiation: profile and grid lengths differ");
    if (static_cast<double>(nbins) * nbins > static_cast<double>(L))
        warn("well_differentiation: nbins^2 = " + std::to_string(nbins * nbins) + " exceeds L = " +
             std::to_string(L) + ", joint bins will be sparse");

    const std::size_t K = profiles.size();
    std::vector<std::vector<Eigen::Index>> bins(K, std::vector<Eigen::Index>(L));
    WellDiffReport rep;
    rep.d_marginal.assign(K, std::vector<long long>(static_cast<std::size_t>(nbins), 0));
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t l = 0; l < L; ++l) {
            bins[k][l] = fold_bin(profiles[k].phase[l], nbins);
            ++rep.d_marginal[k][static_cast<std::size_t>(bins[k][l])];
        }

    long long gamma = std::numeric_limits<long long>::max();
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = 0; j < K; ++j) {
            if (i == j) continue;
            JointCounts jc{static_cast<int>(i), static_cast<int>(j), CountMatrix::Zero(nbins, nbins)};
            for (std::size_t l = 0; l < L; ++l) ++jc.counts(bins[i][l], bins[j][l]);
            gamma = std::min(gamma, jc.counts.minCoeff());
            rep.d_joint.push_back(std::move(jc));
        }
    if (rep.d_joint.empty()) return rep;  // single profile: no pairs, beta = 0
    rep.gamma = gamma;

    for (const auto& jc : rep.d_joint) {
        const auto& di = rep.d_marginal[static_cast<std::size_t>(jc.i)];
        double acc = 0.0, acc_norm = 0.0;
        for (Eigen::Index m = 0; m < nbins; ++m) {
            const auto dm = static_cast<double>(di[static_cast<std::size_t>(m)]);
            if (dm == 0.0) continue;
            double row = 0.0;
            for (Eigen::Index n = 0; n < nbins; ++n) {
                const double d = static_cast<double>(jc.counts(m, n) - gamma);
                row += d * d;
            }
            acc += row / dm;
            acc_norm += row / (dm * dm);
        }
        rep.beta_pairs.push_back(std::sqrt(acc));
        rep.beta = std::max(rep.beta, std::sqrt(acc));
        rep.beta_normalized = std::max(rep.beta_normalized, std::sqrt(acc_norm));
    }
    rep.contraction = M * M * static_cast<double>(K - 1) * rep.beta;
    return rep;
}

ConvergenceRates convergence_rates(const std::vector<double>& residual_norms) {
    if (residual_norms.size() < 3)
        throw std::invalid_argument("convergence_rates: need at least 3 norms, got " +
                                    std::to_string(residual_norms.size()));
    ConvergenceRates cr;
    for (std::size_t j = 1; j < residual_norms.size(); ++j) {
        const double d = std::abs(residual_norms[j - 1] - residual_norms[j]);
        cr.mu.push_back(d < 1e-15 ? std::nullopt : std::optional<double>(std::log(d)));
    }
    for (std::size_t j = 0; j + 1 < cr.mu.size(); ++j) {
        if (cr.mu[j] && cr.mu[j + 1]) cr.eta.emplace_back(*cr.mu[j] - *cr.mu[j + 1]);
        else cr.eta.emplace_back(std::nullopt);
    }
    return cr;
}

double snr_db(const std::vector<Signal>& modes, double sigma2) {
    if (!(sigma2 > 0.0)) throw std::invalid_argument("snr_db: sigma2 must be > 0");
    if (modes.empty()) throw std::invalid_argument("snr_db: no modes");
    double best = std::numeric_limits<double>::infinity();
    for (const auto& m : modes) best = std::min(best, 10.0 * std::log10(l2_norm(m) / sigma2));
    return best;
}

double sigma2_for_snr(const std::vector<Signal>& modes, double snr) {
    if (modes.empty()) throw std::invalid_argument("sigma2_for_snr: no modes");
    double min_norm = std::numeric_limits<double>::infinity();
    for (const auto& m : modes) min_norm = std::min(min_norm, l2_norm(m));
    return min_norm * std::pow(10.0, -snr / 10.0);
}

FoldHistogram fold_uniformity(const InstProfile& profile, const TimeGrid& grid, int nbins) {
    if (nbins < 2) throw std::invalid_argument("fold_uniformity: nbins must be >= 2");
    if (profile.phase.size() != grid.size()) throw std::invalid_argument("fold_uniformity: profile and grid lengths differ");
    FoldHistogram h;
    h.counts.assign(static_cast<std::size_t>(nbins), 0);
    for (double p : profile.phase) ++h.counts[static_cast<std::size_t>(fold_bin(p, nbins))];
    const double expected = static_cast<double>(grid.size()) / nbins;
    for (long long c : h.counts) h.chi2 += (static_cast<double>(c) - expected) * (static_cast<double>(c) - expected) / expected;
    return h;
}

}  // namespace rdbr
