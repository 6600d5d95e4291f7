#include "rdbr/decompose.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rdbr {

const char* to_string(UpdateSchedule s) { return s == UpdateSchedule::simultaneous ? "simultaneous" : "sequential"; }

UpdateSchedule update_schedule_from_string(const std::string& name) {
    if (name == "sequential") return UpdateSchedule::sequential;
    if (name == "simultaneous") return UpdateSchedule::simultaneous;
    throw std::invalid_argument("unknown schedule '" + name + "' (sequential, simultaneous)");
}

const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::max_iter: return "max_iter";
        case StopReason::residual_small: return "residual_small";
        case StopReason::increment_small: return "increment_small";
        case StopReason::residual_stalled: return "residual_stalled";
        case StopReason::stagnation: return "stagnation";
    }
    return "unknown";
}

void RdbrConfig::validate() const {
    if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be > 0");
    regression.validate();
}

Signal reconstruct_mode(const ShapeEstimate& shape, const InstProfile& profile, const TimeGrid& grid) {
    if (profile.phase.size() != grid.size() || profile.amplitude.size() != grid.size())
        throw std::invalid_argument("reconstruct_mode: profile and grid lengths differ");
    std::vector<double> v(grid.size());
    for (std::size_t l = 0; l < v.size(); ++l) v[l] = profile.amplitude[l] * eval_shape(shape, profile.phase[l]);
    return Signal(grid, std::move(v));
}

namespace {

void subtract_mode(std::vector<double>& r, const ShapeEstimate& inc, const InstProfile& p) {
    for (std::size_t l = 0; l < r.size(); ++l) r[l] -= p.amplitude[l] * eval_shape(inc, p.phase[l]);
}

}  // namespace

Decomposition rdbr_decompose(const Signal& sig, const std::vector<InstProfile>& profiles, const RdbrConfig& cfg) {
    cfg.validate();
    if (profiles.empty()) throw std::invalid_argument("rdbr_decompose: no profiles");
    if (sig.is_complex()) throw std::invalid_argument("rdbr_decompose: signal must be real-valued");
    for (std::size_t k = 0; k < profiles.size(); ++k)
        if (profiles[k].phase.size() != sig.size() || profiles[k].amplitude.size() != sig.size())
            throw std::invalid_argument("rdbr_decompose: profile " + std::to_string(k + 1) + " has " +
                                        std::to_string(profiles[k].phase.size()) + " samples, signal has " +
                                        std::to_string(sig.size()));

    const std::size_t K = profiles.size();
    const std::size_t G = cfg.regression.shape_grid;
    const TimeGrid& grid = sig.grid();

    // Fold coordinates depend only on the phase, so they are computed once.
    std::vector<FoldedSamples> folds;
    folds.reserve(K);
    for (const auto& p : profiles) folds.push_back(warp_and_fold(Signal::zeros(grid), p));

    auto norm_of = [&](const std::vector<double>& v) { return l2_norm(Signal(grid, v)); };

    std::vector<double> r = sig.real();
    std::vector<ShapeEstimate> total(K, ShapeEstimate::zeros(G));
    double best_norm = std::numeric_limits<double>::infinity();
    std::vector<ShapeEstimate> best_total = total;
    std::vector<double> best_r = r;

    RdbrReport rep;
    rep.initial_norm = norm_of(r);
    double e0 = 2.0, e1 = 1.0, e2 = 1.0;
    int j = 0;
    bool diverged = false;
    std::vector<ShapeEstimate> inc(K);

    auto keep_going = [&] {
        if (j >= cfg.max_iter) return false;
        if (cfg.stop_on_residual && !(e1 > cfg.eps)) return false;
        if (cfg.stop_on_increment && !(e2 > cfg.eps)) return false;
        if (cfg.stop_on_stall && !(std::abs(e1 - e0) > cfg.eps)) return false;
        return true;
    };

    while (keep_going()) {
        if (cfg.schedule == UpdateSchedule::sequential) {
            for (std::size_t k = 0; k < K; ++k) {
                for (std::size_t l = 0; l < r.size(); ++l) folds[k].ys[l] = r[l] / profiles[k].amplitude[l];
                inc[k] = regress(folds[k], cfg.regression);
                subtract_mode(r, inc[k], profiles[k]);
            }
        } else {
            for (std::size_t k = 0; k < K; ++k) {
                for (std::size_t l = 0; l < r.size(); ++l) folds[k].ys[l] = r[l] / profiles[k].amplitude[l];
                inc[k] = regress(folds[k], cfg.regression);
            }
            for (std::size_t k = 0; k < K; ++k) subtract_mode(r, inc[k], profiles[k]);
        }
        double max_inc = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            for (std::size_t n = 0; n < G; ++n) total[k].samples[n] += inc[k].samples[n];
            total[k] = shape_mean_remove(total[k]);
            max_inc = std::max(max_inc, inc[k].l2_norm());
        }
        e0 = e1;
        e1 = norm_of(r);
        e2 = max_inc;
        ++j;
        rep.residual_norms.push_back(e1);
        rep.shape_increment_norms.push_back(e2);

        if (e1 < best_norm) {
            best_norm = e1;
            best_total = total;
            best_r = r;
        } else if (cfg.divergence_guard && e1 > 10.0 * best_norm) {
            diverged = true;
            break;
        }
    }
    rep.iterations = j;

    if (diverged) {
        rep.stop_reason = StopReason::stagnation;
        total = std::move(best_total);
        r = std::move(best_r);
    } else if (cfg.stop_on_residual && !(e1 > cfg.eps)) {
        rep.stop_reason = StopReason::residual_small;
    } else if (cfg.stop_on_increment && !(e2 > cfg.eps)) {
        rep.stop_reason = StopReason::increment_small;
    } else if (cfg.stop_on_stall && j > 0 && !(std::abs(e1 - e0) > cfg.eps)) {
        rep.stop_reason = StopReason::residual_stalled;
    } else {
        rep.stop_reason = StopReason::max_iter;
    }

    Decomposition out;
    out.shapes = std::move(total);
    out.modes.reserve(K);
    for (std::size_t k = 0; k < K; ++k) out.modes.push_back(reconstruct_mode(out.shapes[k], profiles[k], grid));
    // The tracked residual; input = sum(modes) + residual up to rounding of the increments.
    out.residual = Signal(grid, std::move(r));
    out.report = std::move(rep);
    return out;
}

}  // namespace rdbr
