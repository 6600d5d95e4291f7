#pragma once

#include "rdbr/core.hpp"

#include <Eigen/Core>

#include <optional>
#include <vector>

namespace rdbr {

using CountMatrix = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;

struct JointCounts {
    int i = 0;
    int j = 0;
    CountMatrix counts;  // counts(m, n): samples with frac(p_i) in bin m and frac(p_j) in bin n
};

struct WellDiffReport {
    std::optional<long long> gamma;       // empty for a single profile (no pairs)
    double beta = 0.0;                    // max over pairs of beta_ij
    double beta_normalized = 0.0;         // same with (D_ij - gamma) / D_i(m) inside the square
    double contraction = 0.0;             // M^2 (K - 1) beta
    std::vector<JointCounts> d_joint;     // every ordered pair i != j
    std::vector<std::vector<long long>> d_marginal;
    std::vector<double> beta_pairs;       // aligned with d_joint
};

WellDiffReport well_differentiation(const std::vector<InstProfile>& profiles, const TimeGrid& grid, int nbins,
                                    double M);

struct ConvergenceRates {
    std::vector<std::optional<double>> mu;   // mu_j = log|e_{j-1} - e_j|
    std::vector<std::optional<double>> eta;  // eta_j = mu_j - mu_{j+1}
};

ConvergenceRates convergence_rates(const std::vector<double>& residual_norms);

// min_i 10 log10(||f_i|| / sigma2)
double snr_db(const std::vector<Signal>& modes, double sigma2);

// sigma2 giving the requested snr_db for these modes.
double sigma2_for_snr(const std::vector<Signal>& modes, double snr);

struct FoldHistogram {
    std::vector<long long> counts;
    double chi2 = 0.0;
};

FoldHistogram fold_uniformity(const InstProfile& profile, const TimeGrid& grid, int nbins);

}  // namespace rdbr
