#pragma once

#include "rdbr/core.hpp"
#include "rdbr/ridge.hpp"
#include "rdbr/transform.hpp"

#include <vector>

namespace rdbr {

struct SswptOptions {
    WavePacketConfig wp;
    int nfreq = 0;               // 0: one bin per unit frequency over [a_min, a_max]
    int max_ridges = 8;
    double ridge_penalty = -1.0; // < 0: 0.05 * nfreq
    double harmonic_tol = 0.1;
    ProfileOptions profile;
};

struct SswptResult {
    WpCoefficients coeffs;
    TfDistribution tf;
    std::vector<RidgeCurve> ridges;
    RidgeClassification classes;
    std::vector<InstProfile> profiles;  // one per group, on the signal grid
};

// Transform, synchrosqueeze, extract and classify ridges, then build k fundamental profiles.
SswptResult estimate_profiles(const Signal& sig, int k, const SswptOptions& opts);

}  // namespace rdbr
