#pragma once

#include "rdbr/core.hpp"
#include "rdbr/transform.hpp"

#include <vector>

namespace rdbr {

struct RidgeCurve {
    std::vector<double> times;
    std::vector<double> freqs;
    std::vector<double> energy;

    double mean_freq() const;
    double mean_energy() const;
};

struct RidgeOptions {
    int band_halfwidth = 3;       // bins cleared around each extracted ridge
    double stop_ratio = 0.01;     // stop once mean ridge energy < stop_ratio * first ridge's
};

// Repeated dynamic-programming extraction of the path maximising
// sum_j log(energy) - penalty * (bin jump)^2.
std::vector<RidgeCurve> extract_ridges(const TfDistribution& tf, int max_ridges, double smoothness_penalty,
                                       const RidgeOptions& opts = {});

struct RidgeClassification {
    std::vector<int> group;     // per input ridge
    std::vector<int> harmonic;  // per input ridge, n >= 1
    std::vector<RidgeCurve> fundamentals;      // per group: N_k phi_k'(b)
    std::vector<int> fundamental_source;       // index of the ridge the fundamental came from
    std::vector<int> fundamental_harmonic;     // its harmonic index
};

// Groups ridges into k harmonic families by integer frequency ratios.
RidgeClassification classify_fundamentals(const std::vector<RidgeCurve>& ridges, int k, double tol);

enum class PhaseSource { ridge_integral, component_argument };
enum class AmplitudeSource { inverse_band, ridge_peak };

struct ProfileOptions {
    int band_halfwidth = 3;     // mask half-width around the ridge, in frequency bins
    double bin_width = 1.0;     // frequency bin width used to size the mask
    int harmonic = 1;           // the mask follows harmonic * curve
    std::size_t amp_smooth = 0; // moving-average window in samples, 0: one period of the fundamental
    bool refine = true;         // replace bin centres by the energy-weighted mean of v_f under the mask
    PhaseSource phase_source = PhaseSource::ridge_integral;
    AmplitudeSource amplitude_source = AmplitudeSource::inverse_band;
};

// Phase from the cumulative integral of the ridge frequency (p(t0) = 0) and amplitude from the
// magnitude of the band-limited inverse transform, smoothed.
InstProfile profile_from_fundamental(const RidgeCurve& curve, const WpCoefficients& wp, const WavePacketConfig& cfg,
                                     const TimeGrid& grid, const ProfileOptions& opts = {});

}  // namespace rdbr
