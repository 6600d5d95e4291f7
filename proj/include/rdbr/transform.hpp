#pragma once

// Wave packet transform and synchrosqueezing.
//
// Signals are treated as 1-periodic on [0,1]: the Fourier coefficients f_hat(xi), xi integer,
// come from an FFT of the uniform samples. The wave packet at scale a has Fourier transform
//
//   w_ab_hat(xi) = a^{-s/2} exp(-2 pi i b xi) w_hat(a^{-s} (xi - a)),
//
// so W(a,b) = sum_xi a^{-s/2} w_hat(a^{-s}(xi - a)) f_hat(xi) exp(2 pi i b xi), which is evaluated
// for all b at once with one inverse FFT per scale.

#include "rdbr/core.hpp"

#include <Eigen/Core>

#include <complex>
#include <vector>

namespace rdbr {

struct WavePacketConfig {
    double s_geom = 0.66;
    double rad = 1.0;     // Fourier support radius d of the mother packet
    int red = 8;          // scales per support half-width
    double eps_sst = 1e-3;
    double a_min = 1.0;
    double a_max = 0.0;   // 0: signal length / 2
    std::size_t num_times = 0;  // number of b samples, 0: signal length

    void validate() const;
};

using ComplexMatrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Rows are scales, columns are times.
struct WpCoefficients {
    std::vector<double> scales;
    std::vector<double> scale_weights;  // da for each scale (quadrature weight of the a-integral)
    std::vector<double> times;
    ComplexMatrix coeffs;
    ComplexMatrix dcoeffs;
    std::size_t signal_length = 0;
    double s_geom = 0.66;
    double rad = 1.0;
};

struct TfDistribution {
    std::vector<double> freqs;  // bin centres, uniform
    std::vector<double> times;
    RealMatrix energy;          // rows are frequency bins, columns are times

    double bin_width() const { return freqs.size() > 1 ? freqs[1] - freqs[0] : 1.0; }
};

// Smooth bump c * exp(1 / ((xi/d)^2 - 1)) on (-d, d), unit L2 norm.
double mother_wavepacket_hat(double xi, const WavePacketConfig& cfg);

// a_{i+1} = a_i + rad * a_i^s / red, from a_min up to a_max.
std::vector<double> scale_ladder(const WavePacketConfig& cfg, double a_max);

WpCoefficients forward_wp(const Signal& sig, const WavePacketConfig& cfg);

// Re(dW / (2 pi i W)) on R_eps = {|W| >= a^{-s/2} sqrt(eps_sst)}, +infinity elsewhere.
RealMatrix inst_freq_info(const WpCoefficients& wp, const WavePacketConfig& cfg);

// Energy |W|^2 da reassigned to the bin containing v_f(a,b). Bins are centred on
// linspace(f_lo, f_hi, nbins); f_lo/f_hi default to the first/last scale.
TfDistribution synchrosqueeze(const WpCoefficients& wp, const WavePacketConfig& cfg, int nbins);
TfDistribution synchrosqueeze(const WpCoefficients& wp, const WavePacketConfig& cfg, int nbins, double f_lo,
                              double f_hi);

// Sum of |W|^2 da over coefficients that pass the threshold and fall inside [f_lo - dv/2, f_hi + dv/2).
// Equal to the total energy of the synchrosqueezed distribution with the same arguments.
double thresholded_energy(const WpCoefficients& wp, const WavePacketConfig& cfg, int nbins, double f_lo,
                          double f_hi);

// Reconstructs the analytic component carried by the masked coefficients through the
// canonical dual frame. Output is complex, on the uniform grid of the original signal.
Signal invert_on_support(const WpCoefficients& wp, const BoolMatrix& mask, const WavePacketConfig& cfg);

}  // namespace rdbr
