#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace rdbr {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Sample times in [0,1], strictly increasing.
class TimeGrid {
public:
    TimeGrid() = default;

    // points[l] = l / L for l = 0..L-1.
    static TimeGrid uniform(std::size_t L);
    // Validates ordering and range; detects uniform spacing (points[l] = l/L within 1e-12).
    static TimeGrid from_points(std::vector<double> points);

    const std::vector<double>& points() const noexcept { return points_; }
    std::size_t size() const noexcept { return points_.size(); }
    bool empty() const noexcept { return points_.empty(); }
    bool is_uniform() const noexcept { return uniform_; }
    // Only meaningful when is_uniform().
    double step() const noexcept { return step_; }
    double operator[](std::size_t i) const { return points_[i]; }

private:
    std::vector<double> points_;
    bool uniform_ = false;
    double step_ = 0.0;
};

bool same_grid(const TimeGrid& a, const TimeGrid& b, double tol = 1e-12);

// Real or complex samples on a TimeGrid. A real signal has an empty imaginary part.
class Signal {
public:
    Signal() = default;
    Signal(TimeGrid grid, std::vector<double> values);
    Signal(TimeGrid grid, std::vector<double> re, std::vector<double> im);
    static Signal from_complex(TimeGrid grid, std::span<const std::complex<double>> values);
    static Signal zeros(TimeGrid grid);

    const TimeGrid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return re_.size(); }
    bool empty() const noexcept { return re_.empty(); }
    bool is_complex() const noexcept { return !im_.empty(); }

    const std::vector<double>& real() const noexcept { return re_; }
    const std::vector<double>& imag() const noexcept { return im_; }
    std::complex<double> value(std::size_t i) const {
        return {re_[i], im_.empty() ? 0.0 : im_[i]};
    }
    std::vector<std::complex<double>> complex_values() const;

private:
    TimeGrid grid_;
    std::vector<double> re_;
    std::vector<double> im_;
};

Signal operator+(const Signal& a, const Signal& b);
Signal operator-(const Signal& a, const Signal& b);
Signal operator*(double c, const Signal& s);

// Fundamental instantaneous phase p(t) = N phi(t) in cycles and amplitude alpha(t),
// sampled on the same grid as the signal they describe.
struct InstProfile {
    std::vector<double> phase;
    std::vector<double> amplitude;
    double fundamental_freq_hint = 0.0;

    std::size_t size() const noexcept { return phase.size(); }
    // Throws std::invalid_argument if phase is not strictly increasing, amplitude is
    // not bounded away from zero, or sizes differ.
    void validate() const;
};

// One period of a shape function sampled at n/G, n = 0..G-1.
struct ShapeEstimate {
    std::vector<double> samples;

    std::size_t grid_size() const noexcept { return samples.size(); }
    double mean() const;
    // sqrt(mean(samples^2)), the L2 norm over one unit period.
    double l2_norm() const;

    static ShapeEstimate zeros(std::size_t G) { return {std::vector<double>(G, 0.0)}; }
};

inline constexpr std::size_t kDefaultShapeGrid = 1000;

struct ModelParams {
    double M = 1.0;
    double N = 1.0;
    int K = 1;
    int K0 = 1;
    double C = 1.0;
    double d = 1.0;

    void validate() const;
};

double l2_norm(const Signal& sig);

ShapeEstimate shape_mean_remove(const ShapeEstimate& s);

// Periodic linear interpolation of the sampled period at x (x taken modulo 1).
double eval_shape(const ShapeEstimate& s, double x);

struct ShapeClassReport {
    double mean_coefficient = 0.0;   // |s_hat(0)|
    double coefficient_l1 = 0.0;     // sum_n |s_hat(n)|
    double sup_norm = 0.0;
    int active_gcd = 0;              // gcd of |n| with |s_hat(n)| > spectral_tol (0 if none)
    bool zero_mean = false;
    bool coefficient_bound = false;
    bool sup_bound = false;
    bool gcd_one = false;

    bool passed() const noexcept { return zero_mean && coefficient_bound && sup_bound && gcd_one; }
};

// Discrete checks of the shape class S_M. Never throws.
ShapeClassReport validate_shape_class(const ShapeEstimate& s, const ModelParams& params,
                                      double mean_tol = 1e-8);

// Relative L2 distance between two shapes on a common grid: ||a - b|| / ||b||.
double shape_relative_error(const ShapeEstimate& estimate, const ShapeEstimate& truth);

// Warnings from non-fatal conditions go through this sink (stderr by default).
using WarningSink = std::function<void(const std::string&)>;
void set_warning_sink(WarningSink sink);
void warn(const std::string& message);

}  // namespace rdbr
