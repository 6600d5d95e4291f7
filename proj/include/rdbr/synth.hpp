#pragma once

#include "rdbr/core.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace rdbr {

// One period on a grid of G points, mean zero and unit RMS.
ShapeEstimate builtin_shape(const std::string& name, std::size_t G = kDefaultShapeGrid);
const std::vector<std::string>& builtin_shape_names();

struct AmpSpec {
    enum class Kind { constant, sin, cos };
    Kind kind = Kind::constant;
    double a = 0.0;  // 1 + a sin(2 pi b t) or 1 + a cos(2 pi b t); constant: 1 + a
    double b = 1.0;

    double operator()(double t) const;
};

struct PhaseSpec {
    enum class Kind { sin, cos, shifted_sin };
    Kind kind = Kind::sin;
    double N = 1.0;
    double c = 0.0;   // |c| < 1/(2 pi)
    double t0 = 0.0;  // shifted_sin only

    double operator()(double t) const;  // N (t + c sin(2 pi t)), N (t + c cos(2 pi t)), N (t + t0 + c sin(2 pi (t + t0)))
    void validate() const;
};

struct ModeSpec {
    ShapeEstimate shape;
    AmpSpec amp;
    PhaseSpec phase;
};

struct SynthResult {
    Signal signal;                      // sum of modes plus noise
    std::vector<Signal> modes;          // clean
    std::vector<InstProfile> profiles;  // exact
    std::vector<ShapeEstimate> shapes;
};

SynthResult generate(const std::vector<ModeSpec>& specs, const TimeGrid& grid, double noise_sigma2,
                     std::uint64_t seed);

enum class GridKind { uniform, iid_uniform };
TimeGrid sample_grid(GridKind kind, std::size_t L, std::uint64_t seed);
GridKind grid_kind_from_string(const std::string& name);

// ex1, ex2 (uses N), ex3, ecg_pair, pwc_pair.
std::vector<ModeSpec> preset_specs(const std::string& name, double N = 100.0,
                                   std::size_t G = kDefaultShapeGrid);
const std::vector<std::string>& preset_names();

}  // namespace rdbr
