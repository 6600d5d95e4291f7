#pragma once

#include "rdbr/core.hpp"

#include <string>
#include <vector>

namespace rdbr {

// Regression samples on one period: x = frac(p(t)), y = f(t) / alpha(t).
struct FoldedSamples {
    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<double> source_times;

    std::size_t size() const noexcept { return xs.size(); }
};

enum class RegressionMethod { partition, spline };

struct RegressionConfig {
    RegressionMethod method = RegressionMethod::partition;
    int nbins = 50;
    int nk = 20;
    double krf = 1.01;
    int ord = 3;
    int knot_iters = 20;  // knot position optimisation steps, 0: uniform fixed knots
    std::size_t shape_grid = kDefaultShapeGrid;

    void validate() const;
};

const char* to_string(RegressionMethod m);
RegressionMethod regression_method_from_string(const std::string& name);

FoldedSamples warp_and_fold(const Signal& residual, const InstProfile& profile);

struct BinMeans {
    std::vector<double> means;    // 0 where the bin is empty
    std::vector<std::size_t> counts;
};

// Raw per-bin averages over nbins uniform bins of [0,1).
BinMeans partition_bin_means(const FoldedSamples& fs, int nbins);

ShapeEstimate partition_regress(const FoldedSamples& fs, const RegressionConfig& cfg);

// Periodic least-squares spline of degree ord on nk free knots: knot positions are optimised from a
// uniform start, then one knot-removal sweep.
ShapeEstimate spline_regress(const FoldedSamples& fs, const RegressionConfig& cfg);

// Dispatches on cfg.method.
ShapeEstimate regress(const FoldedSamples& fs, const RegressionConfig& cfg);

}  // namespace rdbr
