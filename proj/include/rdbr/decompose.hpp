#pragma once

#include "rdbr/core.hpp"
#include "rdbr/regress.hpp"

#include <string>
#include <vector>

namespace rdbr {

// sequential: the residual is updated after each mode's regression (default).
// simultaneous: every mode regresses the same residual, then all updates are subtracted.
enum class UpdateSchedule { sequential, simultaneous };

enum class StopReason { max_iter, residual_small, increment_small, residual_stalled, stagnation };

const char* to_string(UpdateSchedule s);
UpdateSchedule update_schedule_from_string(const std::string& name);
const char* to_string(StopReason r);

struct RdbrConfig {
    int max_iter = 200;
    double eps = 1e-6;
    RegressionConfig regression;
    UpdateSchedule schedule = UpdateSchedule::sequential;
    // Individual loop guards; all on reproduces the standard stopping rule.
    bool stop_on_residual = true;
    bool stop_on_increment = true;
    bool stop_on_stall = true;
    bool divergence_guard = true;

    void validate() const;
};

struct RdbrReport {
    std::vector<double> residual_norms;         // after each iteration
    std::vector<double> shape_increment_norms;  // max over modes, per iteration
    int iterations = 0;
    StopReason stop_reason = StopReason::max_iter;
    double initial_norm = 0.0;                  // norm of the input
};

struct Decomposition {
    std::vector<ShapeEstimate> shapes;
    std::vector<Signal> modes;
    Signal residual;
    RdbrReport report;
};

// values[l] = amplitude[l] * shape(phase[l])
Signal reconstruct_mode(const ShapeEstimate& shape, const InstProfile& profile, const TimeGrid& grid);

Decomposition rdbr_decompose(const Signal& sig, const std::vector<InstProfile>& profiles, const RdbrConfig& cfg);

}  // namespace rdbr
