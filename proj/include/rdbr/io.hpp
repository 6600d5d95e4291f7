#pragma once

#include "rdbr/core.hpp"
#include "rdbr/decompose.hpp"
#include "rdbr/diagnostics.hpp"
#include "rdbr/regress.hpp"
#include "rdbr/ridge.hpp"
#include "rdbr/transform.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace rdbr::io {

// %.17g
std::string fmt_double(double v);

// `t,value` or `t,re,im`, header row required. Errors name the offending line.
Signal read_signal_csv(const std::filesystem::path& path);
void write_signal_csv(const std::filesystem::path& path, const Signal& sig);

ShapeEstimate read_shape_csv(const std::filesystem::path& path);
void write_shape_csv(const std::filesystem::path& path, const ShapeEstimate& s);

// `t,phase,amplitude`
// The t column is returned through grid_out when given.
InstProfile read_profile_csv(const std::filesystem::path& path, TimeGrid* grid_out = nullptr);
void write_profile_csv(const std::filesystem::path& path, const TimeGrid& grid, const InstProfile& p);

// Sparse `b,v,energy`, rows with energy > 0 only.
void write_tf_csv(const std::filesystem::path& path, const TfDistribution& tf);
// Header of three int64 (nfreq, ntime, version = 1), then nfreq * ntime doubles, row-major.
void write_tf_binary(const std::filesystem::path& path, const TfDistribution& tf);
RealMatrix read_tf_binary(const std::filesystem::path& path);

// `b,freq,energy,group,harmonic`
void write_ridges_csv(const std::filesystem::path& path, const std::vector<RidgeCurve>& ridges,
                      const RidgeClassification* cls);

// `t,x,y`
void write_folded_csv(const std::filesystem::path& path, const FoldedSamples& fs);

nlohmann::json report_json(const RdbrReport& rep);
nlohmann::json well_diff_json(const WellDiffReport& wd);

// shape_k.csv, mode_k.csv (k from 1), residual.csv, report.json; `extra` is merged into report.json.
void write_decomposition(const std::filesystem::path& dir, const Decomposition& dec, const nlohmann::json& extra);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace rdbr::io
