#include "rdbr/io.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rdbr::io {

namespace fs = std::filesystem;

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;
};

// Numeric CSV with a header; every row must have header.size() cells.
Table read_table(const fs::path& path, std::size_t min_cols, std::size_t max_cols) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    Table t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        t.header = split(line);
        break;
    }
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (t.header.empty()) throw std::runtime_error(path.string() + ": empty file");
    if (t.header.size() < min_cols || t.header.size() > max_cols)
        throw std::runtime_error(where + ": expected " + std::to_string(min_cols) + "-" + std::to_string(max_cols) +
                                 " columns in header, got " + std::to_string(t.header.size()));
    for (const auto& h : t.header) {
        char* end = nullptr;
        std::strtod(h.c_str(), &end);
        if (!h.empty() && end == h.c_str() + h.size())
            throw std::runtime_error(where + ": header row required (found numeric '" + h + "')");
    }
    t.columns.assign(t.header.size(), {});
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto cells = split(line);
        if (cells.size() != t.header.size())
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": expected " +
                                     std::to_string(t.header.size()) + " fields, got " + std::to_string(cells.size()));
        for (std::size_t c = 0; c < cells.size(); ++c) {
            char* end = nullptr;
            const double v = std::strtod(cells[c].c_str(), &end);
            if (cells[c].empty() || end != cells[c].c_str() + cells[c].size())
                throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": bad number '" + cells[c] + "'");
            t.columns[c].push_back(v);
        }
    }
    if (t.columns[0].empty()) throw std::runtime_error(path.string() + ": no data rows");
    return t;
}

}  // namespace

Signal read_signal_csv(const fs::path& path) {
    Table t = read_table(path, 2, 3);
    TimeGrid grid;
    try {
        grid = TimeGrid::from_points(std::move(t.columns[0]));
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
    if (t.columns.size() == 3) return Signal(std::move(grid), std::move(t.columns[1]), std::move(t.columns[2]));
    return Signal(std::move(grid), std::move(t.columns[1]));
}

void write_signal_csv(const fs::path& path, const Signal& sig) {
    auto out = open_out(path);
    out << (sig.is_complex() ? "t,re,im\n" : "t,value\n");
    for (std::size_t i = 0; i < sig.size(); ++i) {
        out << fmt_double(sig.grid()[i]) << ',' << fmt_double(sig.real()[i]);
        if (sig.is_complex()) out << ',' << fmt_double(sig.imag()[i]);
        out << '\n';
    }
}

ShapeEstimate read_shape_csv(const fs::path& path) {
    Table t = read_table(path, 2, 2);
    return ShapeEstimate{std::move(t.columns[1])};
}

void write_shape_csv(const fs::path& path, const ShapeEstimate& s) {
    auto out = open_out(path);
    out << "x,value\n";
    const auto G = static_cast<double>(s.samples.size());
    for (std::size_t n = 0; n < s.samples.size(); ++n)
        out << fmt_double(static_cast<double>(n) / G) << ',' << fmt_double(s.samples[n]) << '\n';
}

InstProfile read_profile_csv(const fs::path& path, TimeGrid* grid_out) {
    Table t = read_table(path, 3, 3);
    InstProfile p;
    if (grid_out) {
        try {
            *grid_out = TimeGrid::from_points(t.columns[0]);
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(path.string() + ": " + e.what());
        }
    }
    p.phase = std::move(t.columns[1]);
    p.amplitude = std::move(t.columns[2]);
    if (p.phase.size() > 1) p.fundamental_freq_hint = (p.phase.back() - p.phase.front()) / (t.columns[0].back() - t.columns[0].front());
    return p;
}

void write_profile_csv(const fs::path& path, const TimeGrid& grid, const InstProfile& p) {
    if (grid.size() != p.phase.size()) throw std::invalid_argument("profile and grid lengths differ");
    auto out = open_out(path);
    out << "t,phase,amplitude\n";
    for (std::size_t i = 0; i < grid.size(); ++i)
        out << fmt_double(grid[i]) << ',' << fmt_double(p.phase[i]) << ',' << fmt_double(p.amplitude[i]) << '\n';
}

void write_tf_csv(const fs::path& path, const TfDistribution& tf) {
    auto out = open_out(path);
    out << "b,v,energy\n";
    for (Eigen::Index j = 0; j < tf.energy.cols(); ++j)
        for (Eigen::Index m = 0; m < tf.energy.rows(); ++m) {
            const double e = tf.energy(m, j);
            if (e > 0.0)
                out << fmt_double(tf.times[static_cast<std::size_t>(j)]) << ','
                    << fmt_double(tf.freqs[static_cast<std::size_t>(m)]) << ',' << fmt_double(e) << '\n';
        }
}

void write_tf_binary(const fs::path& path, const TfDistribution& tf) {
    auto out = open_out(path);
    const std::int64_t header[3] = {tf.energy.rows(), tf.energy.cols(), 1};
    out.write(reinterpret_cast<const char*>(header), sizeof header);
    for (Eigen::Index m = 0; m < tf.energy.rows(); ++m)
        for (Eigen::Index j = 0; j < tf.energy.cols(); ++j) {
            const double v = tf.energy(m, j);
            out.write(reinterpret_cast<const char*>(&v), sizeof v);
        }
}

RealMatrix read_tf_binary(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::int64_t header[3];
    if (!in.read(reinterpret_cast<char*>(header), sizeof header)) throw std::runtime_error(path.string() + ": truncated header");
    if (header[2] != 1) throw std::runtime_error(path.string() + ": unsupported version " + std::to_string(header[2]));
    if (header[0] < 0 || header[1] < 0) throw std::runtime_error(path.string() + ": negative dimensions");
    RealMatrix m(header[0], header[1]);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            if (!in.read(reinterpret_cast<char*>(&m(r, c)), sizeof(double)))
                throw std::runtime_error(path.string() + ": truncated data");
    return m;
}

void write_ridges_csv(const fs::path& path, const std::vector<RidgeCurve>& ridges, const RidgeClassification* cls) {
    auto out = open_out(path);
    out << "b,freq,energy,group,harmonic\n";
    for (std::size_t r = 0; r < ridges.size(); ++r) {
        const int group = cls ? cls->group[r] + 1 : 0;
        const int harmonic = cls ? cls->harmonic[r] : 0;
        for (std::size_t j = 0; j < ridges[r].times.size(); ++j)
            out << fmt_double(ridges[r].times[j]) << ',' << fmt_double(ridges[r].freqs[j]) << ','
                << fmt_double(ridges[r].energy[j]) << ',' << group << ',' << harmonic << '\n';
    }
}

void write_folded_csv(const fs::path& path, const FoldedSamples& f) {
    auto out = open_out(path);
    out << "t,x,y\n";
    for (std::size_t i = 0; i < f.size(); ++i)
        out << fmt_double(f.source_times[i]) << ',' << fmt_double(f.xs[i]) << ',' << fmt_double(f.ys[i]) << '\n';
}

nlohmann::json report_json(const RdbrReport& rep) {
    nlohmann::json j;
    j["residual_norms"] = rep.residual_norms;
    j["shape_increment_norms"] = rep.shape_increment_norms;
    j["iterations"] = rep.iterations;
    j["stop_reason"] = to_string(rep.stop_reason);
    j["initial_norm"] = rep.initial_norm;
    if (rep.residual_norms.size() >= 2) {
        std::vector<double> norms{rep.initial_norm};
        norms.insert(norms.end(), rep.residual_norms.begin(), rep.residual_norms.end());
        const auto cr = convergence_rates(norms);
        auto opt = [](const std::vector<std::optional<double>>& v) {
            nlohmann::json a = nlohmann::json::array();
            for (const auto& x : v) a.push_back(x ? nlohmann::json(*x) : nlohmann::json(nullptr));
            return a;
        };
        j["mu"] = opt(cr.mu);
        j["eta"] = opt(cr.eta);
    }
    return j;
}

nlohmann::json well_diff_json(const WellDiffReport& wd) {
    nlohmann::json j;
    j["gamma"] = wd.gamma ? nlohmann::json(*wd.gamma) : nlohmann::json("inf");
    j["beta"] = wd.beta;
    j["beta_normalized"] = wd.beta_normalized;
    j["contraction"] = wd.contraction;
    return j;
}

void write_decomposition(const fs::path& dir, const Decomposition& dec, const nlohmann::json& extra) {
    fs::create_directories(dir);
    for (std::size_t k = 0; k < dec.shapes.size(); ++k) {
        write_shape_csv(dir / ("shape_" + std::to_string(k + 1) + ".csv"), dec.shapes[k]);
        write_signal_csv(dir / ("mode_" + std::to_string(k + 1) + ".csv"), dec.modes[k]);
    }
    write_signal_csv(dir / "residual.csv", dec.residual);
    nlohmann::json j = report_json(dec.report);
    if (extra.is_object()) j.update(extra);
    write_json(dir / "report.json", j);
}

void write_json(const fs::path& path, const nlohmann::json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

}  // namespace rdbr::io
