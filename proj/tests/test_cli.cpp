// End-to-end checks of the rdbr executable. RDBR_CLI is the binary path, set by CMake.

#include "rdbr/core.hpp"
#include "rdbr/io.hpp"
#include "rdbr/synth.hpp"

#include <doctest.h>
#include <json.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int code = -1;
    std::string output;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(RDBR_CLI) + " " + args + " 2>&1";
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), buf.size(), p)) r.output += buf.data();
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

struct Scratch {
    fs::path path;
    Scratch() {
        static int n = 0;
        path = fs::temp_directory_path() / ("rdbr_cli_" + std::to_string(::getpid()) + "_" + std::to_string(n++));
        fs::create_directories(path);
    }
    ~Scratch() { fs::remove_all(path); }
    std::string operator/(const std::string& s) const { return (path / s).string(); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("synth writes the signal, modes, profiles and metadata") {
    Scratch s;
    auto r = run("synth --preset ex1 --L 65536 --sigma2 0 --out " + (s / "a"));
    REQUIRE_MESSAGE(r.code == 0, r.output);
    for (const char* f : {"signal.csv", "mode_1.csv", "mode_2.csv", "profile_1.csv", "profile_2.csv", "meta.json",
                          "config.toml"})
        CHECK_MESSAGE(fs::exists(s.path / "a" / f), f);
    auto meta = read_json(s.path / "a" / "meta.json");
    CHECK(meta["snr"] == "inf");
    CHECK(meta["config"]["preset"] == "ex1");
}

TEST_CASE("same seed gives byte-identical files and the echo reproduces them") {
    Scratch s;
    REQUIRE(run("synth --preset ex2 --L 4096 --sigma2 0.3 --grid iid_uniform --seed 5 --out " + (s / "a")).code == 0);
    REQUIRE(run("synth --preset ex2 --L 4096 --sigma2 0.3 --grid iid_uniform --seed 5 --out " + (s / "b")).code == 0);
    CHECK(slurp(s.path / "a" / "signal.csv") == slurp(s.path / "b" / "signal.csv"));
    CHECK(slurp(s.path / "a" / "mode_2.csv") == slurp(s.path / "b" / "mode_2.csv"));
    REQUIRE(run("synth --config " + (s / "a/config.toml") + " --out " + (s / "c")).code == 0);
    CHECK(slurp(s.path / "a" / "signal.csv") == slurp(s.path / "c" / "signal.csv"));
    REQUIRE(run("synth --preset ex2 --L 4096 --sigma2 0.3 --grid iid_uniform --seed 6 --out " + (s / "d")).code == 0);
    CHECK(slurp(s.path / "a" / "signal.csv") != slurp(s.path / "d" / "signal.csv"));
}

TEST_CASE("snr flag sets the noise level") {
    Scratch s;
    REQUIRE(run("synth --preset ecg_pair --L 8192 --snr -3 --out " + (s / "a")).code == 0);
    auto meta = read_json(s.path / "a" / "meta.json");
    CHECK(meta["snr"].get<double>() == doctest::Approx(-3.0).epsilon(1e-9));
}

TEST_CASE("sswpt finds two fundamentals on ex1") {
    Scratch s;
    REQUIRE(run("synth --preset ex1 --L 16384 --out " + (s / "syn")).code == 0);
    auto r = run("sswpt --in " + (s / "syn/signal.csv") + " --k 2 --out " + (s / "tf"));
    REQUIRE_MESSAGE(r.code == 0, r.output);
    for (const char* f : {"tf.csv", "tf.bin", "ridges.csv", "profile_1.csv", "profile_2.csv", "meta.json"})
        CHECK_MESSAGE(fs::exists(s.path / "tf" / f), f);
    CHECK_FALSE(fs::exists(s.path / "tf" / "profile_3.csv"));
    std::vector<double> hints;
    for (int k = 1; k <= 2; ++k) {
        auto p = rdbr::io::read_profile_csv(s.path / "tf" / ("profile_" + std::to_string(k) + ".csv"));
        hints.push_back(p.phase.back() - p.phase.front());
    }
    std::sort(hints.begin(), hints.end());
    CHECK(hints[0] == doctest::Approx(60.0).epsilon(0.02));
    CHECK(hints[1] == doctest::Approx(90.0).epsilon(0.02));
}

TEST_CASE("sswpt on a pure tone") {
    Scratch s;
    {
        std::ofstream out(s / "tone.csv");
        out << "t,value\n";
        for (int l = 0; l < 4096; ++l) {
            const double t = l / 4096.0;
            out << rdbr::io::fmt_double(t) << ',' << rdbr::io::fmt_double(std::cos(rdbr::kTwoPi * 70.0 * t)) << '\n';
        }
    }
    auto r = run("sswpt --in " + (s / "tone.csv") + " --k 1 --out " + (s / "tf"));
    REQUIRE_MESSAGE(r.code == 0, r.output);
    std::ifstream in(s.path / "tf" / "ridges.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "b,freq,energy,group,harmonic");
    int rows = 0;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string b, f;
        std::getline(ss, b, ',');
        std::getline(ss, f, ',');
        CHECK(std::abs(std::stod(f) - 70.0) <= 1.0);
        ++rows;
    }
    CHECK(rows > 0);
}

TEST_CASE("sswpt rejects an empty file") {
    Scratch s;
    std::ofstream(s / "empty.csv").close();
    auto r = run("sswpt --in " + (s / "empty.csv") + " --out " + (s / "tf"));
    CHECK(r.code != 0);
    CHECK(r.output.find("empty") != std::string::npos);
}

TEST_CASE("decompose with exact profiles converges") {
    Scratch s;
    REQUIRE(run("synth --preset ex2 --N 100 --L 4096 --out " + (s / "syn")).code == 0);
    auto r = run("decompose --in " + (s / "syn/signal.csv") + " --profiles " + (s / "syn/profile_1.csv") + " " +
                 (s / "syn/profile_2.csv") + " --max_iter 10 --out " + (s / "dec"));
    REQUIRE_MESSAGE(r.code == 0, r.output);
    auto rep = read_json(s.path / "dec" / "report.json");
    auto norms = rep["residual_norms"].get<std::vector<double>>();
    REQUIRE(norms.size() >= 5);
    for (std::size_t j = 1; j < 5; ++j) CHECK(norms[j] < norms[j - 1]);
    CHECK(rep.contains("well_differentiation"));
    CHECK(rep["config"]["max_iter"] == 10);
    for (const char* f : {"shape_1.csv", "shape_2.csv", "mode_1.csv", "mode_2.csv", "residual.csv"})
        CHECK(fs::exists(s.path / "dec" / f));
}

TEST_CASE("decompose --auto on ex1") {
    Scratch s;
    REQUIRE(run("synth --preset ex1 --L 16384 --out " + (s / "syn")).code == 0);
    auto r = run("decompose --in " + (s / "syn/signal.csv") + " --auto --k 2 --nbins 100 --s_geom 0.55 --out " +
                 (s / "dec"));
    REQUIRE_MESSAGE(r.code == 0, r.output);
    auto rep = read_json(s.path / "dec" / "report.json");
    CHECK(rep["relative_residual"].get<double>() < 0.1);
}

TEST_CASE("single-mode cosine shape") {
    Scratch s;
    REQUIRE(run("synth --preset single --shape cosine --N 60 --L 4096 --out " + (s / "syn")).code == 0);
    auto r = run("decompose --in " + (s / "syn/signal.csv") + " --profiles " + (s / "syn/profile_1.csv") +
                 " --out " + (s / "dec"));
    REQUIRE_MESSAGE(r.code == 0, r.output);
    auto est = rdbr::io::read_shape_csv(s.path / "dec" / "shape_1.csv");
    CHECK(rdbr::shape_relative_error(est, rdbr::builtin_shape("cosine", est.grid_size())) < 1e-2);
}

TEST_CASE("errors exit nonzero") {
    Scratch s;
    auto bad = run("synth --preset nope --out " + (s / "x"));
    CHECK(bad.code != 0);
    CHECK(bad.output.find("ex1") != std::string::npos);

    std::ofstream(s / "broken.csv") << "t,value\n0,1\n0.5,oops\n";
    auto broken = run("decompose --in " + (s / "broken.csv") + " --auto --out " + (s / "y"));
    CHECK(broken.code != 0);
    CHECK(broken.output.find("broken.csv:3") != std::string::npos);

    REQUIRE(run("synth --preset ex2 --L 1024 --out " + (s / "a")).code == 0);
    REQUIRE(run("synth --preset ex2 --L 2048 --out " + (s / "b")).code == 0);
    auto mismatch = run("decompose --in " + (s / "a/signal.csv") + " --profiles " + (s / "b/profile_1.csv") +
                        " --out " + (s / "z"));
    CHECK(mismatch.code != 0);
    CHECK(mismatch.output.find("mismatch") != std::string::npos);

    auto suite = run("bench --suite nope --out " + (s / "w"));
    CHECK(suite.code != 0);
    CHECK(suite.output.find("rate_vs_N") != std::string::npos);
}

TEST_CASE("bench err_vs_L writes one cell per length") {
    Scratch s;
    auto r = run("bench --suite err_vs_L --max_iter 20 --out " + (s / "b"));
    REQUIRE_MESSAGE(r.code == 0, r.output);
    auto j = read_json(s.path / "b" / "bench.json");
    REQUIRE(j["cells"].size() == 6);
    CHECK(j["cells"][0]["L"] == 128);
    CHECK(j["cells"][5]["L"] == 4096);
}

}
