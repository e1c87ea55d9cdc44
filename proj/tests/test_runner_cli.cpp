#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

// Drives the installed binary end to end: flags, exit codes, artifact files,
// determinism. CLI_BINARY_PATH and CONFIG_DIR come from the build.

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kScratch = "cli_scratch";

std::string cfg(const char* name) {
    return (fs::path(CONFIG_DIR) / name).string();
}

fs::path fresh_dir(const char* name) {
    const fs::path dir = kScratch / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run_cli(const std::string& args, const fs::path& stderr_to = {}) {
    std::string cmd = std::string(CLI_BINARY_PATH) + " " + args;
    cmd += stderr_to.empty() ? " 2>/dev/null" : " 2>" + stderr_to.string();
    cmd += " >/dev/null";
    const int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    REQUIRE(WIFEXITED(rc));
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json slurp_json(const fs::path& path) { return json::parse(slurp(path)); }

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(line);
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

// Parsed sweep.csv: header plus one row of cells per point.
struct SweepTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

SweepTable read_sweep(const fs::path& dir) {
    std::istringstream ss(slurp(dir / "sweep.csv"));
    SweepTable t;
    std::string line;
    REQUIRE(std::getline(ss, line));
    t.header = split(line, ',');
    while (std::getline(ss, line))
        if (!line.empty()) t.rows.push_back(split(line, ','));
    return t;
}

double cell(const SweepTable& t, std::size_t row, const char* name) {
    for (std::size_t c = 0; c < t.header.size(); ++c)
        if (t.header[c] == name) return std::strtod(t.rows[row][c].c_str(), nullptr);
    FAIL("no column " << name);
    return 0.0;
}

// Base configuration for the failure-path cases, patched per test.
const char* kBaseConfig = R"(
[material]
relative_permittivity = 13
refractive_index = 3.6
fill_factor = 0.5
chi2_dc = 5e-9

[geometry]
cross_section = 1e-5
device_length = 1e-6

[circuit]
kind = resistance
resistance = 8688
bias_field = 1e7

[pulse]
shape = rectangular
carrier_angular_frequency = 2.263e15
field_amplitude = 1.4467e7
plateau_duration = 3e-12
transient_duration = 0

[numerics]
tail_decay_target = 1e-13
)";

fs::path write_config(const fs::path& dir, const char* name,
                      const std::string& text) {
    const fs::path p = dir / name;
    std::ofstream out(p);
    out << text;
    return p;
}

// The parser refuses duplicate keys, so patches substitute in place.
std::string base_with(const std::string& from, const std::string& to) {
    std::string t = kBaseConfig;
    const std::size_t at = t.find(from);
    REQUIRE(at != std::string::npos);
    t.replace(at, from.size(), to);
    return t;
}

} // namespace

TEST_CASE("single run writes the artifact set and passes") {
    const auto dir = fresh_dir("single");
    const int rc = run_cli("--config " + cfg("canonical.cfg") + " --out " +
                           dir.string() + " --quiet");
    CHECK(rc == 0);

    for (const char* f : {"charge.csv", "optical.csv", "pulse.csv",
                          "ledger.json", "manifest.json"})
        CHECK(fs::exists(dir / f));
    CHECK(!fs::exists(dir / "spectrum.csv"));
    CHECK(!fs::exists(dir / "exciton.csv"));

    const json led = slurp_json(dir / "ledger.json");
    CHECK(led.at("mode") == "phenomenological");
    CHECK(led.at("report").at("pass") == true);
    CHECK(led.at("report").at("residual_energy").get<double>() <= 1e-6);
    CHECK(led.at("tail").at("converged") == true);
    CHECK(led.at("thresholds").at("residual_battery").get<double>() == 1e-8);

    const json man = slurp_json(dir / "manifest.json");
    CHECK(man.at("run_id") == led.at("run_id"));
    CHECK(led.at("run_id").get<std::string>().size() == 16);
    CHECK(man.at("outputs").size() == 5); // four artifacts + manifest itself
    CHECK(man.at("config_snapshot").get<std::string>().find("8688") !=
          std::string::npos);

    const std::string charge = slurp(dir / "charge.csv");
    CHECK(charge.rfind("t,sigma1,F1,FP,F_total,J\n", 0) == 0);
}

TEST_CASE("repeated runs are byte-identical apart from the run id") {
    const auto a = fresh_dir("det_a");
    const auto b = fresh_dir("det_b");
    CHECK(run_cli("--config " + cfg("canonical.cfg") + " --out " + a.string() +
                  " --quiet") == 0);
    // Second run takes the output directory from the environment instead.
    setenv("EOPULSE_OUT", b.string().c_str(), 1);
    CHECK(run_cli("--config " + cfg("canonical.cfg") + " --quiet") == 0);
    unsetenv("EOPULSE_OUT");

    for (const char* f : {"charge.csv", "optical.csv", "pulse.csv"})
        REQUIRE(slurp(a / f) == slurp(b / f));
    const json la = slurp_json(a / "ledger.json");
    const json lb = slurp_json(b / "ledger.json");
    CHECK(la.at("run_id") != lb.at("run_id"));
    CHECK(la.at("report") == lb.at("report"));
}

TEST_CASE("invalid parameter exits 1 with a coded message") {
    const auto dir = fresh_dir("bad_param");
    const auto bad = write_config(
        dir, "bad.cfg", base_with("resistance = 8688", "resistance = -5"));
    const int rc =
        run_cli("--config " + bad.string() + " --out " + dir.string(),
                dir / "err.txt");
    CHECK(rc == 1);
    const std::string err = slurp(dir / "err.txt");
    CHECK(err.find("ERROR NEGATIVE_PARAMETER circuit.resistance") !=
          std::string::npos);
    CHECK(!fs::exists(dir / "ledger.json"));
}

TEST_CASE("microscopic mode without the section exits 1") {
    const auto dir = fresh_dir("no_micro");
    const int rc = run_cli("--config " + cfg("canonical.cfg") +
                               " --mode microscopic --out " + dir.string(),
                           dir / "err.txt");
    CHECK(rc == 1);
    const std::string err = slurp(dir / "err.txt");
    CHECK(err.find("MISSING_FIELD") != std::string::npos);
    CHECK(err.find("microscopic") != std::string::npos);
}

TEST_CASE("identity failure exits 2 and still writes the ledger") {
    const auto dir = fresh_dir("identity_fail");
    const auto b = write_config(
        dir, "strict.cfg",
        std::string(kBaseConfig) + "\n[thresholds]\nresidual_energy = 1e-30\n");
    const int rc = run_cli("--config " + b.string() + " --out " + dir.string() +
                           " --quiet");
    CHECK(rc == 2);
    const json led = slurp_json(dir / "ledger.json");
    CHECK(led.at("report").at("pass_energy") == false);
    CHECK(led.at("report").at("pass") == false);
    CHECK(fs::exists(dir / "manifest.json"));
}

TEST_CASE("resistance sweep table is ordered, complete, and unimodal") {
    const auto dir = fresh_dir("sweep_r");
    const int rc = run_cli("--config " + cfg("canonical.cfg") + " --sweep " +
                           cfg("sweep_R.cfg") + " --out " + dir.string() +
                           " --quiet");
    CHECK(rc == 0);

    const SweepTable t = read_sweep(dir);
    REQUIRE(t.header.size() == 8);
    CHECK(t.header[0] == "value");
    CHECK(t.header[2] == "delta_omega_extra_at_probe");
    CHECK(t.header[7] == "status");
    REQUIRE(t.rows.size() == 25);

    std::vector<double> probe;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        CHECK(t.rows[i].back() == "OK");
        if (i > 0) CHECK(cell(t, i, "value") > cell(t, i - 1, "value"));
        probe.push_back(std::fabs(cell(t, i, "delta_omega_extra_at_probe")));
    }
    // Probe magnitude rises to a single interior maximum and falls again.
    std::size_t peaks = 0, argmax = 0;
    for (std::size_t i = 1; i + 1 < probe.size(); ++i)
        if (probe[i] >= probe[i - 1] && probe[i] >= probe[i + 1]) {
            ++peaks;
            argmax = i;
        }
    CHECK(peaks == 1);
    CHECK(argmax > 0);
    CHECK(probe.front() < probe[argmax]);
    CHECK(probe.back() < probe[argmax]);

    const json man = slurp_json(dir / "manifest.json");
    CHECK(man.at("points") == 25);
    CHECK(man.at("failed_points") == 0);
    CHECK(man.at("parameter") == "circuit.resistance");
}

TEST_CASE("field sweep follows the fourth-power law") {
    const auto dir = fresh_dir("sweep_e");
    const int rc = run_cli("--config " + cfg("canonical.cfg") + " --sweep " +
                           cfg("sweep_E.cfg") + " --out " + dir.string() +
                           " --quiet");
    CHECK(rc == 0);
    const SweepTable t = read_sweep(dir);
    REQUIRE(t.rows.size() == 8);

    // Least-squares slope in log-log coordinates.
    const auto slope = [&](const char* col) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double n = static_cast<double>(t.rows.size());
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            const double x = std::log(cell(t, i, "value"));
            const double y = std::log(cell(t, i, col));
            sx += x, sy += y, sxx += x * x, sxy += x * y;
        }
        return (n * sxy - sx * sy) / (n * sxx - sx * sx);
    };
    CHECK(std::fabs(slope("U_R") - 4.0) <= 1e-2);
    CHECK(std::fabs(slope("peak_abs_delta_omega_extra") - 2.0) <= 1e-2);
}

TEST_CASE("degenerate two-point sweep repeats the row") {
    const auto dir = fresh_dir("sweep_flat");
    const fs::path overlay = dir / "flat.cfg";
    {
        std::ofstream out(overlay);
        out << "[sweep]\nparameter = circuit.resistance\nscale = log\n"
               "points = 2\nmin = 8688\nmax = 8688\n";
    }
    const int rc = run_cli("--config " + cfg("canonical.cfg") + " --sweep " +
                           overlay.string() + " --out " + dir.string() +
                           " --quiet");
    CHECK(rc == 0);
    const SweepTable t = read_sweep(dir);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0] == t.rows[1]);
}

TEST_CASE("parallel sweep output is byte-identical to serial") {
    const auto a = fresh_dir("jobs_1");
    const auto b = fresh_dir("jobs_4");
    CHECK(run_cli("--config " + cfg("canonical.cfg") + " --sweep " +
                  cfg("sweep_E.cfg") + " --out " + a.string() +
                  " --quiet --jobs 1") == 0);
    CHECK(run_cli("--config " + cfg("canonical.cfg") + " --sweep " +
                  cfg("sweep_E.cfg") + " --out " + b.string() +
                  " --quiet --jobs 4") == 0);
    CHECK(slurp(a / "sweep.csv") == slurp(b / "sweep.csv"));
}
