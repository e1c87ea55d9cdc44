#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"

#include "eopulse/config.hpp"
#include "eopulse/errors.hpp"
#include "eopulse/model.hpp"
#include "eopulse/runner.hpp"

using namespace eopulse;

namespace {

void print_error(ErrorCode code, const std::string& field,
                 const std::string& message) {
    if (field.empty())
        std::fprintf(stderr, "ERROR %s: %s\n", to_string(code),
                     message.c_str());
    else
        std::fprintf(stderr, "ERROR %s %s: %s\n", to_string(code),
                     field.c_str(), message.c_str());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Electrical pulse generation by virtual photo-excitation: integrates "
        "the screening charge driven by an optical pulse through an "
        "electro-optic capacitor, the resulting frequency chirp, and the "
        "energy/photon bookkeeping."};

    std::string config_path;
    std::string mode_text = "phenomenological";
    std::string sweep_path;
    std::string out_dir = "out";
    bool quiet = false;
    int jobs = 1;

    app.add_option("--config", config_path, "model configuration file")
        ->required();
    app.add_option("--mode", mode_text,
                   "phenomenological, microscopic, or both")
        ->capture_default_str();
    app.add_option("--sweep", sweep_path,
                   "sweep overlay config; runs a parameter sweep instead of a "
                   "single simulation");
    app.add_option("--out", out_dir, "output directory")
        ->envname("EOPULSE_OUT")
        ->capture_default_str();
    app.add_flag("--quiet", quiet, "suppress warnings and progress output");
    app.add_option("--jobs", jobs, "sweep worker threads")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        const config::RawConfig raw = config::parse_config_file(config_path);

        if (!sweep_path.empty()) {
            const config::RawConfig overlay =
                config::parse_config_file(sweep_path);
            const runner::SweepOutcome sweep =
                runner::run_sweep(raw, overlay, out_dir, jobs);
            if (!quiet)
                std::printf("sweep: %zu points (%zu failed) -> %s\n",
                            sweep.points, sweep.failed_points,
                            sweep.table_path.c_str());
            return 0;
        }

        const model::RunMode mode = model::parse_mode(mode_text);
        const model::BuildResult built = model::build_model(raw);
        if (!built.model) {
            for (const model::Issue& issue : built.errors)
                print_error(issue.code, issue.field, issue.message);
            return 1;
        }

        const runner::RunOutcome run =
            runner::run_single(*built.model, raw, mode, out_dir);
        if (!quiet) {
            for (const std::string& w : run.warnings)
                std::fprintf(stderr, "WARNING %s\n", w.c_str());
            std::printf("run %s: %zu files -> %s (%s)\n", run.run_id.c_str(),
                        run.outputs.size(), out_dir.c_str(),
                        run.identities_pass ? "identities pass"
                                            : "IDENTITIES FAIL");
        }
        return run.identities_pass ? 0 : 2;
    } catch (const SimError& e) {
        print_error(e.code(), e.field(), e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "ERROR INTERNAL: %s\n", e.what());
        return 1;
    }
}
