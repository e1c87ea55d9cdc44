#pragma once

#include <optional>
#include <string>
#include <vector>

#include "eopulse/config.hpp"
#include "eopulse/exciton.hpp"
#include "eopulse/ledger.hpp"
#include "eopulse/model.hpp"

namespace eopulse::runner {

/// Everything a single simulation produced, kept in memory: the CLI writes
/// files from it, tests and sweeps read it directly.
struct PipelineResult {
    circuit::ChargeTrajectory charge;
    optics::OpticalTrajectory optical;
    optics::PulseRecord pulse;
    ledger::BalanceReport report;
    std::optional<exciton::ExcitonTrajectory> exciton;
    std::optional<exciton::Chi2Fit> chi2_fit;
    std::optional<exciton::AdiabaticityReport> adiabaticity;
};

/// Full phenomenological pipeline: circuit, optics, pulse bookkeeping,
/// balance certification. Requires material.chi2_dc.
PipelineResult run_phenomenological(const model::Model& m,
                                    const std::string& run_id);

/// Microscopic pipeline: chi2 extraction (feedback off), coupled
/// exciton-circuit run (feedback on), then the same optics and ledger with
/// the fitted chi2.
PipelineResult run_microscopic(const model::Model& m,
                               const std::string& run_id);

struct RunOutcome {
    std::vector<std::string> outputs;   // paths written, in write order
    std::vector<std::string> warnings;
    std::string run_id;
    bool identities_pass = false;
};

/// Runs the requested mode and writes csv/json artifacts into out_dir.
/// In "both" mode the microscopic outputs carry a micro_ prefix and the
/// ledger gains a model-comparison block.
RunOutcome run_single(const model::Model& m, const config::RawConfig& raw,
                      model::RunMode mode, const std::string& out_dir);

std::string make_run_id();

struct SweepOutcome {
    std::string table_path;
    std::size_t points = 0;
    std::size_t failed_points = 0;
};

/// One phenomenological pipeline per swept value, rows in sweep order.
/// Points run on up to `jobs` threads; per-point errors become the row's
/// status column and the sweep continues.
SweepOutcome run_sweep(const config::RawConfig& base,
                       const config::RawConfig& sweep_overlay,
                       const std::string& out_dir, int jobs);

} // namespace eopulse::runner
