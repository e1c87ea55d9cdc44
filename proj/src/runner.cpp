#include "eopulse/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <thread>

#include "json.hpp"

#include "eopulse/csv.hpp"
#include "eopulse/envelope.hpp"
#include "eopulse/kernels.hpp"
#include "eopulse/network.hpp"

namespace eopulse::runner {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "1.0.0";

json report_json(const ledger::BalanceReport& r) {
    return json{{"U_network", r.U_network},
                {"U_R_closed", r.U_R_closed},
                {"U_battery", r.U_battery},
                {"U_battery_closed", r.U_battery_closed},
                {"U_ERS", r.U_ERS},
                {"U_ERS_abs", r.U_ERS_abs},
                {"U_ERS_closed", r.U_ERS_closed},
                {"photons_in", r.photons_in},
                {"photons_out", r.photons_out},
                {"photon_residual", r.photon_residual},
                {"photon_quadrature_error", r.photon_quadrature_error},
                {"residual_energy", r.residual_energy},
                {"residual_battery", r.residual_battery},
                {"quadrature_error", r.quadrature_error},
                {"pass_energy", r.pass_energy},
                {"pass_battery", r.pass_battery},
                {"pass_photon", r.pass_photon},
                {"pass", r.pass}};
}

json tail_json(const circuit::ChargeTrajectory& q) {
    return json{{"converged", q.tail_converged},
                {"end_fraction", q.tail_end_fraction},
                {"sigma_peak_abs", q.sigma_peak_abs}};
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw SimError(ErrorCode::IoError, "", "cannot open for writing: " + path);
    out << text;
}

/// Max |a - b| over probe times, relative to the peak of |b|.
double column_deviation(const grid::TimeGrid& ga, std::span<const double> a,
                        const grid::TimeGrid& gb, std::span<const double> b) {
    const double t0 = std::max(ga.time.front(), gb.time.front());
    const double t1 = std::min(ga.time.back(), gb.time.back());
    const double scale = kernels::max_abs(b);
    if (scale == 0.0) return kernels::max_abs(a) == 0.0 ? 0.0 : 1.0;
    double worst = 0.0;
    constexpr int kProbes = 257;
    for (int i = 0; i < kProbes; ++i) {
        const double t =
            t0 + (t1 - t0) * static_cast<double>(i) / (kProbes - 1);
        worst = std::max(worst, std::fabs(grid::sample(ga, a, t) -
                                          grid::sample(gb, b, t)));
    }
    return worst / scale;
}

} // namespace

std::string make_run_id() {
    static std::atomic<std::uint64_t> counter{0};
    std::random_device rd;
    const std::uint64_t now = static_cast<std::uint64_t>(
        std::chrono::steady_clock::now().time_since_epoch().count());
    std::mt19937_64 gen((static_cast<std::uint64_t>(rd()) << 32) ^ rd() ^ now ^
                        (counter.fetch_add(1) << 1));
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(gen()));
    return buf;
}

PipelineResult run_phenomenological(const model::Model& m,
                                    const std::string& run_id) {
    m.require_mode(model::RunMode::phenomenological);
    const envelope::Envelope env = envelope::Envelope::make(m.pulse);

    PipelineResult r;
    r.charge = circuit::integrate_circuit(m, env);
    r.charge.run_id = run_id;
    r.optical = optics::frequency_shift(m, r.charge);
    r.pulse = optics::apply_shift_to_pulse(m, r.charge, r.optical);
    r.report = ledger::balance_report(m, r.charge, r.optical, r.pulse);
    return r;
}

PipelineResult run_microscopic(const model::Model& m,
                               const std::string& run_id) {
    m.require_mode(model::RunMode::microscopic);

    PipelineResult r;
    r.chi2_fit = exciton::extract_chi2(m);

    model::Model fitted = m;
    fitted.material.chi2_dc = r.chi2_fit->chi2_dc;
    fitted.derived.chi2_eo = 4.0 * r.chi2_fit->chi2_dc;

    const envelope::Envelope env = envelope::Envelope::make(fitted.pulse);
    exciton::MicroscopicRun run = exciton::evolve_two_level(fitted, env, true);
    r.adiabaticity = run.adiabaticity;
    r.charge = std::move(run.charge);
    r.charge.run_id = run_id;
    r.exciton = std::move(run.exciton);
    r.exciton->run_id = run_id;
    r.optical = optics::frequency_shift(fitted, r.charge);
    r.pulse = optics::apply_shift_to_pulse(fitted, r.charge, r.optical);
    r.report = ledger::balance_report(fitted, r.charge, r.optical, r.pulse);
    return r;
}

RunOutcome run_single(const model::Model& m, const config::RawConfig& raw,
                      model::RunMode mode, const std::string& out_dir) {
    const auto t_start = std::chrono::steady_clock::now();
    fs::create_directories(out_dir);

    RunOutcome out;
    out.run_id = make_run_id();
    out.warnings = m.regime_warnings;
    if (m.circuit.kind == model::NetworkKind::rational) {
        const network::Impedance z{m.circuit.impedance_num,
                                   m.circuit.impedance_den};
        const double tc = circuit::slowest_loop_time_constant(m);
        if (!network::passivity_sample(z, 1e-2 / tc, 1e6 / tc))
            out.warnings.push_back(
                "NETWORK Re Z(i w) < 0 at sampled frequencies (non-passive)");
    }

    auto emit = [&](const std::string& name) {
        out.outputs.push_back((fs::path(out_dir) / name).string());
        return out.outputs.back();
    };

    json led;
    led["run_id"] = out.run_id;
    led["mode"] = model::to_string(mode);
    led["thresholds"] = {{"residual_energy", m.thresholds.residual_energy},
                         {"residual_battery", m.thresholds.residual_battery},
                         {"photon", m.thresholds.photon}};

    // In "both" mode the phenomenological leg runs with the fitted chi2 so the
    // comparison block isolates model structure, not parameter mismatch.
    std::optional<PipelineResult> phen, micro;
    if (mode == model::RunMode::phenomenological) {
        phen = run_phenomenological(m, out.run_id);
    } else {
        micro = run_microscopic(m, out.run_id);
        if (mode == model::RunMode::both) {
            model::Model fitted = m;
            fitted.material.chi2_dc = micro->chi2_fit->chi2_dc;
            fitted.derived.chi2_eo = 4.0 * micro->chi2_fit->chi2_dc;
            phen = run_phenomenological(fitted, out.run_id);
        }
    }

    if (phen) {
        csv::write_charge(emit("charge.csv"), phen->charge);
        csv::write_optical(emit("optical.csv"), phen->optical);
        csv::write_pulse(emit("pulse.csv"), phen->pulse);
        if (m.numerics.export_spectrum)
            csv::write_spectrum(
                emit("spectrum.csv"),
                optics::pulse_spectrum(m, phen->charge, phen->optical));
    }
    if (micro) {
        const bool prefixed = phen.has_value();
        const auto name = [&](const char* base) {
            return prefixed ? std::string("micro_") + base : std::string(base);
        };
        csv::write_charge(emit(name("charge.csv")), micro->charge);
        csv::write_optical(emit(name("optical.csv")), micro->optical);
        csv::write_exciton(emit(name("exciton.csv")), *micro->exciton);
        csv::write_pulse(emit(name("pulse.csv")), micro->pulse);
        if (!micro->adiabaticity->adiabatic) {
            char buf[160];
            std::snprintf(buf, sizeof buf,
                          "ADIABATICITY margin %.3e below threshold %.3e; "
                          "excitation is not virtual",
                          micro->adiabaticity->margin,
                          m.numerics.adiabatic_threshold);
            out.warnings.push_back(buf);
        }
    }

    out.identities_pass = true;
    if (phen) {
        led[micro ? "phenomenological" : "report"] = report_json(phen->report);
        led[micro ? "phenomenological_tail" : "tail"] = tail_json(phen->charge);
        out.identities_pass = out.identities_pass && phen->report.pass;
    }
    if (micro) {
        led[phen ? "microscopic" : "report"] = report_json(micro->report);
        led[phen ? "microscopic_tail" : "tail"] = tail_json(micro->charge);
        led["adiabaticity"] = {{"detuning", micro->adiabaticity->detuning},
                               {"lhs", micro->adiabaticity->lhs},
                               {"rhs", micro->adiabaticity->rhs},
                               {"margin", micro->adiabaticity->margin},
                               {"adiabatic", micro->adiabaticity->adiabatic}};
        led["chi2_fit"] = {{"chi2_dc", micro->chi2_fit->chi2_dc},
                           {"residual", micro->chi2_fit->residual}};
        out.identities_pass = out.identities_pass && micro->report.pass;
    }
    if (phen && micro) {
        led["comparison"] = {
            {"chi2_fitted", micro->chi2_fit->chi2_dc},
            {"chi2_configured", m.material.chi2_dc
                                    ? json(*m.material.chi2_dc)
                                    : json(nullptr)},
            {"sigma1_deviation",
             column_deviation(phen->charge.grid, phen->charge.sigma1,
                              micro->charge.grid, micro->charge.sigma1)},
            {"delta_omega_extra_deviation",
             column_deviation(phen->optical.grid,
                              phen->optical.delta_omega_extra,
                              micro->optical.grid,
                              micro->optical.delta_omega_extra)},
            {"U_network_deviation",
             micro->report.U_network != 0.0
                 ? std::fabs(phen->report.U_network - micro->report.U_network) /
                       std::fabs(micro->report.U_network)
                 : 0.0}};
    }
    led["warnings"] = out.warnings;
    write_text(emit("ledger.json"), led.dump(2) + "\n");

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
    json manifest{{"run_id", out.run_id},
                  {"mode", model::to_string(mode)},
                  {"tool_version", kToolVersion},
                  {"backend", kernels::backend_name(kernels::active_backend())},
                  {"outputs", json::array()},
                  {"wall_time_s", wall},
                  {"config_snapshot", raw.source_text}};
    for (const std::string& p : out.outputs)
        manifest["outputs"].push_back(fs::path(p).filename().string());
    manifest["outputs"].push_back("manifest.json");
    write_text(emit("manifest.json"), manifest.dump(2) + "\n");
    return out;
}

namespace {

struct SweepRow {
    double value = 0.0;
    double peak_shift = std::numeric_limits<double>::quiet_NaN();
    double shift_at_probe = std::numeric_limits<double>::quiet_NaN();
    double U_R = std::numeric_limits<double>::quiet_NaN();
    double U_ERS = std::numeric_limits<double>::quiet_NaN();
    double residual_energy = std::numeric_limits<double>::quiet_NaN();
    double residual_battery = std::numeric_limits<double>::quiet_NaN();
    std::string status = "OK";
};

struct SweepSpec {
    std::string section, key;
    bool log_scale = true;
    std::size_t points = 0;
    double lo = 0.0, hi = 0.0;
    double probe_time = std::numeric_limits<double>::quiet_NaN();
    bool has_probe = false;
};

SweepSpec parse_sweep(const config::RawConfig& raw) {
    auto need = [&](const char* key) -> const std::string& {
        const std::string* v = raw.find("sweep", key);
        if (!v)
            throw SimError(ErrorCode::MissingField,
                           std::string("sweep.") + key, "sweep needs this key");
        return *v;
    };
    SweepSpec s;
    const std::string param = need("parameter");
    const auto dot = param.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == param.size())
        throw SimError(ErrorCode::BadValue, "sweep.parameter",
                       "expected section.key, got: " + param);
    s.section = param.substr(0, dot);
    s.key = param.substr(dot + 1);
    if (!config::is_known_key(s.section, s.key) || s.section == "sweep")
        throw SimError(ErrorCode::UnknownKey, "sweep.parameter",
                       "not a sweepable config key: " + param);

    const std::string scale = need("scale");
    if (scale == "log")
        s.log_scale = true;
    else if (scale == "linear")
        s.log_scale = false;
    else
        throw SimError(ErrorCode::BadValue, "sweep.scale",
                       "expected log or linear, got: " + scale);

    const double pts = config::parse_double(need("points"), "sweep.points");
    if (pts < 2.0 || pts > 10000.0 || pts != std::floor(pts))
        throw SimError(ErrorCode::BadValue, "sweep.points",
                       "points must be an integer in [2, 10000]");
    s.points = static_cast<std::size_t>(pts);
    s.lo = config::parse_double(need("min"), "sweep.min");
    s.hi = config::parse_double(need("max"), "sweep.max");
    if (s.log_scale && (s.lo <= 0.0 || s.hi <= 0.0))
        throw SimError(ErrorCode::BadValue, "sweep.min",
                       "log-scale bounds must be positive");
    if (s.hi < s.lo)
        throw SimError(ErrorCode::BadValue, "sweep.max", "max below min");
    if (const std::string* v = raw.find("sweep", "probe_time")) {
        s.probe_time = config::parse_double(*v, "sweep.probe_time");
        s.has_probe = true;
    }
    return s;
}

SweepRow sweep_point(const config::RawConfig& base, const SweepSpec& spec,
                     double value) {
    SweepRow row;
    row.value = value;
    try {
        config::RawConfig point = base;
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", value);
        point.set(spec.section, spec.key, buf);
        const model::Model m = model::require_model(point);
        const PipelineResult r = run_phenomenological(m, "");
        row.peak_shift = kernels::max_abs(r.optical.delta_omega_extra);
        if (spec.has_probe)
            row.shift_at_probe = grid::sample(
                r.optical.grid, r.optical.delta_omega_extra, spec.probe_time);
        row.U_R = r.report.U_network;
        row.U_ERS = r.report.U_ERS;
        row.residual_energy = r.report.residual_energy;
        row.residual_battery = r.report.residual_battery;
    } catch (const SimError& e) {
        row.status = to_string(e.code());
    } catch (const std::exception&) {
        row.status = "INTERNAL_ERROR";
    }
    return row;
}

} // namespace

SweepOutcome run_sweep(const config::RawConfig& base,
                       const config::RawConfig& sweep_overlay,
                       const std::string& out_dir, int jobs) {
    config::RawConfig merged = base;
    for (const auto& [section, kv] : sweep_overlay.sections)
        for (const auto& [key, value] : kv)
            merged.set(section, key, value);

    const SweepSpec spec = parse_sweep(merged);
    std::vector<double> values(spec.points);
    for (std::size_t i = 0; i < spec.points; ++i) {
        const double f = spec.points == 1
                             ? 0.0
                             : static_cast<double>(i) /
                                   static_cast<double>(spec.points - 1);
        values[i] = spec.log_scale
                        ? spec.lo * std::pow(spec.hi / spec.lo, f)
                        : spec.lo + (spec.hi - spec.lo) * f;
    }

    kernels::active_backend(); // settle dispatch before spawning workers
    std::vector<SweepRow> rows(spec.points);
    std::atomic<std::size_t> next{0};
    const int workers = std::clamp(jobs, 1, 64);
    auto work = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= spec.points) break;
            rows[i] = sweep_point(merged, spec, values[i]);
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(work);
        for (std::thread& t : pool)
            t.join();
    }

    fs::create_directories(out_dir);
    SweepOutcome out;
    out.points = spec.points;
    out.table_path = (fs::path(out_dir) / "sweep.csv").string();
    {
        std::FILE* f = std::fopen(out.table_path.c_str(), "wb");
        if (!f)
            throw SimError(ErrorCode::IoError, "",
                           "cannot open for writing: " + out.table_path);
        std::fprintf(f,
                     "value,peak_abs_delta_omega_extra,delta_omega_extra_at_"
                     "probe,U_R,U_ERS,residual_energy,residual_battery,status\n");
        for (const SweepRow& r : rows) {
            if (r.status != "OK") ++out.failed_points;
            std::fprintf(f, "%.11e,%.11e,%.11e,%.11e,%.11e,%.11e,%.11e,%s\n",
                         r.value, r.peak_shift, r.shift_at_probe, r.U_R,
                         r.U_ERS, r.residual_energy, r.residual_battery,
                         r.status.c_str());
        }
        std::fclose(f);
    }

    json manifest{{"run_id", make_run_id()},
                  {"mode", "sweep"},
                  {"tool_version", kToolVersion},
                  {"parameter", spec.section + "." + spec.key},
                  {"points", spec.points},
                  {"failed_points", out.failed_points},
                  {"outputs", {"sweep.csv", "manifest.json"}},
                  {"config_snapshot", base.source_text},
                  {"sweep_snapshot", sweep_overlay.source_text}};
    write_text((fs::path(out_dir) / "manifest.json").string(),
               manifest.dump(2) + "\n");
    return out;
}

} // namespace eopulse::runner
