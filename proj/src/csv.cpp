#include "eopulse/csv.hpp"

#include <cstdio>
#include <initializer_list>
#include <span>

#include "eopulse/errors.hpp"

namespace eopulse::csv {

namespace {

struct File {
    std::FILE* f;
    explicit File(const std::string& path) : f(std::fopen(path.c_str(), "wb")) {
        if (!f)
            throw SimError(ErrorCode::IoError, "", "cannot open for writing: " + path);
    }
    ~File() {
        if (f) std::fclose(f);
    }
    File(const File&) = delete;
    File& operator=(const File&) = delete;
};

void write_table(const std::string& path, const char* header,
                 std::initializer_list<std::span<const double>> columns) {
    File out(path);
    std::fprintf(out.f, "%s\n", header);
    const std::size_t rows = columns.begin()->size();
    for (std::size_t i = 0; i < rows; ++i) {
        bool first = true;
        for (const auto& col : columns) {
            std::fprintf(out.f, first ? "%.11e" : ",%.11e", col[i]);
            first = false;
        }
        std::fputc('\n', out.f);
    }
}

} // namespace

void write_charge(const std::string& path, const circuit::ChargeTrajectory& q) {
    write_table(path, "t,sigma1,F1,FP,F_total,J",
                {q.grid.time, q.sigma1, q.F1, q.FP, q.F_total, q.J});
}

void write_optical(const std::string& path, const optics::OpticalTrajectory& o) {
    write_table(path,
                "t,delta_n,phase,delta_omega,delta_omega_usual,delta_omega_extra",
                {o.grid.time, o.delta_n, o.phase, o.delta_omega,
                 o.delta_omega_usual, o.delta_omega_extra});
}

void write_exciton(const std::string& path, const exciton::ExcitonTrajectory& x) {
    write_table(path, "t,occupation,level_energy,FP_micro",
                {x.grid.time, x.occupation, x.level_energy, x.FP_micro});
}

void write_pulse(const std::string& path, const optics::PulseRecord& p) {
    write_table(path, "t,flux_in,flux_out,omega_out,delta_I",
                {p.grid.time, p.flux_in, p.flux_out, p.omega_out, p.delta_I});
}

void write_spectrum(const std::string& path, const optics::Spectrum& s) {
    write_table(path, "omega_offset,power_in,power_out",
                {s.omega_offset, s.power_in, s.power_out});
}

} // namespace eopulse::csv
