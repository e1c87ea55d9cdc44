#pragma once

#include <string>

#include "eopulse/circuit.hpp"
#include "eopulse/exciton.hpp"
#include "eopulse/optics.hpp"

namespace eopulse::csv {

/// Fixed-format exports: every value printed as %.11e (12 significant
/// digits) so identical runs produce identical bytes. Header lines are an
/// exact contract.
void write_charge(const std::string& path, const circuit::ChargeTrajectory& q);
void write_optical(const std::string& path, const optics::OpticalTrajectory& o);
void write_exciton(const std::string& path, const exciton::ExcitonTrajectory& x);
void write_pulse(const std::string& path, const optics::PulseRecord& p);
void write_spectrum(const std::string& path, const optics::Spectrum& s);

} // namespace eopulse::csv
