#pragma once

#include <cstddef>
#include <vector>

#include "eopulse/model.hpp"

namespace eopulse::envelope {

/// Optical pulse envelope E(t). Evaluation is piece-based: callers resolve a
/// piece index once per smooth interval and evaluate inside it, which keeps
/// one-sided limits well defined at the ideal rectangular edges.
class Envelope {
  public:
    static Envelope make(const model::PulseSpec& spec);

    double start() const { return start_; }
    double end() const { return end_; }

    bool idealized() const { return idealized_; }
    bool has_plateau() const { return has_plateau_; }
    double plateau_begin() const { return 0.0; }
    double plateau_end() const { return plateau_end_; }

    /// Smooth-interval boundaries, including start() and end().
    const std::vector<double>& breakpoints() const { return breakpoints_; }

    std::size_t piece_containing(double t) const;

    double amplitude(double t, std::size_t piece) const;      // E, V/m
    double amplitude_sq(double t, std::size_t piece) const;   // E^2
    double amplitude_sq_rate(double t, std::size_t piece) const; // d(E^2)/dt

    double peak_amplitude() const { return peak_; }
    /// Shortest feature the integrator must resolve.
    double min_feature_time() const { return min_feature_; }

  private:
    enum class PieceKind { zero, ramp_up, plateau, ramp_down, gaussian, table };

    struct Piece {
        PieceKind kind;
        double t0, t1;
    };

    double eval_amp(double t, const Piece& p) const;
    double eval_amp_rate(double t, const Piece& p) const;

    model::EnvelopeShape shape_ = model::EnvelopeShape::rectangular;
    double E_ = 0.0, T_ = 0.0, Ttr_ = 0.0;
    double start_ = 0.0, end_ = 0.0, plateau_end_ = 0.0;
    double peak_ = 0.0, min_feature_ = 0.0;
    double gauss_alpha_ = 0.0; // E(t) = E exp(-alpha t^2)
    bool idealized_ = false, has_plateau_ = false;
    std::vector<Piece> pieces_;
    std::vector<double> breakpoints_;
    std::vector<double> table_t_, table_E_;
};

} // namespace eopulse::envelope
