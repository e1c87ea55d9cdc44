#include "eopulse/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "eopulse/constants.hpp"

namespace eopulse::envelope {

namespace {
// E^2 falls to half maximum at |t| = T/2: alpha = ln2 / (T/2)^2 / 2 for the
// amplitude since E^2 = E0^2 exp(-2 alpha t^2).
double gaussian_alpha(double fwhm_sq_intensity) {
    const double half = 0.5 * fwhm_sq_intensity;
    return std::log(2.0) / (2.0 * half * half);
}
} // namespace

Envelope Envelope::make(const model::PulseSpec& spec) {
    Envelope e;
    e.shape_ = spec.shape;
    e.E_ = spec.field_amplitude;
    e.T_ = spec.plateau_duration;
    e.Ttr_ = spec.transient_duration;

    switch (spec.shape) {
        case model::EnvelopeShape::rectangular: {
            e.has_plateau_ = true;
            e.plateau_end_ = e.T_;
            e.peak_ = e.E_;
            if (e.Ttr_ == 0.0) {
                e.idealized_ = true;
                e.start_ = 0.0;
                e.end_ = e.T_;
                e.pieces_ = {{PieceKind::plateau, 0.0, e.T_}};
                e.min_feature_ = e.T_;
            } else {
                e.start_ = -e.Ttr_;
                e.end_ = e.T_ + e.Ttr_;
                e.pieces_ = {{PieceKind::ramp_up, -e.Ttr_, 0.0},
                             {PieceKind::plateau, 0.0, e.T_},
                             {PieceKind::ramp_down, e.T_, e.T_ + e.Ttr_}};
                e.min_feature_ = std::min(e.T_, e.Ttr_);
            }
            break;
        }
        case model::EnvelopeShape::gaussian: {
            e.gauss_alpha_ = gaussian_alpha(e.T_);
            e.start_ = -3.0 * e.T_;
            e.end_ = 3.0 * e.T_;
            e.peak_ = e.E_;
            e.pieces_ = {{PieceKind::gaussian, e.start_, e.end_}};
            e.min_feature_ = e.T_;
            break;
        }
        case model::EnvelopeShape::tabulated: {
            std::ifstream in(spec.table_path);
            if (!in)
                throw SimError(ErrorCode::IoError, "pulse.table_path",
                               "cannot open envelope table: " + spec.table_path);
            std::string line;
            while (std::getline(in, line)) {
                const std::size_t hash = line.find('#');
                if (hash != std::string::npos) line.erase(hash);
                std::istringstream row(line);
                double t, v;
                if (row >> t >> v) {
                    e.table_t_.push_back(t);
                    e.table_E_.push_back(v);
                }
            }
            if (e.table_t_.size() < 2)
                throw SimError(ErrorCode::BadValue, "pulse.table_path",
                               "envelope table needs at least 2 rows");
            for (std::size_t i = 1; i < e.table_t_.size(); ++i)
                if (e.table_t_[i] <= e.table_t_[i - 1])
                    throw SimError(ErrorCode::BadValue, "pulse.table_path",
                                   "envelope table times must increase strictly");
            e.start_ = e.table_t_.front();
            e.end_ = e.table_t_.back();
            e.pieces_ = {{PieceKind::table, e.start_, e.end_}};
            e.peak_ = 0.0;
            double min_dt = e.end_ - e.start_;
            for (std::size_t i = 0; i < e.table_t_.size(); ++i) {
                e.peak_ = std::max(e.peak_, std::fabs(e.table_E_[i]));
                if (i > 0) min_dt = std::min(min_dt, e.table_t_[i] - e.table_t_[i - 1]);
            }
            e.min_feature_ = min_dt;
            break;
        }
    }

    e.breakpoints_.push_back(e.start_);
    for (const Piece& p : e.pieces_)
        e.breakpoints_.push_back(p.t1);
    return e;
}

std::size_t Envelope::piece_containing(double t) const {
    for (std::size_t i = 0; i < pieces_.size(); ++i)
        if (t >= pieces_[i].t0 && t <= pieces_[i].t1) return i;
    return t < start_ ? 0 : pieces_.size() - 1;
}

double Envelope::eval_amp(double t, const Piece& p) const {
    switch (p.kind) {
        case PieceKind::zero:
            return 0.0;
        case PieceKind::plateau:
            return E_;
        case PieceKind::ramp_up: {
            const double s = (t - p.t0) / Ttr_;
            return E_ * 0.5 * (1.0 - std::cos(constants::pi * s));
        }
        case PieceKind::ramp_down: {
            const double s = (t - p.t0) / Ttr_;
            return E_ * 0.5 * (1.0 + std::cos(constants::pi * s));
        }
        case PieceKind::gaussian:
            return E_ * std::exp(-gauss_alpha_ * t * t);
        case PieceKind::table: {
            if (t <= table_t_.front()) return table_E_.front();
            if (t >= table_t_.back()) return table_E_.back();
            const auto it =
                std::upper_bound(table_t_.begin(), table_t_.end(), t);
            const std::size_t i = static_cast<std::size_t>(it - table_t_.begin());
            const double f =
                (t - table_t_[i - 1]) / (table_t_[i] - table_t_[i - 1]);
            return table_E_[i - 1] + f * (table_E_[i] - table_E_[i - 1]);
        }
    }
    return 0.0;
}

double Envelope::eval_amp_rate(double t, const Piece& p) const {
    switch (p.kind) {
        case PieceKind::zero:
        case PieceKind::plateau:
            return 0.0;
        case PieceKind::ramp_up: {
            const double s = (t - p.t0) / Ttr_;
            return E_ * 0.5 * constants::pi * std::sin(constants::pi * s) / Ttr_;
        }
        case PieceKind::ramp_down: {
            const double s = (t - p.t0) / Ttr_;
            return -E_ * 0.5 * constants::pi * std::sin(constants::pi * s) / Ttr_;
        }
        case PieceKind::gaussian:
            return -2.0 * gauss_alpha_ * t * E_ * std::exp(-gauss_alpha_ * t * t);
        case PieceKind::table: {
            if (t <= table_t_.front() || t >= table_t_.back()) return 0.0;
            const auto it =
                std::upper_bound(table_t_.begin(), table_t_.end(), t);
            const std::size_t i = static_cast<std::size_t>(it - table_t_.begin());
            return (table_E_[i] - table_E_[i - 1]) /
                   (table_t_[i] - table_t_[i - 1]);
        }
    }
    return 0.0;
}

double Envelope::amplitude(double t, std::size_t piece) const {
    if (t < start_ || t > end_) return 0.0;
    return eval_amp(t, pieces_[piece]);
}

double Envelope::amplitude_sq(double t, std::size_t piece) const {
    const double a = amplitude(t, piece);
    return a * a;
}

double Envelope::amplitude_sq_rate(double t, std::size_t piece) const {
    if (t < start_ || t > end_) return 0.0;
    const Piece& p = pieces_[piece];
    return 2.0 * eval_amp(t, p) * eval_amp_rate(t, p);
}

} // namespace eopulse::envelope
