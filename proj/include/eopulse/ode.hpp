#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace eopulse::ode {

struct Options {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();
    double first_step = 0.0; // 0 = choose automatically
    std::size_t max_steps = 50'000'000;
};

using Rhs = std::function<void(double t, std::span<const double> y,
                               std::span<double> dydt)>;

/// Accepted-step record: state and derivative at both ends of [t0, t1].
/// Dense output interpolates these with a cubic Hermite polynomial.
struct StepNode {
    double t;
    std::vector<double> y;
    std::vector<double> f;
};

class DenseSolution {
  public:
    DenseSolution() = default;
    DenseSolution(std::size_t dim, std::vector<StepNode> nodes);

    double t_begin() const { return nodes_.front().t; }
    double t_end() const { return nodes_.back().t; }
    std::size_t dimension() const { return dim_; }
    std::size_t step_count() const { return nodes_.size() - 1; }

    /// Interpolated state at t (clamped to [t_begin, t_end]).
    void evaluate(double t, std::span<double> y_out) const;

    std::span<const double> final_state() const { return nodes_.back().y; }
    const std::vector<StepNode>& nodes() const { return nodes_; }

  private:
    std::size_t locate(double t) const;

    std::size_t dim_ = 0;
    std::vector<StepNode> nodes_;
};

/// Explicit Dormand-Prince 5(4) with PI step-size control. The per-step error
/// estimate is held below abs_tol + rel_tol*|y| componentwise (RMS norm).
DenseSolution integrate(const Rhs& rhs, std::span<const double> y0, double t0,
                        double t1, const Options& opts);

/// Several DenseSolutions over adjacent windows act as one trajectory.
class PiecewiseSolution {
  public:
    void append(DenseSolution s);
    bool empty() const { return parts_.empty(); }
    double t_begin() const { return parts_.front().t_begin(); }
    double t_end() const { return parts_.back().t_end(); }
    std::size_t dimension() const { return parts_.front().dimension(); }
    std::size_t step_count() const;
    void evaluate(double t, std::span<double> y_out) const;
    std::span<const double> final_state() const { return parts_.back().final_state(); }

  private:
    std::vector<DenseSolution> parts_;
};

} // namespace eopulse::ode
