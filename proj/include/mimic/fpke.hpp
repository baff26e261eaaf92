#pragma once

#include <cstddef>
#include <vector>

#include "mimic/characteristics.hpp"
#include "mimic/estimators.hpp"
#include "mimic/processes.hpp"

namespace mimic {

/// Smooth radial bumps centered on a grid covering [box_lo, box_hi], each
/// with the given support radius. Requires count >= 3.
std::vector<TestFunction> test_function_suite(std::size_t dim, const Vec& box_lo,
                                              const Vec& box_hi, double radius,
                                              std::size_t count);

/// Bin grid over a state cloud that bins integer-valued coordinates exactly
/// and real-valued ones into equal-width cells.
BinGrid grid_for_states(const PackedStates& states, std::size_t cells_per_axis);

/// Projected coefficient tables fitted at every snapshot frame of a run.
std::vector<ProjectedSlice> project_run(const SimulationResult& run, std::size_t bins = 0);

/// One grid time of the weak-identity balance mu_t(f) - mu_0(f) against the
/// left-endpoint quadrature of mu_s(L_s f). The rhs is computed twice: from
/// the projected coefficients (primary) and from the per-particle
/// characteristics before projection (cross-check); the two must agree
/// within Monte Carlo error by the tower property.
struct ResidualPoint {
    double time = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;  // lhs - rhs, exactly
    double se_lhs = 0.0;
    double se_rhs = 0.0;
    double se_residual = 0.0;
    double rhs_preprojection = 0.0;
    double residual_preprojection = 0.0;
    double se_residual_preprojection = 0.0;
    double modes_gap = 0.0;  // rhs - rhs_preprojection
    double se_modes_gap = 0.0;
};

struct ResidualReport {
    std::size_t function_index = 0;
    std::vector<ResidualPoint> points;
    double quadrature_spacing = 0.0;  // largest grid gap

    double max_abs_residual() const;
    double max_abs_residual_preprojection() const;
    /// |residual(t)| <= 3 se_residual(t) + budget_constant * spacing at all t.
    bool within_budget(double budget_constant) const;
};

/// Evaluates the weak-identity residual of one test function along a run.
/// Snapshot frames and projected slices must share the same time grid.
ResidualReport fpke_residual(const SimulationResult& run,
                             const std::vector<ProjectedSlice>& projected,
                             const TestFunction& f, const TruncationConfig& trunc);

}  // namespace mimic
