#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mimic/characteristics.hpp"
#include "mimic/estimators.hpp"
#include "mimic/rng.hpp"

namespace mimic {

/// Two-state continuous-time chain taking values in {low, high}, switching
/// at the given rates. Bounded away from zero, which the conditional
/// normalization in the interacting models relies on.
struct StochasticFactorSpec {
    enum class Start { Low, High, Stationary };

    double low = 1.0;
    double high = 1.0;
    double rate_up = 0.0;    // low -> high
    double rate_down = 0.0;  // high -> low
    Start start = Start::Stationary;

    void validate() const;
    bool degenerate() const { return low == high; }
    double ratio_bound() const { return high / low; }
};

/// Right-continuous piecewise-constant factor trajectory.
class FactorPath {
public:
    FactorPath() = default;
    FactorPath(double initial_level, double other_level, std::vector<double> switch_times)
        : initial_(initial_level), other_(other_level), switch_times_(std::move(switch_times)) {}

    double value(double t) const;
    /// Level in force after the given number of switches.
    double value_after(std::size_t flips) const { return flips % 2 == 0 ? initial_ : other_; }
    const std::vector<double>& switch_times() const { return switch_times_; }

private:
    double initial_ = 1.0;
    double other_ = 1.0;
    std::vector<double> switch_times_;
};

FactorPath simulate_factor(const StochasticFactorSpec& spec, double horizon,
                           RandomStream& stream);

struct LocalVolModel {
    double rate = 0.0;                              // risk-free drift
    std::function<double(double, double)> sigma;    // sigma(t, s)
    double sigma_bound = 0.0;
    double initial_price = 1.0;
};

struct LsvModel {
    LocalVolModel reference;
    StochasticFactorSpec factor;
};

struct LocalIntensityModel {
    std::function<double(double, double)> intensity;  // lambda(t, x)
    double intensity_bound = 0.0;
};

struct LsiModel {
    LocalIntensityModel reference;
    StochasticFactorSpec factor;
};

struct HawkesModel {
    double base_rate = 1.0;   // lambda_0
    double excitation = 1.0;  // c, intensity kick per event
    double reversion = 2.0;   // theta, decay rate toward lambda_0
};

struct FakeHawkesModel {
    HawkesModel reference;
    StochasticFactorSpec factor;
};

struct EstimatorConfig {
    enum class Scheme { Binned, Kernel };
    Scheme scheme = Scheme::Binned;
    std::size_t bins = 0;      // 0 = ceil(N^(1/3)) per dimension
    double bandwidth = 0.0;    // kernel scheme only
};

struct SimulationConfig {
    std::size_t particles = 0;
    double dt = 0.0;
    double horizon = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> snapshot_times;  // augmented with 0 and horizon, snapped to grid
    EstimatorConfig estimator;
    unsigned workers = 0;
    bool record_events = true;

    void validate(bool needs_grid) const;
};

/// Marginal snapshot at one grid time: left-limit states plus the
/// per-particle differential characteristics in force on the next step.
struct SnapshotFrame {
    double time = 0.0;
    PackedStates states;
    PackedStates beta;
    PackedStates alpha;
    std::vector<double> jump_rates;  // N x (shared atom count)
};

struct SimulationResult {
    std::string model;
    std::size_t dim = 1;
    std::size_t particles = 0;
    double dt = 0.0;
    double horizon = 0.0;
    std::uint64_t seed = 0;
    double truncation_radius = 1.0;
    /// Budget constant C for the weak-identity residual check
    /// |residual| <= 3 SE + C * grid spacing, pinned per model family.
    double fpke_budget_constant = 1.0;
    std::vector<Vec> jump_atoms;
    std::vector<SnapshotFrame> frames;
    std::vector<JumpEvent> events;
    PathIntegralLog path_integrals;

    const SnapshotFrame& frame_at(double time) const;
    std::vector<double> coordinate_at(double time, std::size_t coordinate) const;
    CharacteristicsSlice characteristics_slice(const SnapshotFrame& frame) const;
};

/// One Euler step with jumps:
///   state + drift dt + factor sqrt(dt) gaussians + sum of jump sizes.
Vec step_euler_jump(const Vec& state, const Vec& drift, const Mat& diffusion_factor, double dt,
                    const Vec& gaussians, const std::vector<Vec>& jumps);

struct ThinningResult {
    std::uint32_t proposed = 0;
    std::uint32_t accepted = 0;
};

/// Thinning over one step of length dt: proposes Poisson(bound * dt) events,
/// accepts each with probability intensity / bound. Optionally reports the
/// accepted event offsets inside the step; offset draws happen after all
/// accept decisions, so recording does not perturb trajectories.
/// Throws if intensity exceeds the bound.
ThinningResult thinning_step(double intensity, double bound, double dt, RandomStream& stream,
                             std::vector<double>* accepted_offsets = nullptr);

// Reference simulators: Markovian dynamics, independent particles.
SimulationResult simulate_reference_lv(const LocalVolModel& model, const SimulationConfig& config);
SimulationResult simulate_reference_li(const LocalIntensityModel& model,
                                       const SimulationConfig& config);
/// Exact event-driven simulation; config.dt is ignored.
SimulationResult simulate_reference_hawkes(const HawkesModel& model,
                                           const SimulationConfig& config);

// Interacting simulators: coefficients renormalized each step by conditional
// expectations refitted from the left-limit particle cloud.
SimulationResult simulate_lsv_particles(const LsvModel& model, const SimulationConfig& config);
SimulationResult simulate_lsi_particles(const LsiModel& model, const SimulationConfig& config);
SimulationResult simulate_fake_hawkes_particles(const FakeHawkesModel& model,
                                                const SimulationConfig& config);

/// Truncation radii the models are simulated under: below the jump size for
/// the counting models so their single atom is never compensated.
TruncationConfig truncation_for_counting();
TruncationConfig truncation_for_hawkes(double excitation);

}  // namespace mimic
