#include "mimic/processes.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "mimic/parallel.hpp"

namespace mimic {

void StochasticFactorSpec::validate() const {
    if (!(low > 0.0) || !(high >= low)) {
        throw std::invalid_argument("factor levels must satisfy 0 < low <= high");
    }
    if (rate_up < 0.0 || rate_down < 0.0) {
        throw std::invalid_argument("factor switching rates must be nonnegative");
    }
}

double FactorPath::value(double t) const {
    const auto it = std::upper_bound(switch_times_.begin(), switch_times_.end(), t);
    const std::size_t flips = static_cast<std::size_t>(it - switch_times_.begin());
    return (flips % 2 == 0) ? initial_ : other_;
}

FactorPath simulate_factor(const StochasticFactorSpec& spec, double horizon,
                           RandomStream& stream) {
    spec.validate();
    bool at_high = false;
    switch (spec.start) {
        case StochasticFactorSpec::Start::Low:
            at_high = false;
            break;
        case StochasticFactorSpec::Start::High:
            at_high = true;
            break;
        case StochasticFactorSpec::Start::Stationary: {
            const double total = spec.rate_up + spec.rate_down;
            const double p_high = total > 0.0 ? spec.rate_up / total : 0.5;
            at_high = stream.uniform() < p_high;
            break;
        }
    }
    const double initial = at_high ? spec.high : spec.low;
    const double other = at_high ? spec.low : spec.high;
    std::vector<double> switches;
    double t = 0.0;
    bool high_now = at_high;
    for (;;) {
        const double rate = high_now ? spec.rate_down : spec.rate_up;
        if (rate <= 0.0) {
            break;
        }
        t += stream.exponential(rate);
        if (t >= horizon) {
            break;
        }
        switches.push_back(t);
        high_now = !high_now;
    }
    return FactorPath(initial, other, std::move(switches));
}

void SimulationConfig::validate(bool needs_grid) const {
    if (particles == 0) {
        throw std::invalid_argument("particle count must be positive");
    }
    if (!(horizon > 0.0)) {
        throw std::invalid_argument("horizon must be positive");
    }
    if (needs_grid && !(dt > 0.0)) {
        throw std::invalid_argument("dt must be positive");
    }
    for (double t : snapshot_times) {
        if (t < -1e-12 || t > horizon * (1.0 + 1e-9)) {
            throw std::invalid_argument("snapshot times must lie in [0, horizon]");
        }
    }
}

Vec step_euler_jump(const Vec& state, const Vec& drift, const Mat& diffusion_factor, double dt,
                    const Vec& gaussians, const std::vector<Vec>& jumps) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("dt must be positive");
    }
    const std::size_t d = state.size();
    if (drift.size() != d) {
        throw std::invalid_argument("drift dimension mismatch");
    }
    Vec out = state;
    for (std::size_t i = 0; i < d; ++i) {
        out[i] += drift[i] * dt;
    }
    if (diffusion_factor.rows() > 0) {
        if (diffusion_factor.rows() != d || diffusion_factor.cols() != gaussians.size()) {
            throw std::invalid_argument("diffusion factor dimension mismatch");
        }
        const double sqrt_dt = std::sqrt(dt);
        for (std::size_t i = 0; i < d; ++i) {
            double inc = 0.0;
            for (std::size_t j = 0; j < gaussians.size(); ++j) {
                inc += diffusion_factor(i, j) * gaussians[j];
            }
            out[i] += sqrt_dt * inc;
        }
    }
    for (const auto& jump : jumps) {
        if (jump.size() != d) {
            throw std::invalid_argument("jump dimension mismatch");
        }
        for (std::size_t i = 0; i < d; ++i) {
            out[i] += jump[i];
        }
    }
    return out;
}

ThinningResult thinning_step(double intensity, double bound, double dt, RandomStream& stream,
                             std::vector<double>* accepted_offsets) {
    if (!(intensity >= 0.0) || !std::isfinite(intensity)) {
        throw std::runtime_error("thinning intensity must be finite and nonnegative");
    }
    if (intensity > bound) {
        throw std::runtime_error("thinning bound violation: intensity " +
                                 std::to_string(intensity) + " exceeds bound " +
                                 std::to_string(bound));
    }
    ThinningResult out;
    if (bound <= 0.0 || !(dt > 0.0)) {
        return out;
    }
    out.proposed = poisson_count(bound * dt, stream);
    const double ratio = intensity / bound;
    for (std::uint32_t p = 0; p < out.proposed; ++p) {
        if (stream.uniform() < ratio) {
            ++out.accepted;
        }
    }
    // Offsets are drawn after every accept decision so that recording events
    // cannot change the trajectory.
    if (accepted_offsets != nullptr) {
        for (std::uint32_t a = 0; a < out.accepted; ++a) {
            accepted_offsets->push_back(stream.uniform() * dt);
        }
    }
    return out;
}

TruncationConfig truncation_for_counting() {
    return TruncationConfig(0.5);
}

TruncationConfig truncation_for_hawkes(double excitation) {
    return TruncationConfig(0.5 * std::sqrt(1.0 + excitation * excitation));
}

const SnapshotFrame& SimulationResult::frame_at(double time) const {
    const double tol = 1e-9 * std::max(1.0, std::abs(time));
    for (const auto& frame : frames) {
        if (std::abs(frame.time - time) <= tol) {
            return frame;
        }
    }
    std::string available;
    for (const auto& frame : frames) {
        available += (available.empty() ? "" : ", ") + std::to_string(frame.time);
    }
    throw std::invalid_argument("no snapshot at time " + std::to_string(time) +
                                "; available: " + available);
}

std::vector<double> SimulationResult::coordinate_at(double time, std::size_t coordinate) const {
    const SnapshotFrame& frame = frame_at(time);
    std::vector<double> out(frame.states.count());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = frame.states.row(i)[coordinate];
    }
    return out;
}

CharacteristicsSlice SimulationResult::characteristics_slice(const SnapshotFrame& frame) const {
    CharacteristicsSlice slice;
    slice.time = frame.time;
    slice.states = frame.states;
    slice.beta = frame.beta;
    slice.alpha = frame.alpha;
    slice.jump_atoms = jump_atoms;
    slice.jump_rates = frame.jump_rates;
    return slice;
}

namespace {

struct GridPlan {
    std::size_t steps = 0;
    std::vector<std::size_t> snapshot_steps;
};

GridPlan plan_grid(const SimulationConfig& config) {
    config.validate(true);
    const double ratio = config.horizon / config.dt;
    const auto steps = static_cast<std::size_t>(std::llround(ratio));
    if (steps == 0 || std::abs(ratio - static_cast<double>(steps)) > 1e-6 * ratio) {
        throw std::invalid_argument("horizon must be a positive integer multiple of dt");
    }
    std::set<std::size_t> snaps{0, steps};
    for (double t : config.snapshot_times) {
        const auto k = static_cast<std::size_t>(std::llround(t / config.dt));
        snaps.insert(std::min(k, steps));
    }
    GridPlan plan;
    plan.steps = steps;
    plan.snapshot_steps.assign(snaps.begin(), snaps.end());
    return plan;
}

std::vector<double> sorted_snapshot_times(const SimulationConfig& config) {
    std::set<double> times{0.0, config.horizon};
    times.insert(config.snapshot_times.begin(), config.snapshot_times.end());
    return {times.begin(), times.end()};
}

std::vector<FactorPath> simulate_factor_paths(const StochasticFactorSpec& spec, std::size_t n,
                                              double horizon, std::uint64_t seed,
                                              unsigned workers) {
    std::vector<FactorPath> paths(n);
    parallel_for(n, workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            RandomStream stream(seed, i, 0, Substream::Factor);
            paths[i] = simulate_factor(spec, horizon, stream);
        }
    });
    return paths;
}

// Advances per-particle cursors through factor switch times; amortized O(1)
// per step because simulation time is nondecreasing.
class FactorCursor {
public:
    FactorCursor(const std::vector<FactorPath>* paths, std::size_t n)
        : paths_(paths), position_(n, 0) {}

    double level(std::size_t i, double t) {
        const auto& path = (*paths_)[i];
        const auto& switches = path.switch_times();
        std::size_t pos = position_[i];
        while (pos < switches.size() && switches[pos] <= t) {
            ++pos;
        }
        position_[i] = pos;
        // Levels alternate between the initial one and the other one.
        return path.value_after(pos);
    }

private:
    const std::vector<FactorPath>* paths_;
    std::vector<std::size_t> position_;
};

// Collects jump events from parallel chunks and merges them in chunk order,
// keeping the log independent of the worker count.
class EventCollector {
public:
    EventCollector(bool enabled, std::size_t particle_count)
        : enabled_(enabled),
          chunks_((particle_count + kParallelChunk - 1) / kParallelChunk) {}

    bool enabled() const { return enabled_; }

    std::vector<JumpEvent>& buffer(std::size_t particle) {
        return chunks_[particle / kParallelChunk];
    }

    void drain_into(std::vector<JumpEvent>& out) {
        for (auto& chunk : chunks_) {
            out.insert(out.end(), std::make_move_iterator(chunk.begin()),
                       std::make_move_iterator(chunk.end()));
            chunk.clear();
        }
    }

private:
    bool enabled_;
    std::vector<std::vector<JumpEvent>> chunks_;
};

void sort_events(std::vector<JumpEvent>& events) {
    std::sort(events.begin(), events.end(), [](const JumpEvent& a, const JumpEvent& b) {
        if (a.time != b.time) {
            return a.time < b.time;
        }
        return a.particle < b.particle;
    });
}

ConditionalEstimator<double> fit_conditional(const SnapshotSlice<double>& slice,
                                             const EstimatorConfig& config,
                                             const BinGrid& grid) {
    if (config.scheme == EstimatorConfig::Scheme::Kernel) {
        return fit_kernel_regression(slice, config.bandwidth);
    }
    return fit_binned(slice, grid);
}

// Shared LV / LSV driver. The interacting model differs from the reference
// only through the per-particle volatility multiplier eta / sqrt(E[eta^2|S]),
// refitted from the left-limit cloud every step; with a degenerate factor the
// multiplier is exactly one and the two coincide path by path.
SimulationResult run_lv_family(const LocalVolModel& model, const StochasticFactorSpec* factor,
                               const SimulationConfig& config, const std::string& label) {
    if (!model.sigma) {
        throw std::invalid_argument("local volatility function is required");
    }
    if (!(model.initial_price > 0.0)) {
        throw std::invalid_argument("initial price must be positive");
    }
    const GridPlan plan = plan_grid(config);
    const std::size_t n = config.particles;
    const unsigned workers = resolve_workers(config.workers);
    const double dt = config.dt;
    const double sqrt_dt = std::sqrt(dt);

    std::vector<FactorPath> paths;
    if (factor != nullptr) {
        factor->validate();
        paths = simulate_factor_paths(*factor, n, config.horizon, config.seed, workers);
    }
    FactorCursor cursor(&paths, factor != nullptr ? n : 0);

    std::vector<double> log_price(n, std::log(model.initial_price));
    std::vector<double> price(n, model.initial_price);
    std::vector<double> eta(factor != nullptr ? n : 0, 1.0);
    std::vector<double> vol(n, 0.0);

    const std::size_t bins =
        config.estimator.bins > 0 ? config.estimator.bins : default_bin_count(n);

    SimulationResult out;
    out.model = label;
    out.dim = 1;
    out.particles = n;
    out.dt = dt;
    out.horizon = config.horizon;
    out.seed = config.seed;
    out.truncation_radius = 1.0;
    out.fpke_budget_constant =
        8.0 * model.sigma_bound * model.sigma_bound * (1.0 + std::abs(model.rate)) *
        (1.0 + std::abs(model.rate));
    out.path_integrals.drift.assign(n, 0.0);
    out.path_integrals.diffusion.assign(n, 0.0);
    out.path_integrals.jump_mass.assign(n, 0.0);
    out.path_integrals.horizon = config.horizon;

    auto next_snapshot = plan.snapshot_steps.begin();
    for (std::size_t k = 0; k <= plan.steps; ++k) {
        const double t = static_cast<double>(k) * dt;

        parallel_for(n, workers, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                price[i] = std::exp(log_price[i]);
            }
        });

        if (factor != nullptr) {
            for (std::size_t i = 0; i < n; ++i) {
                eta[i] = cursor.level(i, t);
            }
            SnapshotSlice<double> slice;
            slice.states.dim = 1;
            slice.states.data = price;
            slice.responses.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                slice.responses[i] = eta[i] * eta[i];
            }
            const auto estimator =
                fit_conditional(slice, config.estimator, BinGrid::covering(slice.states, bins));
            parallel_for(n, workers, [&](std::size_t begin, std::size_t end) {
                for (std::size_t i = begin; i < end; ++i) {
                    const double conditional = estimator.evaluate({&price[i], 1});
                    const double multiplier = eta[i] / std::sqrt(conditional);
                    vol[i] = multiplier * model.sigma(t, price[i]);
                }
            });
        } else {
            parallel_for(n, workers, [&](std::size_t begin, std::size_t end) {
                for (std::size_t i = begin; i < end; ++i) {
                    vol[i] = 1.0 * model.sigma(t, price[i]);
                }
            });
        }

        if (next_snapshot != plan.snapshot_steps.end() && *next_snapshot == k) {
            ++next_snapshot;
            SnapshotFrame frame;
            frame.time = t;
            frame.states.dim = 1;
            frame.states.data = price;
            frame.beta.dim = 1;
            frame.beta.data.resize(n);
            frame.alpha.dim = 1;
            frame.alpha.data.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                frame.beta.data[i] = model.rate * price[i];
                const double diffusion = vol[i] * price[i];
                frame.alpha.data[i] = diffusion * diffusion;
            }
            out.frames.push_back(std::move(frame));
        }

        if (k == plan.steps) {
            break;
        }

        parallel_for(n, workers, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                const double diffusion = vol[i] * price[i];
                out.path_integrals.drift[i] += std::abs(model.rate * price[i]) * dt;
                out.path_integrals.diffusion[i] += diffusion * diffusion * dt;
                RandomStream stream(config.seed, i, k, Substream::Gaussian);
                const double z = stream.normal();
                log_price[i] += (model.rate - 0.5 * vol[i] * vol[i]) * dt + vol[i] * sqrt_dt * z;
            }
        });
    }
    return out;
}

// Shared LI / LSI driver; counting process with thinning per step. The
// interacting model rescales the local intensity by eta / E[eta|X], fitted on
// exact integer bins of the left-limit counts.
SimulationResult run_li_family(const LocalIntensityModel& model,
                               const StochasticFactorSpec* factor,
                               const SimulationConfig& config, const std::string& label) {
    if (!model.intensity) {
        throw std::invalid_argument("local intensity function is required");
    }
    if (!(model.intensity_bound > 0.0)) {
        throw std::invalid_argument("a positive intensity bound must be declared");
    }
    const GridPlan plan = plan_grid(config);
    const std::size_t n = config.particles;
    const unsigned workers = resolve_workers(config.workers);
    const double dt = config.dt;

    std::vector<FactorPath> paths;
    if (factor != nullptr) {
        factor->validate();
        paths = simulate_factor_paths(*factor, n, config.horizon, config.seed, workers);
    }
    FactorCursor cursor(&paths, factor != nullptr ? n : 0);

    std::vector<double> count(n, 0.0);
    std::vector<double> eta(factor != nullptr ? n : 0, 1.0);
    std::vector<double> lambda(n, 0.0);

    const double bound =
        factor != nullptr ? factor->ratio_bound() * model.intensity_bound : model.intensity_bound;

    SimulationResult out;
    out.model = label;
    out.dim = 1;
    out.particles = n;
    out.dt = dt;
    out.horizon = config.horizon;
    out.seed = config.seed;
    out.truncation_radius = truncation_for_counting().radius();
    out.fpke_budget_constant = 2.0 * model.intensity_bound * model.intensity_bound;
    out.jump_atoms = {Vec{1.0}};
    out.path_integrals.drift.assign(n, 0.0);
    out.path_integrals.diffusion.assign(n, 0.0);
    out.path_integrals.jump_mass.assign(n, 0.0);
    out.path_integrals.horizon = config.horizon;

    EventCollector collector(config.record_events, n);

    auto next_snapshot = plan.snapshot_steps.begin();
    for (std::size_t k = 0; k <= plan.steps; ++k) {
        const double t = static_cast<double>(k) * dt;

        if (factor != nullptr) {
            for (std::size_t i = 0; i < n; ++i) {
                eta[i] = cursor.level(i, t);
            }
            double lo = count[0];
            double hi = count[0];
            for (double c : count) {
                lo = std::min(lo, c);
                hi = std::max(hi, c);
            }
            SnapshotSlice<double> slice;
            slice.states.dim = 1;
            slice.states.data = count;
            slice.responses = eta;
            const BinGrid grid(
                {BinAxis::integers(std::lround(lo), std::lround(hi))});
            const auto estimator = fit_conditional(slice, config.estimator, grid);
            for (std::size_t i = 0; i < n; ++i) {
                const double multiplier = eta[i] / estimator.evaluate({&count[i], 1});
                lambda[i] = multiplier * model.intensity(t, count[i]);
            }
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                lambda[i] = 1.0 * model.intensity(t, count[i]);
            }
        }

        if (next_snapshot != plan.snapshot_steps.end() && *next_snapshot == k) {
            ++next_snapshot;
            SnapshotFrame frame;
            frame.time = t;
            frame.states.dim = 1;
            frame.states.data = count;
            frame.beta.dim = 1;
            frame.beta.data.assign(n, 0.0);
            frame.alpha.dim = 1;
            frame.alpha.data.assign(n, 0.0);
            frame.jump_rates = lambda;
            out.frames.push_back(std::move(frame));
        }

        if (k == plan.steps) {
            break;
        }

        parallel_for(n, workers, [&](std::size_t begin, std::size_t end) {
            std::vector<double> offsets;
            for (std::size_t i = begin; i < end; ++i) {
                out.path_integrals.jump_mass[i] += lambda[i] * dt;
                RandomStream stream(config.seed, i, k, Substream::Thinning);
                offsets.clear();
                const ThinningResult step = thinning_step(
                    lambda[i], bound, dt, stream, collector.enabled() ? &offsets : nullptr);
                count[i] += static_cast<double>(step.accepted);
                if (collector.enabled()) {
                    auto& buffer = collector.buffer(i);
                    for (double offset : offsets) {
                        buffer.push_back(JumpEvent{t + offset, static_cast<std::uint32_t>(i),
                                                   Vec{1.0}});
                    }
                }
            }
        });
        collector.drain_into(out.events);
    }
    sort_events(out.events);
    return out;
}

double hawkes_decay(double y, double base, double reversion, double elapsed) {
    return base + (y - base) * std::exp(-reversion * elapsed);
}

// Supremum over [0, horizon] of the mean intensity m(t) solving
// m' = theta lambda_0 + (c - theta) m, m(0) = lambda_0.
double hawkes_mean_intensity_sup(const HawkesModel& model, double horizon) {
    const double gap = model.excitation - model.reversion;
    if (gap == 0.0) {
        return model.base_rate * (1.0 + model.reversion * horizon);
    }
    const double equilibrium =
        model.reversion * model.base_rate / (model.reversion - model.excitation);
    const double at_horizon =
        equilibrium + (model.base_rate - equilibrium) * std::exp(gap * horizon);
    if (gap < 0.0) {
        return std::max(model.base_rate, equilibrium);
    }
    return at_horizon;
}

}  // namespace

SimulationResult simulate_reference_lv(const LocalVolModel& model,
                                       const SimulationConfig& config) {
    return run_lv_family(model, nullptr, config, "lv");
}

SimulationResult simulate_lsv_particles(const LsvModel& model, const SimulationConfig& config) {
    return run_lv_family(model.reference, &model.factor, config, "lsv");
}

SimulationResult simulate_reference_li(const LocalIntensityModel& model,
                                       const SimulationConfig& config) {
    return run_li_family(model, nullptr, config, "li");
}

SimulationResult simulate_lsi_particles(const LsiModel& model, const SimulationConfig& config) {
    return run_li_family(model.reference, &model.factor, config, "lsi");
}

SimulationResult simulate_reference_hawkes(const HawkesModel& model,
                                           const SimulationConfig& config) {
    config.validate(false);
    // excitation = 0 is allowed as the degenerate Poisson boundary case.
    if (!(model.base_rate > 0.0) || !(model.excitation >= 0.0) || !(model.reversion > 0.0)) {
        throw std::invalid_argument("Hawkes parameters must be positive");
    }
    const std::size_t n = config.particles;
    const unsigned workers = resolve_workers(config.workers);
    const double horizon = config.horizon;
    const std::vector<double> snap_times = sorted_snapshot_times(config);

    SimulationResult out;
    out.model = "hawkes";
    out.dim = 2;
    out.particles = n;
    out.dt = 0.0;
    out.horizon = horizon;
    out.seed = config.seed;
    out.truncation_radius = truncation_for_hawkes(model.excitation).radius();
    {
        const double scale =
            model.base_rate + model.excitation * hawkes_mean_intensity_sup(model, horizon);
        out.fpke_budget_constant = 2.0 * scale * scale;
    }
    out.jump_atoms = {Vec{1.0, model.excitation}};
    out.path_integrals.drift.assign(n, 0.0);
    out.path_integrals.diffusion.assign(n, 0.0);
    out.path_integrals.jump_mass.assign(n, 0.0);
    out.path_integrals.horizon = horizon;

    out.frames.resize(snap_times.size());
    for (std::size_t s = 0; s < snap_times.size(); ++s) {
        auto& frame = out.frames[s];
        frame.time = snap_times[s];
        frame.states.dim = 2;
        frame.states.data.assign(2 * n, 0.0);
        frame.beta.dim = 2;
        frame.beta.data.assign(2 * n, 0.0);
        frame.alpha.dim = 4;
        frame.alpha.data.assign(4 * n, 0.0);
        frame.jump_rates.assign(n, 0.0);
    }

    EventCollector collector(config.record_events, n);

    parallel_for(n, workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            RandomStream stream(config.seed, i, 0, Substream::Thinning);
            double current = 0.0;
            double y = model.base_rate;
            double x = 0.0;
            std::size_t snap = 0;

            auto record_until = [&](double limit) {
                while (snap < snap_times.size() && snap_times[snap] <= limit) {
                    const double ts = snap_times[snap];
                    const double ys = hawkes_decay(y, model.base_rate, model.reversion,
                                                   ts - current);
                    auto& frame = out.frames[snap];
                    frame.states.data[2 * i] = x;
                    frame.states.data[2 * i + 1] = ys;
                    frame.beta.data[2 * i + 1] = model.reversion * (model.base_rate - ys);
                    frame.jump_rates[i] = ys;
                    ++snap;
                }
            };
            auto integrate_segment = [&](double from_y, double elapsed) {
                // Exact integrals of theta (Y - lambda_0) and Y over a
                // jump-free stretch of exponential relaxation.
                const double excess = from_y - model.base_rate;
                const double relaxed = excess * (1.0 - std::exp(-model.reversion * elapsed));
                out.path_integrals.drift[i] += relaxed;
                out.path_integrals.jump_mass[i] +=
                    model.base_rate * elapsed + relaxed / model.reversion;
            };

            for (;;) {
                const double bound = y;
                const double wait = stream.exponential(bound);
                const double candidate = current + wait;
                if (candidate >= horizon) {
                    record_until(horizon);
                    integrate_segment(y, horizon - current);
                    break;
                }
                record_until(candidate);
                integrate_segment(y, wait);
                const double y_at = hawkes_decay(y, model.base_rate, model.reversion, wait);
                if (stream.uniform() < y_at / bound) {
                    x += 1.0;
                    y = y_at + model.excitation;
                    if (collector.enabled()) {
                        collector.buffer(i).push_back(JumpEvent{
                            candidate, static_cast<std::uint32_t>(i), Vec{1.0, model.excitation}});
                    }
                } else {
                    y = y_at;
                }
                current = candidate;
            }
        }
    });
    collector.drain_into(out.events);
    sort_events(out.events);
    return out;
}

SimulationResult simulate_fake_hawkes_particles(const FakeHawkesModel& model,
                                                const SimulationConfig& config) {
    const HawkesModel& ref = model.reference;
    if (!(ref.base_rate > 0.0) || !(ref.excitation >= 0.0) || !(ref.reversion > 0.0)) {
        throw std::invalid_argument("Hawkes parameters must be positive");
    }
    model.factor.validate();
    const GridPlan plan = plan_grid(config);
    const std::size_t n = config.particles;
    const unsigned workers = resolve_workers(config.workers);
    const double dt = config.dt;
    const double ratio_bound = model.factor.ratio_bound();

    auto paths = simulate_factor_paths(model.factor, n, config.horizon, config.seed, workers);
    FactorCursor cursor(&paths, n);

    std::vector<double> count(n, 0.0);
    std::vector<double> intensity_state(n, ref.base_rate);  // Y coordinate
    std::vector<double> eta(n, 1.0);
    std::vector<double> rate(n, 0.0);
    std::vector<double> multiplier(n, 1.0);

    const std::size_t bins =
        config.estimator.bins > 0 ? config.estimator.bins : default_bin_count(n);

    SimulationResult out;
    out.model = "fake_hawkes";
    out.dim = 2;
    out.particles = n;
    out.dt = dt;
    out.horizon = config.horizon;
    out.seed = config.seed;
    out.truncation_radius = truncation_for_hawkes(ref.excitation).radius();
    {
        const double scale =
            ref.base_rate + ref.excitation * hawkes_mean_intensity_sup(ref, config.horizon);
        out.fpke_budget_constant = 2.0 * scale * scale;
    }
    out.jump_atoms = {Vec{1.0, ref.excitation}};
    out.path_integrals.drift.assign(n, 0.0);
    out.path_integrals.diffusion.assign(n, 0.0);
    out.path_integrals.jump_mass.assign(n, 0.0);
    out.path_integrals.horizon = config.horizon;

    EventCollector collector(config.record_events, n);

    auto next_snapshot = plan.snapshot_steps.begin();
    for (std::size_t k = 0; k <= plan.steps; ++k) {
        const double t = static_cast<double>(k) * dt;

        for (std::size_t i = 0; i < n; ++i) {
            eta[i] = cursor.level(i, t);
        }
        {
            // Condition on the full pre-jump state (X, Y): exact integer
            // cells for the count, equal-width cells for the intensity.
            double count_lo = count[0];
            double count_hi = count[0];
            double y_lo = intensity_state[0];
            double y_hi = intensity_state[0];
            SnapshotSlice<double> slice;
            slice.states.dim = 2;
            slice.states.data.resize(2 * n);
            for (std::size_t i = 0; i < n; ++i) {
                slice.states.data[2 * i] = count[i];
                slice.states.data[2 * i + 1] = intensity_state[i];
                count_lo = std::min(count_lo, count[i]);
                count_hi = std::max(count_hi, count[i]);
                y_lo = std::min(y_lo, intensity_state[i]);
                y_hi = std::max(y_hi, intensity_state[i]);
            }
            slice.responses = eta;
            const BinGrid grid({BinAxis::integers(std::lround(count_lo), std::lround(count_hi)),
                                BinAxis::uniform(y_lo, y_hi, bins)});
            const auto estimator = fit_conditional(slice, config.estimator, grid);
            for (std::size_t i = 0; i < n; ++i) {
                const double state[2] = {count[i], intensity_state[i]};
                multiplier[i] = eta[i] / estimator.evaluate({state, 2});
                rate[i] = multiplier[i] * intensity_state[i];
            }
        }

        if (next_snapshot != plan.snapshot_steps.end() && *next_snapshot == k) {
            ++next_snapshot;
            SnapshotFrame frame;
            frame.time = t;
            frame.states.dim = 2;
            frame.states.data.resize(2 * n);
            frame.beta.dim = 2;
            frame.beta.data.assign(2 * n, 0.0);
            frame.alpha.dim = 4;
            frame.alpha.data.assign(4 * n, 0.0);
            frame.jump_rates = rate;
            for (std::size_t i = 0; i < n; ++i) {
                frame.states.data[2 * i] = count[i];
                frame.states.data[2 * i + 1] = intensity_state[i];
                frame.beta.data[2 * i + 1] =
                    ref.reversion * (ref.base_rate - intensity_state[i]);
            }
            out.frames.push_back(std::move(frame));
        }

        if (k == plan.steps) {
            break;
        }

        parallel_for(n, workers, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                out.path_integrals.drift[i] +=
                    ref.reversion * std::abs(ref.base_rate - intensity_state[i]) * dt;
                out.path_integrals.jump_mass[i] += rate[i] * dt;

                RandomStream stream(config.seed, i, k, Substream::Thinning);
                double anchor_t = t;
                double y = intensity_state[i];
                const double m = multiplier[i];
                const double step_end = t + dt;
                for (;;) {
                    const double bound = ratio_bound * y;
                    const double candidate = anchor_t + stream.exponential(bound);
                    if (candidate >= step_end) {
                        intensity_state[i] =
                            hawkes_decay(y, ref.base_rate, ref.reversion, step_end - anchor_t);
                        break;
                    }
                    const double y_at =
                        hawkes_decay(y, ref.base_rate, ref.reversion, candidate - anchor_t);
                    const double current_intensity = m * y_at;
                    if (current_intensity > bound) {
                        throw std::runtime_error("fake Hawkes thinning bound violation");
                    }
                    if (stream.uniform() < current_intensity / bound) {
                        count[i] += 1.0;
                        y = y_at + ref.excitation;
                        if (collector.enabled()) {
                            collector.buffer(i).push_back(
                                JumpEvent{candidate, static_cast<std::uint32_t>(i),
                                          Vec{1.0, ref.excitation}});
                        }
                    } else {
                        y = y_at;
                    }
                    anchor_t = candidate;
                }
            }
        });
        collector.drain_into(out.events);
    }
    sort_events(out.events);
    return out;
}

}  // namespace mimic
