#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "mimic/characteristics.hpp"
#include "mimic/linalg.hpp"
#include "mimic/summation.hpp"

namespace mimic {

/// N state vectors of fixed dimension, stored flat. Simulators refit
/// estimators every step, so slices must not allocate per particle.
struct PackedStates {
    std::size_t dim = 1;
    std::vector<double> data;

    PackedStates() = default;
    explicit PackedStates(std::size_t d) : dim(d) {}

    std::size_t count() const { return dim == 0 ? 0 : data.size() / dim; }
    std::span<const double> row(std::size_t i) const { return {data.data() + i * dim, dim}; }
    Vec vec(std::size_t i) const {
        const auto r = row(i);
        return Vec(r.begin(), r.end());
    }
    void push(std::span<const double> v) { data.insert(data.end(), v.begin(), v.end()); }
    void reserve(std::size_t n) { data.reserve(n * dim); }
};

/// One axis of a bin grid: `cells` interior cells over [lo, hi) plus an
/// underflow and an overflow slot. Integer axes get one unit cell per
/// integer, so integer-valued coordinates bin exactly.
class BinAxis {
public:
    static BinAxis uniform(double lo, double hi, std::size_t cells);
    static BinAxis integers(long lo, long hi);

    std::size_t cells() const { return cells_; }
    std::size_t slots() const { return cells_ + 2; }

    /// 0 = underflow, 1..cells = interior, cells+1 = overflow.
    std::size_t slot(double x) const;

    double center(std::size_t interior_cell) const;
    double width() const { return (hi_ - lo_) / static_cast<double>(cells_); }
    double lo() const { return lo_; }
    double hi() const { return hi_; }

private:
    double lo_ = 0.0;
    double hi_ = 1.0;
    std::size_t cells_ = 1;
};

class BinGrid {
public:
    BinGrid() = default;
    explicit BinGrid(std::vector<BinAxis> axes);

    /// Equal-width axes over the empirical per-coordinate range.
    static BinGrid covering(const PackedStates& states, std::size_t cells_per_axis);

    std::size_t dim() const { return axes_.size(); }
    std::size_t size() const { return total_slots_; }
    const BinAxis& axis(std::size_t i) const { return axes_[i]; }

    std::size_t index(std::span<const double> x) const;

private:
    std::vector<BinAxis> axes_;
    std::size_t total_slots_ = 0;
};

/// Default cell count per state dimension for an N-particle cloud.
std::size_t default_bin_count(std::size_t n);

/// Component access used by the generic fitting code. Responses live in a
/// closed convex set: scalars, vectors, or PSD matrices.
template <class R>
struct ResponseOps;

template <>
struct ResponseOps<double> {
    static constexpr bool clamp_to_range = true;
    static std::size_t dim(const double&) { return 1; }
    static double component(const double& r, std::size_t) { return r; }
    static double build(const double&, std::span<const double> c) { return c[0]; }
};

template <>
struct ResponseOps<Vec> {
    static constexpr bool clamp_to_range = true;
    static std::size_t dim(const Vec& r) { return r.size(); }
    static double component(const Vec& r, std::size_t i) { return r[i]; }
    static Vec build(const Vec&, std::span<const double> c) { return Vec(c.begin(), c.end()); }
};

template <>
struct ResponseOps<Mat> {
    static constexpr bool clamp_to_range = false;
    static std::size_t dim(const Mat& r) { return r.data().size(); }
    static double component(const Mat& r, std::size_t i) { return r.data()[i]; }
    static Mat build(const Mat& proto, std::span<const double> c) {
        Mat m(proto.rows(), proto.cols());
        for (std::size_t i = 0; i < c.size(); ++i) {
            m.data()[i] = c[i];
        }
        return m;
    }
};

/// Time-slice regression sample: states at left limits, one response per
/// state, optional nonnegative weights (empty means unit weights).
template <class R>
struct SnapshotSlice {
    PackedStates states;
    std::vector<R> responses;
    std::vector<double> weights;

    double weight(std::size_t i) const { return weights.empty() ? 1.0 : weights[i]; }

    void validate() const {
        if (states.count() == 0) {
            throw std::invalid_argument("snapshot slice is empty");
        }
        if (responses.size() != states.count()) {
            throw std::invalid_argument("snapshot slice states/responses length mismatch");
        }
        if (!weights.empty()) {
            if (weights.size() != states.count()) {
                throw std::invalid_argument("snapshot slice weights length mismatch");
            }
            double total = 0.0;
            for (double w : weights) {
                if (!(w >= 0.0)) {
                    throw std::invalid_argument("snapshot slice weights must be nonnegative");
                }
                total += w;
            }
            if (total == 0.0) {
                throw std::invalid_argument("snapshot slice weights must not all be zero");
            }
        }
    }
};

/// Fitted map x -> E[response | state = x]. Binned fits answer queries by
/// bin lookup; kernel fits by Nadaraya-Watson smoothing. Empty bins and
/// degenerate kernel denominators fall back to the global weighted mean, so
/// evaluation is total and always lands in the convex hull of the responses.
template <class R>
class ConditionalEstimator {
public:
    enum class Scheme { Binned, Kernel };

    R evaluate(std::span<const double> x) const;
    R evaluate(const Vec& x) const { return evaluate(std::span<const double>(x)); }

    Scheme scheme() const { return scheme_; }
    const BinGrid& grid() const { return grid_; }
    const R& global_mean() const { return global_mean_; }
    bool bin_nonempty(std::size_t slot) const { return nonempty_[slot] != 0; }

private:
    template <class S>
    friend ConditionalEstimator<S> fit_binned(const SnapshotSlice<S>& slice, const BinGrid& grid);
    template <class S>
    friend ConditionalEstimator<S> fit_kernel_regression(const SnapshotSlice<S>& slice,
                                                         double bandwidth);

    Scheme scheme_ = Scheme::Binned;
    BinGrid grid_;
    std::vector<R> means_;
    std::vector<char> nonempty_;
    R global_mean_{};
    // Kernel scheme keeps the sample.
    PackedStates sample_states_;
    std::vector<R> sample_responses_;
    std::vector<double> sample_weights_;
    double bandwidth_ = 0.0;
    double total_weight_ = 0.0;
    Vec global_min_;
    Vec global_max_;
};

namespace detail {

// Weighted mean of response components with Neumaier accumulation, clamped
// to the observed componentwise range where the response kind allows it.
// Clamping keeps evaluations inside the convex hull despite rounding; in
// particular a bin of identical responses evaluates to that exact value.
template <class R>
struct ComponentAccumulator {
    std::vector<NeumaierSum> components;
    NeumaierSum weight;
    Vec min_seen;
    Vec max_seen;
    bool any = false;

    void init(std::size_t dim) {
        components.assign(dim, NeumaierSum{});
        min_seen.assign(dim, std::numeric_limits<double>::infinity());
        max_seen.assign(dim, -std::numeric_limits<double>::infinity());
    }

    void add(const R& r, double w) {
        for (std::size_t i = 0; i < components.size(); ++i) {
            const double c = ResponseOps<R>::component(r, i);
            components[i].add(w * c);
            if (c < min_seen[i]) min_seen[i] = c;
            if (c > max_seen[i]) max_seen[i] = c;
        }
        weight.add(w);
        any = true;
    }

    R mean(const R& proto) const {
        const double total = weight.value();
        Vec c(components.size(), 0.0);
        for (std::size_t i = 0; i < c.size(); ++i) {
            c[i] = components[i].value() / total;
            if (ResponseOps<R>::clamp_to_range) {
                if (c[i] < min_seen[i]) c[i] = min_seen[i];
                if (c[i] > max_seen[i]) c[i] = max_seen[i];
            }
        }
        return ResponseOps<R>::build(proto, c);
    }
};

}  // namespace detail

/// Per-bin weighted means over `grid`; empty bins fall back to the global
/// weighted mean. The bin decomposition keeps the tower property exact:
/// averaging evaluate(state_i) over the slice reproduces the global response
/// mean to rounding precision.
template <class R>
ConditionalEstimator<R> fit_binned(const SnapshotSlice<R>& slice, const BinGrid& grid) {
    slice.validate();
    if (grid.dim() != slice.states.dim) {
        throw std::invalid_argument("bin grid dimension does not match state dimension");
    }
    const R& proto = slice.responses.front();
    const std::size_t rdim = ResponseOps<R>::dim(proto);
    const std::size_t n = slice.states.count();

    std::vector<detail::ComponentAccumulator<R>> bins(grid.size());
    detail::ComponentAccumulator<R> global;
    global.init(rdim);

    for (std::size_t i = 0; i < n; ++i) {
        const double w = slice.weight(i);
        if (w == 0.0) {
            continue;
        }
        const std::size_t slot = grid.index(slice.states.row(i));
        if (!bins[slot].any) {
            bins[slot].init(rdim);
        }
        bins[slot].add(slice.responses[i], w);
        global.add(slice.responses[i], w);
    }

    ConditionalEstimator<R> est;
    est.scheme_ = ConditionalEstimator<R>::Scheme::Binned;
    est.grid_ = grid;
    est.global_mean_ = global.mean(proto);
    est.means_.resize(grid.size());
    est.nonempty_.assign(grid.size(), 0);
    for (std::size_t s = 0; s < bins.size(); ++s) {
        if (bins[s].any && bins[s].weight.value() > 0.0) {
            est.means_[s] = bins[s].mean(proto);
            est.nonempty_[s] = 1;
        } else {
            est.means_[s] = est.global_mean_;
        }
    }
    return est;
}

/// Nadaraya-Watson fit with a Gaussian kernel of the given bandwidth.
/// Denominators below 1e-12 of the total weight fall back to the global mean.
template <class R>
ConditionalEstimator<R> fit_kernel_regression(const SnapshotSlice<R>& slice, double bandwidth) {
    slice.validate();
    if (!(bandwidth > 0.0)) {
        throw std::invalid_argument("kernel regression bandwidth must be positive");
    }
    const R& proto = slice.responses.front();
    detail::ComponentAccumulator<R> global;
    global.init(ResponseOps<R>::dim(proto));
    for (std::size_t i = 0; i < slice.states.count(); ++i) {
        global.add(slice.responses[i], slice.weight(i));
    }

    ConditionalEstimator<R> est;
    est.scheme_ = ConditionalEstimator<R>::Scheme::Kernel;
    est.bandwidth_ = bandwidth;
    est.sample_states_ = slice.states;
    est.sample_responses_ = slice.responses;
    est.sample_weights_ = slice.weights;
    est.global_mean_ = global.mean(proto);
    est.total_weight_ = global.weight.value();
    est.global_min_ = global.min_seen;
    est.global_max_ = global.max_seen;
    return est;
}

template <class R>
R ConditionalEstimator<R>::evaluate(std::span<const double> x) const {
    if (scheme_ == Scheme::Binned) {
        return means_[grid_.index(x)];
    }
    const R& proto = global_mean_;
    const std::size_t rdim = ResponseOps<R>::dim(proto);
    std::vector<NeumaierSum> numer(rdim);
    NeumaierSum denom;
    const std::size_t n = sample_states_.count();
    for (std::size_t i = 0; i < n; ++i) {
        const auto s = sample_states_.row(i);
        double sq = 0.0;
        for (std::size_t k = 0; k < s.size(); ++k) {
            const double dx = (x[k] - s[k]) / bandwidth_;
            sq += dx * dx;
        }
        const double w = (sample_weights_.empty() ? 1.0 : sample_weights_[i]) *
                         std::exp(-0.5 * sq);
        for (std::size_t k = 0; k < rdim; ++k) {
            numer[k].add(w * ResponseOps<R>::component(sample_responses_[i], k));
        }
        denom.add(w);
    }
    const double d = denom.value();
    if (!(d > 1e-12 * total_weight_)) {
        return global_mean_;
    }
    Vec c(rdim, 0.0);
    for (std::size_t k = 0; k < rdim; ++k) {
        c[k] = numer[k].value() / d;
        if (ResponseOps<R>::clamp_to_range) {
            if (c[k] < global_min_[k]) c[k] = global_min_[k];
            if (c[k] > global_max_[k]) c[k] = global_max_[k];
        }
    }
    return ResponseOps<R>::build(proto, c);
}

/// One observed jump: when, which particle, and the jump vector.
struct JumpEvent {
    double time = 0.0;
    std::uint32_t particle = 0;
    Vec size;
};

/// State-conditional jump kernel estimated by event counting: per bin,
/// rate = events / (particles * window), sizes from the empirical histogram
/// of observed jumps. Bins with no particles fall back to the global kernel.
class ConditionalJumpKernel {
public:
    JumpKernelSpec evaluate(std::span<const double> x) const;
    JumpKernelSpec evaluate(const Vec& x) const { return evaluate(std::span<const double>(x)); }

    const BinGrid& grid() const { return grid_; }

private:
    friend ConditionalJumpKernel fit_jump_kernel(const PackedStates& pre_jump_states,
                                                 const std::vector<JumpEvent>& events,
                                                 double window, const BinGrid& grid);

    BinGrid grid_;
    std::vector<JumpKernelSpec> bin_kernels_;
    std::vector<char> has_particles_;
    JumpKernelSpec global_;
};

/// Events are attributed to the bin of the emitting particle's pre-jump
/// state. The window is the observation span the counts are scaled by.
ConditionalJumpKernel fit_jump_kernel(const PackedStates& pre_jump_states,
                                      const std::vector<JumpEvent>& events, double window,
                                      const BinGrid& grid);

/// One time slice of per-particle differential characteristics, packed flat.
/// All jump kernels share one atom set; particles differ only in the rates,
/// which is exactly the shape the interacting-particle models produce.
struct CharacteristicsSlice {
    double time = 0.0;
    PackedStates states;           // X_{t-}, N x d
    PackedStates beta;             // N x d
    PackedStates alpha;            // N x d^2, row-major
    std::vector<Vec> jump_atoms;   // shared atoms, length J
    std::vector<double> jump_rates;  // N x J, row-major

    std::size_t atom_count() const { return jump_atoms.size(); }
};

/// Binned projection of a characteristics slice: tables of b, a (PSD
/// clipped) and per-atom jump rates per bin, with global fallbacks.
class ProjectedSlice {
public:
    double time() const { return time_; }
    const BinGrid& grid() const { return grid_; }
    const std::vector<Vec>& jump_atoms() const { return atoms_; }

    Vec drift_at(std::span<const double> x) const;
    Mat diffusion_at(std::span<const double> x) const;
    JumpKernelSpec jumps_at(std::span<const double> x) const;

    // Allocation-free accessors for hot loops.
    std::span<const double> drift_span_at(std::span<const double> x) const;
    const Mat& diffusion_ref_at(std::span<const double> x) const;
    std::span<const double> rates_at(std::span<const double> x) const;

private:
    friend ProjectedSlice project_characteristics(const CharacteristicsSlice& slice,
                                                  const BinGrid& grid);

    double time_ = 0.0;
    std::size_t dim_ = 1;
    BinGrid grid_;
    std::vector<Vec> atoms_;
    PackedStates b_table_;             // slots x d
    std::vector<Mat> a_table_;         // slots
    std::vector<double> rate_table_;   // slots x J
};

/// Empirical analogue of the conditional-expectation projection at a fixed
/// time: b and a are per-bin means of the per-particle beta and alpha (the a
/// means clipped to PSD), and the jump kernel per bin is the mean of the
/// per-particle compensator rates on the shared atoms.
ProjectedSlice project_characteristics(const CharacteristicsSlice& slice, const BinGrid& grid);

/// Wraps a time-indexed family of projected slices as coefficient functions
/// (t, x) -> b, a, k; queries use the latest slice at or before t.
ProjectedCharacteristics as_projected_characteristics(
    std::shared_ptr<const std::vector<ProjectedSlice>> slices);

}  // namespace mimic
