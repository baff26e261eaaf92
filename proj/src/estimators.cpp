#include "mimic/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace mimic {

BinAxis BinAxis::uniform(double lo, double hi, std::size_t cells) {
    if (!(std::isfinite(lo) && std::isfinite(hi))) {
        throw std::invalid_argument("bin axis range must be finite");
    }
    if (cells == 0) {
        throw std::invalid_argument("bin axis needs at least one cell");
    }
    BinAxis axis;
    if (hi <= lo) {
        // Degenerate data range: give the single value a unit-width home.
        lo -= 0.5;
        hi = lo + 1.0;
        cells = 1;
    }
    axis.lo_ = lo;
    axis.hi_ = hi;
    axis.cells_ = cells;
    return axis;
}

BinAxis BinAxis::integers(long lo, long hi) {
    if (hi < lo) {
        std::swap(lo, hi);
    }
    return uniform(static_cast<double>(lo) - 0.5, static_cast<double>(hi) + 0.5,
                   static_cast<std::size_t>(hi - lo) + 1);
}

std::size_t BinAxis::slot(double x) const {
    if (x < lo_) {
        return 0;
    }
    if (x >= hi_) {
        return cells_ + 1;
    }
    const double scaled = (x - lo_) / (hi_ - lo_) * static_cast<double>(cells_);
    std::size_t cell = static_cast<std::size_t>(scaled);
    if (cell >= cells_) {
        cell = cells_ - 1;
    }
    return cell + 1;
}

double BinAxis::center(std::size_t interior_cell) const {
    return lo_ + (static_cast<double>(interior_cell) + 0.5) * width();
}

BinGrid::BinGrid(std::vector<BinAxis> axes) : axes_(std::move(axes)) {
    total_slots_ = 1;
    for (const auto& axis : axes_) {
        total_slots_ *= axis.slots();
    }
}

BinGrid BinGrid::covering(const PackedStates& states, std::size_t cells_per_axis) {
    if (states.count() == 0) {
        throw std::invalid_argument("cannot build a bin grid over an empty state set");
    }
    std::vector<BinAxis> axes;
    for (std::size_t k = 0; k < states.dim; ++k) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t i = 0; i < states.count(); ++i) {
            const double x = states.row(i)[k];
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        axes.push_back(BinAxis::uniform(lo, hi, cells_per_axis));
    }
    return BinGrid(std::move(axes));
}

std::size_t BinGrid::index(std::span<const double> x) const {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < axes_.size(); ++k) {
        idx = idx * axes_[k].slots() + axes_[k].slot(x[k]);
    }
    return idx;
}

std::size_t default_bin_count(std::size_t n) {
    return static_cast<std::size_t>(std::ceil(std::cbrt(static_cast<double>(n))));
}

JumpKernelSpec ConditionalJumpKernel::evaluate(std::span<const double> x) const {
    const std::size_t slot = grid_.index(x);
    if (has_particles_[slot] == 0) {
        return global_;
    }
    return bin_kernels_[slot];
}

ConditionalJumpKernel fit_jump_kernel(const PackedStates& pre_jump_states,
                                      const std::vector<JumpEvent>& events, double window,
                                      const BinGrid& grid) {
    if (pre_jump_states.count() == 0) {
        throw std::invalid_argument("jump kernel fit requires a nonempty state slice");
    }
    if (!(window > 0.0)) {
        throw std::invalid_argument("jump kernel fit window must be positive");
    }
    const std::size_t n = pre_jump_states.count();

    std::vector<std::size_t> particles_per_bin(grid.size(), 0);
    std::vector<std::size_t> bin_of_particle(n);
    for (std::size_t i = 0; i < n; ++i) {
        bin_of_particle[i] = grid.index(pre_jump_states.row(i));
        ++particles_per_bin[bin_of_particle[i]];
    }

    std::vector<std::map<Vec, std::size_t>> size_counts(grid.size());
    std::map<Vec, std::size_t> global_counts;
    for (const auto& event : events) {
        if (event.particle >= n) {
            throw std::invalid_argument("jump event refers to a particle outside the slice");
        }
        if (norm(event.size) == 0.0) {
            throw std::invalid_argument("observed jump size must be nonzero");
        }
        ++size_counts[bin_of_particle[event.particle]][event.size];
        ++global_counts[event.size];
    }

    ConditionalJumpKernel out;
    out.grid_ = grid;
    out.bin_kernels_.resize(grid.size());
    out.has_particles_.assign(grid.size(), 0);
    for (std::size_t s = 0; s < grid.size(); ++s) {
        if (particles_per_bin[s] == 0) {
            continue;
        }
        out.has_particles_[s] = 1;
        const double denom = static_cast<double>(particles_per_bin[s]) * window;
        for (const auto& [size, count] : size_counts[s]) {
            out.bin_kernels_[s].add_atom(static_cast<double>(count) / denom, size);
        }
    }
    const double global_denom = static_cast<double>(n) * window;
    for (const auto& [size, count] : global_counts) {
        out.global_.add_atom(static_cast<double>(count) / global_denom, size);
    }
    return out;
}

Vec ProjectedSlice::drift_at(std::span<const double> x) const {
    return b_table_.vec(grid_.index(x));
}

Mat ProjectedSlice::diffusion_at(std::span<const double> x) const {
    return a_table_[grid_.index(x)];
}

std::span<const double> ProjectedSlice::drift_span_at(std::span<const double> x) const {
    return b_table_.row(grid_.index(x));
}

const Mat& ProjectedSlice::diffusion_ref_at(std::span<const double> x) const {
    return a_table_[grid_.index(x)];
}

std::span<const double> ProjectedSlice::rates_at(std::span<const double> x) const {
    const std::size_t j = atoms_.size();
    return {rate_table_.data() + grid_.index(x) * j, j};
}

JumpKernelSpec ProjectedSlice::jumps_at(std::span<const double> x) const {
    JumpKernelSpec kernel;
    if (atoms_.empty()) {
        return kernel;
    }
    const auto rates = rates_at(x);
    for (std::size_t j = 0; j < atoms_.size(); ++j) {
        if (rates[j] > 0.0) {
            kernel.add_atom(rates[j], atoms_[j]);
        }
    }
    return kernel;
}

ProjectedSlice project_characteristics(const CharacteristicsSlice& slice, const BinGrid& grid) {
    const std::size_t n = slice.states.count();
    if (n == 0) {
        throw std::invalid_argument("characteristics slice is empty");
    }
    const std::size_t d = slice.states.dim;
    const std::size_t j = slice.atom_count();
    if (slice.beta.count() != n || slice.alpha.count() != n) {
        throw std::invalid_argument("characteristics slice component lengths mismatch");
    }
    if (slice.jump_rates.size() != n * j) {
        throw std::invalid_argument("characteristics slice jump rates length mismatch");
    }
    if (grid.dim() != d) {
        throw std::invalid_argument("bin grid dimension does not match state dimension");
    }

    const std::size_t comps = d + d * d + j;
    const std::size_t slots = grid.size();
    std::vector<NeumaierSum> sums(slots * comps);
    std::vector<double> lo(slots * comps, std::numeric_limits<double>::infinity());
    std::vector<double> hi(slots * comps, -std::numeric_limits<double>::infinity());
    std::vector<std::size_t> counts(slots, 0);
    std::vector<NeumaierSum> global_sum(comps);
    std::vector<double> global_lo(comps, std::numeric_limits<double>::infinity());
    std::vector<double> global_hi(comps, -std::numeric_limits<double>::infinity());

    auto accumulate = [&](std::size_t base, std::size_t offset, double value,
                          NeumaierSum* sum_block, double* lo_block, double* hi_block) {
        const std::size_t c = base + offset;
        sum_block[c].add(value);
        if (value < lo_block[c]) lo_block[c] = value;
        if (value > hi_block[c]) hi_block[c] = value;
    };

    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t slot = grid.index(slice.states.row(i));
        ++counts[slot];
        const std::size_t base = slot * comps;
        const auto beta_row = slice.beta.row(i);
        const auto alpha_row = slice.alpha.row(i);
        for (std::size_t k = 0; k < d; ++k) {
            accumulate(base, k, beta_row[k], sums.data(), lo.data(), hi.data());
            accumulate(0, k, beta_row[k], global_sum.data(), global_lo.data(),
                       global_hi.data());
        }
        for (std::size_t k = 0; k < d * d; ++k) {
            accumulate(base, d + k, alpha_row[k], sums.data(), lo.data(), hi.data());
            accumulate(0, d + k, alpha_row[k], global_sum.data(), global_lo.data(),
                       global_hi.data());
        }
        for (std::size_t k = 0; k < j; ++k) {
            const double rate = slice.jump_rates[i * j + k];
            accumulate(base, d + d * d + k, rate, sums.data(), lo.data(), hi.data());
            accumulate(0, d + d * d + k, rate, global_sum.data(), global_lo.data(),
                       global_hi.data());
        }
    }

    const double total = static_cast<double>(n);
    auto finish = [&](const NeumaierSum* sum_block, const double* lo_block,
                      const double* hi_block, double count, std::size_t offset) {
        double v = sum_block[offset].value() / count;
        if (v < lo_block[offset]) v = lo_block[offset];
        if (v > hi_block[offset]) v = hi_block[offset];
        return v;
    };

    ProjectedSlice out;
    out.time_ = slice.time;
    out.dim_ = d;
    out.grid_ = grid;
    out.atoms_ = slice.jump_atoms;
    out.b_table_ = PackedStates(d);
    out.b_table_.data.resize(slots * d, 0.0);
    out.a_table_.resize(slots);
    out.rate_table_.assign(slots * j, 0.0);

    // Global fallbacks first, reused for empty bins.
    Vec b_global(d, 0.0);
    Mat a_global(d, d);
    Vec rate_global(j, 0.0);
    for (std::size_t k = 0; k < d; ++k) {
        b_global[k] = finish(global_sum.data(), global_lo.data(), global_hi.data(), total, k);
    }
    for (std::size_t k = 0; k < d * d; ++k) {
        a_global.data()[k] =
            finish(global_sum.data(), global_lo.data(), global_hi.data(), total, d + k);
    }
    a_global = clip_to_psd(a_global, 1e-12);
    for (std::size_t k = 0; k < j; ++k) {
        rate_global[k] = finish(global_sum.data(), global_lo.data(), global_hi.data(), total,
                                d + d * d + k);
    }

    for (std::size_t s = 0; s < slots; ++s) {
        double* b_row = out.b_table_.data.data() + s * d;
        double* rate_row = out.rate_table_.data() + s * j;
        if (counts[s] == 0) {
            std::copy(b_global.begin(), b_global.end(), b_row);
            out.a_table_[s] = a_global;
            std::copy(rate_global.begin(), rate_global.end(), rate_row);
            continue;
        }
        const std::size_t base = s * comps;
        const double count = static_cast<double>(counts[s]);
        for (std::size_t k = 0; k < d; ++k) {
            b_row[k] = finish(sums.data(), lo.data(), hi.data(), count, base + k);
        }
        Mat a(d, d);
        for (std::size_t k = 0; k < d * d; ++k) {
            a.data()[k] = finish(sums.data(), lo.data(), hi.data(), count, base + d + k);
        }
        out.a_table_[s] = clip_to_psd(a, 1e-12);
        for (std::size_t k = 0; k < j; ++k) {
            rate_row[k] = finish(sums.data(), lo.data(), hi.data(), count, base + d + d * d + k);
        }
    }
    return out;
}

ProjectedCharacteristics as_projected_characteristics(
    std::shared_ptr<const std::vector<ProjectedSlice>> slices) {
    if (!slices || slices->empty()) {
        throw std::invalid_argument("projected characteristics need at least one slice");
    }
    auto locate = [slices](double t) -> const ProjectedSlice& {
        const auto& all = *slices;
        std::size_t best = 0;
        for (std::size_t i = 0; i < all.size(); ++i) {
            if (all[i].time() <= t + 1e-12) {
                best = i;
            } else {
                break;
            }
        }
        return all[best];
    };
    ProjectedCharacteristics pc;
    pc.drift = [locate](double t, const Vec& x) { return locate(t).drift_at(x); };
    pc.diffusion = [locate](double t, const Vec& x) { return locate(t).diffusion_at(x); };
    pc.jumps = [locate](double t, const Vec& x) { return locate(t).jumps_at(x); };
    return pc;
}

}  // namespace mimic
