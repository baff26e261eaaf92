#include "mimic/fpke.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mimic/parallel.hpp"
#include "mimic/summation.hpp"

namespace mimic {

std::vector<TestFunction> test_function_suite(std::size_t dim, const Vec& box_lo,
                                              const Vec& box_hi, double radius,
                                              std::size_t count) {
    if (!(radius > 0.0)) {
        throw std::invalid_argument("test function radius must be positive");
    }
    if (count < 3) {
        throw std::invalid_argument("test function suite needs at least 3 functions");
    }
    if (box_lo.size() != dim || box_hi.size() != dim) {
        throw std::invalid_argument("test function suite box dimension mismatch");
    }
    std::vector<TestFunction> suite;
    suite.reserve(count);
    if (dim == 1) {
        const double width = box_hi[0] - box_lo[0];
        for (std::size_t k = 0; k < count; ++k) {
            const double center =
                box_lo[0] + (static_cast<double>(k) + 0.5) * width / static_cast<double>(count);
            suite.push_back(TestFunction::radial_bump(Vec{center}, radius));
        }
        return suite;
    }
    // Near-square grid of centers, row-major, truncated to `count`.
    const auto rows = static_cast<std::size_t>(
        std::ceil(std::sqrt(static_cast<double>(count))));
    const std::size_t cols = (count + rows - 1) / rows;
    for (std::size_t r = 0; r < rows && suite.size() < count; ++r) {
        for (std::size_t c = 0; c < cols && suite.size() < count; ++c) {
            Vec center(dim, 0.0);
            center[0] = box_lo[0] +
                        (static_cast<double>(c) + 0.5) * (box_hi[0] - box_lo[0]) /
                            static_cast<double>(cols);
            center[1] = box_lo[1] +
                        (static_cast<double>(r) + 0.5) * (box_hi[1] - box_lo[1]) /
                            static_cast<double>(rows);
            for (std::size_t k = 2; k < dim; ++k) {
                center[k] = 0.5 * (box_lo[k] + box_hi[k]);
            }
            suite.push_back(TestFunction::radial_bump(std::move(center), radius));
        }
    }
    return suite;
}

BinGrid grid_for_states(const PackedStates& states, std::size_t cells_per_axis) {
    if (states.count() == 0) {
        throw std::invalid_argument("cannot build a bin grid over an empty state set");
    }
    std::vector<BinAxis> axes;
    for (std::size_t k = 0; k < states.dim; ++k) {
        double lo = states.row(0)[k];
        double hi = lo;
        bool integral = true;
        for (std::size_t i = 0; i < states.count(); ++i) {
            const double x = states.row(i)[k];
            lo = std::min(lo, x);
            hi = std::max(hi, x);
            if (integral && x != std::nearbyint(x)) {
                integral = false;
            }
        }
        if (integral && std::abs(lo) < 1e15 && std::abs(hi) < 1e15) {
            axes.push_back(BinAxis::integers(std::lround(lo), std::lround(hi)));
        } else {
            axes.push_back(BinAxis::uniform(lo, hi, cells_per_axis));
        }
    }
    return BinGrid(std::move(axes));
}

std::vector<ProjectedSlice> project_run(const SimulationResult& run, std::size_t bins) {
    if (bins == 0) {
        bins = default_bin_count(run.particles);
    }
    std::vector<ProjectedSlice> slices;
    slices.reserve(run.frames.size());
    for (const auto& frame : run.frames) {
        const CharacteristicsSlice slice = run.characteristics_slice(frame);
        slices.push_back(project_characteristics(slice, grid_for_states(frame.states, bins)));
    }
    return slices;
}

double ResidualReport::max_abs_residual() const {
    double m = 0.0;
    for (const auto& p : points) {
        m = std::max(m, std::abs(p.residual));
    }
    return m;
}

double ResidualReport::max_abs_residual_preprojection() const {
    double m = 0.0;
    for (const auto& p : points) {
        m = std::max(m, std::abs(p.residual_preprojection));
    }
    return m;
}

bool ResidualReport::within_budget(double budget_constant) const {
    for (const auto& p : points) {
        if (std::abs(p.residual) > 3.0 * p.se_residual + budget_constant * quadrature_spacing) {
            return false;
        }
    }
    return true;
}

namespace {

// Sufficient statistics for (lhs, rhs, rhs_pre) at one grid time: sums of
// the three values, their squares, and pairwise products.
struct MomentBlock {
    NeumaierSum a, b, c;
    NeumaierSum aa, bb, cc;
    NeumaierSum ab, ac, bc;

    void add(double va, double vb, double vc) {
        a.add(va);
        b.add(vb);
        c.add(vc);
        aa.add(va * va);
        bb.add(vb * vb);
        cc.add(vc * vc);
        ab.add(va * vb);
        ac.add(va * vc);
        bc.add(vb * vc);
    }

    void merge(const MomentBlock& other) {
        a.add(other.a.value());
        b.add(other.b.value());
        c.add(other.c.value());
        aa.add(other.aa.value());
        bb.add(other.bb.value());
        cc.add(other.cc.value());
        ab.add(other.ab.value());
        ac.add(other.ac.value());
        bc.add(other.bc.value());
    }
};

double se_of_difference(double exx, double ex, double eyy, double ey, double exy, double n) {
    // Var(x - y) via second moments; clamp away rounding negatives.
    const double variance = (exx - ex * ex) + (eyy - ey * ey) - 2.0 * (exy - ex * ey);
    return variance > 0.0 ? std::sqrt(variance / n) : 0.0;
}

double se_of(double exx, double ex, double n) {
    const double variance = exx - ex * ex;
    return variance > 0.0 ? std::sqrt(variance / n) : 0.0;
}

}  // namespace

ResidualReport fpke_residual(const SimulationResult& run,
                             const std::vector<ProjectedSlice>& projected,
                             const TestFunction& f, const TruncationConfig& trunc) {
    const std::size_t frames = run.frames.size();
    if (frames == 0) {
        throw std::invalid_argument("run has no snapshot frames");
    }
    if (projected.size() != frames) {
        throw std::invalid_argument(
            "grid mismatch: " + std::to_string(projected.size()) + " projected slices vs " +
            std::to_string(frames) + " snapshot frames");
    }
    for (std::size_t j = 0; j < frames; ++j) {
        if (std::abs(projected[j].time() - run.frames[j].time) >
            1e-9 * std::max(1.0, std::abs(run.frames[j].time))) {
            throw std::invalid_argument("grid mismatch at index " + std::to_string(j) +
                                        ": slice time " + std::to_string(projected[j].time()) +
                                        " vs frame time " + std::to_string(run.frames[j].time));
        }
    }
    const std::size_t n = run.particles;
    const std::size_t d = run.dim;
    const std::size_t atom_count = run.jump_atoms.size();
    const double r = trunc.radius();

    std::vector<char> atom_kept(atom_count);
    for (std::size_t a = 0; a < atom_count; ++a) {
        atom_kept[a] = norm(run.jump_atoms[a]) <= r ? 1 : 0;
    }

    const std::size_t chunks = (n + kParallelChunk - 1) / kParallelChunk;
    std::vector<std::vector<MomentBlock>> partials(chunks, std::vector<MomentBlock>(frames));

    parallel_for(n, 0, [&](std::size_t begin, std::size_t end) {
        auto& blocks = partials[begin / kParallelChunk];
        Vec x(d), shifted(d), grad_store;
        for (std::size_t i = begin; i < end; ++i) {
            double integral_projected = 0.0;
            double integral_preprojection = 0.0;
            double f0 = 0.0;
            for (std::size_t j = 0; j < frames; ++j) {
                const auto row = run.frames[j].states.row(i);
                x.assign(row.begin(), row.end());
                const double fx = f.value(x);
                if (j == 0) {
                    f0 = fx;
                }
                blocks[j].add(fx - f0, integral_projected, integral_preprojection);
                if (j + 1 == frames) {
                    break;
                }
                const double spacing = run.frames[j + 1].time - run.frames[j].time;

                const Vec grad = f.gradient(x);
                const Mat hess = f.hessian(x);

                // Jump increments are shared between the two modes; only the
                // rates differ (projected table vs the particle's own).
                double jump_projected = 0.0;
                double jump_pre = 0.0;
                if (atom_count > 0) {
                    const auto projected_rates = projected[j].rates_at(row);
                    for (std::size_t a = 0; a < atom_count; ++a) {
                        const Vec& atom = run.jump_atoms[a];
                        for (std::size_t k = 0; k < d; ++k) {
                            shifted[k] = x[k] + atom[k];
                        }
                        double increment = f.value(shifted) - fx;
                        if (atom_kept[a]) {
                            increment -= dot(grad, atom);
                        }
                        jump_projected += projected_rates[a] * increment;
                        jump_pre += run.frames[j].jump_rates[i * atom_count + a] * increment;
                    }
                }

                const auto b_row = projected[j].drift_span_at(row);
                const Mat& a_mat = projected[j].diffusion_ref_at(row);
                double generator_projected = dot(b_row, grad) + jump_projected;
                double generator_pre = dot(run.frames[j].beta.row(i), grad) + jump_pre;
                for (std::size_t p = 0; p < d; ++p) {
                    for (std::size_t q = 0; q < d; ++q) {
                        generator_projected += 0.5 * a_mat(p, q) * hess(p, q);
                        generator_pre +=
                            0.5 * run.frames[j].alpha.row(i)[p * d + q] * hess(p, q);
                    }
                }
                integral_projected += spacing * generator_projected;
                integral_preprojection += spacing * generator_pre;
            }
        }
    });

    ResidualReport report;
    report.points.resize(frames);
    for (std::size_t j = 0; j + 1 < frames; ++j) {
        report.quadrature_spacing = std::max(
            report.quadrature_spacing, run.frames[j + 1].time - run.frames[j].time);
    }
    const double count = static_cast<double>(n);
    for (std::size_t j = 0; j < frames; ++j) {
        MomentBlock total;
        for (std::size_t c = 0; c < chunks; ++c) {
            total.merge(partials[c][j]);
        }
        ResidualPoint& point = report.points[j];
        point.time = run.frames[j].time;
        const double ea = total.a.value() / count;
        const double eb = total.b.value() / count;
        const double ec = total.c.value() / count;
        const double eaa = total.aa.value() / count;
        const double ebb = total.bb.value() / count;
        const double ecc = total.cc.value() / count;
        const double eab = total.ab.value() / count;
        const double eac = total.ac.value() / count;
        const double ebc = total.bc.value() / count;
        point.lhs = ea;
        point.rhs = eb;
        point.residual = point.lhs - point.rhs;
        point.se_lhs = se_of(eaa, ea, count);
        point.se_rhs = se_of(ebb, eb, count);
        point.se_residual = se_of_difference(eaa, ea, ebb, eb, eab, count);
        point.rhs_preprojection = ec;
        point.residual_preprojection = point.lhs - point.rhs_preprojection;
        point.se_residual_preprojection = se_of_difference(eaa, ea, ecc, ec, eac, count);
        point.modes_gap = point.rhs - point.rhs_preprojection;
        point.se_modes_gap = se_of_difference(ebb, eb, ecc, ec, ebc, count);
    }
    return report;
}

}  // namespace mimic
