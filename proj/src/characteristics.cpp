#include "mimic/characteristics.hpp"

#include <cmath>
#include <stdexcept>

#include "mimic/summation.hpp"

namespace mimic {

TruncationConfig::TruncationConfig(double radius) : radius_(radius) {
    if (!(radius > 0.0)) {
        throw std::invalid_argument("truncation radius must be positive");
    }
}

bool TruncationConfig::keeps(std::span<const double> jump) const {
    return norm(jump) <= radius_;
}

Vec TruncationConfig::apply(const Vec& jump) const {
    if (keeps(jump)) {
        return jump;
    }
    return Vec(jump.size(), 0.0);
}

JumpKernelSpec JumpKernelSpec::compound_poisson(double intensity, const std::vector<Vec>& sizes,
                                                const std::vector<double>& probabilities) {
    if (intensity < 0.0) {
        throw std::invalid_argument("compound Poisson intensity must be nonnegative");
    }
    if (sizes.size() != probabilities.size()) {
        throw std::invalid_argument("jump sizes and probabilities must have equal length");
    }
    JumpKernelSpec kernel;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (probabilities[i] < 0.0) {
            throw std::invalid_argument("jump size probabilities must be nonnegative");
        }
        if (intensity * probabilities[i] > 0.0) {
            kernel.add_atom(intensity * probabilities[i], sizes[i]);
        }
    }
    return kernel;
}

void JumpKernelSpec::add_atom(double rate, Vec size) {
    if (!(rate >= 0.0) || !std::isfinite(rate)) {
        throw std::invalid_argument("jump atom rate must be finite and nonnegative");
    }
    if (norm(size) == 0.0) {
        throw std::invalid_argument("jump atoms must be nonzero: a Levy kernel puts no mass at 0");
    }
    for (double c : size) {
        if (!std::isfinite(c)) {
            throw std::invalid_argument("jump atom size must be finite");
        }
    }
    atoms_.push_back(Atom{rate, std::move(size)});
}

double JumpKernelSpec::total_intensity() const {
    NeumaierSum acc;
    for (const auto& atom : atoms_) {
        acc.add(atom.rate);
    }
    return acc.value();
}

double JumpKernelSpec::levy_mass() const {
    NeumaierSum acc;
    for (const auto& atom : atoms_) {
        const double sq = dot(atom.size, atom.size);
        acc.add(atom.rate * std::min(1.0, sq));
    }
    return acc.value();
}

void DifferentialCharacteristics::validate() {
    for (double b : beta) {
        if (!std::isfinite(b)) {
            throw std::invalid_argument("drift characteristic must be finite");
        }
    }
    alpha = clip_to_psd(alpha, 1e-12);
    if (!std::isfinite(kappa.levy_mass())) {
        throw std::invalid_argument("jump kernel must have finite Levy mass");
    }
}

namespace {

TestFunction make_bump(Vec center, double radius, double amplitude) {
    if (!(radius > 0.0)) {
        throw std::invalid_argument("bump radius must be positive");
    }
    const std::size_t d = center.size();
    // psi(u) = exp(1 - 1/(1-u)) on [0,1), 0 beyond; psi(0) = 1.
    auto psi = [](double u) { return u < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - u)) : 0.0; };
    auto psi_d1 = [psi](double u) {
        if (u >= 1.0) return 0.0;
        const double w = 1.0 - u;
        return -psi(u) / (w * w);
    };
    auto psi_d2 = [psi](double u) {
        if (u >= 1.0) return 0.0;
        const double w = 1.0 - u;
        return psi(u) * (2.0 * u - 1.0) / (w * w * w * w);
    };

    TestFunction f;
    f.center = center;
    f.support_radius = radius;
    const double inv_r2 = 1.0 / (radius * radius);

    f.value = [=](const Vec& x) {
        double u = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double dx = x[i] - center[i];
            u += dx * dx;
        }
        u *= inv_r2;
        return u < 1.0 ? amplitude * psi(u) : 0.0;
    };
    f.gradient = [=](const Vec& x) {
        Vec g(d, 0.0);
        double u = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double dx = x[i] - center[i];
            u += dx * dx;
        }
        u *= inv_r2;
        if (u >= 1.0) {
            return g;
        }
        const double scale = amplitude * psi_d1(u) * 2.0 * inv_r2;
        for (std::size_t i = 0; i < d; ++i) {
            g[i] = scale * (x[i] - center[i]);
        }
        return g;
    };
    f.hessian = [=](const Vec& x) {
        Mat h(d, d);
        double u = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double dx = x[i] - center[i];
            u += dx * dx;
        }
        u *= inv_r2;
        if (u >= 1.0) {
            return h;
        }
        const double first = amplitude * psi_d1(u) * 2.0 * inv_r2;
        const double second = amplitude * psi_d2(u) * 4.0 * inv_r2 * inv_r2;
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                h(i, j) = second * (x[i] - center[i]) * (x[j] - center[j]);
            }
            h(i, i) += first;
        }
        return h;
    };
    return f;
}

}  // namespace

TestFunction TestFunction::radial_bump(Vec center, double radius, double amplitude) {
    return make_bump(std::move(center), radius, amplitude);
}

TestFunction TestFunction::linear_combination(double c1, const TestFunction& f, double c2,
                                              const TestFunction& g) {
    TestFunction out;
    const double rf = norm(f.center) + f.support_radius;
    const double rg = norm(g.center) + g.support_radius;
    out.center = Vec(f.center.size(), 0.0);
    out.support_radius = std::max(rf, rg);
    out.value = [=](const Vec& x) { return c1 * f.value(x) + c2 * g.value(x); };
    out.gradient = [=](const Vec& x) {
        Vec a = f.gradient(x);
        const Vec b = g.gradient(x);
        for (std::size_t i = 0; i < a.size(); ++i) {
            a[i] = c1 * a[i] + c2 * b[i];
        }
        return a;
    };
    out.hessian = [=](const Vec& x) {
        Mat a = f.hessian(x);
        const Mat b = g.hessian(x);
        for (std::size_t i = 0; i < a.data().size(); ++i) {
            a.data()[i] = c1 * a.data()[i] + c2 * b.data()[i];
        }
        return a;
    };
    return out;
}

double apply_generator(const ProjectedCharacteristics& pc, const TestFunction& f, double t,
                       const Vec& x, const TruncationConfig& trunc) {
    const Vec grad = f.gradient(x);

    double drift_term = 0.0;
    if (pc.drift) {
        const Vec b = pc.drift(t, x);
        for (double c : b) {
            if (!std::isfinite(c)) {
                throw std::runtime_error("generator evaluation failed: drift b(t,x) is not finite");
            }
        }
        drift_term = dot(b, grad);
    }

    double diffusion_term = 0.0;
    if (pc.diffusion) {
        const Mat a = pc.diffusion(t, x);
        for (double c : a.data()) {
            if (!std::isfinite(c)) {
                throw std::runtime_error(
                    "generator evaluation failed: diffusion a(t,x) is not finite");
            }
        }
        diffusion_term = 0.5 * trace_product(a, f.hessian(x));
    }

    double jump_term = 0.0;
    if (pc.jumps) {
        const JumpKernelSpec kernel = pc.jumps(t, x);
        const double fx = f.value(x);
        NeumaierSum acc;
        for (const auto& atom : kernel.atoms()) {
            if (!std::isfinite(atom.rate)) {
                throw std::runtime_error(
                    "generator evaluation failed: jump kernel rate is not finite");
            }
            Vec shifted = x;
            for (std::size_t i = 0; i < x.size(); ++i) {
                shifted[i] += atom.size[i];
            }
            double increment = f.value(shifted) - fx;
            if (trunc.keeps(atom.size)) {
                increment -= dot(grad, atom.size);
            }
            acc.add(atom.rate * increment);
        }
        jump_term = acc.value();
    }

    return drift_term + diffusion_term + jump_term;
}

Vec change_truncation(const JumpKernelSpec& kappa, const Vec& beta, double r_old, double r_new) {
    for (double b : beta) {
        if (!std::isfinite(b)) {
            throw std::invalid_argument("drift must be finite");
        }
    }
    const TruncationConfig h_old(r_old);
    const TruncationConfig h_new(r_new);
    Vec adjustment(beta.size(), 0.0);
    bool any = false;
    for (const auto& atom : kappa.atoms()) {
        const bool kept_new = h_new.keeps(atom.size);
        const bool kept_old = h_old.keeps(atom.size);
        if (kept_new == kept_old) {
            continue;
        }
        const double sign = kept_new ? 1.0 : -1.0;
        for (std::size_t i = 0; i < beta.size(); ++i) {
            adjustment[i] += sign * atom.rate * atom.size[i];
        }
        any = true;
    }
    if (!any) {
        return beta;
    }
    Vec out = beta;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] += adjustment[i];
    }
    return out;
}

IntegrabilityEstimate check_integrability(const PathIntegralLog& log) {
    if (log.paths() == 0) {
        throw std::invalid_argument("characteristics log is empty");
    }
    if (log.diffusion.size() != log.paths() || log.jump_mass.size() != log.paths()) {
        throw std::invalid_argument("characteristics log components have mismatched lengths");
    }
    std::vector<double> totals(log.paths());
    for (std::size_t i = 0; i < totals.size(); ++i) {
        totals[i] = log.drift[i] + log.diffusion[i] + log.jump_mass[i];
    }
    const MeanAndError stats = mean_and_standard_error(totals);
    IntegrabilityEstimate out;
    out.estimate = stats.mean;
    out.standard_error = stats.standard_error;
    out.finite = std::isfinite(stats.mean);
    out.paths = totals.size();
    return out;
}

GrowthEstimate check_growth(const ProjectedCharacteristics& pc,
                            const std::vector<GrowthProbe>& probes,
                            const TruncationConfig& trunc) {
    GrowthEstimate out;
    out.probes = probes.size();
    for (const auto& probe : probes) {
        const double xnorm = norm(probe.state);
        double value = 0.0;
        if (pc.drift) {
            value += norm(pc.drift(probe.time, probe.state)) / (1.0 + xnorm);
        }
        if (pc.diffusion) {
            value += frobenius_norm(pc.diffusion(probe.time, probe.state)) /
                     (1.0 + xnorm * xnorm);
        }
        if (pc.jumps) {
            const JumpKernelSpec kernel = pc.jumps(probe.time, probe.state);
            for (const auto& atom : kernel.atoms()) {
                const double jnorm = norm(atom.size);
                if (jnorm < trunc.radius()) {
                    value += atom.rate * jnorm * jnorm / (1.0 + xnorm * xnorm);
                } else {
                    value += atom.rate * std::log1p(jnorm / (1.0 + xnorm));
                }
            }
        }
        if (value > out.supremum) {
            out.supremum = value;
            out.argmax = probe;
        }
    }
    return out;
}

std::vector<GrowthProbe> growth_probe_grid(std::size_t dim, double max_radius,
                                           std::size_t points_per_axis,
                                           const std::vector<double>& times) {
    std::vector<double> axis;
    axis.push_back(0.0);
    // Geometric ladder out to the tail in both directions.
    double step = max_radius;
    for (std::size_t i = 0; i < points_per_axis; ++i) {
        axis.push_back(step);
        axis.push_back(-step);
        step *= 0.5;
    }
    std::vector<GrowthProbe> probes;
    if (dim == 1) {
        for (double t : times) {
            for (double x : axis) {
                probes.push_back(GrowthProbe{t, Vec{x}});
            }
        }
    } else {
        for (double t : times) {
            for (double x : axis) {
                for (double y : axis) {
                    Vec state{x, y};
                    state.resize(dim, 0.0);
                    probes.push_back(GrowthProbe{t, std::move(state)});
                }
            }
        }
    }
    return probes;
}

}  // namespace mimic
