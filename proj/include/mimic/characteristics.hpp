#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "mimic/linalg.hpp"

namespace mimic {

/// Truncation function h(x) = x * 1{|x| <= r} separating small jumps, which
/// are compensated, from large ones, which are not.
class TruncationConfig {
public:
    explicit TruncationConfig(double radius);

    double radius() const { return radius_; }
    bool keeps(std::span<const double> jump) const;
    Vec apply(const Vec& jump) const;

private:
    double radius_;
};

/// Finite-activity jump kernel written as an atom list: total rate
/// sum_j rate_j, jump sizes xi_j. A compound-Poisson kernel with a discrete
/// size law is the same thing after multiplying the intensity into the
/// size probabilities.
class JumpKernelSpec {
public:
    struct Atom {
        double rate;
        Vec size;
    };

    JumpKernelSpec() = default;

    /// Intensity plus a discrete size distribution (sizes with probabilities).
    static JumpKernelSpec compound_poisson(double intensity, const std::vector<Vec>& sizes,
                                           const std::vector<double>& probabilities);

    void add_atom(double rate, Vec size);

    const std::vector<Atom>& atoms() const { return atoms_; }
    bool empty() const { return atoms_.empty(); }

    double total_intensity() const;

    /// Levy integrability mass: integral of 1 and |xi|^2 against the kernel.
    double levy_mass() const;

private:
    std::vector<Atom> atoms_;
};

/// Per-path triplet (beta, alpha, kappa) of an Ito semimartingale at an
/// instant: drift relative to a truncation function, quadratic covariation
/// density, and jump compensator kernel.
struct DifferentialCharacteristics {
    Vec beta;
    Mat alpha;
    JumpKernelSpec kappa;

    /// Enforces the structural constraints: alpha symmetric PSD up to a
    /// -1e-12 eigenvalue tolerance (clipped), kappa a valid Levy kernel.
    void validate();
};

/// State-and-time indexed coefficient functions (b, a, k). The diffusion
/// matrix must be PSD at every queried point and k must be a finite-activity
/// Levy kernel with no mass at the origin.
struct ProjectedCharacteristics {
    std::function<Vec(double, const Vec&)> drift;
    std::function<Mat(double, const Vec&)> diffusion;
    std::function<JumpKernelSpec(double, const Vec&)> jumps;
};

/// Compactly supported twice-differentiable test function with analytic
/// gradient and Hessian. value vanishes for |x - center| >= support_radius.
struct TestFunction {
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> gradient;
    std::function<Mat(const Vec&)> hessian;
    Vec center;
    double support_radius = 0.0;

    /// Smooth radial bump with amplitude at the center and all derivatives
    /// vanishing on the support boundary.
    static TestFunction radial_bump(Vec center, double radius, double amplitude = 1.0);

    /// Pointwise linear combination; support radius is the enclosing one.
    static TestFunction linear_combination(double c1, const TestFunction& f, double c2,
                                           const TestFunction& g);
};

/// Non-local generator applied to a test function at (t, x):
///   b . grad f + (1/2) tr(a hess f)
///   + sum_atoms rate * (f(x + xi) - f(x) - grad f(x) . xi 1{|xi| <= r}).
/// Exact for atomic kernels; no quadrature involved. Throws on non-finite
/// coefficient values, naming the offending term.
double apply_generator(const ProjectedCharacteristics& pc, const TestFunction& f, double t,
                       const Vec& x, const TruncationConfig& trunc);

/// Drift adjustment between truncation radii:
///   beta(h_new) = beta(h_old) + integral (h_new - h_old) d kappa.
/// With no atoms crossing the radii the input is returned unchanged.
Vec change_truncation(const JumpKernelSpec& kappa, const Vec& beta, double r_old, double r_new);

/// Per-path integrals of |beta|, |alpha| and the Levy mass over [0, T],
/// accumulated on the simulation grid.
struct PathIntegralLog {
    std::vector<double> drift;
    std::vector<double> diffusion;
    std::vector<double> jump_mass;
    double horizon = 0.0;

    std::size_t paths() const { return drift.size(); }
};

struct IntegrabilityEstimate {
    double estimate = 0.0;
    double standard_error = 0.0;
    bool finite = false;
    std::size_t paths = 0;
};

/// Monte Carlo estimate of E[ integral_0^T (|beta| + |alpha| + levy mass) ds ].
/// Throws on an empty log.
IntegrabilityEstimate check_integrability(const PathIntegralLog& log);

struct GrowthProbe {
    double time = 0.0;
    Vec state;
};

struct GrowthEstimate {
    double supremum = 0.0;
    GrowthProbe argmax;
    std::size_t probes = 0;
};

/// Empirical supremum over the probe set of
///   |b|/(1+|x|) + |a|/(1+|x|^2)
///   + sum_atoms rate * ( 1{|xi| < r} |xi|^2/(1+|x|^2)
///                      + 1{|xi| >= r} log(1 + |xi|/(1+|x|)) ).
/// This certifies the probes only; it is a diagnostic, not a proof.
GrowthEstimate check_growth(const ProjectedCharacteristics& pc,
                            const std::vector<GrowthProbe>& probes,
                            const TruncationConfig& trunc);

/// Deterministic probe grid reaching far into the tails, to be merged with
/// probes drawn from simulated marginals.
std::vector<GrowthProbe> growth_probe_grid(std::size_t dim, double max_radius,
                                           std::size_t points_per_axis,
                                           const std::vector<double>& times);

}  // namespace mimic
