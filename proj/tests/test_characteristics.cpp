#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <limits>

#include "mimic/characteristics.hpp"
#include "mimic/rng.hpp"

using namespace mimic;

namespace {

ProjectedCharacteristics constant_pc(Vec b, Mat a, JumpKernelSpec k) {
    ProjectedCharacteristics pc;
    pc.drift = [b](double, const Vec&) { return b; };
    pc.diffusion = [a](double, const Vec&) { return a; };
    pc.jumps = [k](double, const Vec&) { return k; };
    return pc;
}

// Ad-hoc linear test function, enough for pointwise generator checks.
TestFunction linear_function(double slope) {
    TestFunction f;
    f.center = Vec{0.0};
    f.support_radius = 1e9;
    f.value = [slope](const Vec& x) { return slope * x[0]; };
    f.gradient = [slope](const Vec& x) { return Vec{slope + 0.0 * x[0]}; };
    f.hessian = [](const Vec&) { return Mat(1, 1); };
    return f;
}

double finite_difference_component(const TestFunction& f, const Vec& x, std::size_t k, double h) {
    Vec hi = x;
    Vec lo = x;
    hi[k] += h;
    lo[k] -= h;
    return (f.value(hi) - f.value(lo)) / (2.0 * h);
}

}  // namespace

TEST_CASE("generator: drift term plugs in directly") {
    const auto pc = constant_pc(Vec{2.0}, Mat(1, 1), JumpKernelSpec{});
    const auto f = linear_function(3.0);
    const TruncationConfig trunc(1.0);
    CHECK(apply_generator(pc, f, 0.0, Vec{0.4}, trunc) == 6.0);
}

TEST_CASE("generator: locally constant function is annihilated") {
    JumpKernelSpec empty;
    Mat a(1, 1);
    a(0, 0) = 0.7;
    const auto pc = constant_pc(Vec{1.5}, a, empty);
    TestFunction f;
    f.center = Vec{0.0};
    f.support_radius = 1.0;
    f.value = [](const Vec&) { return 4.0; };
    f.gradient = [](const Vec&) { return Vec{0.0}; };
    f.hessian = [](const Vec&) { return Mat(1, 1); };
    CHECK(apply_generator(pc, f, 0.0, Vec{0.0}, TruncationConfig(1.0)) == 0.0);
}

TEST_CASE("generator: large jump is not compensated") {
    // rate 2 at xi = 1 with r = 0.5: contribution 2 (f(x+1) - f(x)).
    JumpKernelSpec kernel;
    kernel.add_atom(2.0, Vec{1.0});
    const auto pc = constant_pc(Vec{0.0}, Mat(1, 1), kernel);
    const auto f = TestFunction::radial_bump(Vec{0.0}, 0.5, 1.0);
    REQUIRE(f.value(Vec{0.0}) == 1.0);
    REQUIRE(f.value(Vec{1.0}) == 0.0);
    const double value = apply_generator(pc, f, 0.0, Vec{0.0}, TruncationConfig(0.5));
    CHECK(value == doctest::Approx(-2.0).epsilon(1e-14));
}

TEST_CASE("generator: small jump gradient compensation") {
    JumpKernelSpec kernel;
    kernel.add_atom(1.0, Vec{0.25});
    const auto pc = constant_pc(Vec{0.0}, Mat(1, 1), kernel);
    const auto f = TestFunction::radial_bump(Vec{0.0}, 1.0, 1.0);
    const Vec x{0.1};
    const double expected =
        f.value(Vec{0.35}) - f.value(x) - f.gradient(x)[0] * 0.25;
    CHECK(apply_generator(pc, f, 0.0, x, TruncationConfig(0.5)) ==
          doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("generator: linear in the test function") {
    RandomStream rng(2024, 0, 0, Substream::Scratch);
    for (int trial = 0; trial < 25; ++trial) {
        JumpKernelSpec kernel;
        kernel.add_atom(rng.uniform() * 2.0, Vec{0.3 + rng.uniform()});
        kernel.add_atom(rng.uniform(), Vec{-0.2 - rng.uniform()});
        Mat a(1, 1);
        a(0, 0) = rng.uniform();
        const auto pc = constant_pc(Vec{rng.uniform() * 4.0 - 2.0}, a, kernel);
        const auto f = TestFunction::radial_bump(Vec{rng.uniform() - 0.5}, 1.2, 1.0);
        const auto g = TestFunction::radial_bump(Vec{rng.uniform() - 0.5}, 0.8, 2.0);
        const double c1 = rng.uniform() * 4.0 - 2.0;
        const double c2 = rng.uniform() * 4.0 - 2.0;
        const auto combo = TestFunction::linear_combination(c1, f, c2, g);
        const Vec x{rng.uniform() - 0.5};
        const TruncationConfig trunc(0.5);
        const double lf = apply_generator(pc, f, 0.0, x, trunc);
        const double lg = apply_generator(pc, g, 0.0, x, trunc);
        const double lc = apply_generator(pc, combo, 0.0, x, trunc);
        CHECK(std::abs(lc - c1 * lf - c2 * lg) <=
              1e-12 * (1.0 + std::abs(lf) + std::abs(lg)));
    }
}

TEST_CASE("generator: empty kernel reduces to the diffusion generator") {
    RandomStream rng(7, 0, 0, Substream::Scratch);
    for (int trial = 0; trial < 10; ++trial) {
        Mat a(1, 1);
        a(0, 0) = rng.uniform();
        const Vec b{rng.uniform() * 2.0 - 1.0};
        const auto pc = constant_pc(b, a, JumpKernelSpec{});
        const auto f = TestFunction::radial_bump(Vec{0.0}, 2.0, 1.0);
        const Vec x{rng.uniform() - 0.5};
        const double manual =
            b[0] * f.gradient(x)[0] + 0.5 * a(0, 0) * f.hessian(x)(0, 0);
        CHECK(apply_generator(pc, f, 0.0, x, TruncationConfig(1.0)) == manual);
    }
}

TEST_CASE("generator: non-finite coefficients are reported by term") {
    const auto f = TestFunction::radial_bump(Vec{0.0}, 1.0, 1.0);
    {
        ProjectedCharacteristics pc = constant_pc(Vec{0.0}, Mat(1, 1), JumpKernelSpec{});
        pc.drift = [](double, const Vec&) { return Vec{std::nan("")}; };
        try {
            apply_generator(pc, f, 0.0, Vec{0.0}, TruncationConfig(1.0));
            FAIL("expected an exception");
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()).find("drift") != std::string::npos);
        }
    }
    {
        ProjectedCharacteristics pc = constant_pc(Vec{0.0}, Mat(1, 1), JumpKernelSpec{});
        Mat bad(1, 1);
        bad(0, 0) = std::numeric_limits<double>::infinity();
        pc.diffusion = [bad](double, const Vec&) { return bad; };
        try {
            apply_generator(pc, f, 0.0, Vec{0.0}, TruncationConfig(1.0));
            FAIL("expected an exception");
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()).find("diffusion") != std::string::npos);
        }
    }
}

TEST_CASE("truncation change: empty kernel leaves the drift alone") {
    const Vec beta{5.0};
    const Vec out = change_truncation(JumpKernelSpec{}, beta, 0.25, 3.0);
    CHECK(out == beta);
}

TEST_CASE("truncation change: atom crossing the radius") {
    JumpKernelSpec kernel;
    kernel.add_atom(3.0, Vec{1.0});
    const Vec out = change_truncation(kernel, Vec{0.0}, 0.5, 2.0);
    CHECK(out == Vec{3.0});
}

TEST_CASE("truncation change: same radius is the identity") {
    JumpKernelSpec kernel;
    kernel.add_atom(0.3, Vec{0.77});
    const Vec beta{-0.1};
    CHECK(change_truncation(kernel, beta, 0.9, 0.9) == beta);
}

TEST_CASE("truncation change: round trip is exact on a dyadic lattice") {
    RandomStream rng(11, 0, 0, Substream::Scratch);
    auto dyadic = [&rng](double scale) {
        return std::floor(rng.uniform() * 128.0 - 64.0) / 64.0 * scale;
    };
    for (int trial = 0; trial < 50; ++trial) {
        JumpKernelSpec kernel;
        for (int a = 0; a < 4; ++a) {
            double size = dyadic(4.0);
            if (size == 0.0) {
                size = 0.5;
            }
            kernel.add_atom(std::abs(dyadic(2.0)), Vec{size});
        }
        const Vec beta{dyadic(8.0)};
        const double r1 = 0.25 + rng.uniform() * 2.0;
        const double r2 = 0.25 + rng.uniform() * 2.0;
        const Vec there = change_truncation(kernel, beta, r1, r2);
        const Vec back = change_truncation(kernel, there, r2, r1);
        CHECK(back == beta);
    }
}

TEST_CASE("bump derivatives agree with finite differences") {
    RandomStream rng(5, 0, 0, Substream::Scratch);
    for (std::size_t dim : {std::size_t{1}, std::size_t{2}}) {
        Vec center(dim, 0.3);
        const double radius = 1.4;
        const auto f = TestFunction::radial_bump(center, radius, 1.0);
        for (int point = 0; point < 100; ++point) {
            Vec x(dim);
            double sq = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                x[k] = rng.uniform() * 2.0 - 1.0;
                sq += x[k] * x[k];
            }
            const double shrink = 0.85 * radius / std::sqrt(std::max(sq, 1e-12));
            for (std::size_t k = 0; k < dim; ++k) {
                x[k] = center[k] + x[k] * shrink * rng.uniform();
            }
            const double h = 4e-6 * radius;  // near cbrt(eps), balancing truncation and roundoff
            // Components crossing zero make a bare relative error
            // roundoff-dominated; floor the denominator at a small fraction
            // of the derivative scale of the bump.
            const double grad_scale = 1e-3 / radius;
            const double hess_scale = 1e-3 / (radius * radius);
            const Vec grad = f.gradient(x);
            for (std::size_t k = 0; k < dim; ++k) {
                const double fd = finite_difference_component(f, x, k, h);
                const double denom = std::max({std::abs(grad[k]), std::abs(fd), grad_scale});
                CHECK(std::abs(fd - grad[k]) / denom <= 1e-5);
            }
            const Mat hess = f.hessian(x);
            for (std::size_t k = 0; k < dim; ++k) {
                Vec hi = x;
                Vec lo = x;
                hi[k] += h;
                lo[k] -= h;
                const Vec ghi = f.gradient(hi);
                const Vec glo = f.gradient(lo);
                for (std::size_t l = 0; l < dim; ++l) {
                    const double fd = (ghi[l] - glo[l]) / (2.0 * h);
                    const double denom =
                        std::max({std::abs(hess(k, l)), std::abs(fd), hess_scale});
                    CHECK(std::abs(fd - hess(k, l)) / denom <= 1e-5);
                }
            }
        }
    }
}

TEST_CASE("bump vanishes outside its support") {
    const auto f = TestFunction::radial_bump(Vec{1.0}, 0.5, 2.0);
    CHECK(f.value(Vec{1.5}) == 0.0);
    CHECK(f.value(Vec{2.6}) == 0.0);
    CHECK(f.gradient(Vec{1.6})[0] == 0.0);
    CHECK(f.hessian(Vec{0.4})(0, 0) == 0.0);
    CHECK(f.value(Vec{1.0}) == 2.0);
}

TEST_CASE("integrability: zero characteristics") {
    PathIntegralLog log;
    log.drift.assign(50, 0.0);
    log.diffusion.assign(50, 0.0);
    log.jump_mass.assign(50, 0.0);
    log.horizon = 1.0;
    const auto estimate = check_integrability(log);
    CHECK(estimate.estimate == 0.0);
    CHECK(estimate.standard_error == 0.0);
    CHECK(estimate.finite);
}

TEST_CASE("integrability: empty log is an error") {
    CHECK_THROWS_AS(check_integrability(PathIntegralLog{}), std::invalid_argument);
}

TEST_CASE("integrability: unit-rate Poisson compensator mass") {
    // kappa = delta_1 at rate 1: integral of 1 and |xi|^2 is exactly T.
    PathIntegralLog log;
    log.drift.assign(100, 0.0);
    log.diffusion.assign(100, 0.0);
    log.jump_mass.assign(100, 1.0);
    log.horizon = 1.0;
    const auto estimate = check_integrability(log);
    CHECK(estimate.estimate == doctest::Approx(1.0));
    CHECK(estimate.standard_error == 0.0);
    CHECK(estimate.finite);
}

TEST_CASE("growth: all-zero coefficients") {
    const auto pc = constant_pc(Vec{0.0}, Mat(1, 1), JumpKernelSpec{});
    const auto probes = growth_probe_grid(1, 1000.0, 12, {0.0, 0.5, 1.0});
    const auto estimate = check_growth(pc, probes, TruncationConfig(0.5));
    CHECK(estimate.supremum == 0.0);
}

TEST_CASE("growth: linear drift saturates at one") {
    ProjectedCharacteristics pc;
    pc.drift = [](double, const Vec& x) { return Vec{x[0]}; };
    const auto probes = growth_probe_grid(1, 1000.0, 14, {0.0});
    const auto estimate = check_growth(pc, probes, TruncationConfig(0.5));
    CHECK(estimate.supremum <= 1.0);
    CHECK(estimate.supremum >= 0.999);
}

TEST_CASE("growth: bounded unit-jump kernel stays under log 2") {
    ProjectedCharacteristics pc;
    pc.jumps = [](double, const Vec&) {
        JumpKernelSpec kernel;
        kernel.add_atom(1.0, Vec{1.0});
        return kernel;
    };
    auto probes = growth_probe_grid(1, 1000.0, 14, {0.0});
    probes.push_back(GrowthProbe{0.0, Vec{0.0}});
    const auto estimate = check_growth(pc, probes, TruncationConfig(0.5));
    CHECK(estimate.supremum <= std::log(2.0) + 1e-6);
    CHECK(estimate.supremum == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("jump kernel spec rejects mass at the origin") {
    JumpKernelSpec kernel;
    CHECK_THROWS_AS(kernel.add_atom(1.0, Vec{0.0}), std::invalid_argument);
    CHECK_THROWS_AS(kernel.add_atom(-1.0, Vec{1.0}), std::invalid_argument);
}

TEST_CASE("differential characteristics validation clips tiny PSD violations") {
    DifferentialCharacteristics chars;
    chars.beta = Vec{0.0};
    chars.alpha = Mat(2, 2);
    chars.alpha(0, 0) = 1.0;
    chars.alpha(1, 1) = -5e-13;  // rounding-level violation
    chars.kappa = JumpKernelSpec{};
    chars.validate();
    CHECK(is_psd(chars.alpha, 0.0));

    DifferentialCharacteristics bad;
    bad.beta = Vec{0.0};
    bad.alpha = Mat(2, 2);
    bad.alpha(1, 1) = -1e-6;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
