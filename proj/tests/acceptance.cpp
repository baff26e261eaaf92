// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exit code is the number of
// failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mimic/estimators.hpp"
#include "mimic/experiment.hpp"
#include "mimic/fpke.hpp"
#include "mimic/processes.hpp"
#include "mimic/stats.hpp"
#include "mimic/summation.hpp"

using namespace mimic;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d (%s): %s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) {
        ++failures;
    }
}

std::string fmt(double x) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.6g", x);
    return buffer;
}

StochasticFactorSpec acceptance_factor() {
    StochasticFactorSpec factor;
    factor.low = 0.5;
    factor.high = 2.0;
    factor.rate_up = 1.0;
    factor.rate_down = 1.0;
    return factor;
}

std::vector<double> uniform_times(double horizon, std::size_t intervals) {
    std::vector<double> times;
    for (std::size_t k = 0; k <= intervals; ++k) {
        times.push_back(horizon * static_cast<double>(k) / static_cast<double>(intervals));
    }
    return times;
}

SimulationConfig grid_config(std::size_t particles, double dt, double horizon,
                             std::uint64_t seed) {
    SimulationConfig config;
    config.particles = particles;
    config.dt = dt;
    config.horizon = horizon;
    config.seed = seed;
    config.snapshot_times = uniform_times(horizon, 25);
    config.record_events = false;
    return config;
}

LocalVolModel acceptance_lv_model() {
    LocalVolModel model;
    model.rate = 0.0;
    model.sigma = [](double, double) { return 0.2; };
    model.sigma_bound = 0.2;
    model.initial_price = 1.0;
    return model;
}

LocalIntensityModel unit_intensity_model() {
    LocalIntensityModel model;
    model.intensity = [](double, double) { return 1.0; };
    model.intensity_bound = 1.0;
    return model;
}

HawkesModel acceptance_hawkes_model() {
    HawkesModel model;
    model.base_rate = 1.0;
    model.excitation = 1.0;
    model.reversion = 2.0;
    return model;
}

// Independent oracle for the Hawkes mean intensity: classic RK4 on
// m' = theta lambda0 + (c - theta) m, m(0) = lambda0.
double hawkes_mean_ode(const HawkesModel& model, double horizon) {
    auto slope = [&](double m) {
        return model.reversion * model.base_rate + (model.excitation - model.reversion) * m;
    };
    double m = model.base_rate;
    const int steps = 20000;
    const double h = horizon / steps;
    for (int k = 0; k < steps; ++k) {
        const double k1 = slope(m);
        const double k2 = slope(m + 0.5 * h * k1);
        const double k3 = slope(m + 0.5 * h * k2);
        const double k4 = slope(m + h * k3);
        m += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return m;
}

bool frames_identical(const SimulationResult& a, const SimulationResult& b) {
    if (a.frames.size() != b.frames.size()) {
        return false;
    }
    for (std::size_t j = 0; j < a.frames.size(); ++j) {
        const auto& fa = a.frames[j];
        const auto& fb = b.frames[j];
        if (fa.time != fb.time || fa.states.data != fb.states.data ||
            fa.beta.data != fb.beta.data || fa.alpha.data != fb.alpha.data ||
            fa.jump_rates != fb.jump_rates) {
            return false;
        }
    }
    return true;
}

struct FpkeOutcome {
    bool pass = true;
    double worst_margin = -1e300;  // max over (f, t) of |res| - 3 SE - C spacing
    double max_residual = 0.0;
};

FpkeOutcome fpke_check(const SimulationResult& run, std::size_t function_count) {
    const FpkeRunReport report = fpke_run_report(run, function_count);
    FpkeOutcome outcome;
    outcome.pass = report.within_budget;
    for (const auto& function : report.functions) {
        outcome.max_residual = std::max(outcome.max_residual, function.max_abs_residual());
        for (const auto& point : function.points) {
            const double margin =
                std::abs(point.residual) - 3.0 * point.se_residual -
                report.budget_constant * function.quadrature_spacing;
            outcome.worst_margin = std::max(outcome.worst_margin, margin);
        }
    }
    return outcome;
}

}  // namespace

int main() {
    using clock = std::chrono::steady_clock;
    const auto suite_start = clock::now();

    // ---- Criterion 1: fake Poisson mimicking ------------------------------
    const auto c1_start = clock::now();
    SimulationConfig lsi_config = grid_config(100000, 1e-3, 1.0, 20240801);
    const SimulationResult lsi_run =
        simulate_lsi_particles(LsiModel{unit_intensity_model(), acceptance_factor()},
                               lsi_config);
    const double c1_seconds =
        std::chrono::duration<double>(clock::now() - c1_start).count();
    {
        const auto histogram = integer_histogram(lsi_run.coordinate_at(1.0, 0), 6);
        const auto expected = poisson_cells(1.0, 6);
        const auto chi = chi_square_counts(histogram, expected, ExpectedKind::ProbabilityMass);
        const bool pass = chi.p_value >= 0.01 && c1_seconds <= 60.0;
        report(1, "fake Poisson mimicking", pass,
               "chi2=" + fmt(chi.statistic) + " over " + std::to_string(chi.cells) +
                   " cells, p=" + fmt(chi.p_value) + " (need >= 0.01), runtime=" +
                   fmt(c1_seconds) + "s (need <= 60)");
    }

    // ---- Criterion 2: LSV mimicking against the lognormal oracle ----------
    SimulationConfig lsv_config = grid_config(100000, 1e-3, 1.0, 20240802);
    const SimulationResult lsv_run =
        simulate_lsv_particles(LsvModel{acceptance_lv_model(), acceptance_factor()},
                               lsv_config);
    SimulationConfig lv_config = grid_config(100000, 1e-3, 1.0, 20240803);
    const SimulationResult lv_run = simulate_reference_lv(acceptance_lv_model(), lv_config);
    {
        auto lognormal = [](double x) { return lognormal_cdf(x, -0.02, 0.2); };
        const auto ks_lsv = ks_vs_cdf(
            EmpiricalDistribution::from_samples(lsv_run.coordinate_at(1.0, 0)), lognormal);
        const auto ks_lv = ks_vs_cdf(
            EmpiricalDistribution::from_samples(lv_run.coordinate_at(1.0, 0)), lognormal);
        const bool pass = ks_lsv.statistic <= 0.01 && ks_lv.statistic <= 0.01;
        report(2, "LSV mimicking vs lognormal(-0.02, 0.04)", pass,
               "D_lsv=" + fmt(ks_lsv.statistic) + ", D_lv=" + fmt(ks_lv.statistic) +
                   " (need both <= 0.01)");
    }

    // ---- Criterion 3: fake Hawkes vs its reference -------------------------
    SimulationConfig fh_config = grid_config(10000, 1e-3, 1.0, 20240804);
    const SimulationResult fh_run = simulate_fake_hawkes_particles(
        FakeHawkesModel{acceptance_hawkes_model(), acceptance_factor()}, fh_config);
    SimulationConfig hawkes_config = grid_config(10000, 0.0, 1.0, 20240805);
    const SimulationResult hawkes_run =
        simulate_reference_hawkes(acceptance_hawkes_model(), hawkes_config);
    {
        const double target = hawkes_mean_ode(acceptance_hawkes_model(), 1.0);
        const auto fake_moment = moment_ci(fh_run.coordinate_at(1.0, 1), 1);
        const auto ref_moment = moment_ci(hawkes_run.coordinate_at(1.0, 1), 1);
        const bool mean_pass =
            std::abs(fake_moment.value - target) <= 3.0 * fake_moment.standard_error &&
            std::abs(ref_moment.value - target) <= 3.0 * ref_moment.standard_error;
        report(3, "fake Hawkes mean intensity vs ODE oracle", mean_pass,
               "m(1)=" + fmt(target) + ", fake=" + fmt(fake_moment.value) + "+-" +
                   fmt(fake_moment.standard_error) + ", reference=" + fmt(ref_moment.value) +
                   "+-" + fmt(ref_moment.standard_error) + " (need both within 3 SE)");

        const auto ks_y =
            ks_two_sample(EmpiricalDistribution::from_samples(fh_run.coordinate_at(1.0, 1)),
                          EmpiricalDistribution::from_samples(hawkes_run.coordinate_at(1.0, 1)));
        const auto counts_fake = fh_run.coordinate_at(1.0, 0);
        const auto counts_ref = hawkes_run.coordinate_at(1.0, 0);
        double top = 0.0;
        for (double x : counts_fake) top = std::max(top, x);
        for (double x : counts_ref) top = std::max(top, x);
        const auto chi = chi_square_counts(
            integer_histogram(counts_fake, static_cast<std::size_t>(top)),
            integer_histogram(counts_ref, static_cast<std::size_t>(top)),
            ExpectedKind::Histogram);
        const bool law_pass = ks_y.p_value >= 0.01 && chi.p_value >= 0.01;
        report(3, "fake Hawkes marginals vs reference", law_pass,
               "KS(Y_1) p=" + fmt(ks_y.p_value) + ", chi2(X_1) p=" + fmt(chi.p_value) +
                   " (need both >= 0.01)");
    }

    // ---- Criterion 4: FPKE residual within budget ---------------------------
    {
        SimulationConfig li_config = grid_config(100000, 1e-3, 1.0, 20240806);
        const SimulationResult li_run = simulate_reference_li(unit_intensity_model(), li_config);

        bool pass = true;
        std::string detail;
        for (const auto* entry : {&lv_run, &lsv_run, &lsi_run, &fh_run}) {
            const FpkeOutcome outcome = fpke_check(*entry, 5);
            pass = pass && outcome.pass;
            detail += entry->model + ": max|res|=" + fmt(outcome.max_residual) + " C=" +
                      fmt(entry->fpke_budget_constant) +
                      (outcome.pass ? " ok; " : " VIOLATED; ");
        }

        // Poisson analytic case: both empirical sides reproduce
        // exp(-t) - 1 = -integral of exp(-s) within the budget.
        const auto slices = project_run(li_run);
        const auto bump = TestFunction::radial_bump(Vec{0.0}, 1.0, 1.0);
        const auto residual =
            fpke_residual(li_run, slices, bump, TruncationConfig(li_run.truncation_radius));
        bool poisson_pass = residual.within_budget(li_run.fpke_budget_constant);
        double worst = -1e300;  // negative = slack left in the budget
        for (const auto& point : residual.points) {
            const double analytic = std::exp(-point.time) - 1.0;
            const double budget = li_run.fpke_budget_constant * residual.quadrature_spacing;
            const double lhs_gap = std::abs(point.lhs - analytic) - 3.0 * point.se_lhs;
            const double rhs_gap = std::abs(point.rhs - analytic) - 3.0 * point.se_rhs;
            worst = std::max({worst, lhs_gap - budget, rhs_gap - budget});
            poisson_pass = poisson_pass && lhs_gap <= budget && rhs_gap <= budget;
        }
        pass = pass && poisson_pass;
        detail += "poisson-identity worst margin=" + fmt(worst) +
                  (poisson_pass ? " ok" : " VIOLATED");
        report(4, "FPKE weak-identity residual", pass, detail);
    }

    // ---- Criterion 5: hypothesis checkers -----------------------------------
    {
        bool pass = true;
        std::string detail;
        double lsi_growth = 0.0;
        for (const auto* entry : {&lv_run, &lsv_run, &lsi_run, &fh_run}) {
            const HypothesesReport hypotheses = hypotheses_report(*entry);
            pass = pass && hypotheses.integrability.finite &&
                   std::isfinite(hypotheses.growth.supremum);
            detail += entry->model + ": integ=" + fmt(hypotheses.integrability.estimate) +
                      "+-" + fmt(hypotheses.integrability.standard_error) + " growth=" +
                      fmt(hypotheses.growth.supremum) + "; ";
            if (entry == &lsi_run) {
                lsi_growth = hypotheses.growth.supremum;
            }
        }
        const bool lsi_bound = lsi_growth <= std::log(2.0) + 1e-6;
        pass = pass && lsi_bound;
        detail += "LSI growth bound " + fmt(lsi_growth) + " vs log2+1e-6=" +
                  fmt(std::log(2.0) + 1e-6) + (lsi_bound ? " ok" : " VIOLATED");
        report(5, "integrability and growth hypotheses", pass, detail);
    }

    // ---- Criterion 6: property suites ---------------------------------------
    {
        bool pass = true;
        std::string detail;

        // Tower property and per-bin orthogonality at 1e-12 relative.
        {
            RandomStream rng(606, 0, 0, Substream::Scratch);
            SnapshotSlice<double> slice;
            slice.states = PackedStates(1);
            const std::size_t n = 100000;
            for (std::size_t i = 0; i < n; ++i) {
                const double x = rng.normal();
                slice.states.data.push_back(x);
                slice.responses.push_back(std::cos(x) + 0.3 * rng.normal());
                slice.weights.push_back(rng.uniform() * 2.0);
            }
            const BinGrid grid = BinGrid::covering(slice.states, default_bin_count(n));
            const auto est = fit_binned(slice, grid);
            NeumaierSum truth, fitted, weight;
            std::vector<NeumaierSum> per_bin(grid.size());
            std::vector<double> scale(grid.size(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                const double w = slice.weights[i];
                const double value = est.evaluate(slice.states.row(i));
                truth.add(w * slice.responses[i]);
                fitted.add(w * value);
                weight.add(w);
                const std::size_t slot = grid.index(slice.states.row(i));
                per_bin[slot].add(w * (slice.responses[i] - value));
                scale[slot] += std::abs(w * slice.responses[i]);
            }
            const double tower_gap =
                std::abs(truth.value() - fitted.value()) / std::abs(truth.value());
            bool ortho = true;
            for (std::size_t s = 0; s < grid.size(); ++s) {
                ortho = ortho &&
                        std::abs(per_bin[s].value()) <= 1e-12 * std::max(1.0, scale[s]);
            }
            const bool ok = tower_gap <= 1e-12 && ortho;
            pass = pass && ok;
            detail += "tower=" + fmt(tower_gap) + (ok ? " ok; " : " VIOLATED; ");
        }

        // PSD preservation of conditional matrix estimates.
        {
            RandomStream rng(607, 0, 0, Substream::Scratch);
            SnapshotSlice<Mat> slice;
            slice.states = PackedStates(1);
            for (int i = 0; i < 3000; ++i) {
                slice.states.data.push_back(rng.normal());
                Mat m(2, 2);
                for (std::size_t r = 0; r < 2; ++r) {
                    for (std::size_t c = 0; c < 2; ++c) {
                        m(r, c) = rng.normal();
                    }
                }
                Mat psd(2, 2);
                for (std::size_t r = 0; r < 2; ++r) {
                    for (std::size_t c = 0; c < 2; ++c) {
                        double s = 0.0;
                        for (std::size_t k = 0; k < 2; ++k) {
                            s += m(k, r) * m(k, c);
                        }
                        psd(r, c) = s;
                    }
                }
                slice.responses.push_back(psd);
            }
            const auto est = fit_binned(slice, BinGrid::covering(slice.states, 20));
            bool psd_ok = true;
            for (double x = -3.0; x <= 3.0; x += 0.05) {
                psd_ok = psd_ok && is_psd(est.evaluate(Vec{x}), 1e-12);
            }

            // Same property through the characteristics projection itself.
            CharacteristicsSlice chars;
            chars.time = 0.0;
            chars.states = PackedStates(2);
            chars.beta = PackedStates(2);
            chars.alpha = PackedStates(4);
            for (std::size_t i = 0; i < slice.responses.size(); ++i) {
                chars.states.data.push_back(slice.states.data[i]);
                chars.states.data.push_back(rng.normal());
                chars.beta.data.push_back(0.0);
                chars.beta.data.push_back(0.0);
                for (double c : slice.responses[i].data()) {
                    chars.alpha.data.push_back(c);
                }
            }
            const auto projected =
                project_characteristics(chars, grid_for_states(chars.states, 8));
            for (double x = -2.0; x <= 2.0; x += 0.2) {
                for (double y = -2.0; y <= 2.0; y += 0.2) {
                    const double point[2] = {x, y};
                    psd_ok = psd_ok && is_psd(projected.diffusion_at({point, 2}), 1e-12);
                }
            }
            pass = pass && psd_ok;
            detail += std::string("psd") + (psd_ok ? " ok; " : " VIOLATED; ");
        }

        // Generator linearity at 1e-12.
        {
            RandomStream rng(608, 0, 0, Substream::Scratch);
            bool linear_ok = true;
            for (int trial = 0; trial < 50; ++trial) {
                JumpKernelSpec kernel;
                kernel.add_atom(rng.uniform(), Vec{0.2 + rng.uniform()});
                Mat a(1, 1);
                a(0, 0) = rng.uniform();
                ProjectedCharacteristics pc;
                const Vec b{rng.uniform() * 2.0 - 1.0};
                pc.drift = [b](double, const Vec&) { return b; };
                pc.diffusion = [a](double, const Vec&) { return a; };
                pc.jumps = [kernel](double, const Vec&) { return kernel; };
                const auto f = TestFunction::radial_bump(Vec{rng.uniform() - 0.5}, 1.1, 1.0);
                const auto g = TestFunction::radial_bump(Vec{rng.uniform() - 0.5}, 0.7, 2.0);
                const double c1 = rng.uniform() * 4.0 - 2.0;
                const double c2 = rng.uniform() * 4.0 - 2.0;
                const auto combo = TestFunction::linear_combination(c1, f, c2, g);
                const Vec x{rng.uniform() - 0.5};
                const TruncationConfig trunc(0.5);
                const double lf = apply_generator(pc, f, 0.0, x, trunc);
                const double lg = apply_generator(pc, g, 0.0, x, trunc);
                const double lc = apply_generator(pc, combo, 0.0, x, trunc);
                linear_ok = linear_ok && std::abs(lc - c1 * lf - c2 * lg) <=
                                             1e-12 * (1.0 + std::abs(lf) + std::abs(lg));
            }
            pass = pass && linear_ok;
            detail += std::string("generator-linearity") + (linear_ok ? " ok; " : " VIOLATED; ");
        }

        // Truncation round trip, exact.
        {
            RandomStream rng(609, 0, 0, Substream::Scratch);
            bool trip_ok = true;
            for (int trial = 0; trial < 100; ++trial) {
                JumpKernelSpec kernel;
                for (int atom = 0; atom < 3; ++atom) {
                    const double size =
                        std::floor(rng.uniform() * 128.0 - 64.0) / 32.0;
                    kernel.add_atom(std::floor(rng.uniform() * 64.0) / 16.0,
                                    Vec{size == 0.0 ? 0.5 : size});
                }
                const Vec beta{std::floor(rng.uniform() * 256.0 - 128.0) / 64.0};
                const double r1 = 0.25 + rng.uniform() * 2.0;
                const double r2 = 0.25 + rng.uniform() * 2.0;
                const Vec back =
                    change_truncation(kernel, change_truncation(kernel, beta, r1, r2), r2, r1);
                trip_ok = trip_ok && back == beta;
            }
            pass = pass && trip_ok;
            detail += std::string("truncation-roundtrip") + (trip_ok ? " ok; " : " VIOLATED; ");
        }

        // Test function finite differences at 1e-5 relative.
        {
            RandomStream rng(610, 0, 0, Substream::Scratch);
            const auto f = TestFunction::radial_bump(Vec{0.2, -0.4}, 1.3, 1.0);
            bool fd_ok = true;
            for (int point = 0; point < 100; ++point) {
                Vec x{0.2 + (rng.uniform() - 0.5) * 1.4, -0.4 + (rng.uniform() - 0.5) * 1.4};
                const double h = 4e-6 * 1.3;
                const Vec grad = f.gradient(x);
                for (std::size_t k = 0; k < 2; ++k) {
                    Vec hi = x, lo = x;
                    hi[k] += h;
                    lo[k] -= h;
                    const double fd = (f.value(hi) - f.value(lo)) / (2.0 * h);
                    const double denom =
                        std::max({std::abs(grad[k]), std::abs(fd), 1e-3 / 1.3});
                    fd_ok = fd_ok && std::abs(fd - grad[k]) / denom <= 1e-5;
                }
            }
            pass = pass && fd_ok;
            detail += std::string("bump-fd") + (fd_ok ? " ok; " : " VIOLATED; ");
        }

        // Determinism across worker counts, bit exact.
        {
            SimulationConfig config = grid_config(20000, 2e-3, 1.0, 611);
            config.record_events = true;
            config.workers = 1;
            const auto serial = simulate_lsv_particles(
                LsvModel{acceptance_lv_model(), acceptance_factor()}, config);
            config.workers = 2;
            const auto two = simulate_lsv_particles(
                LsvModel{acceptance_lv_model(), acceptance_factor()}, config);
            config.workers = 4;
            const auto four = simulate_lsv_particles(
                LsvModel{acceptance_lv_model(), acceptance_factor()}, config);
            const bool deterministic = frames_identical(serial, two) &&
                                       frames_identical(serial, four);
            pass = pass && deterministic;
            detail += std::string("worker-determinism") +
                      (deterministic ? " ok; " : " VIOLATED; ");
        }

        // Degenerate-factor reduction, path identical under shared seeds.
        {
            StochasticFactorSpec degenerate;
            degenerate.low = 0.7;
            degenerate.high = 0.7;
            degenerate.rate_up = 1.0;
            degenerate.rate_down = 1.0;

            SimulationConfig config = grid_config(20000, 2e-3, 1.0, 612);
            const auto lv_small = simulate_reference_lv(acceptance_lv_model(), config);
            const auto lsv_small = simulate_lsv_particles(
                LsvModel{acceptance_lv_model(), degenerate}, config);

            SimulationConfig li_cfg = grid_config(20000, 2e-3, 1.0, 613);
            const auto li_small = simulate_reference_li(unit_intensity_model(), li_cfg);
            const auto lsi_small = simulate_lsi_particles(
                LsiModel{unit_intensity_model(), degenerate}, li_cfg);

            // The grid-stepped fake Hawkes cannot be path-identical to the
            // event-driven reference; the reduction claim there is that the
            // factor disappears entirely, checked across two different
            // degenerate levels (its in-law match is criterion 3).
            StochasticFactorSpec other_level = degenerate;
            other_level.low = other_level.high = 1.6;
            SimulationConfig fh_cfg = grid_config(5000, 2e-3, 1.0, 614);
            const auto fh_a = simulate_fake_hawkes_particles(
                FakeHawkesModel{acceptance_hawkes_model(), degenerate}, fh_cfg);
            const auto fh_b = simulate_fake_hawkes_particles(
                FakeHawkesModel{acceptance_hawkes_model(), other_level}, fh_cfg);

            const bool reduction = frames_identical(lv_small, lsv_small) &&
                                   frames_identical(li_small, lsi_small) &&
                                   frames_identical(fh_a, fh_b);
            pass = pass && reduction;
            detail += std::string("degenerate-reduction") + (reduction ? " ok" : " VIOLATED");
        }

        report(6, "exactness property suites", pass, detail);
    }

    // ---- Criterion 7: statistical calibration under the null ----------------
    {
        const int repetitions = 200;
        int ks_two = 0;
        int ks_one = 0;
        int chi_pmf = 0;
        int chi_two = 0;
        for (int rep = 0; rep < repetitions; ++rep) {
            RandomStream rng(700, static_cast<std::uint64_t>(rep), 0, Substream::Scratch);
            std::vector<double> a(500), b(500);
            for (auto& x : a) x = rng.normal();
            for (auto& x : b) x = rng.normal();
            if (ks_two_sample(EmpiricalDistribution::from_samples(a),
                              EmpiricalDistribution::from_samples(b))
                    .p_value < 0.01) {
                ++ks_two;
            }
            if (ks_vs_cdf(EmpiricalDistribution::from_samples(a),
                          [](double x) { return normal_cdf(x); })
                    .p_value < 0.01) {
                ++ks_one;
            }
            std::vector<double> pois_a(2000), pois_b(2000);
            for (auto& x : pois_a) x = poisson_count(3.0, rng);
            for (auto& x : pois_b) x = poisson_count(3.0, rng);
            if (chi_square_counts(integer_histogram(pois_a, 10), poisson_cells(3.0, 10),
                                  ExpectedKind::ProbabilityMass)
                    .p_value < 0.01) {
                ++chi_pmf;
            }
            if (chi_square_counts(integer_histogram(pois_a, 10), integer_histogram(pois_b, 10),
                                  ExpectedKind::Histogram)
                    .p_value < 0.01) {
                ++chi_two;
            }
        }
        const bool pass = ks_two <= 4 && ks_one <= 4 && chi_pmf <= 4 && chi_two <= 4;
        report(7, "null calibration of the tests", pass,
               "rejections at 0.01 over 200 runs: ks2=" + std::to_string(ks_two) + ", ks1=" +
                   std::to_string(ks_one) + ", chi2-pmf=" + std::to_string(chi_pmf) +
                   ", chi2-2smp=" + std::to_string(chi_two) + " (need each <= 4)");
    }

    const double total =
        std::chrono::duration<double>(clock::now() - suite_start).count();
    std::printf("%d of 7 criteria failed; total runtime %.1fs\n", failures, total);
    return failures;
}
