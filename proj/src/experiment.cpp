#include "mimic/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace mimic {

namespace {

struct RawEntry {
    std::string value;
    int line = 0;
    mutable bool used = false;
};

class ConfigReader {
public:
    ConfigReader(const std::string& text, std::string name) : name_(std::move(name)) {
        std::istringstream in(text);
        std::string line;
        int number = 0;
        while (std::getline(in, line)) {
            ++number;
            const auto hash = line.find('#');
            if (hash != std::string::npos) {
                line = line.substr(0, hash);
            }
            const std::string trimmed = trim(line);
            if (trimmed.empty()) {
                continue;
            }
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos) {
                throw ConfigError(trimmed, number, "expected 'key = value'");
            }
            const std::string key = trim(trimmed.substr(0, eq));
            const std::string value = trim(trimmed.substr(eq + 1));
            if (key.empty()) {
                throw ConfigError("", number, "empty key");
            }
            if (entries_.count(key) != 0) {
                throw ConfigError(key, number, "duplicate key");
            }
            entries_[key] = RawEntry{value, number, false};
            order_.emplace_back(key, value);
        }
    }

    static std::string trim(const std::string& s) {
        const auto begin = s.find_first_not_of(" \t\r");
        if (begin == std::string::npos) {
            return "";
        }
        const auto end = s.find_last_not_of(" \t\r");
        return s.substr(begin, end - begin + 1);
    }

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    std::string require_string(const std::string& key) {
        const auto it = entries_.find(key);
        if (it == entries_.end()) {
            throw ConfigError(key, 0, "required field is missing");
        }
        it->second.used = true;
        return it->second.value;
    }

    std::string string_or(const std::string& key, const std::string& fallback) {
        return has(key) ? require_string(key) : fallback;
    }

    double require_number(const std::string& key) { return parse_number(key, require_string(key)); }

    double number_or(const std::string& key, double fallback) {
        return has(key) ? require_number(key) : fallback;
    }

    bool bool_or(const std::string& key, bool fallback) {
        if (!has(key)) {
            return fallback;
        }
        const std::string v = require_string(key);
        if (v == "true" || v == "1") return true;
        if (v == "false" || v == "0") return false;
        throw ConfigError(key, line_of(key), "expected true or false, got '" + v + "'");
    }

    std::vector<double> number_list_or(const std::string& key) {
        std::vector<double> out;
        if (!has(key)) {
            return out;
        }
        const std::string v = require_string(key);
        std::stringstream items(v);
        std::string item;
        while (std::getline(items, item, ',')) {
            out.push_back(parse_number(key, trim(item)));
        }
        return out;
    }

    int line_of(const std::string& key) const {
        const auto it = entries_.find(key);
        return it == entries_.end() ? 0 : it->second.line;
    }

    void reject_unused() const {
        for (const auto& [key, entry] : entries_) {
            if (!entry.used) {
                throw ConfigError(key, entry.line, "unknown field");
            }
        }
    }

    const FlatMap& order() const { return order_; }

private:
    double parse_number(const std::string& key, const std::string& text) {
        try {
            std::size_t consumed = 0;
            const double value = std::stod(text, &consumed);
            if (consumed != text.size()) {
                throw std::invalid_argument("trailing characters");
            }
            return value;
        } catch (const std::exception&) {
            throw ConfigError(key, line_of(key), "expected a number, got '" + text + "'");
        }
    }

    std::string name_;
    std::map<std::string, RawEntry> entries_;
    FlatMap order_;
};

void require_positive(const std::string& field, double value) {
    if (!(value > 0.0)) {
        throw ConfigError(field, 0, "must be positive, got " + format_double(value));
    }
}

StochasticFactorSpec read_factor(ConfigReader& reader) {
    StochasticFactorSpec factor;
    factor.low = reader.require_number("factor_low");
    factor.high = reader.require_number("factor_high");
    factor.rate_up = reader.number_or("factor_rate_up", 0.0);
    factor.rate_down = reader.number_or("factor_rate_down", 0.0);
    const std::string start = reader.string_or("factor_start", "stationary");
    if (start == "low") {
        factor.start = StochasticFactorSpec::Start::Low;
    } else if (start == "high") {
        factor.start = StochasticFactorSpec::Start::High;
    } else if (start == "stationary") {
        factor.start = StochasticFactorSpec::Start::Stationary;
    } else {
        throw ConfigError("factor_start", reader.line_of("factor_start"),
                          "expected low, high or stationary");
    }
    try {
        factor.validate();
    } catch (const std::exception& e) {
        throw ConfigError("factor_low", 0, e.what());
    }
    return factor;
}

}  // namespace

ExperimentConfig ExperimentConfig::parse_text(const std::string& text, const std::string& name) {
    ConfigReader reader(text, name);
    ExperimentConfig config;
    config.name = name;
    config.model = reader.require_string("model");
    static const std::set<std::string> kModels{"lv", "lsv", "li", "lsi", "hawkes", "fake_hawkes"};
    if (kModels.count(config.model) == 0) {
        throw ConfigError("model", reader.line_of("model"),
                          "unknown model '" + config.model + "'");
    }

    const double particles = reader.require_number("particles");
    if (!(particles >= 1.0) || particles != std::floor(particles)) {
        throw ConfigError("particles", reader.line_of("particles"),
                          "must be a positive integer");
    }
    config.sim.particles = static_cast<std::size_t>(particles);
    config.sim.horizon = reader.require_number("horizon");
    require_positive("horizon", config.sim.horizon);
    const double seed = reader.require_number("seed");
    if (seed < 0.0 || seed != std::floor(seed)) {
        throw ConfigError("seed", reader.line_of("seed"), "must be a nonnegative integer");
    }
    config.sim.seed = static_cast<std::uint64_t>(seed);

    const bool needs_grid = config.model != "hawkes";
    if (needs_grid) {
        config.sim.dt = reader.require_number("dt");
        require_positive("dt", config.sim.dt);
    } else {
        config.sim.dt = reader.number_or("dt", 0.0);
    }

    config.sim.snapshot_times = reader.number_list_or("snapshot_times");
    const double snapshot_count = reader.number_or("snapshot_count", 0.0);
    if (snapshot_count > 0.0) {
        const auto intervals = static_cast<std::size_t>(snapshot_count);
        for (std::size_t k = 1; k < intervals; ++k) {
            config.sim.snapshot_times.push_back(config.sim.horizon * static_cast<double>(k) /
                                                static_cast<double>(intervals));
        }
    }
    for (double t : config.sim.snapshot_times) {
        if (t < 0.0 || t > config.sim.horizon * (1.0 + 1e-9)) {
            throw ConfigError("snapshot_times", reader.line_of("snapshot_times"),
                              "snapshot times must lie in [0, horizon]");
        }
    }

    const std::string scheme = reader.string_or("estimator_scheme", "binned");
    if (scheme == "binned") {
        config.sim.estimator.scheme = EstimatorConfig::Scheme::Binned;
    } else if (scheme == "kernel") {
        config.sim.estimator.scheme = EstimatorConfig::Scheme::Kernel;
    } else {
        throw ConfigError("estimator_scheme", reader.line_of("estimator_scheme"),
                          "expected binned or kernel");
    }
    const double bins = reader.number_or("estimator_bins", 0.0);
    if (bins < 0.0 || bins != std::floor(bins)) {
        throw ConfigError("estimator_bins", reader.line_of("estimator_bins"),
                          "must be a nonnegative integer");
    }
    config.sim.estimator.bins = static_cast<std::size_t>(bins);
    config.sim.estimator.bandwidth = reader.number_or("estimator_bandwidth", 0.0);
    if (config.sim.estimator.scheme == EstimatorConfig::Scheme::Kernel &&
        config.is_mckean_vlasov()) {
        require_positive("estimator_bandwidth", config.sim.estimator.bandwidth);
    }

    const double workers = reader.number_or("workers", 0.0);
    if (workers < 0.0 || workers != std::floor(workers)) {
        throw ConfigError("workers", reader.line_of("workers"),
                          "must be a nonnegative integer");
    }
    config.sim.workers = static_cast<unsigned>(workers);
    config.sim.record_events = reader.bool_or("record_events", true);

    if (config.model == "lv" || config.model == "lsv") {
        config.rate = reader.require_number("rate");
        config.sigma = reader.require_number("sigma");
        require_positive("sigma", config.sigma);
        config.initial_price = reader.require_number("s0");
        require_positive("s0", config.initial_price);
    } else if (config.model == "li" || config.model == "lsi") {
        config.lambda_const = reader.number_or("lambda_const", 0.0);
        config.lambda_time_slope = reader.number_or("lambda_time_slope", 0.0);
        if (config.lambda_const < 0.0) {
            throw ConfigError("lambda_const", reader.line_of("lambda_const"),
                              "must be nonnegative");
        }
        const double implied_bound =
            config.lambda_const + std::max(0.0, config.lambda_time_slope) * config.sim.horizon;
        config.lambda_bound = reader.number_or("lambda_bound", implied_bound);
        require_positive("lambda_bound", config.lambda_bound);
    } else {
        config.base_rate = reader.require_number("base_rate");
        require_positive("base_rate", config.base_rate);
        config.excitation = reader.require_number("excitation");
        require_positive("excitation", config.excitation);
        config.reversion = reader.require_number("reversion");
        require_positive("reversion", config.reversion);
    }

    if (config.is_mckean_vlasov()) {
        config.factor = read_factor(reader);
    }

    const double fpke_functions = reader.number_or("fpke_functions", 0.0);
    if (fpke_functions < 0.0 || fpke_functions != std::floor(fpke_functions)) {
        throw ConfigError("fpke_functions", reader.line_of("fpke_functions"),
                          "must be a nonnegative integer");
    }
    config.fpke_functions = static_cast<std::size_t>(fpke_functions);
    config.fpke_radius = reader.number_or("fpke_radius", 0.0);
    config.hypotheses = reader.bool_or("hypotheses", false);
    config.output_dir = reader.string_or("output_dir", "");

    reader.reject_unused();
    config.raw = reader.order();
    return config;
}

ExperimentConfig ExperimentConfig::parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config", 0, "cannot open config file " + path.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_text(buffer.str(), path.stem().string());
}

SimulationResult run_model(const ExperimentConfig& config) {
    if (config.model == "lv" || config.model == "lsv") {
        LocalVolModel model;
        model.rate = config.rate;
        const double sigma = config.sigma;
        model.sigma = [sigma](double, double) { return sigma; };
        model.sigma_bound = sigma;
        model.initial_price = config.initial_price;
        if (config.model == "lv") {
            return simulate_reference_lv(model, config.sim);
        }
        return simulate_lsv_particles(LsvModel{model, config.factor}, config.sim);
    }
    if (config.model == "li" || config.model == "lsi") {
        LocalIntensityModel model;
        const double c0 = config.lambda_const;
        const double slope = config.lambda_time_slope;
        model.intensity = [c0, slope](double t, double) { return c0 + slope * t; };
        model.intensity_bound = config.lambda_bound;
        if (config.model == "li") {
            return simulate_reference_li(model, config.sim);
        }
        return simulate_lsi_particles(LsiModel{model, config.factor}, config.sim);
    }
    HawkesModel model;
    model.base_rate = config.base_rate;
    model.excitation = config.excitation;
    model.reversion = config.reversion;
    if (config.model == "hawkes") {
        return simulate_reference_hawkes(model, config.sim);
    }
    return simulate_fake_hawkes_particles(FakeHawkesModel{model, config.factor}, config.sim);
}

std::filesystem::path resolve_run_directory(const ExperimentConfig& config) {
    if (!config.output_dir.empty()) {
        return config.output_dir;
    }
    const char* root = std::getenv("MIMIC_OUTPUT_ROOT");
    if (root == nullptr || *root == '\0') {
        throw ConfigError("output_dir", 0,
                          "output_dir is not set and MIMIC_OUTPUT_ROOT is not defined");
    }
    return std::filesystem::path(root) / config.name;
}

namespace {

std::string timestamp_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buffer[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buffer;
}

Table snapshots_table(const SimulationResult& run) {
    Table table;
    table.columns = {"time", "particle_id"};
    for (std::size_t k = 0; k < run.dim; ++k) {
        table.columns.push_back("coord_" + std::to_string(k));
    }
    for (const auto& frame : run.frames) {
        for (std::size_t i = 0; i < frame.states.count(); ++i) {
            std::vector<double> row{frame.time, static_cast<double>(i)};
            const auto state = frame.states.row(i);
            row.insert(row.end(), state.begin(), state.end());
            table.rows.push_back(std::move(row));
        }
    }
    return table;
}

Table characteristics_table(const SimulationResult& run) {
    const std::size_t d = run.dim;
    const std::size_t j = run.jump_atoms.size();
    Table table;
    table.columns = {"time", "particle_id"};
    for (std::size_t k = 0; k < d; ++k) {
        table.columns.push_back("beta_" + std::to_string(k));
    }
    for (std::size_t p = 0; p < d; ++p) {
        for (std::size_t q = 0; q < d; ++q) {
            table.columns.push_back("alpha_" + std::to_string(p) + std::to_string(q));
        }
    }
    for (std::size_t a = 0; a < j; ++a) {
        table.columns.push_back("jump_rate_" + std::to_string(a));
    }
    for (const auto& frame : run.frames) {
        for (std::size_t i = 0; i < frame.states.count(); ++i) {
            std::vector<double> row{frame.time, static_cast<double>(i)};
            const auto beta = frame.beta.row(i);
            row.insert(row.end(), beta.begin(), beta.end());
            const auto alpha = frame.alpha.row(i);
            row.insert(row.end(), alpha.begin(), alpha.end());
            for (std::size_t a = 0; a < j; ++a) {
                row.push_back(frame.jump_rates[i * j + a]);
            }
            table.rows.push_back(std::move(row));
        }
    }
    return table;
}

Table integrability_table(const SimulationResult& run) {
    Table table;
    table.columns = {"particle_id", "drift_integral", "diffusion_integral", "jump_mass_integral"};
    for (std::size_t i = 0; i < run.path_integrals.paths(); ++i) {
        table.rows.push_back({static_cast<double>(i), run.path_integrals.drift[i],
                              run.path_integrals.diffusion[i], run.path_integrals.jump_mass[i]});
    }
    return table;
}

Table events_table(const SimulationResult& run) {
    Table table;
    table.columns = {"time", "particle_id"};
    for (std::size_t k = 0; k < run.dim; ++k) {
        table.columns.push_back("size_" + std::to_string(k));
    }
    for (const auto& event : run.events) {
        std::vector<double> row{event.time, static_cast<double>(event.particle)};
        row.insert(row.end(), event.size.begin(), event.size.end());
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::string join_vec(const Vec& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out += (i == 0 ? "" : ",") + format_double(v[i]);
    }
    return out;
}

Vec split_vec(const std::string& text) {
    Vec out;
    std::stringstream items(text);
    std::string item;
    while (std::getline(items, item, ',')) {
        out.push_back(std::stod(item));
    }
    return out;
}

}  // namespace

void write_run(const SimulationResult& run, const ExperimentConfig& config,
               const std::filesystem::path& directory) {
    const std::string started = timestamp_now();
    std::filesystem::create_directories(directory);

    std::vector<std::string> files;
    write_table(directory / "snapshots.tsv", snapshots_table(run));
    files.push_back("snapshots.tsv");
    write_table(directory / "characteristics.tsv", characteristics_table(run));
    files.push_back("characteristics.tsv");
    write_table(directory / "integrability.tsv", integrability_table(run));
    files.push_back("integrability.tsv");
    if (config.sim.record_events) {
        write_table(directory / "events.tsv", events_table(run));
        files.push_back("events.tsv");
    }

    if (config.fpke_functions > 0) {
        const FpkeRunReport report =
            fpke_run_report(run, config.fpke_functions, config.fpke_radius,
                            config.sim.estimator.bins);
        write_table(directory / "fpke_report.tsv", report.to_table());
        files.push_back("fpke_report.tsv");
        std::ofstream summary(directory / "fpke_summary.txt");
        summary << report.summary();
        files.push_back("fpke_summary.txt");
    }
    if (config.hypotheses) {
        const HypothesesReport report = hypotheses_report(run, config.sim.estimator.bins);
        std::ofstream out(directory / "hypotheses.txt");
        out << report.to_text();
        files.push_back("hypotheses.txt");
    }

    FlatMap manifest;
    manifest.emplace_back("model", run.model);
    manifest.emplace_back("dim", std::to_string(run.dim));
    manifest.emplace_back("particles", std::to_string(run.particles));
    manifest.emplace_back("dt", format_double(run.dt));
    manifest.emplace_back("horizon", format_double(run.horizon));
    manifest.emplace_back("seed", std::to_string(run.seed));
    manifest.emplace_back("truncation_radius", format_double(run.truncation_radius));
    manifest.emplace_back("fpke_budget_constant", format_double(run.fpke_budget_constant));
    manifest.emplace_back("frame_count", std::to_string(run.frames.size()));
    manifest.emplace_back("event_count", std::to_string(run.events.size()));
    manifest.emplace_back("atom_count", std::to_string(run.jump_atoms.size()));
    for (std::size_t a = 0; a < run.jump_atoms.size(); ++a) {
        manifest.emplace_back("atom_" + std::to_string(a), join_vec(run.jump_atoms[a]));
    }
    manifest.emplace_back("code.version", "mimic 0.1.0");
    manifest.emplace_back("run.started", started);
    manifest.emplace_back("run.finished", timestamp_now());
    for (const auto& [key, value] : config.raw) {
        manifest.emplace_back("config." + key, value);
    }
    for (const auto& file : files) {
        manifest.emplace_back("files." + file, file_digest(directory / file));
    }
    write_flat_map(directory / "manifest.txt", manifest);
}

std::filesystem::path run_experiment(const std::filesystem::path& config_path) {
    const ExperimentConfig config = ExperimentConfig::parse_file(config_path);
    const std::filesystem::path directory = resolve_run_directory(config);
    const SimulationResult run = run_model(config);
    write_run(run, config, directory);
    return directory;
}

SimulationResult load_run(const std::filesystem::path& directory) {
    const FlatMap manifest = read_flat_map(directory / "manifest.txt");
    SimulationResult run;
    run.model = flat_get(manifest, "model");
    run.dim = std::stoul(flat_get(manifest, "dim"));
    run.particles = std::stoul(flat_get(manifest, "particles"));
    run.dt = std::stod(flat_get(manifest, "dt"));
    run.horizon = std::stod(flat_get(manifest, "horizon"));
    run.seed = std::stoull(flat_get(manifest, "seed"));
    run.truncation_radius = std::stod(flat_get(manifest, "truncation_radius"));
    run.fpke_budget_constant = std::stod(flat_get(manifest, "fpke_budget_constant"));
    const std::size_t atom_count = std::stoul(flat_get(manifest, "atom_count"));
    for (std::size_t a = 0; a < atom_count; ++a) {
        run.jump_atoms.push_back(split_vec(flat_get(manifest, "atom_" + std::to_string(a))));
    }

    const std::size_t d = run.dim;
    const std::size_t j = atom_count;
    const Table snapshots = read_table(directory / "snapshots.tsv");
    const Table characteristics = read_table(directory / "characteristics.tsv");
    if (snapshots.rows.size() != characteristics.rows.size()) {
        throw std::runtime_error("snapshot and characteristics tables disagree in " +
                                 directory.string());
    }
    std::map<double, std::size_t> frame_of_time;
    for (std::size_t r = 0; r < snapshots.rows.size(); ++r) {
        const double time = snapshots.rows[r][0];
        auto it = frame_of_time.find(time);
        if (it == frame_of_time.end()) {
            it = frame_of_time.emplace(time, run.frames.size()).first;
            run.frames.emplace_back();
            auto& frame = run.frames.back();
            frame.time = time;
            frame.states.dim = d;
            frame.beta.dim = d;
            frame.alpha.dim = d * d;
            frame.states.data.reserve(run.particles * d);
        }
        auto& frame = run.frames[it->second];
        const auto& srow = snapshots.rows[r];
        const auto& crow = characteristics.rows[r];
        for (std::size_t k = 0; k < d; ++k) {
            frame.states.data.push_back(srow[2 + k]);
        }
        for (std::size_t k = 0; k < d; ++k) {
            frame.beta.data.push_back(crow[2 + k]);
        }
        for (std::size_t k = 0; k < d * d; ++k) {
            frame.alpha.data.push_back(crow[2 + d + k]);
        }
        for (std::size_t a = 0; a < j; ++a) {
            frame.jump_rates.push_back(crow[2 + d + d * d + a]);
        }
    }
    // The writer emits frames in time order, but loaded runs must not rely on it.
    std::sort(run.frames.begin(), run.frames.end(),
              [](const SnapshotFrame& a, const SnapshotFrame& b) { return a.time < b.time; });

    const Table integrability = read_table(directory / "integrability.tsv");
    run.path_integrals.horizon = run.horizon;
    for (const auto& row : integrability.rows) {
        run.path_integrals.drift.push_back(row[1]);
        run.path_integrals.diffusion.push_back(row[2]);
        run.path_integrals.jump_mass.push_back(row[3]);
    }

    const auto events_path = directory / "events.tsv";
    if (std::filesystem::exists(events_path)) {
        const Table events = read_table(events_path);
        for (const auto& row : events.rows) {
            JumpEvent event;
            event.time = row[0];
            event.particle = static_cast<std::uint32_t>(row[1]);
            event.size.assign(row.begin() + 2, row.end());
            run.events.push_back(std::move(event));
        }
    }
    return run;
}

CompareSpec CompareSpec::parse(const std::string& text) {
    CompareSpec spec;
    std::stringstream parts(text);
    std::string part;
    while (std::getline(parts, part, ';')) {
        const std::string trimmed = ConfigReader::trim(part);
        if (trimmed.empty()) {
            continue;
        }
        const auto eq = trimmed.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("testspec", 0, "expected key=value segments, got '" + trimmed + "'");
        }
        const std::string key = trimmed.substr(0, eq);
        const std::string value = trimmed.substr(eq + 1);
        if (key == "times") {
            std::stringstream items(value);
            std::string item;
            while (std::getline(items, item, ',')) {
                spec.times.push_back(std::stod(item));
            }
        } else if (key == "significance") {
            spec.significance = std::stod(value);
        } else {
            throw ConfigError("testspec", 0, "unknown testspec key '" + key + "'");
        }
    }
    if (spec.times.empty()) {
        throw ConfigError("testspec", 0, "testspec must name at least one comparison time");
    }
    if (!(spec.significance > 0.0 && spec.significance < 1.0)) {
        throw ConfigError("testspec", 0, "significance must lie in (0, 1)");
    }
    return spec;
}

namespace {

bool integer_valued(const std::vector<double>& values) {
    for (double v : values) {
        if (v != std::nearbyint(v)) {
            return false;
        }
    }
    return true;
}

}  // namespace

ComparisonReport compare_runs(const std::filesystem::path& run_a,
                              const std::filesystem::path& run_b, const CompareSpec& spec) {
    const SimulationResult a = load_run(run_a);
    const SimulationResult b = load_run(run_b);
    if (a.dim != b.dim) {
        throw std::runtime_error("runs have different state dimensions");
    }

    std::vector<double> missing;
    for (double t : spec.times) {
        for (const auto* run : {&a, &b}) {
            try {
                (void)run->frame_at(t);
            } catch (const std::exception&) {
                missing.push_back(t);
                break;
            }
        }
    }
    if (!missing.empty()) {
        std::string list;
        for (double t : missing) {
            list += (list.empty() ? "" : ", ") + format_double(t);
        }
        throw std::runtime_error("comparison times missing from snapshot grids: " + list);
    }

    ComparisonReport report;
    report.significance = spec.significance;
    report.all_pass = true;
    for (double t : spec.times) {
        for (std::size_t k = 0; k < a.dim; ++k) {
            const std::vector<double> xs = a.coordinate_at(t, k);
            const std::vector<double> ys = b.coordinate_at(t, k);
            CoordinateComparison row;
            row.time = t;
            row.coordinate = k;
            if (integer_valued(xs) && integer_valued(ys)) {
                const double max_a = *std::max_element(xs.begin(), xs.end());
                const double max_b = *std::max_element(ys.begin(), ys.end());
                const auto top = static_cast<std::size_t>(std::max(max_a, max_b));
                const auto ha = integer_histogram(xs, top);
                const auto hb = integer_histogram(ys, top);
                const ChiSquareResult chi =
                    chi_square_counts(ha, hb, ExpectedKind::Histogram);
                row.test = "chi2";
                row.statistic = chi.statistic;
                row.p_value = chi.p_value;
            } else {
                const KsResult ks = ks_two_sample(EmpiricalDistribution::from_samples(xs),
                                                  EmpiricalDistribution::from_samples(ys));
                row.test = "ks";
                row.statistic = ks.statistic;
                row.p_value = ks.p_value;
            }
            row.pass = row.p_value >= spec.significance;
            report.all_pass = report.all_pass && row.pass;
            report.rows.push_back(row);
        }
    }
    return report;
}

std::string ComparisonReport::to_text() const {
    std::ostringstream out;
    out << "coordinate-wise marginal comparison (surrogate for equality of the full laws)\n";
    out << "significance = " << format_double(significance) << "\n";
    for (const auto& row : rows) {
        out << "t=" << format_double(row.time) << " coord_" << row.coordinate << " "
            << row.test << " statistic=" << format_double(row.statistic)
            << " p=" << format_double(row.p_value) << " " << (row.pass ? "PASS" : "FAIL")
            << "\n";
    }
    out << "verdict: " << (all_pass ? "PASS" : "FAIL") << "\n";
    return out.str();
}

HypothesesReport hypotheses_report(const SimulationResult& run, std::size_t bins,
                                   double tail_radius) {
    HypothesesReport report;
    report.integrability = check_integrability(run.path_integrals);
    report.truncation_radius = run.truncation_radius;

    const auto slices = std::make_shared<std::vector<ProjectedSlice>>(project_run(run, bins));
    const ProjectedCharacteristics pc = as_projected_characteristics(slices);

    std::vector<double> times;
    for (const auto& frame : run.frames) {
        times.push_back(frame.time);
    }
    std::vector<GrowthProbe> probes = growth_probe_grid(run.dim, tail_radius, 12, times);
    // Probe the simulated marginals themselves: every stride-th particle.
    const std::size_t stride = std::max<std::size_t>(1, run.particles / 512);
    for (const auto& frame : run.frames) {
        for (std::size_t i = 0; i < frame.states.count(); i += stride) {
            const auto row = frame.states.row(i);
            probes.push_back(GrowthProbe{frame.time, Vec(row.begin(), row.end())});
        }
    }
    report.probe_count = probes.size();
    report.growth = check_growth(pc, probes, TruncationConfig(run.truncation_radius));
    return report;
}

std::string HypothesesReport::to_text() const {
    std::ostringstream out;
    out << "integrability estimate = " << format_double(integrability.estimate) << " +- "
        << format_double(integrability.standard_error) << " over "
        << integrability.paths << " paths, finite = "
        << (integrability.finite ? "yes" : "no") << "\n";
    out << "growth supremum over " << probe_count
        << " probes = " << format_double(growth.supremum) << " at t="
        << format_double(growth.argmax.time) << ", |x|=" << format_double(norm(growth.argmax.state))
        << " (empirical probe supremum, not a proof)\n";
    out << "truncation radius = " << format_double(truncation_radius) << "\n";
    return out.str();
}

FpkeRunReport fpke_run_report(const SimulationResult& run, std::size_t function_count,
                              double radius, std::size_t bins) {
    if (run.frames.empty()) {
        throw std::invalid_argument("run has no snapshot frames");
    }
    // Cover the union of the marginal supports.
    Vec lo(run.dim, std::numeric_limits<double>::infinity());
    Vec hi(run.dim, -std::numeric_limits<double>::infinity());
    for (const auto& frame : run.frames) {
        for (std::size_t i = 0; i < frame.states.count(); ++i) {
            const auto row = frame.states.row(i);
            for (std::size_t k = 0; k < run.dim; ++k) {
                lo[k] = std::min(lo[k], row[k]);
                hi[k] = std::max(hi[k], row[k]);
            }
        }
    }
    if (radius <= 0.0) {
        double span = 0.0;
        for (std::size_t k = 0; k < run.dim; ++k) {
            span = std::max(span, hi[k] - lo[k]);
        }
        radius = std::max(0.5 * span, 1e-3);
    }

    const auto suite = test_function_suite(run.dim, lo, hi, radius, function_count);
    const auto slices = project_run(run, bins);
    const TruncationConfig trunc(run.truncation_radius);

    FpkeRunReport report;
    report.budget_constant = run.fpke_budget_constant;
    report.within_budget = true;
    for (std::size_t f = 0; f < suite.size(); ++f) {
        ResidualReport residual = fpke_residual(run, slices, suite[f], trunc);
        residual.function_index = f;
        report.within_budget =
            report.within_budget && residual.within_budget(report.budget_constant);
        report.functions.push_back(std::move(residual));
    }
    return report;
}

Table FpkeRunReport::to_table() const {
    Table table;
    table.columns = {"function", "time",   "lhs",
                     "rhs",      "residual", "se_lhs",
                     "se_rhs",   "se_residual", "rhs_preprojection",
                     "residual_preprojection", "se_residual_preprojection", "modes_gap",
                     "se_modes_gap"};
    for (const auto& function : functions) {
        for (const auto& p : function.points) {
            table.rows.push_back({static_cast<double>(function.function_index), p.time, p.lhs,
                                  p.rhs, p.residual, p.se_lhs, p.se_rhs, p.se_residual,
                                  p.rhs_preprojection, p.residual_preprojection,
                                  p.se_residual_preprojection, p.modes_gap, p.se_modes_gap});
        }
    }
    return table;
}

std::string FpkeRunReport::summary() const {
    std::ostringstream out;
    out << "budget: |residual| <= 3 SE + C * spacing with C = "
        << format_double(budget_constant) << "\n";
    for (const auto& function : functions) {
        out << "f" << function.function_index
            << ": max |residual| = " << format_double(function.max_abs_residual())
            << ", spacing = " << format_double(function.quadrature_spacing) << ", "
            << (function.within_budget(budget_constant) ? "PASS" : "FAIL") << "\n";
    }
    out << "verdict: " << (within_budget ? "PASS" : "FAIL") << "\n";
    return out.str();
}

}  // namespace mimic
