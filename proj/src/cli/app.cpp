#include <mafkit/cli.hpp>

#include <mafkit/csv.hpp>
#include <mafkit/error.hpp>
#include <mafkit/maf.hpp>
#include <mafkit/oracle.hpp>
#include <mafkit/resampling.hpp>
#include <mafkit/simulation.hpp>
#include <mafkit/smoothing.hpp>
#include <mafkit/version.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

namespace mafkit::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct RunConfig {
    std::string command;
    std::string input;
    std::string output;
    bool standardize = false;
    SmootherConfig smoother;
    int B = 1000;
    int block_len = 1;
    double alpha = 0.05;
    std::optional<std::uint64_t> seed;
    int n_factors = 1;
    std::string mode;
    std::string statistic = "snr";
    bool conservative = false;
    unsigned threads = 0;

    // select
    std::string method = "scree";
    double cutoff = 0.95;
    double holdout = 0.25;

    // simulate / power
    std::vector<double> b{0.8, 0.4, 0.2};
    std::vector<double> rho{0.0, 0.25, 0.5, 0.75};
    std::vector<double> multipliers{1.0};
    Eigen::Index n = 150;
    int reps = 100;
    std::string signal = "piecewise";
    double ar_phi = 0.0;
};

std::uint64_t resolve_seed(const RunConfig& cfg) {
    if (cfg.seed) {
        return *cfg.seed;
    }
    if (const char* env = std::getenv("MAFKIT_SEED"); env != nullptr && *env != '\0') {
        try {
            std::size_t used = 0;
            unsigned long long value = std::stoull(env, &used);
            if (used == std::string_view(env).size()) {
                return value;
            }
        } catch (const std::exception&) {
        }
        fail(ErrorCode::invalid_config, std::string("MAFKIT_SEED is not an unsigned integer: ") + env);
    }
    return 0;
}

ordered_json vector_json(VectorRef v) {
    ordered_json out = ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(v(i));
    }
    return out;
}

ordered_json matrix_json(MatrixRef m) {
    ordered_json out = ordered_json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out.push_back(vector_json(m.row(i).transpose()));
    }
    return out;
}

ordered_json config_json(const RunConfig& cfg, std::uint64_t seed) {
    ordered_json c;
    c["command"] = cfg.command;
    if (!cfg.input.empty()) {
        c["input"] = cfg.input;
    }
    c["output"] = cfg.output;
    c["standardize"] = cfg.standardize;
    c["span"] = cfg.smoother.span_fraction;
    c["degree"] = cfg.smoother.degree;
    c["B"] = cfg.B;
    c["block_len"] = cfg.block_len;
    c["alpha"] = cfg.alpha;
    c["factors"] = cfg.n_factors;
    c["seed"] = seed;
    if (cfg.command == "test" || cfg.command == "power") {
        c["statistic"] = cfg.statistic;
    }
    if (cfg.command == "test") {
        c["mode"] = cfg.mode.empty() ? "auto" : cfg.mode;
        c["conservative"] = cfg.conservative;
    }
    if (cfg.command == "select") {
        c["method"] = cfg.method;
        c["cutoff"] = cfg.cutoff;
        c["holdout"] = cfg.holdout;
    }
    if (cfg.command == "simulate" || cfg.command == "power") {
        c["b"] = cfg.b;
        c["rho"] = cfg.rho;
        c["multipliers"] = cfg.multipliers;
        c["n"] = cfg.n;
        c["signal"] = cfg.signal;
        c["ar_phi"] = cfg.ar_phi;
    }
    if (cfg.command == "simulate") {
        c["reps"] = cfg.reps;
    }
    return c;
}

ordered_json envelope(const RunConfig& cfg, std::uint64_t seed) {
    ordered_json j;
    j["version"] = version;
    j["seed"] = seed;
    j["config"] = config_json(cfg, seed);
    return j;
}

void write_json(const fs::path& path, const ordered_json& j) {
    write_file_atomic(path, j.dump(2) + "\n");
}

void write_csv(const fs::path& path, const std::vector<std::string>& header, MatrixRef values,
               const Vector* time = nullptr) {
    std::ostringstream os;
    write_matrix_csv(os, header, values, time);
    write_file_atomic(path, os.str());
}

std::vector<std::string> numbered(const std::string& prefix, Eigen::Index count) {
    std::vector<std::string> out;
    for (Eigen::Index j = 1; j <= count; ++j) {
        out.push_back(prefix + std::to_string(j));
    }
    return out;
}

TimeSeriesPanel load_panel(const RunConfig& cfg) {
    if (cfg.input.empty()) {
        fail(ErrorCode::invalid_config, "--input is required for " + cfg.command);
    }
    return ingest_csv(cfg.input, cfg.standardize);
}

ResampleMode parse_mode(const std::string& mode) {
    if (mode == "permutation") {
        return ResampleMode::permutation;
    }
    if (mode == "bootstrap") {
        return ResampleMode::bootstrap;
    }
    fail(ErrorCode::invalid_config, "unknown --mode '" + mode + "'");
}

TestStatistic parse_statistic(const std::string& name) {
    if (name == "snr") {
        return TestStatistic::snr;
    }
    if (name == "autocorrelation") {
        return TestStatistic::autocorrelation;
    }
    fail(ErrorCode::invalid_config, "unknown --statistic '" + name + "'");
}

SignalSpec parse_signal(const RunConfig& cfg, std::uint64_t seed) {
    static const std::map<std::string, SignalKind> kinds{
        {"linear", SignalKind::linear},
        {"quadratic", SignalKind::quadratic},
        {"sinusoid-mixture", SignalKind::sinusoid_mixture},
        {"piecewise", SignalKind::piecewise_interpolated},
    };
    auto it = kinds.find(cfg.signal);
    if (it == kinds.end()) {
        fail(ErrorCode::invalid_config, "unknown --signal '" + cfg.signal + "'");
    }
    SignalSpec spec;
    spec.kind = it->second;
    spec.n = cfg.n;
    spec.seed = seed;
    return spec;
}

Vector to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

int cmd_decompose(const RunConfig& cfg, std::uint64_t seed) {
    TimeSeriesPanel panel = load_panel(cfg);
    MafDecomposition maf = compute_maf(panel);
    PcaDecomposition pca = compute_pca(panel, true);
    Eigen::Index p = panel.p();
    fs::path dir = cfg.output;

    // One row per input series, MAF columns then PC columns.
    std::ostringstream coef;
    coef << "series";
    for (const auto& name : numbered("MAF", p)) {
        coef << ',' << name;
    }
    for (const auto& name : numbered("PC", p)) {
        coef << ',' << name;
    }
    coef << '\n';
    for (Eigen::Index i = 0; i < p; ++i) {
        coef << panel.labels()[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < p; ++j) {
            coef << ',' << format_double(maf.coefficients(i, j));
        }
        for (Eigen::Index j = 0; j < p; ++j) {
            coef << ',' << format_double(pca.coefficients(i, j));
        }
        coef << '\n';
    }
    write_file_atomic(dir / "coefficients.csv", coef.str());

    const Vector* time = panel.time() ? &*panel.time() : nullptr;
    write_csv(dir / "factors.csv", numbered("MAF", p), maf.factors, time);
    write_csv(dir / "pca_factors.csv", numbered("PC", p), pca.factors, time);

    Matrix spectrum(p, 3);
    for (Eigen::Index j = 0; j < p; ++j) {
        spectrum(j, 0) = static_cast<double>(j + 1);
        spectrum(j, 1) = maf.autocorrelations(j);
        spectrum(j, 2) = maf.diff_eigenvalues(j);
    }
    write_csv(dir / "autocorrelations.csv", {"factor", "autocorrelation", "diff_eigenvalue"}, spectrum);

    ordered_json j = envelope(cfg, seed);
    j["n"] = panel.n();
    j["p"] = p;
    j["labels"] = panel.labels();
    j["autocorrelations"] = vector_json(maf.autocorrelations);
    j["pca_variances"] = vector_json(pca.variances);
    ordered_json pairs = ordered_json::array();
    for (const auto& [a, b] : maf.near_degenerate) {
        pairs.push_back({a + 1, b + 1});
    }
    j["near_degenerate_pairs"] = pairs;
    j["files"] = {"coefficients.csv", "factors.csv", "pca_factors.csv", "autocorrelations.csv"};
    write_json(dir / "decompose.json", j);
    return ok;
}

int cmd_test(const RunConfig& cfg, std::uint64_t seed) {
    TimeSeriesPanel panel = load_panel(cfg);
    TestConfig tc;
    tc.B = cfg.B;
    tc.smoother = cfg.smoother;
    if (!cfg.mode.empty()) {
        tc.mode = parse_mode(cfg.mode);
    }
    tc.block_len = cfg.block_len;
    tc.n_factors_tested = cfg.n_factors;
    tc.statistic = parse_statistic(cfg.statistic);
    tc.conservative_p = cfg.conservative;
    tc.seed = seed;
    tc.threads = cfg.threads;
    TestReport report = signal_presence_test(panel, tc);

    ordered_json j = envelope(cfg, seed);
    j["statistic"] = to_string(report.statistic);
    j["mode"] = to_string(report.mode);
    j["block_len"] = report.block_len;
    j["B"] = report.B;
    j["p_value"] = report.p_values(0);
    j["p_values"] = vector_json(report.p_values);
    j["observed_" + std::string(to_string(report.statistic))] = report.observed(0);
    j["observed"] = vector_json(report.observed);
    j["retries"] = report.retries;
    ordered_json draws = ordered_json::array();
    for (Eigen::Index f = 0; f < report.null_draws.cols(); ++f) {
        draws.push_back(vector_json(report.null_draws.col(f)));
    }
    j["null_draws"] = draws;
    write_json(fs::path(cfg.output) / "test_report.json", j);
    return ok;
}

int cmd_resample(const RunConfig& cfg, std::uint64_t seed) {
    TimeSeriesPanel panel = load_panel(cfg);
    ResampleConfig rc;
    rc.B = cfg.B;
    rc.block_len = cfg.block_len;
    rc.smoother = cfg.smoother;
    rc.n_factors = cfg.n_factors;
    rc.alpha = cfg.alpha;
    rc.seed = seed;
    rc.threads = cfg.threads;
    ResamplingEnvelope env = resample_maf(panel, rc);

    fs::path dir = cfg.output;
    auto k = static_cast<Eigen::Index>(env.pointwise_bands.size());
    Matrix bands(panel.n(), 4 * k);
    std::vector<std::string> header;
    for (Eigen::Index f = 0; f < k; ++f) {
        std::string name = "MAF" + std::to_string(f + 1);
        header.insert(header.end(), {name, name + "_smooth", name + "_lower", name + "_upper"});
        bands.col(4 * f) = env.original_factors.col(f);
        bands.col(4 * f + 1) = env.original_smoothed.col(f);
        bands.middleCols(4 * f + 2, 2) = env.pointwise_bands[static_cast<std::size_t>(f)];
    }
    const Vector* time = panel.time() ? &*panel.time() : nullptr;
    write_csv(dir / "bands.csv", header, bands, time);

    std::vector<std::string> files{"bands.csv"};
    for (Eigen::Index f = 0; f < k; ++f) {
        auto slot = static_cast<std::size_t>(f);
        std::string suffix = "MAF" + std::to_string(f + 1) + ".csv";
        write_csv(dir / ("replicate_factors_" + suffix), numbered("t", panel.n()), env.replicate_factors[slot]);
        write_csv(dir / ("replicate_coefficients_" + suffix), panel.labels(), env.replicate_coefficients[slot]);
        files.push_back("replicate_factors_" + suffix);
        files.push_back("replicate_coefficients_" + suffix);
    }

    ordered_json j = envelope(cfg, seed);
    j["labels"] = panel.labels();
    j["original_coefficients"] = matrix_json(env.original_coefficients.transpose());
    j["retries"] = env.retries;
    j["files"] = files;
    write_json(dir / "resample.json", j);
    return ok;
}

int cmd_select(const RunConfig& cfg, std::uint64_t seed) {
    TimeSeriesPanel panel = load_panel(cfg);
    SelectionMethod method;
    if (cfg.method == "scree") {
        method = SelectionMethod::scree();
    } else if (cfg.method == "cutoff") {
        method = SelectionMethod::cutoff(cfg.cutoff);
    } else if (cfg.method == "cv") {
        method = SelectionMethod::cv(cfg.holdout);
    } else if (cfg.method == "test") {
        method = SelectionMethod::test(cfg.B, cfg.alpha);
    } else {
        fail(ErrorCode::invalid_config, "unknown --method '" + cfg.method + "'");
    }
    SelectionResult result = select_num_factors(panel, method, cfg.smoother, seed, cfg.threads);

    ordered_json j = envelope(cfg, seed);
    j["method"] = to_string(result.method);
    j["k"] = result.k;
    j["autocorrelations"] = vector_json(result.autocorrelations);
    if (result.gaps.size() > 0) {
        j["gaps"] = vector_json(result.gaps);
    }
    if (result.cumulative_fraction.size() > 0) {
        j["cumulative_fraction"] = vector_json(result.cumulative_fraction);
    }
    if (result.cv_rmse.size() > 0) {
        j["cv_rmse"] = vector_json(result.cv_rmse);
    }
    if (result.p_values.size() > 0) {
        j["p_values"] = vector_json(result.p_values);
    }
    write_json(fs::path(cfg.output) / "select.json", j);
    return ok;
}

int cmd_simulate(const RunConfig& cfg, std::uint64_t seed) {
    ExperimentGrid grid;
    grid.rho_values = cfg.rho;
    grid.b_multipliers = cfg.multipliers;
    grid.base_b = to_vector(cfg.b);
    grid.n = cfg.n;
    grid.reps = cfg.reps;
    grid.seed = seed;
    grid.signal = parse_signal(cfg, seed);
    grid.threads = cfg.threads;
    ExperimentTable table = run_comparison_experiment(grid);

    std::ostringstream os;
    write_experiment_csv(table, os);
    fs::path dir = cfg.output;
    write_file_atomic(dir / "experiment.csv", os.str());

    ordered_json j = envelope(cfg, seed);
    ordered_json cells = ordered_json::array();
    for (const auto& c : table.cells) {
        cells.push_back({{"rho", c.rho},
                         {"multiplier", c.multiplier},
                         {"maf1", {{"mean", c.maf1.mean}, {"se", c.maf1.se}}},
                         {"pca1", {{"mean", c.pca1.mean}, {"se", c.pca1.se}}},
                         {"pc12", {{"mean", c.pc12.mean}, {"se", c.pc12.se}}}});
    }
    j["cells"] = cells;
    j["files"] = {"experiment.csv"};
    write_json(dir / "simulate.json", j);
    return ok;
}

int cmd_power(const RunConfig& cfg, std::uint64_t seed) {
    if (cfg.rho.size() != 1) {
        fail(ErrorCode::invalid_config, "power takes exactly one --rho value");
    }
    Vector b = to_vector(cfg.b);
    GeneratedSignal signal = gen_signal(parse_signal(cfg, seed));
    SnModelSpec spec = SnModelSpec::compact(b, Vector::Ones(b.size()), cfg.rho.front(), signal.k_f, cfg.ar_phi);

    PowerConfig pc;
    pc.B = cfg.B;
    pc.alpha = cfg.alpha;
    pc.smoother = cfg.smoother;
    pc.statistic = parse_statistic(cfg.statistic);
    pc.seed = seed;
    pc.threads = cfg.threads;
    PowerCurve curve = power_curve(spec, unit_variance(signal.values), cfg.multipliers, pc);

    Matrix table(static_cast<Eigen::Index>(curve.points.size()), 2);
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        table(static_cast<Eigen::Index>(i), 0) = curve.points[i].multiplier;
        table(static_cast<Eigen::Index>(i), 1) = curve.points[i].power;
    }
    fs::path dir = cfg.output;
    write_csv(dir / "power.csv", {"multiplier", "power"}, table);

    ordered_json j = envelope(cfg, seed);
    j["threshold"] = curve.threshold;
    j["k_f"] = signal.k_f;
    j["multipliers"] = vector_json(table.col(0));
    j["power"] = vector_json(table.col(1));
    j["files"] = {"power.csv"};
    write_json(dir / "power.json", j);
    return ok;
}

int exit_code_for(ErrorCode code) {
    switch (code) {
    case ErrorCode::invalid_config:
        return config_error;
    case ErrorCode::singular_matrix:
    case ErrorCode::degenerate_residual:
    case ErrorCode::pole:
        return numerical_error;
    default:
        return data_error;
    }
}

int report_error(std::ostream& err, int exit_code, std::string_view code, const std::string& message) {
    ordered_json j;
    j["error"] = {{"code", code}, {"message", message}};
    j["exit_code"] = exit_code;
    err << j.dump() << '\n';
    return exit_code;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"Maximum autocorrelation factor analysis of multivariate time series", "mafkit"};
    app.set_version_flag("--version", version);
    app.require_subcommand(1);

    auto add_common = [&](CLI::App* sub, bool needs_input) {
        if (needs_input) {
            sub->add_option("--input", cfg.input, "CSV panel with a header row and optional t column")->required();
            sub->add_flag("--standardize", cfg.standardize, "Rescale every series to zero mean and unit variance");
        }
        sub->add_option("--output", cfg.output, "Directory receiving the output files")->required();
        sub->add_option("--seed", cfg.seed, "Random seed (falls back to MAFKIT_SEED, then 0)");
        sub->add_option("--threads", cfg.threads, "Worker threads, 0 for all cores");
    };
    auto add_smoother = [&](CLI::App* sub) {
        sub->add_option("--span", cfg.smoother.span_fraction, "LOESS span as a fraction of the series length");
        sub->add_option("--degree", cfg.smoother.degree, "LOESS local polynomial degree (0, 1 or 2)");
    };
    auto add_model = [&](CLI::App* sub) {
        sub->add_option("--b", cfg.b, "Signal loadings")->delimiter(',');
        sub->add_option("--rho", cfg.rho, "Noise cross-correlations")->delimiter(',');
        sub->add_option("--multipliers", cfg.multipliers, "Signal strength multipliers")->delimiter(',');
        sub->add_option("--n", cfg.n, "Series length");
        sub->add_option("--signal", cfg.signal, "linear, quadratic, sinusoid-mixture or piecewise");
        sub->add_option("--ar-phi", cfg.ar_phi, "AR(1) coefficient of the noise");
    };

    auto* decompose = app.add_subcommand("decompose", "MAF and PCA coefficients, factors and autocorrelations");
    add_common(decompose, true);

    auto* test = app.add_subcommand("test", "Resampling test for a smooth signal in the leading factors");
    add_common(test, true);
    add_smoother(test);
    test->add_option("-B", cfg.B, "Number of null replicates");
    test->add_option("--block-len", cfg.block_len, "Resampling block length");
    test->add_option("--mode", cfg.mode, "permutation or bootstrap (default depends on --block-len)");
    test->add_option("--factors", cfg.n_factors, "Number of leading factors tested");
    test->add_option("--statistic", cfg.statistic, "snr or autocorrelation");
    test->add_flag("--conservative", cfg.conservative, "Use (1 + exceedances) / (1 + B) p-values");

    auto* resample = app.add_subcommand("resample", "Block bootstrap bands for the leading factors");
    add_common(resample, true);
    add_smoother(resample);
    resample->add_option("-B", cfg.B, "Number of bootstrap replicates");
    resample->add_option("--block-len", cfg.block_len, "Bootstrap block length");
    resample->add_option("--alpha", cfg.alpha, "Band level, bands cover 1 - alpha");
    resample->add_option("--factors", cfg.n_factors, "Number of leading factors");

    auto* select = app.add_subcommand("select", "Choose the number of factors to retain");
    add_common(select, true);
    add_smoother(select);
    select->add_option("--method", cfg.method, "scree, cutoff, cv or test");
    select->add_option("--cutoff", cfg.cutoff, "cutoff: share of autocorrelation mass to retain");
    select->add_option("--holdout", cfg.holdout, "cv: trailing fraction of rows held out");
    select->add_option("-B", cfg.B, "test: number of null replicates");
    select->add_option("--alpha", cfg.alpha, "test: significance level");

    auto* simulate = app.add_subcommand("simulate", "MAF versus PCA signal recovery experiment");
    add_common(simulate, false);
    add_model(simulate);
    simulate->add_option("--reps", cfg.reps, "Replications per grid cell");

    auto* power = app.add_subcommand("power", "Monte Carlo power curve of the signal test statistic");
    add_common(power, false);
    add_smoother(power);
    add_model(power);
    power->add_option("-B", cfg.B, "Simulated panels per multiplier and for the null");
    power->add_option("--alpha", cfg.alpha, "Test level");
    power->add_option("--statistic", cfg.statistic, "snr or autocorrelation");

    std::vector<const char*> argv{"mafkit"};
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForVersion&) {
        out << version << '\n';
        return ok;
    } catch (const CLI::ParseError& e) {
        return report_error(err, config_error, "invalid_config", e.what());
    }

    CLI::App* chosen = app.get_subcommands().front();
    cfg.command = chosen->get_name();
    if (cfg.command == "power" && power->count("--rho") == 0) {
        cfg.rho = {0.5};
    }
    if (cfg.command == "resample" && resample->count("--block-len") == 0) {
        cfg.block_len = 5;
    }
    if (cfg.command == "select" && select->count("-B") == 0) {
        cfg.B = 999;
    }

    try {
        std::uint64_t seed = resolve_seed(cfg);
        cfg.smoother.validate();
        std::error_code ec;
        fs::create_directories(cfg.output, ec);
        if (ec || !fs::is_directory(cfg.output)) {
            fail(ErrorCode::invalid_config, "cannot create output directory '" + cfg.output + "'");
        }
        if (cfg.command == "decompose") {
            return cmd_decompose(cfg, seed);
        }
        if (cfg.command == "test") {
            return cmd_test(cfg, seed);
        }
        if (cfg.command == "resample") {
            return cmd_resample(cfg, seed);
        }
        if (cfg.command == "select") {
            return cmd_select(cfg, seed);
        }
        if (cfg.command == "simulate") {
            return cmd_simulate(cfg, seed);
        }
        return cmd_power(cfg, seed);
    } catch (const Error& e) {
        return report_error(err, exit_code_for(e.code()), to_string(e.code()), e.what());
    } catch (const std::exception& e) {
        return report_error(err, data_error, "io_error", e.what());
    }
}

} // namespace mafkit::cli
