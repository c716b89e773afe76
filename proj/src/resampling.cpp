#include <mafkit/resampling.hpp>

#include <mafkit/detail/parallel.hpp>
#include <mafkit/detail/random.hpp>
#include <mafkit/error.hpp>
#include <mafkit/maf.hpp>
#include <mafkit/simulation.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace mafkit {

namespace {

constexpr std::uint64_t kEnvelopeStream = 0x100;
constexpr std::uint64_t kTestStream = 0x200;
constexpr std::uint64_t kPowerNullStream = 0x300;
constexpr std::uint64_t kPowerAltStream = 0x400;

Matrix gather_rows(MatrixRef values, const std::vector<Eigen::Index>& rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), values.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out.row(static_cast<Eigen::Index>(r)) = values.row(rows[r]);
    }
    return out;
}

void check_no_constant_columns(const TimeSeriesPanel& panel) {
    for (Eigen::Index j = 0; j < panel.p(); ++j) {
        auto col = panel.values().col(j);
        if (col.maxCoeff() == col.minCoeff()) {
            fail(ErrorCode::degenerate_series, "series '" + panel.labels()[static_cast<std::size_t>(j)] +
                                                   "' is constant");
        }
    }
}

int max_retries(int B) {
    return static_cast<int>(std::floor(0.1 * B));
}

//! Runs attempt(rng) for replicate i until it stops throwing singular_matrix,
//! with a fresh generator per attempt. Returns the number of failed attempts.
template <typename Attempt>
int with_retries(std::uint64_t seed, std::uint64_t stream, std::size_t index, int limit, Attempt&& attempt) {
    for (int tries = 0;; ++tries) {
        auto rng = detail::make_rng(seed, stream + (static_cast<std::uint64_t>(tries) << 32), index);
        try {
            attempt(rng);
            return tries;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::singular_matrix || tries >= limit) {
                throw;
            }
        }
    }
}

void check_retry_budget(int retries, int B) {
    if (retries > max_retries(B)) {
        std::ostringstream os;
        os << retries << " of " << B << " replicates had a singular covariance (limit 10%)";
        fail(ErrorCode::singular_matrix, os.str());
    }
}

double factor_statistic(const MafDecomposition& maf, Eigen::Index j, TestStatistic statistic,
                        const LoessSmoother& smoother) {
    if (statistic == TestStatistic::autocorrelation) {
        return maf.autocorrelations(j);
    }
    return empirical_snr(maf.factors.col(j), smoother);
}

} // namespace

std::string_view to_string(ResampleMode mode) noexcept {
    return mode == ResampleMode::permutation ? "permutation" : "bootstrap";
}

std::string_view to_string(TestStatistic statistic) noexcept {
    return statistic == TestStatistic::snr ? "snr" : "autocorrelation";
}

std::string_view to_string(SelectionMethod::Kind kind) noexcept {
    switch (kind) {
    case SelectionMethod::Kind::scree:
        return "scree";
    case SelectionMethod::Kind::cutoff:
        return "cutoff";
    case SelectionMethod::Kind::cv:
        return "cv";
    case SelectionMethod::Kind::test:
        return "test";
    }
    return "unknown";
}

double sample_quantile(std::vector<double> values, double prob) {
    if (values.empty()) {
        fail(ErrorCode::invalid_input, "quantile of an empty sample");
    }
    std::sort(values.begin(), values.end());
    double h = (static_cast<double>(values.size()) - 1.0) * std::clamp(prob, 0.0, 1.0);
    auto lo = static_cast<std::size_t>(std::floor(h));
    std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<Eigen::Index> resample_rows(Eigen::Index n, int block_len, ResampleMode mode, std::mt19937_64& rng) {
    if (block_len < 1 || block_len > n) {
        fail(ErrorCode::invalid_config, "block length must lie in [1, n]");
    }
    std::vector<Eigen::Index> rows;
    rows.reserve(static_cast<std::size_t>(n));
    if (mode == ResampleMode::bootstrap) {
        std::uniform_int_distribution<Eigen::Index> start(0, n - 1);
        while (static_cast<Eigen::Index>(rows.size()) < n) {
            Eigen::Index s = start(rng);
            for (int k = 0; k < block_len && static_cast<Eigen::Index>(rows.size()) < n; ++k) {
                rows.push_back((s + k) % n);
            }
        }
        return rows;
    }
    Eigen::Index n_blocks = (n + block_len - 1) / block_len;
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n_blocks));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (Eigen::Index b : order) {
        for (Eigen::Index r = b * block_len; r < std::min<Eigen::Index>(n, (b + 1) * block_len); ++r) {
            rows.push_back(r);
        }
    }
    return rows;
}

ResamplingEnvelope resample_maf(const TimeSeriesPanel& panel, const ResampleConfig& cfg) {
    Eigen::Index n = panel.n();
    Eigen::Index p = panel.p();
    if (cfg.B < 1) {
        fail(ErrorCode::invalid_config, "B must be at least 1");
    }
    if (cfg.block_len < 1 || cfg.block_len > n) {
        fail(ErrorCode::invalid_config, "block length must lie in [1, n]");
    }
    if (cfg.n_factors < 1 || cfg.n_factors > p) {
        fail(ErrorCode::invalid_config, "number of factors must lie in [1, p]");
    }
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
        fail(ErrorCode::invalid_config, "alpha must lie in (0, 1)");
    }
    auto k = static_cast<Eigen::Index>(cfg.n_factors);
    LoessSmoother smoother(n, cfg.smoother);

    MafDecomposition original = compute_maf(panel);
    ResamplingEnvelope out;
    out.original_coefficients = original.coefficients.leftCols(k).colwise().normalized();
    out.original_factors = panel.values() * out.original_coefficients;
    out.original_smoothed = smoother.fit_columns(out.original_factors);

    Matrix smooth = smoother.fit_columns(panel.values());
    Matrix residuals = panel.values() - smooth;

    auto B = static_cast<std::size_t>(cfg.B);
    out.replicate_factors.assign(static_cast<std::size_t>(k), Matrix(cfg.B, n));
    out.replicate_coefficients.assign(static_cast<std::size_t>(k), Matrix(cfg.B, p));
    std::vector<int> retries(B, 0);
    int limit = max_retries(cfg.B);

    detail::parallel_for(B, cfg.threads, [&](std::size_t i) {
        retries[i] = with_retries(cfg.seed, kEnvelopeStream, i, limit, [&](std::mt19937_64& rng) {
            auto rows = resample_rows(n, cfg.block_len, ResampleMode::bootstrap, rng);
            Matrix z = smooth + gather_rows(residuals, rows);
            MafDecomposition maf = compute_maf(z);
            for (Eigen::Index j = 0; j < k; ++j) {
                Vector w = maf.coefficients.col(j).normalized();
                Vector y = z * w;
                Vector centred = y.array() - y.mean();
                Vector reference = out.original_factors.col(j).array() - out.original_factors.col(j).mean();
                if (centred.dot(reference) < 0.0) {
                    w = -w;
                    y = -y;
                }
                auto slot = static_cast<std::size_t>(j);
                out.replicate_coefficients[slot].row(static_cast<Eigen::Index>(i)) = w.transpose();
                out.replicate_factors[slot].row(static_cast<Eigen::Index>(i)) = y.transpose();
            }
        });
    });
    out.retries = std::accumulate(retries.begin(), retries.end(), 0);
    check_retry_budget(out.retries, cfg.B);

    for (Eigen::Index j = 0; j < k; ++j) {
        const Matrix& reps = out.replicate_factors[static_cast<std::size_t>(j)];
        Matrix bands(n, 2);
        std::vector<double> column(B);
        for (Eigen::Index t = 0; t < n; ++t) {
            for (std::size_t i = 0; i < B; ++i) {
                column[i] = reps(static_cast<Eigen::Index>(i), t);
            }
            bands(t, 0) = sample_quantile(column, 0.5 * cfg.alpha);
            bands(t, 1) = sample_quantile(column, 1.0 - 0.5 * cfg.alpha);
        }
        out.pointwise_bands.push_back(std::move(bands));
    }
    return out;
}

TestReport signal_presence_test(const TimeSeriesPanel& panel, const TestConfig& cfg) {
    Eigen::Index n = panel.n();
    Eigen::Index p = panel.p();
    if (cfg.B < 99) {
        fail(ErrorCode::invalid_config, "signal presence test needs B >= 99");
    }
    if (cfg.n_factors_tested < 1 || cfg.n_factors_tested > p) {
        fail(ErrorCode::invalid_config, "number of tested factors must lie in [1, p]");
    }
    if (cfg.block_len < 1 || cfg.block_len > n) {
        fail(ErrorCode::invalid_config, "block length must lie in [1, n]");
    }
    check_no_constant_columns(panel);

    TestReport report;
    report.statistic = cfg.statistic;
    report.mode = cfg.mode.value_or(cfg.block_len == 1 ? ResampleMode::permutation : ResampleMode::bootstrap);
    report.block_len = cfg.block_len;
    report.B = cfg.B;
    report.seed = cfg.seed;
    report.conservative_p = cfg.conservative_p;

    auto k = static_cast<Eigen::Index>(cfg.n_factors_tested);
    LoessSmoother smoother(n, cfg.smoother);
    if (!(smoother.df() < static_cast<double>(n))) {
        fail(ErrorCode::invalid_config, "smoother uses all degrees of freedom");
    }

    MafDecomposition observed = compute_maf(panel);
    report.observed.resize(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        report.observed(j) = factor_statistic(observed, j, cfg.statistic, smoother);
    }

    double inflation = std::sqrt(static_cast<double>(n) / (static_cast<double>(n) - smoother.df()));
    Matrix residuals = inflation * (panel.values() - smoother.fit_columns(panel.values()));

    auto B = static_cast<std::size_t>(cfg.B);
    report.null_draws.resize(cfg.B, k);
    std::vector<int> retries(B, 0);
    int limit = max_retries(cfg.B);
    detail::parallel_for(B, cfg.threads, [&](std::size_t i) {
        retries[i] = with_retries(cfg.seed, kTestStream, i, limit, [&](std::mt19937_64& rng) {
            auto rows = resample_rows(n, cfg.block_len, report.mode, rng);
            MafDecomposition maf = compute_maf(gather_rows(residuals, rows));
            for (Eigen::Index j = 0; j < k; ++j) {
                report.null_draws(static_cast<Eigen::Index>(i), j) =
                    factor_statistic(maf, j, cfg.statistic, smoother);
            }
        });
    });
    report.retries = std::accumulate(retries.begin(), retries.end(), 0);
    check_retry_budget(report.retries, cfg.B);

    report.p_values.resize(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        auto exceed = (report.null_draws.col(j).array() >= report.observed(j)).count();
        report.p_values(j) = cfg.conservative_p
                                 ? (1.0 + static_cast<double>(exceed)) / (1.0 + static_cast<double>(cfg.B))
                                 : static_cast<double>(exceed) / static_cast<double>(cfg.B);
    }
    return report;
}

PowerCurve power_curve(const SnModelSpec& spec, const Vector& signal, const std::vector<double>& multipliers,
                       const PowerConfig& cfg) {
    spec.validate();
    if (cfg.B < 1) {
        fail(ErrorCode::invalid_config, "B must be at least 1");
    }
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
        fail(ErrorCode::invalid_config, "alpha must lie in (0, 1)");
    }
    for (double m : multipliers) {
        if (!(m >= 0.0)) {
            fail(ErrorCode::invalid_config, "signal multipliers must be non-negative");
        }
    }
    Eigen::Index n = signal.size();
    LoessSmoother smoother(n, cfg.smoother);
    NoiseSpec noise = NoiseSpec::full(spec.noise_cov, spec.k_eps);
    auto B = static_cast<std::size_t>(cfg.B);

    auto simulate = [&](double multiplier, std::uint64_t stream, std::vector<double>& stats) {
        detail::parallel_for(B, cfg.threads, [&](std::size_t i) {
            auto seed_rng = detail::make_rng(cfg.seed, stream, i);
            TimeSeriesPanel panel = gen_sn_panel(signal, multiplier * spec.b, noise, seed_rng());
            MafDecomposition maf = compute_maf(panel);
            stats[i] = factor_statistic(maf, 0, cfg.statistic, smoother);
        });
    };

    std::vector<double> null_stats(B);
    simulate(0.0, kPowerNullStream, null_stats);
    PowerCurve curve;
    curve.threshold = sample_quantile(null_stats, 1.0 - cfg.alpha);

    std::vector<double> alt_stats(B);
    for (std::size_t m = 0; m < multipliers.size(); ++m) {
        simulate(multipliers[m], kPowerAltStream + (static_cast<std::uint64_t>(m) << 32), alt_stats);
        auto exceed = std::count_if(alt_stats.begin(), alt_stats.end(),
                                    [&](double s) { return s > curve.threshold; });
        curve.points.push_back({multipliers[m], static_cast<double>(exceed) / static_cast<double>(B)});
    }
    return curve;
}

SelectionMethod SelectionMethod::cutoff(double alpha_frac) {
    SelectionMethod m;
    m.kind = Kind::cutoff;
    m.alpha_frac = alpha_frac;
    return m;
}

SelectionMethod SelectionMethod::cv(double holdout_frac) {
    SelectionMethod m;
    m.kind = Kind::cv;
    m.holdout_frac = holdout_frac;
    return m;
}

SelectionMethod SelectionMethod::test(int B, double alpha) {
    SelectionMethod m;
    m.kind = Kind::test;
    m.B = B;
    m.alpha = alpha;
    return m;
}

namespace {

Vector cv_rmse(const TimeSeriesPanel& panel, double holdout_frac) {
    Eigen::Index n = panel.n();
    Eigen::Index p = panel.p();
    if (p < 2) {
        fail(ErrorCode::invalid_config, "cross-validation needs at least two series");
    }
    if (!(holdout_frac > 0.0 && holdout_frac < 1.0)) {
        fail(ErrorCode::invalid_config, "hold-out fraction must lie in (0, 1)");
    }
    auto holdout = static_cast<Eigen::Index>(std::lround(holdout_frac * static_cast<double>(n)));
    Eigen::Index train = n - holdout;
    if (holdout < p + 2) {
        std::ostringstream os;
        os << "hold-out block of " << holdout << " rows is too small, need at least p + 2 = " << p + 2;
        fail(ErrorCode::invalid_config, os.str());
    }
    if (train <= p + 1) {
        fail(ErrorCode::invalid_config, "training block is too small");
    }

    const Matrix& z = panel.values();
    Vector sse = Vector::Zero(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        Matrix others(n, p - 1);
        for (Eigen::Index j = 0, c = 0; j < p; ++j) {
            if (j != i) {
                others.col(c++) = z.col(j);
            }
        }
        MafDecomposition maf = compute_maf(others.topRows(train));
        Matrix factors = others * maf.coefficients;
        for (Eigen::Index k = 0; k < p; ++k) {
            Matrix design(n, k + 1);
            design.col(0).setOnes();
            design.rightCols(k) = factors.leftCols(k);
            Vector beta = design.topRows(train).colPivHouseholderQr().solve(Vector(z.col(i).head(train)));
            Vector pred = design.bottomRows(holdout) * beta;
            sse(k) += (z.col(i).tail(holdout) - pred).squaredNorm();
        }
    }
    return (sse / static_cast<double>(holdout * p)).cwiseSqrt();
}

} // namespace

SelectionResult select_num_factors(const TimeSeriesPanel& panel, const SelectionMethod& method,
                                   const SmootherConfig& cfg, std::uint64_t seed, unsigned threads) {
    MafDecomposition maf = compute_maf(panel);
    Eigen::Index p = panel.p();
    SelectionResult out;
    out.method = method.kind;
    out.autocorrelations = maf.autocorrelations;

    switch (method.kind) {
    case SelectionMethod::Kind::scree: {
        out.gaps = Vector::Zero(std::max<Eigen::Index>(p - 1, 0));
        out.k = 1;
        double best = -1.0;
        for (Eigen::Index j = 0; j + 1 < p; ++j) {
            out.gaps(j) = maf.autocorrelations(j) - maf.autocorrelations(j + 1);
            if (out.gaps(j) > best) {
                best = out.gaps(j);
                out.k = static_cast<int>(j + 1);
            }
        }
        break;
    }
    case SelectionMethod::Kind::cutoff: {
        if (!(method.alpha_frac > 0.0)) {
            fail(ErrorCode::invalid_config, "cutoff fraction must be positive");
        }
        Vector positive = maf.autocorrelations.cwiseMax(0.0);
        double total = positive.sum();
        out.cumulative_fraction = Vector::Zero(p);
        double running = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            running += positive(j);
            out.cumulative_fraction(j) = total > 0.0 ? running / total : 0.0;
        }
        if (method.alpha_frac >= 1.0) {
            out.k = static_cast<int>(p);
            break;
        }
        out.k = static_cast<int>(p);
        for (Eigen::Index j = 0; j < p; ++j) {
            if (out.cumulative_fraction(j) >= method.alpha_frac) {
                out.k = static_cast<int>(j + 1);
                break;
            }
        }
        break;
    }
    case SelectionMethod::Kind::cv: {
        out.cv_rmse = cv_rmse(panel, method.holdout_frac);
        double best = out.cv_rmse.minCoeff();
        for (Eigen::Index k = 0; k < out.cv_rmse.size(); ++k) {
            if (out.cv_rmse(k) <= (1.0 + method.cv_tolerance) * best) {
                out.k = static_cast<int>(k);
                break;
            }
        }
        break;
    }
    case SelectionMethod::Kind::test: {
        if (!(method.alpha > 0.0 && method.alpha < 1.0)) {
            fail(ErrorCode::invalid_config, "test level must lie in (0, 1)");
        }
        TestConfig test_cfg;
        test_cfg.B = method.B;
        test_cfg.smoother = cfg;
        test_cfg.n_factors_tested = static_cast<int>(p);
        test_cfg.seed = seed;
        test_cfg.threads = threads;
        TestReport report = signal_presence_test(panel, test_cfg);
        out.p_values = report.p_values;
        out.k = 0;
        while (out.k < p && report.p_values(out.k) < method.alpha) {
            ++out.k;
        }
        break;
    }
    }
    return out;
}

} // namespace mafkit
