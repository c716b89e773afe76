#include <mafkit/simulation.hpp>

#include <mafkit/csv.hpp>
#include <mafkit/detail/parallel.hpp>
#include <mafkit/detail/random.hpp>
#include <mafkit/error.hpp>
#include <mafkit/maf.hpp>
#include <mafkit/oracle.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace mafkit {

namespace {

constexpr std::uint64_t kSinusoidStream = 0x51;
constexpr std::uint64_t kNoiseStream = 0x4e;
constexpr std::uint64_t kExperimentStream = 0xe7;

Vector normalize_signal(Vector f) {
    f.array() -= f.mean();
    double norm = f.norm();
    if (!(norm > 0.0)) {
        fail(ErrorCode::degenerate_series, "signal is constant and cannot be normalised");
    }
    return f / norm;
}

double signal_k_f(const Vector& f) {
    auto n = static_cast<double>(f.size());
    double lagged = f.head(f.size() - 1).dot(f.tail(f.size() - 1)) / (n - 1.0);
    return lagged / (f.squaredNorm() / n);
}

MeanSe summarize(const std::vector<double>& xs) {
    auto n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) {
        mean += x;
    }
    mean /= n;
    double ss = 0.0;
    for (double x : xs) {
        ss += (x - mean) * (x - mean);
    }
    double se = xs.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    return MeanSe{mean, se};
}

} // namespace

std::vector<std::pair<double, double>> default_control_points() {
    return {{0.00, -0.30}, {0.12, -0.38}, {0.25, -0.22}, {0.38, -0.36}, {0.50, -0.12},
            {0.60, 0.02},  {0.70, -0.06}, {0.80, 0.05},  {0.90, 0.32},  {1.00, 0.62}};
}

GeneratedSignal gen_signal(const SignalSpec& spec) {
    Eigen::Index n = spec.n;
    if (n < 3) {
        fail(ErrorCode::insufficient_data, "signal length must be at least 3");
    }
    Vector f(n);
    double centre = 0.5 * static_cast<double>(n - 1);
    switch (spec.kind) {
    case SignalKind::linear:
        for (Eigen::Index t = 0; t < n; ++t) {
            f(t) = static_cast<double>(t) - centre;
        }
        break;
    case SignalKind::quadratic:
        // Even about the centre, hence orthogonal to the linear signal.
        for (Eigen::Index t = 0; t < n; ++t) {
            double d = static_cast<double>(t) - centre;
            f(t) = d * d;
        }
        break;
    case SignalKind::sinusoid_mixture: {
        auto rng = detail::make_rng(spec.seed, kSinusoidStream);
        std::uniform_real_distribution<double> period(0.3 * static_cast<double>(n), 1.5 * static_cast<double>(n));
        std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
        std::uniform_real_distribution<double> amplitude(0.5, 1.0);
        f.setZero();
        for (int c = 0; c < 3; ++c) {
            double per = period(rng);
            double ph = phase(rng);
            double amp = amplitude(rng);
            for (Eigen::Index t = 0; t < n; ++t) {
                f(t) += amp * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / per + ph);
            }
        }
        break;
    }
    case SignalKind::piecewise_interpolated: {
        auto points = spec.control_points.empty() ? default_control_points() : spec.control_points;
        if (points.size() < 2) {
            fail(ErrorCode::invalid_input, "piecewise signal needs at least 2 control points");
        }
        for (std::size_t k = 1; k < points.size(); ++k) {
            if (!(points[k].first > points[k - 1].first)) {
                fail(ErrorCode::invalid_input, "control point positions must be strictly increasing");
            }
        }
        std::size_t seg = 0;
        for (Eigen::Index t = 0; t < n; ++t) {
            double x = static_cast<double>(t) / static_cast<double>(n - 1);
            if (x <= points.front().first) {
                f(t) = points.front().second;
                continue;
            }
            if (x >= points.back().first) {
                f(t) = points.back().second;
                continue;
            }
            while (points[seg + 1].first < x) {
                ++seg;
            }
            auto [x0, y0] = points[seg];
            auto [x1, y1] = points[seg + 1];
            f(t) = y0 + (y1 - y0) * (x - x0) / (x1 - x0);
        }
        break;
    }
    }
    GeneratedSignal out;
    out.values = normalize_signal(std::move(f));
    out.k_f = signal_k_f(out.values);
    return out;
}

Vector unit_variance(const Vector& f) {
    return std::sqrt(static_cast<double>(f.size())) * f;
}

NoiseSpec NoiseSpec::full(SymMatrix cov, double ar_phi) {
    NoiseSpec spec;
    spec.cov = std::move(cov);
    spec.ar_phi = ar_phi;
    return spec;
}

NoiseSpec NoiseSpec::compact(double rho, Vector sigma, double ar_phi) {
    NoiseSpec spec;
    spec.rho = rho;
    spec.sigma = std::move(sigma);
    spec.ar_phi = ar_phi;
    return spec;
}

SymMatrix NoiseSpec::covariance(Eigen::Index p) const {
    if (cov) {
        if (cov->dim() != p) {
            fail(ErrorCode::invalid_input, "noise covariance dimension does not match the signal vector");
        }
        return *cov;
    }
    Vector s = sigma.size() == 0 ? Vector::Ones(p) : sigma;
    if (s.size() != p) {
        fail(ErrorCode::invalid_input, "noise scale vector does not match the signal vector");
    }
    return equicorrelated_cov(s, rho);
}

TimeSeriesPanel gen_sn_panel(const Vector& f, const Vector& b, const NoiseSpec& noise, std::uint64_t seed) {
    Eigen::Index n = f.size();
    Eigen::Index p = b.size();
    if (p < 1 || n < 1) {
        fail(ErrorCode::invalid_input, "signal and strength vectors must be non-empty");
    }
    if (!(std::abs(noise.ar_phi) < 1.0)) {
        fail(ErrorCode::invalid_input, "AR(1) noise parameter must satisfy |phi| < 1");
    }
    SymMatrix cov = noise.covariance(p);
    Eigen::LLT<Matrix> llt(cov.matrix());
    if (llt.info() != Eigen::Success || !cov.is_spd()) {
        fail(ErrorCode::invalid_input, "noise covariance is not positive definite");
    }
    Matrix lower = llt.matrixL();

    auto rng = detail::make_rng(seed, kNoiseStream);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix innovations(n, p);
    for (Eigen::Index t = 0; t < n; ++t) {
        for (Eigen::Index j = 0; j < p; ++j) {
            innovations(t, j) = normal(rng);
        }
    }
    if (noise.ar_phi != 0.0) {
        double phi = noise.ar_phi;
        double scale = std::sqrt(1.0 - phi * phi);
        for (Eigen::Index t = 1; t < n; ++t) {
            innovations.row(t) = phi * innovations.row(t - 1) + scale * innovations.row(t);
        }
    }
    Matrix values = innovations * lower.transpose() + f * b.transpose();
    return TimeSeriesPanel(std::move(values));
}

double correlation_with_signal(VectorRef factor, VectorRef f) {
    if (factor.size() != f.size() || f.size() < 2) {
        fail(ErrorCode::invalid_input, "factor and signal lengths differ");
    }
    Vector a = factor.array() - factor.mean();
    Vector c = f.array() - f.mean();
    double na = a.norm();
    double nc = c.norm();
    if (!(na > 0.0) || !(nc > 0.0)) {
        fail(ErrorCode::degenerate_series, "correlation with a constant series is undefined");
    }
    return std::min(1.0, std::abs(a.dot(c)) / (na * nc));
}

double multi_factor_r(VectorRef f, MatrixRef factors) {
    Eigen::Index n = f.size();
    Eigen::Index k = factors.cols();
    if (factors.rows() != n || k < 1 || k + 1 >= n) {
        fail(ErrorCode::invalid_input, "regression needs 1 <= k < n - 1 factors of matching length");
    }
    Matrix design(n, k + 1);
    design.col(0).setOnes();
    design.rightCols(k) = factors;
    Eigen::ColPivHouseholderQR<Matrix> qr(design);
    if (qr.rank() < k + 1) {
        fail(ErrorCode::singular_matrix, "factor matrix is rank deficient");
    }
    Vector fitted = design * qr.solve(Vector(f));
    Vector centred = f.array() - f.mean();
    double total = centred.squaredNorm();
    if (!(total > 0.0)) {
        fail(ErrorCode::degenerate_series, "signal is constant");
    }
    double resid = (f - fitted).squaredNorm();
    return std::sqrt(std::clamp(1.0 - resid / total, 0.0, 1.0));
}

void ExperimentGrid::validate() const {
    if (reps < 1) {
        fail(ErrorCode::invalid_config, "experiment needs at least one repetition");
    }
    if (rho_values.empty() || b_multipliers.empty()) {
        fail(ErrorCode::invalid_config, "experiment grid has no cells");
    }
    if (base_b.size() < 2) {
        fail(ErrorCode::invalid_config, "experiment needs at least two series");
    }
    if (n <= base_b.size() + 2) {
        fail(ErrorCode::invalid_config, "experiment series are too short");
    }
}

ExperimentTable run_comparison_experiment(const ExperimentGrid& grid) {
    grid.validate();
    SignalSpec signal_spec = grid.signal;
    signal_spec.n = grid.n;
    Vector f = unit_variance(gen_signal(signal_spec).values);

    std::size_t n_cells = grid.rho_values.size() * grid.b_multipliers.size();
    auto reps = static_cast<std::size_t>(grid.reps);
    std::vector<double> maf1(n_cells * reps);
    std::vector<double> pca1(n_cells * reps);
    std::vector<double> pc12(n_cells * reps);

    detail::parallel_for(n_cells * reps, grid.threads, [&](std::size_t job) {
        std::size_t cell = job / reps;
        double rho = grid.rho_values[cell / grid.b_multipliers.size()];
        double mult = grid.b_multipliers[cell % grid.b_multipliers.size()];
        auto seed_rng = detail::make_rng(grid.seed, kExperimentStream, job);
        TimeSeriesPanel panel = gen_sn_panel(f, mult * grid.base_b, NoiseSpec::compact(rho, {}), seed_rng());
        MafDecomposition maf = compute_maf(panel);
        PcaDecomposition pca = compute_pca(panel, grid.standardize_pca);
        maf1[job] = correlation_with_signal(maf.factors.col(0), f);
        pca1[job] = correlation_with_signal(pca.factors.col(0), f);
        pc12[job] = multi_factor_r(f, pca.factors.leftCols(2));
    });

    ExperimentTable table;
    for (std::size_t cell = 0; cell < n_cells; ++cell) {
        auto slice = [&](const std::vector<double>& xs) {
            return std::vector<double>(xs.begin() + static_cast<std::ptrdiff_t>(cell * reps),
                                       xs.begin() + static_cast<std::ptrdiff_t>((cell + 1) * reps));
        };
        ExperimentCell out;
        out.rho = grid.rho_values[cell / grid.b_multipliers.size()];
        out.multiplier = grid.b_multipliers[cell % grid.b_multipliers.size()];
        out.maf1 = summarize(slice(maf1));
        out.pca1 = summarize(slice(pca1));
        out.pc12 = summarize(slice(pc12));
        table.cells.push_back(out);
    }
    return table;
}

void write_experiment_csv(const ExperimentTable& table, std::ostream& out) {
    out << "rho,multiplier,statistic,mean,se,lower,upper\n";
    for (const ExperimentCell& cell : table.cells) {
        const std::pair<const char*, MeanSe> rows[] = {
            {"maf1", cell.maf1}, {"pca1", cell.pca1}, {"pc12", cell.pc12}};
        for (const auto& [name, stat] : rows) {
            out << format_double(cell.rho) << ',' << format_double(cell.multiplier) << ',' << name << ','
                << format_double(stat.mean) << ',' << format_double(stat.se) << ','
                << format_double(stat.mean - 2.0 * stat.se) << ',' << format_double(stat.mean + 2.0 * stat.se)
                << '\n';
        }
    }
}

} // namespace mafkit
