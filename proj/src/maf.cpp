#include <mafkit/maf.hpp>

#include <mafkit/error.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mafkit {

namespace {

constexpr double kDegenerateGap = 1e-8;

double centered_variance(VectorRef x) {
    double mean = x.mean();
    return (x.array() - mean).square().sum() / static_cast<double>(x.size() - 1);
}

} // namespace

double trend_sign(VectorRef series) {
    double n = static_cast<double>(series.size());
    double centre = 0.5 * (n - 1.0);
    double mean = series.mean();
    double cov = 0.0;
    for (Eigen::Index i = 0; i < series.size(); ++i) {
        cov += (static_cast<double>(i) - centre) * (series(i) - mean);
    }
    return cov < 0.0 ? -1.0 : 1.0;
}

double factor_autocorrelation(VectorRef series) {
    if (series.size() < 3) {
        fail(ErrorCode::insufficient_data, "autocorrelation needs at least 3 values");
    }
    require_finite(series, "series");
    double var = centered_variance(series);
    double scale = std::max(1.0, series.cwiseAbs().maxCoeff());
    if (!(var > 1e-28 * scale * scale)) {
        fail(ErrorCode::degenerate_series, "autocorrelation of a constant series is undefined");
    }
    Vector diff = series.tail(series.size() - 1) - series.head(series.size() - 1);
    double r = 1.0 - centered_variance(diff) / (2.0 * var);
    return std::clamp(r, -1.0, 1.0);
}

MafDecomposition compute_maf(MatrixRef values) {
    Eigen::Index n = values.rows();
    Eigen::Index p = values.cols();
    if (p < 1 || n <= p || n < 3) {
        std::ostringstream os;
        os << "MAF needs n > p >= 1 and n >= 3 (got n=" << n << ", p=" << p << ")";
        fail(ErrorCode::insufficient_data, os.str());
    }

    SymMatrix cov = sample_covariance(values);
    SymMatrix whitener = inverse_sqrt(cov);
    Matrix whitened = values * whitener.matrix();
    SymMatrix diff_cov = lag1_diff_covariance(whitened);
    EigenPairs eig = sym_eig(diff_cov, EigenOrder::ascending);

    MafDecomposition out;
    out.coefficients = whitener.matrix() * eig.vectors;
    out.factors = values * out.coefficients;
    for (Eigen::Index j = 0; j < p; ++j) {
        if (trend_sign(out.factors.col(j)) < 0.0) {
            out.coefficients.col(j) *= -1.0;
            out.factors.col(j) *= -1.0;
        }
    }
    out.diff_eigenvalues = eig.values;
    out.autocorrelations = (1.0 - 0.5 * eig.values.array()).cwiseMax(-1.0).cwiseMin(1.0);

    for (Eigen::Index j = 0; j + 1 < p; ++j) {
        double a = eig.values(j);
        double b = eig.values(j + 1);
        double scale = std::max({std::abs(a), std::abs(b), 1e-300});
        if (std::abs(b - a) < kDegenerateGap * scale) {
            out.near_degenerate.emplace_back(j, j + 1);
        }
    }
    return out;
}

MafDecomposition compute_maf(const TimeSeriesPanel& panel) {
    return compute_maf(panel.values());
}

PcaDecomposition compute_pca(const TimeSeriesPanel& panel, bool standardize) {
    TimeSeriesPanel source = standardize ? panel.standardized() : panel;
    SymMatrix cov = sample_covariance(source.values());
    EigenPairs eig = sym_eig(cov, EigenOrder::descending);

    PcaDecomposition out;
    out.coefficients = eig.vectors;
    out.factors = source.values() * eig.vectors;
    out.variances = eig.values;
    out.standardized = standardize;
    return out;
}

} // namespace mafkit
