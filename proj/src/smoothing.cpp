#include <mafkit/smoothing.hpp>

#include <mafkit/error.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mafkit {

namespace {

constexpr std::size_t kMaxCachedWeights = std::size_t{1} << 22;

double tricube(double u) {
    double a = std::abs(u);
    if (a >= 1.0) {
        return 0.0;
    }
    double c = 1.0 - a * a * a;
    return c * c * c;
}

double population_sd(VectorRef x) {
    double mean = x.mean();
    return std::sqrt((x.array() - mean).square().sum() / static_cast<double>(x.size()));
}

} // namespace

void SmootherConfig::validate() const {
    if (!(span_fraction > 0.0 && span_fraction <= 1.0)) {
        fail(ErrorCode::invalid_config, "span fraction must lie in (0, 1]");
    }
    if (degree < 0 || degree > 2) {
        fail(ErrorCode::invalid_config, "smoother degree must be 0, 1 or 2");
    }
}

LoessSmoother::LoessSmoother(Eigen::Index n, const SmootherConfig& cfg)
    : n_(n), cfg_(cfg), half_width_(0.5 * cfg.span_fraction * static_cast<double>(n)) {
    cfg_.validate();
    // The edge window holds the points at distance 0 .. ceil(h) - 1.
    auto edge_points = static_cast<Eigen::Index>(std::ceil(half_width_));
    Eigen::Index needed = cfg_.degree + 2;
    if (n_ < needed || edge_points < needed) {
        std::ostringstream os;
        os << "smoothing window too small: " << edge_points << " points at the series ends, need "
           << needed << " for degree " << cfg_.degree << " (n=" << n_ << ")";
        fail(ErrorCode::insufficient_data, os.str());
    }
    reach_ = edge_points - 1;

    // Away from the ends every window is the same up to translation.
    if (n_ > 2 * reach_) {
        interior_ = make_kernel(reach_);
    }
    auto edge_count = static_cast<std::size_t>(std::min(n_, 2 * reach_));
    bool cache = edge_count * static_cast<std::size_t>(2 * reach_ + 1) <= kMaxCachedWeights;
    for (Eigen::Index i = 0; i < n_; ++i) {
        if (is_interior(i)) {
            df_ += interior_.weights(reach_);
            continue;
        }
        Kernel kernel = make_kernel(i);
        df_ += kernel.weights(i - kernel.first);
        if (cache) {
            edges_.emplace(i, std::move(kernel));
        }
    }
}

bool LoessSmoother::is_interior(Eigen::Index i) const noexcept {
    return i >= reach_ && i + reach_ < n_;
}

LoessSmoother::Kernel LoessSmoother::make_kernel(Eigen::Index i) const {
    int terms = cfg_.degree + 1;
    Eigen::Index lo = std::max<Eigen::Index>(0, i - reach_);
    Eigen::Index hi = std::min<Eigen::Index>(n_ - 1, i + reach_);
    Eigen::Index m = hi - lo + 1;

    Matrix design(m, terms);
    Vector w(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        double u = static_cast<double>(lo + k - i) / half_width_;
        w(k) = tricube(u);
        double power = 1.0;
        for (int c = 0; c < terms; ++c) {
            design(k, c) = power;
            power *= u;
        }
    }
    // Equivalent kernel: first row of (X'WX)^{-1} X'W, the fitted value at d = 0.
    Matrix weighted = w.asDiagonal() * design;
    Matrix normal = design.transpose() * weighted;
    Vector coef = normal.ldlt().solve(Vector::Unit(terms, 0));
    return Kernel{lo, weighted * coef};
}

Vector LoessSmoother::fit(VectorRef series) const {
    if (series.size() != n_) {
        fail(ErrorCode::invalid_input, "series length does not match the smoother");
    }
    Vector out(n_);
    for (Eigen::Index i = 0; i < n_; ++i) {
        if (is_interior(i)) {
            out(i) = interior_.weights.dot(series.segment(i - reach_, interior_.weights.size()));
        } else if (auto it = edges_.find(i); it != edges_.end()) {
            out(i) = it->second.weights.dot(series.segment(it->second.first, it->second.weights.size()));
        } else {
            Kernel kernel = make_kernel(i);
            out(i) = kernel.weights.dot(series.segment(kernel.first, kernel.weights.size()));
        }
    }
    return out;
}

SmoothResult LoessSmoother::smooth(VectorRef series) const {
    require_finite(series, "series");
    SmoothResult out;
    out.fitted = fit(series);
    out.residuals = series - out.fitted;
    out.df = df_;
    return out;
}

Matrix LoessSmoother::fit_columns(MatrixRef values) const {
    Matrix out(values.rows(), values.cols());
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
        out.col(j) = fit(values.col(j));
    }
    return out;
}

SmoothResult loess_smooth(VectorRef series, const SmootherConfig& cfg) {
    return LoessSmoother(series.size(), cfg).smooth(series);
}

double empirical_snr(VectorRef series, const LoessSmoother& smoother) {
    require_finite(series, "series");
    Vector fitted = smoother.fit(series);
    Vector residuals = series - fitted;
    double resid_sd = population_sd(residuals);
    double series_sd = population_sd(series);
    if (!(resid_sd > 1e-12 * series_sd) || !(series_sd > 0.0)) {
        fail(ErrorCode::degenerate_residual,
             "residual standard deviation is zero; empirical SNR is undefined");
    }
    return population_sd(fitted) / resid_sd;
}

double empirical_snr(VectorRef series, const SmootherConfig& cfg) {
    return empirical_snr(series, LoessSmoother(series.size(), cfg));
}

} // namespace mafkit
