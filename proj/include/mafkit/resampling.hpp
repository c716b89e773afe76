#pragma once

#include <mafkit/linalg.hpp>
#include <mafkit/oracle.hpp>
#include <mafkit/panel.hpp>
#include <mafkit/smoothing.hpp>

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

namespace mafkit {

enum class ResampleMode { permutation, bootstrap };
enum class TestStatistic { snr, autocorrelation };

std::string_view to_string(ResampleMode mode) noexcept;
std::string_view to_string(TestStatistic statistic) noexcept;

//! Row indices for one resample of n rows. Bootstrap draws circular blocks of
//! block_len consecutive rows with uniformly random starts; permutation
//! shuffles the order of the consecutive non-overlapping blocks. block_len = 1
//! gives iid draws with and without replacement respectively.
std::vector<Eigen::Index> resample_rows(Eigen::Index n, int block_len, ResampleMode mode, std::mt19937_64& rng);

struct ResampleConfig {
    int B = 1000;
    int block_len = 5;
    SmootherConfig smoother;
    int n_factors = 1;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

//! Bootstrap envelope of the leading factors. Everything is expressed with
//! unit-length coefficient vectors, for the original and every replicate.
struct ResamplingEnvelope {
    //! One B x n matrix per retained factor.
    std::vector<Matrix> replicate_factors;
    //! One B x p matrix per retained factor.
    std::vector<Matrix> replicate_coefficients;
    //! One n x 2 matrix (lower, upper) per retained factor.
    std::vector<Matrix> pointwise_bands;
    Matrix original_coefficients;
    Matrix original_factors;
    Matrix original_smoothed;
    //! Replicates redrawn because their covariance was singular.
    int retries = 0;
};

ResamplingEnvelope resample_maf(const TimeSeriesPanel& panel, const ResampleConfig& cfg);

struct TestConfig {
    int B = 1000;
    SmootherConfig smoother;
    //! Defaults to permutation for block_len = 1 and bootstrap otherwise.
    std::optional<ResampleMode> mode;
    int block_len = 1;
    int n_factors_tested = 1;
    TestStatistic statistic = TestStatistic::snr;
    //! (1 + #{null >= observed}) / (1 + B) instead of #{null >= observed} / B.
    bool conservative_p = false;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

struct TestReport {
    TestStatistic statistic = TestStatistic::snr;
    ResampleMode mode = ResampleMode::permutation;
    int block_len = 1;
    int B = 0;
    std::uint64_t seed = 0;
    bool conservative_p = false;
    //! Per tested factor.
    Vector observed;
    //! B x k null statistics.
    Matrix null_draws;
    Vector p_values;
    int retries = 0;
};

//! Resampling test for the presence of a smooth common signal in each of the
//! leading factors. Null panels are the smoother residuals, inflated by
//! sqrt(n / (n - df)) and resampled in rows, with no smooth added back.
TestReport signal_presence_test(const TimeSeriesPanel& panel, const TestConfig& cfg);

struct PowerConfig {
    int B = 1000;
    double alpha = 0.05;
    SmootherConfig smoother;
    TestStatistic statistic = TestStatistic::snr;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

struct PowerPoint {
    double multiplier = 0.0;
    double power = 0.0;
};

struct PowerCurve {
    //! (1 - alpha) quantile of the simulated null statistics.
    double threshold = 0.0;
    std::vector<PowerPoint> points;
};

//! Null panels are pure noise from spec (AR(1) in time with phi = k_eps);
//! alternatives add multiplier * signal(t) * b. The statistic is that of the
//! leading MAF factor. The signal is used exactly as given.
PowerCurve power_curve(const SnModelSpec& spec, const Vector& signal, const std::vector<double>& multipliers,
                       const PowerConfig& cfg);

struct SelectionMethod {
    enum class Kind { scree, cutoff, cv, test };
    Kind kind = Kind::scree;
    //! cutoff: fraction of the positive autocorrelation mass to retain.
    double alpha_frac = 0.95;
    //! cv: fraction of rows, taken from the end, held out.
    double holdout_frac = 0.25;
    //! cv: smallest k whose RMSE is within this relative margin of the minimum.
    double cv_tolerance = 0.01;
    //! test: replicates and level.
    int B = 999;
    double alpha = 0.05;

    static SelectionMethod scree() { return {}; }
    static SelectionMethod cutoff(double alpha_frac);
    static SelectionMethod cv(double holdout_frac);
    static SelectionMethod test(int B, double alpha);
};

std::string_view to_string(SelectionMethod::Kind kind) noexcept;

struct SelectionResult {
    int k = 0;
    SelectionMethod::Kind method = SelectionMethod::Kind::scree;
    Vector autocorrelations;
    //! scree: r_j - r_{j+1}.
    Vector gaps;
    //! cutoff: cumulative share of the positive autocorrelation mass.
    Vector cumulative_fraction;
    //! cv: hold-out RMSE for k = 0 .. p-1.
    Vector cv_rmse;
    //! test: per-factor p-values.
    Vector p_values;
};

//! scree: largest autocorrelation gap. cutoff: smallest k reaching
//! alpha_frac of the positive autocorrelation mass (alpha_frac >= 1 keeps all
//! p). cv: each series is predicted on a trailing hold-out block from the
//! leading MAFs of the other series, fitted on the training block, so k
//! ranges over 0 .. p-1. test: largest k whose factors 1..k all have p-values
//! below alpha.
SelectionResult select_num_factors(const TimeSeriesPanel& panel, const SelectionMethod& method,
                                   const SmootherConfig& cfg, std::uint64_t seed, unsigned threads = 0);

//! Type-7 (linear interpolation) sample quantile.
double sample_quantile(std::vector<double> values, double prob);

} // namespace mafkit
