#pragma once

#include <mafkit/linalg.hpp>
#include <mafkit/panel.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

namespace mafkit {

enum class SignalKind { linear, quadratic, sinusoid_mixture, piecewise_interpolated };

struct SignalSpec {
    SignalKind kind = SignalKind::piecewise_interpolated;
    Eigen::Index n = 150;
    //! Drives the random periods, phases and amplitudes of sinusoid_mixture.
    std::uint64_t seed = 0;
    //! (position in [0, 1], value) pairs with strictly increasing positions,
    //! used by piecewise_interpolated. Empty selects default_control_points().
    std::vector<std::pair<double, double>> control_points;
};

struct GeneratedSignal {
    //! Zero sum, unit Euclidean norm.
    Vector values;
    //! Lag-1 autocorrelation of the signal, (1/(n-1)) sum f(t) f(t+1) taken
    //! on the unit mean-square rescaling of f.
    double k_f = 0.0;
};

GeneratedSignal gen_signal(const SignalSpec& spec);

//! A slowly varying path that is flat early on and rises towards the end,
//! used as the default smooth test signal.
std::vector<std::pair<double, double>> default_control_points();

//! sqrt(n) f: the unit mean-square version of a unit-norm signal, the scale
//! under which b_i^2 is the per-step signal variance of series i.
Vector unit_variance(const Vector& f);

//! Noise covariance either in full or as equicorrelated (rho, sigma), with
//! optional AR(1) time dependence ar_phi, which gives k_eps = ar_phi.
struct NoiseSpec {
    std::optional<SymMatrix> cov;
    double rho = 0.0;
    Vector sigma;
    double ar_phi = 0.0;

    static NoiseSpec full(SymMatrix cov, double ar_phi = 0.0);
    static NoiseSpec compact(double rho, Vector sigma, double ar_phi = 0.0);

    SymMatrix covariance(Eigen::Index p) const;
};

//! Z(t) = f(t) b + e(t) with Gaussian noise; f is used exactly as given.
TimeSeriesPanel gen_sn_panel(const Vector& f, const Vector& b, const NoiseSpec& noise, std::uint64_t seed);

//! |sample correlation| between a factor and the signal.
double correlation_with_signal(VectorRef factor, VectorRef f);

//! sqrt(R^2) of the least-squares regression of f on the factor columns plus an intercept.
double multi_factor_r(VectorRef f, MatrixRef factors);

struct ExperimentGrid {
    std::vector<double> rho_values;
    std::vector<double> b_multipliers;
    Vector base_b;
    Eigen::Index n = 150;
    int reps = 100;
    std::uint64_t seed = 0;
    SignalSpec signal;
    bool standardize_pca = true;
    unsigned threads = 0;

    void validate() const;
};

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

struct ExperimentCell {
    double rho = 0.0;
    double multiplier = 0.0;
    MeanSe maf1;
    MeanSe pca1;
    MeanSe pc12;
};

struct ExperimentTable {
    std::vector<ExperimentCell> cells;
};

//! One cell per (rho, multiplier) pair, rho varying slowest. Each rep draws
//! a panel with signal unit_variance(f) scaled by multiplier * base_b and
//! records the MAF1, PC1 and joint PC1+PC2 signal correlations.
ExperimentTable run_comparison_experiment(const ExperimentGrid& grid);

//! Columns rho,multiplier,statistic,mean,se,lower,upper with lower/upper at
//! mean -/+ 2 se; one row per cell and statistic.
void write_experiment_csv(const ExperimentTable& table, std::ostream& out);

} // namespace mafkit
