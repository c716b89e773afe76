#pragma once

#include <mafkit/linalg.hpp>

namespace mafkit {

//! Population single-signal model Z(t) = f(t) b + e(t) with Var e = noise_cov
//! and lag-1 autocovariance k_eps * noise_cov.
struct SnModelSpec {
    Vector b;
    SymMatrix noise_cov;
    double k_f = 1.0;
    double k_eps = 0.0;

    Eigen::Index p() const noexcept { return b.size(); }

    //! Equicorrelated noise: unit correlation diagonal, common off-diagonal
    //! correlation rho, standard deviations sigma.
    static SnModelSpec compact(Vector b, const Vector& sigma, double rho,
                               double k_f = 1.0, double k_eps = 0.0);

    //! Checks dimensions, that noise_cov is positive definite and k_f > k_eps.
    void validate() const;
};

//! Population model Z(t) = B F(t) + e(t) with q orthogonal unit-variance
//! signals whose lag-1 autocorrelations are k (descending).
struct MultiSignalSpec {
    Matrix B;
    SymMatrix noise_cov;
    Vector k;
    double k_eps = 0.0;

    Eigen::Index p() const noexcept { return B.rows(); }
    Eigen::Index q() const noexcept { return B.cols(); }

    void validate() const;
};

//! Sigma_eps = diag(sigma) [rho 11' + (1 - rho) I] diag(sigma).
SymMatrix equicorrelated_cov(const Vector& sigma, double rho);

double snr_of_weights(const Vector& w, const SnModelSpec& spec);

//! Sigma_eps^{-1} b, unit length, largest component positive.
Vector population_maf_weights(const SnModelSpec& spec);

double autocorrelation_from_snr(double snr, double k_f, double k_eps);
double signal_correlation_from_snr(double snr);

//! SNR of the combination with weight 1 on the first group of q series and
//! nu on the second, signal strengths b1 and gamma * b1, common noise
//! correlation rho and unit noise variance.
double model1_snr(double nu, double b1, double gamma, double rho, int q);

struct Model1Ratios {
    double nu_maf;
    double nu_pca;
    double snr_maf;
    double snr_pca;
};

Model1Ratios model1_optimal_ratios(double b1, double gamma, double rho, int q);

struct Model1Asymptotics {
    //! q b1^2 (1 - gamma)^2 / (2 (1 - rho))
    double snr_maf_approx;
    //! b1^2 (1 + nu_pca gamma)^2 / (rho (1 + nu_pca)^2), the q -> infinity limit
    double snr_pca_approx;
};

Model1Asymptotics model1_asymptotics(double b1, double gamma, double rho, int q);

//! w_i proportional to b_i / sigma_i^2 - rho / (1 + rho (p - 1)) sum_j b_j / (sigma_i sigma_j);
//! unit length, largest component positive.
Vector model2_maf_weights(const Vector& b, const Vector& sigma, double rho);

struct AppendixClosedForm {
    //! The two eigenpairs of bt bt' + rho 11' + (1 - rho) I outside the
    //! (1 - rho) eigenspace, bt = b / sigma; values descending, unit vectors.
    Eigen::Vector2d pc_values;
    Matrix pc_vectors;
    //! Leading MAF weights in the original coordinates, unit length.
    Vector maf1;
    //! True iff all sigma are equal, in which case maf1 lies in span(PC1, PC2).
    bool in_pc12_span = false;
};

AppendixClosedForm appendix_closed_form(const Vector& b, double rho, const Vector& sigma);

//! First q eigenvectors of Sigma_Z^{-1} B B' via the symmetric form
//! Sigma_Z^{-1/2} B B' Sigma_Z^{-1/2}; unit columns.
Matrix cca_population_weights(const MultiSignalSpec& spec);

//! First q population MAF weight vectors (descending autocorrelation) from
//! Sigma_Z and the differenced covariance 2 Sigma_Z - 2 sym(Sigma_dZ); unit columns.
Matrix population_maf_multi(const MultiSignalSpec& spec);

//! Leading q eigenvectors of Sigma_Z = B B' + Sigma_eps.
Matrix population_pca_multi(const MultiSignalSpec& spec);

//! Principal angles between the column spans, ascending, in [0, pi/2].
Vector subspace_principal_angles(const Matrix& a, const Matrix& b);

struct LlrSnr {
    //! b' Sigma_eps^{-1} b
    double snr;
    //! snr / 2, the expected log-likelihood ratio for a unit-norm signal.
    double half_llr;
};

LlrSnr expected_llr_snr(const SnModelSpec& spec);

//! ln L_A - ln L_0 for Gaussian noise, where the alternative has mean
//! f(t) b and the null mean zero.
double log_likelihood_ratio(MatrixRef panel, const Vector& f, const SnModelSpec& spec);

} // namespace mafkit
