#pragma once

#include <mafkit/linalg.hpp>
#include <mafkit/panel.hpp>

#include <utility>
#include <vector>

namespace mafkit {

//! Maximum autocorrelation factors of a panel.
//!
//! Columns of `coefficients` are the factor weights; `factors` is the panel
//! times the coefficients, so every factor has unit sample variance and the
//! factors are mutually uncorrelated. `diff_eigenvalues` are the eigenvalues
//! of the whitened differenced covariance in ascending order and
//! `autocorrelations` the matching lag-1 autocorrelations 1 - K_j / 2, so they
//! are non-increasing across factors.
struct MafDecomposition {
    Matrix coefficients;
    Matrix factors;
    Vector diff_eigenvalues;
    Vector autocorrelations;
    //! Index pairs (j, j+1) whose eigenvalues have relative gap below 1e-8.
    //! Factor identity within such a pair is not unique.
    std::vector<std::pair<Eigen::Index, Eigen::Index>> near_degenerate;
};

struct PcaDecomposition {
    //! Orthonormal columns in the (optionally standardised) coordinates.
    Matrix coefficients;
    Matrix factors;
    //! Descending eigenvalues of the covariance (or correlation) matrix.
    Vector variances;
    bool standardized = true;
};

//! Requires n > p >= 1 and a positive definite sample covariance.
MafDecomposition compute_maf(const TimeSeriesPanel& panel);
MafDecomposition compute_maf(MatrixRef values);

PcaDecomposition compute_pca(const TimeSeriesPanel& panel, bool standardize = true);

//! Lag-1 autocorrelation in the variogram form 1 - Var(dx) / (2 Var(x)),
//! which is the quantity maximised by the leading factor. Both variances use
//! the library covariance estimator; the result is clamped to [-1, 1].
double factor_autocorrelation(VectorRef series);

//! +1 when the series co-varies positively with the time index, -1 when
//! negatively and +1 for an exact tie.
double trend_sign(VectorRef series);

} // namespace mafkit
