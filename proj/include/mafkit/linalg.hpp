#pragma once

#include <Eigen/Dense>

namespace mafkit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using MatrixRef = Eigen::Ref<const Eigen::MatrixXd>;
using VectorRef = Eigen::Ref<const Eigen::VectorXd>;

//! Symmetry threshold used when wrapping a general matrix.
inline constexpr double kSymmetryTolerance = 1e-12;
//! Smallest admissible eigenvalue ratio for a matrix treated as positive definite.
inline constexpr double kSpdRelativeTolerance = 1e-12;

//! A real symmetric matrix. Construction checks symmetry (relative to the
//! largest entry) and then stores the exactly symmetrised average.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(const Matrix& m);

    static SymMatrix identity(Eigen::Index dim);
    static SymMatrix diagonal(const Vector& d);

    Eigen::Index dim() const noexcept { return m_.rows(); }
    const Matrix& matrix() const noexcept { return m_; }
    double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

    //! True if every eigenvalue exceeds kSpdRelativeTolerance times the largest.
    bool is_spd() const;

private:
    Matrix m_;
};

enum class EigenOrder { ascending, descending };

struct EigenPairs {
    Vector values;
    //! Orthonormal columns; column i pairs with values(i).
    Matrix vectors;
};

//! Centered sample covariance of the columns, 1/(n-1) normalisation.
SymMatrix sample_covariance(MatrixRef data);

//! Covariance of the (n-1) x p first-difference panel, same normalisation.
SymMatrix lag1_diff_covariance(MatrixRef data);

//! Rows i+1 minus rows i.
Matrix first_differences(MatrixRef data);

//! Full symmetric eigendecomposition. Each eigenvector is oriented so that its
//! largest-magnitude component is positive.
EigenPairs sym_eig(const SymMatrix& m, EigenOrder order);

//! M^{-1/2} via the spectral decomposition. Throws singular_matrix when the
//! smallest eigenvalue is not above kSpdRelativeTolerance times the largest.
SymMatrix inverse_sqrt(const SymMatrix& m);

//! Orients v so its largest-magnitude component is positive.
void orient_largest_positive(Eigen::Ref<Vector> v);

//! Throws invalid_input if any entry is NaN or infinite.
void require_finite(MatrixRef data, const char* what);

} // namespace mafkit
