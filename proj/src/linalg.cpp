#include <mafkit/linalg.hpp>

#include <mafkit/error.hpp>

#include <cmath>
#include <sstream>

namespace mafkit {

SymMatrix::SymMatrix(const Matrix& m) {
    if (m.rows() != m.cols()) {
        fail(ErrorCode::invalid_input, "symmetric matrix must be square");
    }
    require_finite(m, "symmetric matrix");
    double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymmetryTolerance * scale) {
        std::ostringstream os;
        os << "matrix is not symmetric (max |M_ij - M_ji| = " << asym << ")";
        fail(ErrorCode::invalid_input, os.str());
    }
    m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::identity(Eigen::Index dim) {
    return SymMatrix(Matrix::Identity(dim, dim));
}

SymMatrix SymMatrix::diagonal(const Vector& d) {
    return SymMatrix(Matrix(d.asDiagonal()));
}

bool SymMatrix::is_spd() const {
    if (dim() == 0) {
        return false;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m_, Eigen::EigenvaluesOnly);
    const Vector& values = solver.eigenvalues();
    double largest = values.maxCoeff();
    return largest > 0.0 && values.minCoeff() > kSpdRelativeTolerance * largest;
}

void require_finite(MatrixRef data, const char* what) {
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
        for (Eigen::Index i = 0; i < data.rows(); ++i) {
            if (!std::isfinite(data(i, j))) {
                std::ostringstream os;
                os << what << ": non-finite value at row " << i << ", column " << j;
                fail(ErrorCode::invalid_input, os.str());
            }
        }
    }
}

SymMatrix sample_covariance(MatrixRef data) {
    if (data.rows() < 2) {
        fail(ErrorCode::insufficient_data, "covariance needs at least 2 rows");
    }
    require_finite(data, "covariance input");
    Matrix centered = data.rowwise() - data.colwise().mean();
    Matrix cov = centered.transpose() * centered / static_cast<double>(data.rows() - 1);
    return SymMatrix(0.5 * (cov + cov.transpose()));
}

Matrix first_differences(MatrixRef data) {
    Eigen::Index n = data.rows();
    if (n < 2) {
        return Matrix(0, data.cols());
    }
    return data.bottomRows(n - 1) - data.topRows(n - 1);
}

SymMatrix lag1_diff_covariance(MatrixRef data) {
    if (data.rows() < 3) {
        fail(ErrorCode::insufficient_data, "differenced covariance needs at least 3 rows");
    }
    return sample_covariance(first_differences(data));
}

void orient_largest_positive(Eigen::Ref<Vector> v) {
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) {
        v = -v;
    }
}

EigenPairs sym_eig(const SymMatrix& m, EigenOrder order) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m.matrix());
    if (solver.info() != Eigen::Success) {
        fail(ErrorCode::invalid_input, "symmetric eigensolver did not converge");
    }
    // Eigen returns ascending eigenvalues.
    EigenPairs out{solver.eigenvalues(), solver.eigenvectors()};
    if (order == EigenOrder::descending) {
        out.values.reverseInPlace();
        out.vectors = out.vectors.rowwise().reverse().eval();
    }
    for (Eigen::Index j = 0; j < out.vectors.cols(); ++j) {
        orient_largest_positive(out.vectors.col(j));
    }
    return out;
}

SymMatrix inverse_sqrt(const SymMatrix& m) {
    EigenPairs eig = sym_eig(m, EigenOrder::ascending);
    double largest = eig.values.maxCoeff();
    double smallest = eig.values.minCoeff();
    if (!(largest > 0.0) || smallest <= kSpdRelativeTolerance * largest) {
        std::ostringstream os;
        os << "matrix is not positive definite: smallest eigenvalue " << smallest
           << " against largest " << largest;
        fail(ErrorCode::singular_matrix, os.str());
    }
    Vector scale = eig.values.cwiseSqrt().cwiseInverse();
    Matrix root = eig.vectors * scale.asDiagonal() * eig.vectors.transpose();
    return SymMatrix(0.5 * (root + root.transpose()));
}

} // namespace mafkit
