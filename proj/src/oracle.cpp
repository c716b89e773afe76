#include <mafkit/oracle.hpp>

#include <mafkit/error.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mafkit {

namespace {

Vector normalized_oriented(Vector v) {
    double norm = v.norm();
    if (!(norm > 0.0)) {
        fail(ErrorCode::invalid_input, "cannot normalise a zero weight vector");
    }
    v /= norm;
    orient_largest_positive(v);
    return v;
}

void normalize_columns(Matrix& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        m.col(j).normalize();
        orient_largest_positive(m.col(j));
    }
}

Eigen::LLT<Matrix> spd_factor(const SymMatrix& m, const char* what) {
    if (!m.is_spd()) {
        fail(ErrorCode::singular_matrix, std::string(what) + " is not positive definite");
    }
    Eigen::LLT<Matrix> llt(m.matrix());
    if (llt.info() != Eigen::Success) {
        fail(ErrorCode::singular_matrix, std::string(what) + " is not positive definite");
    }
    return llt;
}

void check_model1(double rho, int q) {
    if (q < 1) {
        fail(ErrorCode::invalid_input, "group size q must be positive");
    }
    if (!(rho > -1.0 / (2.0 * q - 1.0)) || !(rho < 1.0)) {
        std::ostringstream os;
        os << "noise correlation rho=" << rho << " must lie in (-1/(2q-1), 1) for q=" << q;
        fail(ErrorCode::invalid_input, os.str());
    }
}

} // namespace

SymMatrix equicorrelated_cov(const Vector& sigma, double rho) {
    Eigen::Index p = sigma.size();
    if (p < 1) {
        fail(ErrorCode::invalid_input, "noise scale vector is empty");
    }
    if ((sigma.array() <= 0.0).any()) {
        fail(ErrorCode::invalid_input, "noise standard deviations must be positive");
    }
    if (p > 1 && !(rho > -1.0 / static_cast<double>(p - 1))) {
        std::ostringstream os;
        os << "common correlation rho=" << rho << " must exceed -1/(p-1) for p=" << p;
        fail(ErrorCode::invalid_input, os.str());
    }
    if (!(rho < 1.0)) {
        fail(ErrorCode::invalid_input, "common correlation must be below 1");
    }
    Matrix corr = Matrix::Constant(p, p, rho);
    corr.diagonal().setOnes();
    return SymMatrix(sigma.asDiagonal() * corr * sigma.asDiagonal());
}

SnModelSpec SnModelSpec::compact(Vector b, const Vector& sigma, double rho, double k_f, double k_eps) {
    if (b.size() != sigma.size()) {
        fail(ErrorCode::invalid_input, "b and sigma lengths differ");
    }
    SnModelSpec spec{std::move(b), equicorrelated_cov(sigma, rho), k_f, k_eps};
    spec.validate();
    return spec;
}

void SnModelSpec::validate() const {
    if (b.size() < 1 || noise_cov.dim() != b.size()) {
        fail(ErrorCode::invalid_input, "signal vector and noise covariance dimensions differ");
    }
    if (!noise_cov.is_spd()) {
        fail(ErrorCode::singular_matrix, "noise covariance is not positive definite");
    }
    if (!(k_f > k_eps) || k_f > 1.0 || !(k_eps > -1.0)) {
        fail(ErrorCode::invalid_input, "need -1 < k_eps < k_f <= 1");
    }
}

void MultiSignalSpec::validate() const {
    if (B.rows() < 1 || B.cols() < 1 || B.cols() > B.rows()) {
        fail(ErrorCode::invalid_input, "signal matrix must be p x q with 1 <= q <= p");
    }
    if (noise_cov.dim() != B.rows() || k.size() != B.cols()) {
        fail(ErrorCode::invalid_input, "multi-signal dimensions are inconsistent");
    }
    if (!noise_cov.is_spd()) {
        fail(ErrorCode::singular_matrix, "noise covariance is not positive definite");
    }
    if (!(k.minCoeff() > k_eps)) {
        fail(ErrorCode::invalid_input, "every signal autocorrelation must exceed k_eps");
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(B);
    if (qr.rank() < B.cols()) {
        fail(ErrorCode::invalid_input, "signal matrix B is not of full column rank");
    }
}

double snr_of_weights(const Vector& w, const SnModelSpec& spec) {
    if (w.size() != spec.p()) {
        fail(ErrorCode::invalid_input, "weight vector has the wrong length");
    }
    if (!(w.squaredNorm() > 0.0)) {
        fail(ErrorCode::invalid_input, "SNR of a zero weight vector is undefined");
    }
    double signal = w.dot(spec.b);
    return signal * signal / w.dot(spec.noise_cov.matrix() * w);
}

Vector population_maf_weights(const SnModelSpec& spec) {
    auto llt = spd_factor(spec.noise_cov, "noise covariance");
    return normalized_oriented(llt.solve(spec.b));
}

double autocorrelation_from_snr(double snr, double k_f, double k_eps) {
    if (std::isinf(snr)) {
        return k_f;
    }
    return (snr * k_f + k_eps) / (snr + 1.0);
}

double signal_correlation_from_snr(double snr) {
    if (std::isinf(snr)) {
        return 1.0;
    }
    return std::sqrt(snr / (snr + 1.0));
}

double model1_snr(double nu, double b1, double gamma, double rho, int q) {
    check_model1(rho, q);
    double qd = static_cast<double>(q);
    double signal = 1.0 + nu * gamma;
    double noise = (1.0 - rho) * (1.0 + nu * nu) + rho * qd * (1.0 + nu) * (1.0 + nu);
    return b1 * b1 * qd * signal * signal / noise;
}

Model1Ratios model1_optimal_ratios(double b1, double gamma, double rho, int q) {
    check_model1(rho, q);
    double qd = static_cast<double>(q);
    double base = 1.0 - rho + rho * qd;
    double denom = base - gamma * rho * qd;
    if (std::abs(denom) < 1e-14 * std::max(1.0, std::abs(base))) {
        std::ostringstream os;
        os << "MAF coefficient ratio has a pole at gamma=" << gamma << ", rho=" << rho << ", q=" << q
           << " (1 - rho + rho q = gamma rho q)";
        fail(ErrorCode::pole, os.str());
    }
    double b2 = gamma * b1;
    double alpha_denom = 2.0 * (b1 * b2 + rho);
    if (std::abs(alpha_denom) < 1e-14) {
        std::ostringstream os;
        os << "PCA coefficient ratio has a pole at b1 b2 + rho = 0 (b1=" << b1 << ", gamma=" << gamma
           << ", rho=" << rho << ")";
        fail(ErrorCode::pole, os.str());
    }
    double alpha = (b1 * b1 - b2 * b2) / alpha_denom;

    Model1Ratios out{};
    out.nu_maf = (gamma * base - rho * qd) / denom;
    out.nu_pca = std::sqrt(alpha * alpha + 1.0) - alpha;
    out.snr_maf = model1_snr(out.nu_maf, b1, gamma, rho, q);
    out.snr_pca = model1_snr(out.nu_pca, b1, gamma, rho, q);
    return out;
}

Model1Asymptotics model1_asymptotics(double b1, double gamma, double rho, int q) {
    if (!(rho > 0.0 && rho < 1.0)) {
        fail(ErrorCode::invalid_input, "asymptotic forms need 0 < rho < 1");
    }
    Model1Ratios ratios = model1_optimal_ratios(b1, gamma, rho, q);
    double nu = ratios.nu_pca;
    Model1Asymptotics out{};
    out.snr_maf_approx = static_cast<double>(q) * b1 * b1 * (1.0 - gamma) * (1.0 - gamma) /
                         (2.0 * (1.0 - rho));
    out.snr_pca_approx = b1 * b1 * (1.0 + nu * gamma) * (1.0 + nu * gamma) /
                         (rho * (1.0 + nu) * (1.0 + nu));
    return out;
}

Vector model2_maf_weights(const Vector& b, const Vector& sigma, double rho) {
    Eigen::Index p = b.size();
    if (sigma.size() != p || p < 1) {
        fail(ErrorCode::invalid_input, "b and sigma lengths differ");
    }
    // Validates rho and sigma.
    (void)equicorrelated_cov(sigma, rho);
    double shrink = rho / (1.0 + rho * static_cast<double>(p - 1));
    double scaled_sum = (b.array() / sigma.array()).sum();
    Vector w(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        w(i) = b(i) / (sigma(i) * sigma(i)) - shrink * scaled_sum / sigma(i);
    }
    return normalized_oriented(std::move(w));
}

AppendixClosedForm appendix_closed_form(const Vector& b, double rho, const Vector& sigma) {
    Eigen::Index p = b.size();
    if (sigma.size() != p || p < 2) {
        fail(ErrorCode::invalid_input, "closed form needs p >= 2 and matching sigma");
    }
    (void)equicorrelated_cov(sigma, rho);
    Vector bt = b.array() / sigma.array();
    double norm2 = bt.squaredNorm();
    if (!(norm2 > 0.0)) {
        fail(ErrorCode::invalid_input, "signal vector is zero");
    }
    double pd = static_cast<double>(p);
    double sum = bt.sum();
    Vector ones = Vector::Ones(p);

    Eigen::Vector2d lambda;
    Matrix u(p, 2);
    if (std::abs(sum) <= 1e-12 * std::sqrt(norm2 * pd)) {
        // b orthogonal to 1: the eigenvectors are b and 1 themselves.
        double lambda_b = norm2 + 1.0 - rho;
        double lambda_1 = rho * pd + 1.0 - rho;
        Vector vb = bt / std::sqrt(norm2);
        Vector v1 = ones / std::sqrt(pd);
        if (lambda_b >= lambda_1) {
            lambda << lambda_b, lambda_1;
            u.col(0) = vb;
            u.col(1) = v1;
        } else {
            lambda << lambda_1, lambda_b;
            u.col(0) = v1;
            u.col(1) = vb;
        }
    } else {
        double disc2 = (norm2 - rho * pd) * (norm2 - rho * pd) + 4.0 * sum * sum * rho;
        // Eigenvalues of the rank-2 symmetric part are real, so disc2 >= 0 up to rounding.
        if (disc2 < -1e-10 * std::max(1.0, norm2 * norm2)) {
            fail(ErrorCode::invalid_input, "negative discriminant in closed-form eigenstructure");
        }
        double disc = std::sqrt(std::max(disc2, 0.0));
        for (int s = 0; s < 2; ++s) {
            double sign = s == 0 ? 1.0 : -1.0;
            double a = (rho * pd - norm2 + sign * disc) / (2.0 * sum);
            lambda(s) = 0.5 * (rho * pd + norm2 + sign * disc) + 1.0 - rho;
            u.col(s) = (a * ones + bt).normalized();
        }
    }

    // 2x2 block of H' (rho 11' + (1 - rho) I) H restricted to PC1, PC2.
    double t1 = u.col(0).sum();
    double t2 = u.col(1).sum();
    double a = (1.0 - rho + rho * t1 * t1) / lambda(0);
    double d = (1.0 - rho + rho * t2 * t2) / lambda(1);
    double off = rho * t1 * t2 / std::sqrt(lambda(0) * lambda(1));
    double mu = 0.5 * (a + d - std::sqrt((a - d) * (a - d) + 4.0 * off * off));
    double x = mu - d;
    double y = off;
    double len = std::hypot(x, y);
    if (len < 1e-14 * std::max(1.0, std::abs(a) + std::abs(d))) {
        x = a <= d ? 1.0 : 0.0;
        y = a <= d ? 0.0 : 1.0;
    } else {
        x /= len;
        y /= len;
    }
    Vector w_tilde = x * u.col(0) / std::sqrt(lambda(0)) + y * u.col(1) / std::sqrt(lambda(1));

    AppendixClosedForm out;
    out.pc_values = lambda;
    out.pc_vectors = u;
    normalize_columns(out.pc_vectors);
    out.maf1 = normalized_oriented(w_tilde.array() / sigma.array());
    double s0 = sigma(0);
    out.in_pc12_span = ((sigma.array() - s0).abs() <= 1e-12 * std::abs(s0)).all();
    return out;
}

Matrix cca_population_weights(const MultiSignalSpec& spec) {
    spec.validate();
    Matrix signal = spec.B * spec.B.transpose();
    SymMatrix sigma_z(signal + spec.noise_cov.matrix());
    SymMatrix root = inverse_sqrt(sigma_z);
    SymMatrix pencil(root.matrix() * signal * root.matrix());
    EigenPairs eig = sym_eig(pencil, EigenOrder::descending);
    Matrix out = root.matrix() * eig.vectors.leftCols(spec.q());
    normalize_columns(out);
    return out;
}

Matrix population_maf_multi(const MultiSignalSpec& spec) {
    spec.validate();
    Matrix sigma_z = spec.B * spec.B.transpose() + spec.noise_cov.matrix();
    Matrix lagged = spec.B * spec.k.asDiagonal() * spec.B.transpose() +
                    spec.k_eps * spec.noise_cov.matrix();
    Matrix diff = 2.0 * sigma_z - (lagged + lagged.transpose());
    SymMatrix root = inverse_sqrt(SymMatrix(sigma_z));
    SymMatrix pencil(root.matrix() * diff * root.matrix());
    EigenPairs eig = sym_eig(pencil, EigenOrder::ascending);
    Matrix out = root.matrix() * eig.vectors.leftCols(spec.q());
    normalize_columns(out);
    return out;
}

Matrix population_pca_multi(const MultiSignalSpec& spec) {
    spec.validate();
    SymMatrix sigma_z(spec.B * spec.B.transpose() + spec.noise_cov.matrix());
    return sym_eig(sigma_z, EigenOrder::descending).vectors.leftCols(spec.q());
}

Vector subspace_principal_angles(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols() || a.cols() < 1) {
        fail(ErrorCode::invalid_input, "principal angles need two p x q bases of equal shape");
    }
    Eigen::Index q = a.cols();
    auto orthonormal = [q](const Matrix& m, const char* which) {
        Eigen::ColPivHouseholderQR<Matrix> rank_check(m);
        if (rank_check.rank() < q) {
            fail(ErrorCode::invalid_input, std::string("basis ") + which + " is rank deficient");
        }
        Eigen::HouseholderQR<Matrix> qr(m);
        return Matrix(qr.householderQ() * Matrix::Identity(m.rows(), q));
    };
    Matrix qa = orthonormal(a, "A");
    Matrix qb = orthonormal(b, "B");
    Matrix cross = qa.transpose() * qb;
    Vector cosines = Eigen::JacobiSVD<Matrix>(cross).singularValues();
    Vector sines = Eigen::JacobiSVD<Matrix>(qb - qa * cross).singularValues();
    // Cosines come out descending; pair the i-th largest cosine with the i-th smallest sine.
    Vector angles(q);
    for (Eigen::Index i = 0; i < q; ++i) {
        double c = std::min(1.0, cosines(i));
        double s = std::min(1.0, sines(q - 1 - i));
        angles(i) = std::atan2(s, c);
    }
    std::sort(angles.data(), angles.data() + q);
    return angles;
}

LlrSnr expected_llr_snr(const SnModelSpec& spec) {
    auto llt = spd_factor(spec.noise_cov, "noise covariance");
    double snr = spec.b.dot(llt.solve(spec.b));
    return LlrSnr{snr, 0.5 * snr};
}

double log_likelihood_ratio(MatrixRef panel, const Vector& f, const SnModelSpec& spec) {
    if (panel.cols() != spec.p() || panel.rows() != f.size()) {
        fail(ErrorCode::invalid_input, "panel, signal and model dimensions differ");
    }
    auto llt = spd_factor(spec.noise_cov, "noise covariance");
    // The log-determinant and 2 pi terms cancel between the two hypotheses.
    double out = 0.0;
    for (Eigen::Index t = 0; t < panel.rows(); ++t) {
        Vector z = panel.row(t).transpose();
        Vector resid = z - f(t) * spec.b;
        out += -0.5 * resid.dot(llt.solve(resid)) + 0.5 * z.dot(llt.solve(z));
    }
    return out;
}

} // namespace mafkit
