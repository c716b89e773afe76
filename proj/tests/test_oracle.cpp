#include "helpers.hpp"

#include <mafkit/error.hpp>
#include <mafkit/oracle.hpp>

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace mafkit;
using testutil::angle_between;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected a mafkit::Error");
    return ErrorCode::invalid_input;
}

// Model I written out as a dense 2q-dimensional problem.
struct DenseModel1 {
    Vector b;
    Matrix noise;
};

DenseModel1 dense_model1(double b1, double gamma, double rho, int q) {
    Eigen::Index p = 2 * q;
    DenseModel1 m{Vector(p), Matrix::Constant(p, p, rho)};
    m.noise.diagonal().setOnes();
    m.b.head(q).setConstant(b1);
    m.b.tail(q).setConstant(gamma * b1);
    return m;
}

Vector group_weights(double nu, int q) {
    Vector w(2 * q);
    w.head(q).setOnes();
    w.tail(q).setConstant(nu);
    return w;
}

// Maximiser of g over the ratio nu = tan(theta): coarse scan of the half
// circle followed by golden-section refinement around the best angle.
template <typename G>
double argmax_ratio(G&& g) {
    const int steps = 4000;
    double best_theta = 0.0;
    double best = -1e300;
    for (int k = 0; k < steps; ++k) {
        double theta = -std::numbers::pi / 2 + std::numbers::pi * (k + 0.5) / steps;
        double v = g(std::tan(theta));
        if (v > best) {
            best = v;
            best_theta = theta;
        }
    }
    double h = std::numbers::pi / steps;
    double theta = testutil::golden_max([&](double t) { return g(std::tan(t)); }, best_theta - h, best_theta + h, 1e-14);
    return std::tan(theta);
}

Matrix projector(const Matrix& basis) {
    Eigen::HouseholderQR<Matrix> qr(basis);
    Matrix q = qr.householderQ() * Matrix::Identity(basis.rows(), basis.cols());
    return q * q.transpose();
}

} // namespace

TEST_SUITE("oracle") {

TEST_CASE("SNR of weights") {
    SnModelSpec spec{Eigen::Vector3d(0.8, 0.4, 0.2), SymMatrix::identity(3)};
    CHECK(snr_of_weights(Eigen::Vector3d(0.8, 0.4, 0.2), spec) == doctest::Approx(0.84).epsilon(1e-14));
    CHECK(snr_of_weights(Eigen::Vector3d(0.4, -0.8, 0.0), spec) == 0.0);
    Vector w = Eigen::Vector3d(0.3, -1.0, 2.0);
    CHECK(snr_of_weights(2.0 * w, spec) == snr_of_weights(w, spec));
    CHECK(code_of([&] { snr_of_weights(Vector::Zero(3), spec); }) == ErrorCode::invalid_input);
}

TEST_CASE("SNR matches the Monte Carlo variance ratio") {
    std::mt19937_64 rng(4);
    Matrix cov(3, 3);
    cov << 1, 0.3, 0.1, 0.3, 2, -0.2, 0.1, -0.2, 0.5;
    SnModelSpec spec{Eigen::Vector3d(0.8, 0.4, 0.2), SymMatrix(cov)};
    Vector w = Eigen::Vector3d(1.0, -0.5, 2.0);
    Matrix chol = cov.llt().matrixL();
    const int n = 200000;
    Matrix noise = testutil::gaussian(n, 3, rng) * chol.transpose();
    double noise_var = (noise * w).squaredNorm() / n;
    double signal_var = std::pow(w.dot(spec.b), 2);
    CHECK(signal_var / noise_var == doctest::Approx(snr_of_weights(w, spec)).epsilon(0.02));
}

TEST_CASE("population MAF weights") {
    SnModelSpec eye{Eigen::Vector3d(0.8, 0.4, 0.2), SymMatrix::identity(3)};
    CHECK(angle_between(population_maf_weights(eye), eye.b) < 1e-12);

    SnModelSpec diag{Eigen::Vector2d(1.0, 1.0), SymMatrix::diagonal(Eigen::Vector2d(1.0, 4.0))};
    CHECK(angle_between(population_maf_weights(diag), Eigen::Vector2d(1.0, 0.25)) < 1e-12);
    CHECK(population_maf_weights(diag).norm() == doctest::Approx(1.0).epsilon(1e-14));

    SnModelSpec singular{Eigen::Vector2d(1.0, 1.0), SymMatrix(Matrix::Ones(2, 2))};
    CHECK(code_of([&] { population_maf_weights(singular); }) == ErrorCode::singular_matrix);
}

TEST_CASE("population MAF weights maximise the SNR") {
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 5; ++rep) {
        Eigen::Index p = 2 + rep;
        SnModelSpec spec{testutil::gaussian_vector(p, rng), SymMatrix(testutil::random_spd(p, rng))};
        double best = snr_of_weights(population_maf_weights(spec), spec);
        CHECK(best == doctest::Approx(expected_llr_snr(spec).snr).epsilon(1e-10));
        for (int k = 0; k < 10000; ++k) {
            CHECK(snr_of_weights(testutil::random_unit(p, rng), spec) <= best * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("autocorrelation and signal correlation from SNR") {
    CHECK(autocorrelation_from_snr(0.0, 0.9, 0.1) == doctest::Approx(0.1));
    CHECK(std::abs(autocorrelation_from_snr(1e12, 0.9, 0.1) - 0.9) < 1e-9);
    CHECK(autocorrelation_from_snr(1.0, 0.9, 0.1) == doctest::Approx(0.5));
    double previous = -2.0;
    for (int i = 0; i < 1000; ++i) {
        double r = autocorrelation_from_snr(0.01 * i, 0.8, -0.2);
        CHECK(r > previous);
        CHECK(r >= -0.2);
        CHECK(r <= 0.8);
        previous = r;
    }
    CHECK(signal_correlation_from_snr(0.0) == 0.0);
    CHECK(signal_correlation_from_snr(1.0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
    CHECK(signal_correlation_from_snr(3.0) == doctest::Approx(0.8660254037844386).epsilon(1e-14));
}

TEST_CASE("signal correlation matches simulation") {
    // w'Z = f (w'b) + w'e with SNR 3: Var f = 1 so (w'b)^2 = 3 Var(w'e).
    std::mt19937_64 rng(2);
    const Eigen::Index n = 200000;
    Vector f = testutil::gaussian_vector(n, rng);
    Vector e = testutil::gaussian_vector(n, rng);
    Vector x = std::sqrt(3.0) * f + e;
    CHECK(std::abs(testutil::pearson(x, f) - signal_correlation_from_snr(3.0)) < 0.01);
}

TEST_CASE("model I SNR") {
    CHECK(model1_snr(0.5, 1.0, 0.5, 0.0, 1) == doctest::Approx(1.25).epsilon(1e-14));
    CHECK(model1_snr(-1.0 / 0.5, 1.0, 0.5, 0.3, 4) == 0.0);
    for (int q : {1, 3, 7}) {
        for (double rho : {0.0, 0.4, -0.05}) {
            for (double nu : {-2.0, 0.3, 1.0}) {
                DenseModel1 m = dense_model1(1.3, 0.6, rho, q);
                SnModelSpec spec{m.b, SymMatrix(m.noise)};
                CHECK(model1_snr(nu, 1.3, 0.6, rho, q) ==
                      doctest::Approx(snr_of_weights(group_weights(nu, q), spec)).epsilon(1e-12));
            }
        }
    }
    CHECK(code_of([] { model1_snr(1.0, 1.0, 0.5, -0.5, 2); }) == ErrorCode::invalid_input);
}

TEST_CASE("model I optimal ratios") {
    Model1Ratios sym = model1_optimal_ratios(1.0, 1.0, 0.4, 3);
    CHECK(sym.nu_maf == doctest::Approx(1.0));
    CHECK(sym.nu_pca == doctest::Approx(1.0));

    Model1Ratios r0 = model1_optimal_ratios(1.0, 0.5, 0.0, 4);
    CHECK(r0.nu_maf == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(r0.nu_pca == doctest::Approx(0.5).epsilon(1e-14));

    Model1Ratios r = model1_optimal_ratios(1.0, 0.5, 0.2, 5);
    CHECK(r.nu_maf == doctest::Approx(-0.1 / 1.3).epsilon(1e-14));
    CHECK(r.snr_maf >= r.snr_pca);
}

TEST_CASE("model I ratios agree with numerical maximisation") {
    for (double gamma : {0.0, 0.3, 0.6, 0.9}) {
        for (double rho : {0.1, 0.5, 0.8}) {
            for (int q : {1, 5, 25}) {
                CAPTURE(gamma);
                CAPTURE(rho);
                CAPTURE(q);
                Model1Ratios r = model1_optimal_ratios(1.0, gamma, rho, q);
                double nu_maf = argmax_ratio([&](double nu) { return model1_snr(nu, 1.0, gamma, rho, q); });
                CHECK(std::abs(nu_maf - r.nu_maf) < 1e-6 * std::max(1.0, std::abs(r.nu_maf)));

                // PCA: leading eigenvector of the dense total covariance.
                DenseModel1 m = dense_model1(1.0, gamma, rho, q);
                Matrix total = m.b * m.b.transpose() + m.noise;
                Vector lead = sym_eig(SymMatrix(total), EigenOrder::descending).vectors.col(0);
                CHECK(std::abs(lead(2 * q - 1) / lead(0) - r.nu_pca) < 1e-8);
                CHECK(r.snr_maf >= r.snr_pca * (1.0 - 1e-12));
            }
        }
    }
}

TEST_CASE("model I poles are reported") {
    // 1 - rho + rho q (1 - gamma) = 0 needs gamma > 1.
    double rho = 0.5;
    int q = 2;
    double gamma = (1.0 - rho + rho * q) / (rho * q);
    CHECK(code_of([&] { model1_optimal_ratios(1.0, gamma, rho, q); }) == ErrorCode::pole);
}

TEST_CASE("model I asymptotics") {
    Model1Ratios big = model1_optimal_ratios(1.0, 0.5, 0.3, 1000);
    Model1Asymptotics a = model1_asymptotics(1.0, 0.5, 0.3, 1000);
    double ratio = big.snr_maf / a.snr_maf_approx;
    CHECK(ratio >= 0.95);
    CHECK(ratio <= 1.05);
    CHECK(big.snr_pca / a.snr_pca_approx == doctest::Approx(1.0).epsilon(0.01));

    double doubled = model1_optimal_ratios(1.0, 0.5, 0.3, 1000).snr_maf / model1_optimal_ratios(1.0, 0.5, 0.3, 500).snr_maf;
    CHECK(std::abs(doubled - 2.0) < 0.1);
    double plateau = model1_optimal_ratios(1.0, 0.5, 0.3, 1000).snr_pca / model1_optimal_ratios(1.0, 0.5, 0.3, 100).snr_pca;
    CHECK(plateau < 1.2);
    CHECK(code_of([] { model1_asymptotics(1.0, 0.5, 0.0, 10); }) == ErrorCode::invalid_input);
}

TEST_CASE("MAF to PCA SNR ratio over the contour grid") {
    auto ratio = [](double gamma, double rho, int q) {
        Model1Ratios r = model1_optimal_ratios(1.0, gamma, rho, q);
        return r.snr_maf / r.snr_pca;
    };
    const std::vector<double> gammas{0.0, 0.2, 0.4, 0.6, 0.8, 0.95};
    const std::vector<double> rhos{0.05, 0.2, 0.4, 0.6, 0.8, 0.95};
    const std::vector<int> qs{1, 5, 25};
    for (double g : gammas) {
        for (double r : rhos) {
            for (std::size_t k = 0; k < qs.size(); ++k) {
                CAPTURE(g);
                CAPTURE(r);
                CAPTURE(qs[k]);
                double here = ratio(g, r, qs[k]);
                CHECK(here >= 1.0 - 1e-12);
                if (k + 1 < qs.size()) {
                    CHECK(ratio(g, r, qs[k + 1]) >= here - 1e-12);
                }
            }
        }
    }
    for (int q : qs) {
        for (double g : gammas) {
            for (std::size_t i = 0; i + 1 < rhos.size(); ++i) {
                CHECK(ratio(g, rhos[i + 1], q) >= ratio(g, rhos[i], q) - 1e-12);
            }
        }
        for (double r : rhos) {
            for (std::size_t i = 0; i + 1 < gammas.size(); ++i) {
                CHECK(ratio(gammas[i + 1], r, q) <= ratio(gammas[i], r, q) + 1e-12);
            }
        }
    }
}

TEST_CASE("model II weights") {
    Vector b = Eigen::Vector3d(0.8, 0.4, 0.2);
    Vector ones = Vector::Ones(3);
    CHECK(angle_between(model2_maf_weights(b, ones, 0.0), b) < 1e-14);
    Vector eq = model2_maf_weights(Vector::Constant(4, 0.7), Vector::Constant(4, 2.0), 0.3);
    CHECK((eq.array() - eq(0)).abs().maxCoeff() < 1e-15);

    Matrix dense = Matrix::Constant(3, 3, 0.25);
    dense.diagonal().setOnes();
    Vector direct = dense.inverse() * b;
    direct.normalize();
    CHECK((model2_maf_weights(b, ones, 0.25) - direct).cwiseAbs().maxCoeff() < 1e-10);

    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 10; ++rep) {
        Eigen::Index p = 3 + rep;
        Vector bb = testutil::gaussian_vector(p, rng);
        Vector sigma = (testutil::gaussian_vector(p, rng).array().abs() + 0.3).matrix();
        double rho = -0.5 / static_cast<double>(p - 1) + 0.1 * rep;
        SnModelSpec spec{bb, equicorrelated_cov(sigma, rho)};
        CHECK((model2_maf_weights(bb, sigma, rho) - population_maf_weights(spec)).cwiseAbs().maxCoeff() < 1e-10);
    }
    CHECK(code_of([&] { model2_maf_weights(b, ones, -0.6); }) == ErrorCode::invalid_input);
}

TEST_CASE("closed-form eigenstructure with b orthogonal to one") {
    Vector b = Eigen::Vector3d(1.0, -0.5, -0.5);
    AppendixClosedForm cf = appendix_closed_form(b, 0.3, Vector::Ones(3));
    double lb = b.squaredNorm() + 1.0 - 0.3;
    double l1 = 0.3 * 3 + 1.0 - 0.3;
    CHECK(cf.pc_values(0) == doctest::Approx(std::max(lb, l1)).epsilon(1e-14));
    CHECK(cf.pc_values(1) == doctest::Approx(std::min(lb, l1)).epsilon(1e-14));
    Vector vb = cf.pc_values(0) == doctest::Approx(lb) ? cf.pc_vectors.col(0) : cf.pc_vectors.col(1);
    CHECK(angle_between(vb, b) < 1e-12);
}

TEST_CASE("closed-form eigenstructure agrees with a generic eigensolver") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 20; ++rep) {
        Eigen::Index p = 3 + rep % 5;
        Vector b = testutil::gaussian_vector(p, rng);
        double rho = rep % 4 == 0 ? 0.0 : 0.8 * (rep % 7) / 7.0 + 0.05;
        bool equal = rep % 2 == 0;
        Vector sigma = equal ? Vector::Constant(p, 1.7)
                             : Vector((testutil::gaussian_vector(p, rng).array().abs() + 0.4).matrix());
        CAPTURE(rep);
        AppendixClosedForm cf = appendix_closed_form(b, rho, sigma);

        Vector bt = b.array() / sigma.array();
        Matrix corr = Matrix::Constant(p, p, rho);
        corr.diagonal().setOnes();
        Matrix scaled = bt * bt.transpose() + corr;
        EigenPairs eig = sym_eig(SymMatrix(scaled), EigenOrder::descending);
        // The closed-form pair lies outside the (1 - rho) eigenspace; with
        // rho > 0 and b generic these are the two largest eigenvalues.
        if (rho > 0.0) {
            CHECK(std::abs(cf.pc_values(0) - eig.values(0)) < 1e-8);
            CHECK(std::abs(cf.pc_values(1) - eig.values(1)) < 1e-8);
            CHECK(angle_between(cf.pc_vectors.col(0), eig.vectors.col(0)) < 1e-8);
            CHECK(angle_between(cf.pc_vectors.col(1), eig.vectors.col(1)) < 1e-8);
        }
        for (int s = 0; s < 2; ++s) {
            Vector v = cf.pc_vectors.col(s);
            CHECK((scaled * v - cf.pc_values(s) * v).norm() < 1e-8 * cf.pc_values(0));
        }

        SnModelSpec spec{b, equicorrelated_cov(sigma, rho)};
        CHECK(angle_between(cf.maf1, population_maf_weights(spec)) < 1e-6);
        CHECK(cf.in_pc12_span == equal);

        if (equal) {
            Matrix total = b * b.transpose() + spec.noise_cov.matrix();
            Matrix pcs = sym_eig(SymMatrix(total), EigenOrder::descending).vectors.leftCols(2);
            if (rho > 0.0) {
                Vector resid = cf.maf1 - projector(pcs) * cf.maf1;
                CHECK(resid.norm() < 1e-8);
            }
        }
    }
}

TEST_CASE("unequal variances take MAF1 out of the PC1-PC2 span") {
    Vector b = Eigen::Vector4d(0.8, 0.4, 0.2, 0.6);
    Vector sigma = Eigen::Vector4d(1.0, 2.0, 0.5, 1.5);
    double rho = 0.4;
    AppendixClosedForm cf = appendix_closed_form(b, rho, sigma);
    CHECK_FALSE(cf.in_pc12_span);
    Matrix total = b * b.transpose() + equicorrelated_cov(sigma, rho).matrix();
    Matrix pcs = sym_eig(SymMatrix(total), EigenOrder::descending).vectors.leftCols(2);
    CHECK((cf.maf1 - projector(pcs) * cf.maf1).norm() > 1e-3);
}

TEST_CASE("principal angles") {
    std::mt19937_64 rng(1);
    Matrix a = testutil::gaussian(6, 3, rng);
    CHECK(subspace_principal_angles(a, a).maxCoeff() < 1e-7);
    Matrix r = testutil::gaussian(3, 3, rng) + 3.0 * Matrix::Identity(3, 3);
    CHECK(subspace_principal_angles(a, a * r).maxCoeff() < 1e-10);

    Matrix e = Matrix::Identity(6, 6);
    Vector right = subspace_principal_angles(e.leftCols(3), e.rightCols(3));
    CHECK((right.array() - std::numbers::pi / 2).abs().maxCoeff() < 1e-12);

    Matrix x(2, 1);
    x << 1, 0;
    Matrix y(2, 1);
    y << 1, 1;
    CHECK(subspace_principal_angles(x, y)(0) == doctest::Approx(std::numbers::pi / 4).epsilon(1e-14));
    CHECK(code_of([&] { subspace_principal_angles(a, e.leftCols(2)); }) == ErrorCode::invalid_input);
    Matrix deficient(6, 2);
    deficient << a.col(0), a.col(0);
    CHECK(code_of([&] { subspace_principal_angles(deficient, a.leftCols(2)); }) == ErrorCode::invalid_input);
}

TEST_CASE("CCA weights") {
    std::mt19937_64 rng(10);
    Matrix cov = testutil::random_spd(4, rng);
    MultiSignalSpec one{Matrix(Eigen::Vector4d(0.8, 0.4, 0.2, 0.1)), SymMatrix(cov), Vector::Constant(1, 0.9), 0.0};
    SnModelSpec single{one.B.col(0), one.noise_cov};
    CHECK(angle_between(cca_population_weights(one).col(0), population_maf_weights(single)) < 1e-10);

    Matrix B = Matrix::Zero(4, 2);
    B(0, 0) = 1.0;
    B(1, 0) = 1.0;
    B(2, 1) = 0.5;
    B(3, 1) = -0.5;
    MultiSignalSpec ortho{B, SymMatrix::identity(4), Eigen::Vector2d(0.9, 0.8), 0.0};
    Matrix w = cca_population_weights(ortho);
    CHECK(subspace_principal_angles(w, B).maxCoeff() < 1e-10);
    // Different canonical correlations: each column is parallel to one column of B.
    CHECK(angle_between(w.col(0), B.col(0)) < 1e-10);
    CHECK(angle_between(w.col(1), B.col(1)) < 1e-10);

    MultiSignalSpec general{testutil::gaussian(5, 2, rng), SymMatrix(testutil::random_spd(5, rng)),
                            Eigen::Vector2d(0.9, 0.7), 0.1};
    Matrix range = general.noise_cov.matrix().inverse() * general.B;
    Matrix cca = cca_population_weights(general);
    Matrix proj = projector(range);
    for (Eigen::Index j = 0; j < 2; ++j) {
        CHECK((cca.col(j) - proj * cca.col(j)).norm() < 1e-8);
    }
}

TEST_CASE("population MAF, CCA and PCA subspaces") {
    std::mt19937_64 rng(20);
    for (int rep = 0; rep < 10; ++rep) {
        Eigen::Index p = 4 + rep % 3;
        Eigen::Index q = 1 + rep % 3;
        Vector k(q);
        for (Eigen::Index j = 0; j < q; ++j) {
            k(j) = 0.95 - 0.2 * static_cast<double>(j);
        }
        MultiSignalSpec spec{testutil::gaussian(p, q, rng), SymMatrix(testutil::random_spd(p, rng)), k, 0.1 * (rep % 3)};
        Matrix maf = population_maf_multi(spec);
        Matrix cca = cca_population_weights(spec);
        CHECK(subspace_principal_angles(maf, cca).maxCoeff() < 1e-6);
        CHECK(subspace_principal_angles(population_pca_multi(spec), maf).maxCoeff() > 0.1);
        if (q == 1) {
            SnModelSpec single{spec.B.col(0), spec.noise_cov, k(0), spec.k_eps};
            CHECK(angle_between(maf.col(0), population_maf_weights(single)) < 1e-8);
        }
    }
    MultiSignalSpec bad{Matrix::Ones(3, 1), SymMatrix::identity(3), Vector::Constant(1, 0.2), 0.5};
    CHECK(code_of([&] { population_maf_multi(bad); }) == ErrorCode::invalid_input);
    MultiSignalSpec rank{Matrix::Ones(3, 2), SymMatrix::identity(3), Eigen::Vector2d(0.9, 0.8), 0.0};
    CHECK(code_of([&] { population_maf_multi(rank); }) == ErrorCode::invalid_input);
}

TEST_CASE("spherical noise makes population MAF and PCA coincide") {
    SnModelSpec spec{Eigen::Vector4d(0.8, 0.4, -0.3, 0.2), SymMatrix::diagonal(Vector::Constant(4, 2.5))};
    Matrix total = spec.b * spec.b.transpose() + spec.noise_cov.matrix();
    Vector pc1 = sym_eig(SymMatrix(total), EigenOrder::descending).vectors.col(0);
    CHECK(angle_between(pc1, population_maf_weights(spec)) < 1e-8);
}

TEST_CASE("expected log-likelihood ratio") {
    SnModelSpec spec{Eigen::Vector3d(1.0, 0.0, 0.0), SymMatrix::identity(3)};
    LlrSnr v = expected_llr_snr(spec);
    CHECK(v.snr == doctest::Approx(1.0));
    CHECK(v.half_llr == doctest::Approx(0.5));

    std::mt19937_64 rng(6);
    Matrix cov = testutil::random_spd(3, rng) / 3.0;
    SnModelSpec s{Eigen::Vector3d(0.8, 0.4, 0.2), SymMatrix(cov)};
    Eigen::Index n = 50;
    Vector f = testutil::gaussian_vector(n, rng);
    f.array() -= f.mean();
    f.normalize();
    Matrix chol = cov.llt().matrixL();
    const int draws = 4000;
    double sum = 0.0;
    double sum2 = 0.0;
    for (int d = 0; d < draws; ++d) {
        Matrix z = f * s.b.transpose() + testutil::gaussian(n, 3, rng) * chol.transpose();
        double l = log_likelihood_ratio(z, f, s);
        sum += l;
        sum2 += l * l;
    }
    double mean = sum / draws;
    double se = std::sqrt((sum2 / draws - mean * mean) / draws);
    CHECK(std::abs(mean - expected_llr_snr(s).half_llr) < 3.0 * se);
}

TEST_CASE("specification validation") {
    CHECK(code_of([] { SnModelSpec::compact(Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 1), 0.2, 0.3, 0.5); }) ==
          ErrorCode::invalid_input);
    CHECK(code_of([] { equicorrelated_cov(Eigen::Vector3d(1, 1, 1), -0.5); }) == ErrorCode::invalid_input);
    CHECK(code_of([] { equicorrelated_cov(Eigen::Vector3d(1, -1, 1), 0.2); }) == ErrorCode::invalid_input);
    CHECK_NOTHROW(equicorrelated_cov(Eigen::Vector3d(1, 1, 1), -0.49));
}

}
