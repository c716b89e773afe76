#pragma once

#include <mafkit/linalg.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace testutil {

using mafkit::Matrix;
using mafkit::Vector;

inline Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> dist;
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) {
            m(i, j) = dist(rng);
        }
    }
    return m;
}

inline Vector gaussian_vector(Eigen::Index n, std::mt19937_64& rng) {
    return gaussian(n, 1, rng).col(0);
}

inline Vector random_unit(Eigen::Index p, std::mt19937_64& rng) {
    return gaussian_vector(p, rng).normalized();
}

//! A A' + p I for Gaussian A, comfortably positive definite.
inline Matrix random_spd(Eigen::Index p, std::mt19937_64& rng) {
    Matrix a = gaussian(p, p, rng);
    return a * a.transpose() + static_cast<double>(p) * Matrix::Identity(p, p);
}

//! Plain lag-1 autocorrelation in the variogram form 1 - var(dx) / (2 var(x)),
//! written out with explicit loops.
inline double naive_autocorrelation(const Vector& x) {
    auto n = static_cast<std::size_t>(x.size());
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean += x(static_cast<Eigen::Index>(i));
    }
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = x(static_cast<Eigen::Index>(i)) - mean;
        ss += d * d;
    }
    std::vector<double> diff(n - 1);
    double dmean = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        diff[i] = x(static_cast<Eigen::Index>(i + 1)) - x(static_cast<Eigen::Index>(i));
        dmean += diff[i];
    }
    dmean /= static_cast<double>(n - 1);
    double dss = 0.0;
    for (double d : diff) {
        dss += (d - dmean) * (d - dmean);
    }
    return 1.0 - (dss / static_cast<double>(n - 2)) / (2.0 * ss / static_cast<double>(n - 1));
}

// Angle between the lines spanned by a and b. The atan2 form keeps full
// precision for nearly parallel vectors, where acos loses half the digits.
inline double angle_between(const Vector& a, const Vector& b) {
    Vector an = a.normalized();
    Vector bn = b.normalized();
    double c = an.dot(bn);
    return std::atan2((an - c * bn).norm(), std::abs(c));
}

inline double pearson(const Vector& a, const Vector& b) {
    Vector ac = a.array() - a.mean();
    Vector bc = b.array() - b.mean();
    return ac.dot(bc) / (ac.norm() * bc.norm());
}

//! Golden-section maximisation of a unimodal function on [lo, hi].
template <typename F>
double golden_max(F&& f, double lo, double hi, double tol = 1e-12) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    double c = b - g * (b - a);
    double d = a + g * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t m = v.size() / 2;
    return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

} // namespace testutil
