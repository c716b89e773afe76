#pragma once

#include <mafkit/linalg.hpp>

#include <map>
#include <vector>

namespace mafkit {

//! Local polynomial regression settings. The window at each point covers
//! span_fraction * n consecutive time steps centred on it, truncated at the
//! series ends, with tricube weights (1 - (d/h)^3)^3 where h is half the
//! window width.
struct SmootherConfig {
    double span_fraction = 0.4;
    int degree = 1;

    void validate() const;
};

struct SmoothResult {
    Vector fitted;
    Vector residuals;
    //! Trace of the linear smoother map.
    double df = 0.0;
};

//! Precomputed equivalent kernels for one series length. The smoother is
//! linear, so one instance serves every series of that length; this is what
//! the resampling loops reuse.
class LoessSmoother {
public:
    LoessSmoother(Eigen::Index n, const SmootherConfig& cfg);

    Eigen::Index size() const noexcept { return n_; }
    const SmootherConfig& config() const noexcept { return cfg_; }
    double df() const noexcept { return df_; }

    Vector fit(VectorRef series) const;
    SmoothResult smooth(VectorRef series) const;

    //! Column-wise fit of a whole panel.
    Matrix fit_columns(MatrixRef values) const;

private:
    struct Kernel {
        Eigen::Index first = 0;
        Vector weights;
    };

    Kernel make_kernel(Eigen::Index i) const;
    bool is_interior(Eigen::Index i) const noexcept;

    Eigen::Index n_;
    SmootherConfig cfg_;
    double half_width_;
    //! Largest offset inside the window, ceil(h) - 1.
    Eigen::Index reach_ = 0;
    double df_ = 0.0;
    //! Shared kernel of every full-width window.
    Kernel interior_;
    //! Truncated windows at the ends. Left empty when they would be too
    //! large to keep; they are then rebuilt on every fit.
    std::map<Eigen::Index, Kernel> edges_;
};

SmoothResult loess_smooth(VectorRef series, const SmootherConfig& cfg = {});

//! SD(smooth) / SD(series - smooth), both centred with divisor n. Throws
//! degenerate_residual when the residual SD is not above 1e-12 times the
//! series SD.
double empirical_snr(VectorRef series, const SmootherConfig& cfg = {});
double empirical_snr(VectorRef series, const LoessSmoother& smoother);

} // namespace mafkit
