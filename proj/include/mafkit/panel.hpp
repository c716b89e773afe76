#pragma once

#include <mafkit/linalg.hpp>

#include <optional>
#include <string>
#include <vector>

namespace mafkit {

//! n time steps by p concurrent series, stored column-major. Values are
//! always finite; labels default to z1..zp.
class TimeSeriesPanel {
public:
    TimeSeriesPanel() = default;
    explicit TimeSeriesPanel(Matrix values,
                             std::vector<std::string> labels = {},
                             std::optional<Vector> time = std::nullopt);

    Eigen::Index n() const noexcept { return values_.rows(); }
    Eigen::Index p() const noexcept { return values_.cols(); }

    const Matrix& values() const noexcept { return values_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    const std::optional<Vector>& time() const noexcept { return time_; }

    //! Copy with every column rescaled to zero mean and unit variance.
    //! Constant columns are rejected with degenerate_series.
    TimeSeriesPanel standardized() const;

private:
    Matrix values_;
    std::vector<std::string> labels_;
    std::optional<Vector> time_;
};

std::vector<std::string> default_labels(Eigen::Index p);

} // namespace mafkit
