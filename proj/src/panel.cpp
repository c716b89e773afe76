#include <mafkit/panel.hpp>

#include <mafkit/error.hpp>

#include <cmath>
#include <sstream>

namespace mafkit {

std::vector<std::string> default_labels(Eigen::Index p) {
    std::vector<std::string> labels;
    labels.reserve(static_cast<std::size_t>(p));
    for (Eigen::Index j = 0; j < p; ++j) {
        labels.push_back("z" + std::to_string(j + 1));
    }
    return labels;
}

TimeSeriesPanel::TimeSeriesPanel(Matrix values,
                                 std::vector<std::string> labels,
                                 std::optional<Vector> time)
    : values_(std::move(values)), labels_(std::move(labels)), time_(std::move(time)) {
    require_finite(values_, "panel");
    if (labels_.empty()) {
        labels_ = default_labels(values_.cols());
    } else if (static_cast<Eigen::Index>(labels_.size()) != values_.cols()) {
        fail(ErrorCode::invalid_input, "panel label count does not match column count");
    }
    if (time_) {
        if (time_->size() != values_.rows()) {
            fail(ErrorCode::invalid_input, "time index length does not match row count");
        }
        require_finite(*time_, "time index");
        for (Eigen::Index i = 1; i < time_->size(); ++i) {
            if (!((*time_)(i) > (*time_)(i - 1))) {
                std::ostringstream os;
                os << "time index is not strictly increasing at row " << i;
                fail(ErrorCode::invalid_input, os.str());
            }
        }
    }
}

TimeSeriesPanel TimeSeriesPanel::standardized() const {
    if (n() < 2) {
        fail(ErrorCode::insufficient_data, "standardisation needs at least 2 rows");
    }
    Matrix out = values_.rowwise() - values_.colwise().mean();
    for (Eigen::Index j = 0; j < p(); ++j) {
        double sd = std::sqrt(out.col(j).squaredNorm() / static_cast<double>(n() - 1));
        if (!(sd > 0.0)) {
            fail(ErrorCode::degenerate_series, "column '" + labels_[static_cast<std::size_t>(j)] +
                                                   "' is constant and cannot be standardised");
        }
        out.col(j) /= sd;
    }
    return TimeSeriesPanel(std::move(out), labels_, time_);
}

} // namespace mafkit
