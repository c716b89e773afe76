#include <mafkit/csv.hpp>

#include <mafkit/error.hpp>

#include <algorithm>
#include <cmath>
#include <array>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <string_view>

namespace mafkit {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

[[noreturn]] void parse_fail(const std::string& source, std::size_t line, std::size_t column,
                             const std::string& what) {
    std::ostringstream os;
    os << source << ": line " << line;
    if (column > 0) {
        os << ", column " << column;
    }
    os << ": " << what;
    fail(ErrorCode::parse_error, os.str());
}

} // namespace

std::string format_double(double value) {
    std::array<char, 32> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) {
        fail(ErrorCode::invalid_input, "cannot format number");
    }
    return std::string(buf.data(), end);
}

TimeSeriesPanel parse_csv(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) {
        parse_fail(source, 1, 0, "file is empty");
    }
    ++line_no;
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
        line.erase(0, 3);
    }
    std::vector<std::string_view> header = split(line);
    bool has_time = !header.empty() && header.front() == "t";
    std::vector<std::string> labels;
    std::set<std::string> seen;
    for (std::size_t c = has_time ? 1 : 0; c < header.size(); ++c) {
        std::string name(header[c]);
        if (name.empty()) {
            parse_fail(source, line_no, c + 1, "empty series name");
        }
        if (!seen.insert(name).second) {
            parse_fail(source, line_no, c + 1, "duplicate series name '" + name + "'");
        }
        labels.push_back(std::move(name));
    }
    if (labels.empty()) {
        parse_fail(source, line_no, 0, "no series columns");
    }

    std::vector<double> cells;
    std::vector<double> times;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        std::vector<std::string_view> fields = split(line);
        if (fields.size() != header.size()) {
            std::ostringstream os;
            os << "row has " << fields.size() << " fields, expected " << header.size();
            parse_fail(source, line_no, 0, os.str());
        }
        for (std::size_t c = 0; c < fields.size(); ++c) {
            double value = 0.0;
            std::string_view text = fields[c];
            if (!text.empty() && text.front() == '+') {
                text.remove_prefix(1);
            }
            auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
            if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
                parse_fail(source, line_no, c + 1, "not a finite number: '" + std::string(fields[c]) + "'");
            }
            if (has_time && c == 0) {
                times.push_back(value);
            } else {
                cells.push_back(value);
            }
        }
        ++rows;
    }
    if (rows < 3) {
        parse_fail(source, line_no, 0, "need at least 3 data rows");
    }

    auto p = static_cast<Eigen::Index>(labels.size());
    Matrix values(static_cast<Eigen::Index>(rows), p);
    for (std::size_t r = 0; r < rows; ++r) {
        for (Eigen::Index j = 0; j < p; ++j) {
            values(static_cast<Eigen::Index>(r), j) = cells[r * labels.size() + static_cast<std::size_t>(j)];
        }
    }
    std::optional<Vector> time;
    if (has_time) {
        time = Eigen::Map<Vector>(times.data(), static_cast<Eigen::Index>(times.size()));
        for (std::size_t r = 1; r < times.size(); ++r) {
            if (!(times[r] > times[r - 1])) {
                parse_fail(source, r + 2, 1, "time index is not strictly increasing");
            }
        }
    }
    return TimeSeriesPanel(std::move(values), std::move(labels), std::move(time));
}

TimeSeriesPanel ingest_csv(const std::filesystem::path& path, bool standardize) {
    std::ifstream in(path);
    if (!in) {
        fail(ErrorCode::parse_error, "cannot open '" + path.string() + "'");
    }
    TimeSeriesPanel panel = parse_csv(in, path.string());
    return standardize ? panel.standardized() : panel;
}

void write_matrix_csv(std::ostream& out, const std::vector<std::string>& header, MatrixRef values,
                      const Vector* time) {
    if (static_cast<Eigen::Index>(header.size()) != values.cols()) {
        fail(ErrorCode::invalid_input, "header size does not match column count");
    }
    if (time && time->size() != values.rows()) {
        fail(ErrorCode::invalid_input, "time index length does not match row count");
    }
    if (time) {
        out << "t";
    }
    for (std::size_t c = 0; c < header.size(); ++c) {
        out << ((c > 0 || time) ? "," : "") << header[c];
    }
    out << '\n';
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        if (time) {
            out << format_double((*time)(i));
        }
        for (Eigen::Index j = 0; j < values.cols(); ++j) {
            out << ((j > 0 || time) ? "," : "") << format_double(values(i, j));
        }
        out << '\n';
    }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            fail(ErrorCode::invalid_config, "cannot write '" + tmp.string() + "'");
        }
        out << content;
        if (!out.flush()) {
            fail(ErrorCode::invalid_config, "failed writing '" + tmp.string() + "'");
        }
    }
    std::filesystem::rename(tmp, path);
}

} // namespace mafkit
