#include "radiomics/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "radiomics/errors.hpp"

namespace radiomics {

std::size_t LabeledDataset::feature_index(const std::string& name) const {
    const auto it = std::find(feature_names.begin(), feature_names.end(), name);
    if (it == feature_names.end()) throw data_error("unknown feature '" + name + "'");
    return static_cast<std::size_t>(it - feature_names.begin());
}

LabeledDataset LabeledDataset::select_features(const std::vector<std::string>& names) const {
    std::vector<std::size_t> cols;
    cols.reserve(names.size());
    for (const std::string& n : names) cols.push_back(feature_index(n));
    LabeledDataset out;
    out.patient_ids = patient_ids;
    out.labels = labels;
    out.time_days = time_days;
    out.censor = censor;
    out.feature_names = names;
    out.rows.reserve(rows.size());
    for (const auto& row : rows) {
        std::vector<std::optional<double>> r;
        r.reserve(cols.size());
        for (std::size_t c : cols) r.push_back(row[c]);
        out.rows.push_back(std::move(r));
    }
    return out;
}

LabeledDataset LabeledDataset::select_rows(const std::vector<std::size_t>& indices) const {
    LabeledDataset out;
    out.feature_names = feature_names;
    for (std::size_t i : indices) {
        out.patient_ids.push_back(patient_ids[i]);
        out.labels.push_back(labels[i]);
        out.time_days.push_back(time_days[i]);
        out.censor.push_back(censor[i]);
        out.rows.push_back(rows[i]);
    }
    return out;
}

std::vector<std::string> LabeledDataset::drop_missing_columns() {
    std::vector<bool> has_missing(feature_names.size(), false);
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c)
            if (!row[c].has_value()) has_missing[c] = true;
    std::vector<std::string> dropped, kept;
    for (std::size_t c = 0; c < feature_names.size(); ++c)
        (has_missing[c] ? dropped : kept).push_back(feature_names[c]);
    if (!dropped.empty()) *this = select_features(kept);
    return dropped;
}

std::vector<std::vector<double>> LabeledDataset::dense() const {
    std::vector<std::vector<double>> out;
    out.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::vector<double> row;
        row.reserve(rows[r].size());
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            if (!rows[r][c].has_value())
                throw data_error("missing value in row " + std::to_string(r) + ", feature '" +
                                 feature_names[c] + "'");
            row.push_back(*rows[r][c]);
        }
        out.push_back(std::move(row));
    }
    return out;
}

void LabeledDataset::validate() const {
    const std::size_t n = rows.size();
    if (patient_ids.size() != n || labels.size() != n || time_days.size() != n ||
        censor.size() != n)
        throw data_error("dataset column lengths are inconsistent");
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] != 0 && labels[i] != 1)
            throw data_error("label for patient " + patient_ids[i] + " must be 0 or 1");
        if (censor[i] != 0 && censor[i] != 1)
            throw data_error("censor for patient " + patient_ids[i] + " must be 0 or 1");
        if (time_days[i] < 0.0 || !std::isfinite(time_days[i]))
            throw data_error("time_days for patient " + patient_ids[i] + " must be >= 0");
        if (rows[i].size() != feature_names.size())
            throw data_error("row width mismatch for patient " + patient_ids[i]);
        for (std::size_t c = 0; c < rows[i].size(); ++c)
            if (rows[i][c].has_value() && !std::isfinite(*rows[i][c]))
                throw data_error("non-finite feature '" + feature_names[c] + "' for patient " +
                                 patient_ids[i]);
    }
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw data_error("cannot parse " + what + " value '" + s + "'");
    }
}

} // namespace

LabeledDataset read_feature_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open feature CSV '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw data_error("feature CSV '" + path + "' is empty");
    const std::vector<std::string> header = split_csv_line(line);
    if (header.size() < 4 || header[0] != "patient_id" || header[1] != "label" ||
        header[2] != "time_days" || header[3] != "censor")
        throw data_error("feature CSV '" + path +
                         "' must start with columns patient_id,label,time_days,censor");
    LabeledDataset data;
    data.feature_names.assign(header.begin() + 4, header.end());

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw data_error("row " + std::to_string(line_no) + " in '" + path + "' has " +
                             std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(header.size()));
        data.patient_ids.push_back(cells[0]);
        const double label = parse_double(cells[1], "label");
        if (label != 0.0 && label != 1.0)
            throw data_error("label '" + cells[1] + "' at row " + std::to_string(line_no) +
                             " must be 0 or 1");
        data.labels.push_back(static_cast<int>(label));
        data.time_days.push_back(parse_double(cells[2], "time_days"));
        const double censor = parse_double(cells[3], "censor");
        if (censor != 0.0 && censor != 1.0)
            throw data_error("censor '" + cells[3] + "' at row " + std::to_string(line_no) +
                             " must be 0 or 1");
        data.censor.push_back(static_cast<int>(censor));
        std::vector<std::optional<double>> row;
        row.reserve(data.feature_names.size());
        for (std::size_t c = 4; c < cells.size(); ++c) {
            if (cells[c] == "NA")
                row.push_back(std::nullopt);
            else
                row.push_back(parse_double(cells[c], "feature " + header[c]));
        }
        data.rows.push_back(std::move(row));
    }
    data.validate();
    return data;
}

void write_feature_csv(const LabeledDataset& data, const std::string& path) {
    data.validate();
    std::ofstream out(path);
    if (!out) throw io_error("cannot write feature CSV '" + path + "'");
    out << "patient_id,label,time_days,censor";
    for (const std::string& n : data.feature_names) out << ',' << n;
    out << '\n';
    for (std::size_t i = 0; i < data.n_rows(); ++i) {
        out << data.patient_ids[i] << ',' << data.labels[i] << ','
            << format_double(data.time_days[i]) << ',' << data.censor[i];
        for (const auto& cell : data.rows[i]) {
            out << ',';
            if (cell.has_value())
                out << format_double(*cell);
            else
                out << "NA";
        }
        out << '\n';
    }
}

} // namespace radiomics
