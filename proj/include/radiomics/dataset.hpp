#pragma once

#include <optional>
#include <string>
#include <vector>

#include "radiomics/features.hpp"

namespace radiomics {

// Tabular dataset: one row per patient with a binary class label and optional
// survival fields. Feature columns are shared across rows and kept in
// lexicographic order. Cells may be missing (the CSV marker is the literal
// NA).
struct LabeledDataset {
    std::vector<std::string> patient_ids;
    std::vector<int> labels;              // 0 = minority-type class (RN), 1 = rBT
    std::vector<double> time_days;        // 0 when absent
    std::vector<int> censor;              // death observed = 1, censored = 0
    std::vector<std::string> feature_names;
    std::vector<std::vector<std::optional<double>>> rows;

    std::size_t n_rows() const { return rows.size(); }
    std::size_t n_features() const { return feature_names.size(); }

    // Column index by name; throws data_error when absent.
    std::size_t feature_index(const std::string& name) const;

    // Dataset restricted to the given feature columns (order preserved).
    LabeledDataset select_features(const std::vector<std::string>& names) const;
    // Dataset restricted to the given row indices.
    LabeledDataset select_rows(const std::vector<std::size_t>& indices) const;

    // Drops feature columns containing any missing cell; returns their names.
    std::vector<std::string> drop_missing_columns();

    // Dense matrix view; throws data_error if any cell is missing.
    std::vector<std::vector<double>> dense() const;

    void validate() const;
};

// Feature CSV: header `patient_id,label,time_days,censor,<features...>`,
// features in lexicographic order, missing cells written as NA.
LabeledDataset read_feature_csv(const std::string& path);
void write_feature_csv(const LabeledDataset& data, const std::string& path);

// Formats a double with round-trip precision (shortest form is not needed;
// %.17g keeps files byte-stable across runs).
std::string format_double(double v);

} // namespace radiomics
