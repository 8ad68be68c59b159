#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "figa/matrix.hpp"

namespace figa {

enum class FeatureKind { continuous, discrete, onehot };

std::string to_string(FeatureKind kind);

struct FeatureSpec {
    std::string name;
    FeatureKind kind = FeatureKind::continuous;
    std::string group;  // one-hot group name; empty unless kind == onehot
    bool mutable_ = true;
    bool problem_space_addable = false;

    // One-hot members are discrete binary columns.
    bool is_discrete() const noexcept { return kind != FeatureKind::continuous; }

    friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

class FeatureSchema {
public:
    FeatureSchema() = default;
    FeatureSchema(std::vector<FeatureSpec> features, std::string target_column,
                  std::string positive_label, std::string negative_label);

    const std::vector<FeatureSpec>& features() const noexcept { return features_; }
    const FeatureSpec& feature(std::size_t i) const { return features_.at(i); }
    std::size_t size() const noexcept { return features_.size(); }
    const std::string& target_column() const noexcept { return target_column_; }
    // Label of the attacked (input) class, encoded as y = 1.
    const std::string& positive_label() const noexcept { return positive_label_; }
    // Label of the mimicked (target) class, encoded as y = 0.
    const std::string& negative_label() const noexcept { return negative_label_; }
    // Members of a one-hot group, in schema order.
    std::vector<std::size_t> group_members(std::string_view group) const;

    std::optional<std::size_t> index_of(std::string_view name) const;
    std::size_t require_index(std::string_view name) const;
    std::vector<std::string> names() const;

    // Strict JSON sidecar; see docs/schema.md.
    static FeatureSchema from_json_text(std::string_view text);
    static FeatureSchema load(const std::filesystem::path& path);
    std::string to_json_text() const;

    friend bool operator==(const FeatureSchema&, const FeatureSchema&) = default;

private:
    void validate() const;

    std::vector<FeatureSpec> features_;
    std::string target_column_;
    std::string positive_label_;
    std::string negative_label_;
};

struct Dataset {
    Matrix X;
    std::vector<int> y;  // 1 = input class, 0 = target class
    FeatureSchema schema;

    std::size_t rows() const noexcept { return X.rows(); }
    std::size_t features() const noexcept { return X.cols(); }
    std::size_t count(int label) const;

    Dataset subset(std::span<const std::size_t> rows) const;
    // Rows of the attacked class only.
    Dataset input_class() const;
    // Throws ShapeError / ParseError if the Dataset invariants do not hold.
    void validate() const;
};

// Loads a CSV with header. A one-hot group is read either from a single raw
// categorical column named after the group (expanded here) or from one 0/1
// column per member.
Dataset load_dataset(std::istream& csv_source, const FeatureSchema& schema);
Dataset load_dataset(const std::filesystem::path& csv_path, const FeatureSchema& schema);

void write_dataset_csv(std::ostream& out, const Matrix& X, const std::vector<int>* y,
                       const FeatureSchema& schema);

// Stratified split; returns (train, test).
std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction,
                                  std::uint64_t seed);

struct FeatureRange {
    double min = 0.0;
    double max = 0.0;
    bool constant() const noexcept { return !(max > min); }
    friend bool operator==(const FeatureRange&, const FeatureRange&) = default;
};

// Per-feature training min/max: the min-max transformer.
class ScalerState {
public:
    ScalerState() = default;
    explicit ScalerState(std::vector<FeatureRange> ranges);

    std::size_t size() const noexcept { return ranges_.size(); }
    const FeatureRange& range(std::size_t i) const { return ranges_.at(i); }
    const std::vector<FeatureRange>& ranges() const noexcept { return ranges_; }

    friend bool operator==(const ScalerState&, const ScalerState&) = default;

private:
    std::vector<FeatureRange> ranges_;
};

ScalerState fit_scaler(const Dataset& train);
ScalerState fit_scaler(const Matrix& X);

// No clipping: values outside the training range map outside [0,1].
// Constant features map to 0.
std::vector<double> transform(std::span<const double> x, const ScalerState& scaler);
std::vector<double> inverse_transform(std::span<const double> x_scaled, const ScalerState& scaler);
Matrix transform(const Matrix& X, const ScalerState& scaler);

}  // namespace figa
