#include "figa/data.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "figa/csv.hpp"
#include "figa/error.hpp"

namespace figa {

using nlohmann::json;

std::string to_string(FeatureKind kind) {
    switch (kind) {
    case FeatureKind::continuous: return "continuous";
    case FeatureKind::discrete: return "discrete";
    case FeatureKind::onehot: return "onehot";
    }
    return "?";
}

FeatureSchema::FeatureSchema(std::vector<FeatureSpec> features, std::string target_column,
                             std::string positive_label, std::string negative_label)
    : features_(std::move(features)),
      target_column_(std::move(target_column)),
      positive_label_(std::move(positive_label)),
      negative_label_(std::move(negative_label)) {
    validate();
}

void FeatureSchema::validate() const {
    std::set<std::string> seen;
    std::map<std::string, int> group_sizes;
    for (const auto& f : features_) {
        if (f.name.empty()) throw SchemaError("feature name must be non-empty");
        if (!seen.insert(f.name).second) throw SchemaError("duplicate feature name: " + f.name);
        if (f.kind == FeatureKind::onehot) {
            if (f.group.empty()) throw SchemaError("one-hot feature without group: " + f.name);
            ++group_sizes[f.group];
        } else if (!f.group.empty()) {
            throw SchemaError("group given for non-one-hot feature: " + f.name);
        }
        if (f.problem_space_addable && !f.mutable_)
            throw SchemaError("addable feature must be mutable: " + f.name);
    }
    for (const auto& [group, n] : group_sizes)
        if (n < 2) throw SchemaError("one-hot group needs at least 2 members: " + group);
    if (target_column_.empty()) throw SchemaError("target column must be named");
    if (seen.contains(target_column_))
        throw SchemaError("target column is also a feature: " + target_column_);
    if (positive_label_ == negative_label_)
        throw SchemaError("positive and negative class labels must differ");
}

std::optional<std::size_t> FeatureSchema::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < features_.size(); ++i)
        if (features_[i].name == name) return i;
    return std::nullopt;
}

std::size_t FeatureSchema::require_index(std::string_view name) const {
    auto idx = index_of(name);
    if (!idx) throw SchemaError("unknown feature: " + std::string(name));
    return *idx;
}

std::vector<std::string> FeatureSchema::names() const {
    std::vector<std::string> out;
    out.reserve(features_.size());
    for (const auto& f : features_) out.push_back(f.name);
    return out;
}

std::vector<std::size_t> FeatureSchema::group_members(std::string_view group) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < features_.size(); ++i)
        if (features_[i].kind == FeatureKind::onehot && features_[i].group == group)
            out.push_back(i);
    return out;
}

namespace {

void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                         const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw SchemaError("unknown key '" + key + "' in " + where);
    }
}

template <typename T>
T required(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw SchemaError(std::string("missing key '") + key + "' in " + where);
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw SchemaError(std::string("wrong type for '") + key + "' in " + where);
    }
}

template <typename T>
T optional_key(const json& obj, const char* key, T fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    return required<T>(obj, key, where);
}

}  // namespace

FeatureSchema FeatureSchema::from_json_text(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("schema is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw SchemaError("schema must be a JSON object");
    reject_unknown_keys(doc,
                        {"target_column", "positive_class_label", "negative_class_label",
                         "features"},
                        "schema");

    std::vector<FeatureSpec> specs;
    const auto& feats = doc.contains("features") ? doc.at("features") : json();
    if (!feats.is_array()) throw SchemaError("'features' must be an array");
    for (std::size_t i = 0; i < feats.size(); ++i) {
        const auto& f = feats[i];
        std::string where = "features[" + std::to_string(i) + "]";
        if (!f.is_object()) throw SchemaError(where + " must be an object");
        reject_unknown_keys(f, {"name", "kind", "mutable", "addable", "group", "categories"},
                            where);
        auto name = required<std::string>(f, "name", where);
        auto kind = required<std::string>(f, "kind", where);
        bool mut = optional_key<bool>(f, "mutable", true, where);
        bool addable = optional_key<bool>(f, "addable", false, where);

        if (kind == "categorical") {
            if (f.contains("group")) throw SchemaError("'group' not allowed on categorical " + where);
            auto cats = required<std::vector<std::string>>(f, "categories", where);
            if (cats.size() < 2) throw SchemaError("categorical needs at least 2 categories: " + name);
            for (const auto& c : cats)
                specs.push_back({name + "=" + c, FeatureKind::onehot, name, mut, addable});
            continue;
        }
        if (f.contains("categories")) throw SchemaError("'categories' only allowed on categorical " + where);
        FeatureSpec spec{name, FeatureKind::continuous, "", mut, addable};
        if (kind == "continuous") {
            spec.kind = FeatureKind::continuous;
        } else if (kind == "discrete") {
            spec.kind = FeatureKind::discrete;
        } else if (kind == "onehot") {
            spec.kind = FeatureKind::onehot;
            spec.group = required<std::string>(f, "group", where);
        } else {
            throw SchemaError("unknown kind '" + kind + "' in " + where);
        }
        if (spec.kind != FeatureKind::onehot && f.contains("group"))
            throw SchemaError("'group' only allowed on onehot " + where);
        specs.push_back(std::move(spec));
    }

    return FeatureSchema(std::move(specs), required<std::string>(doc, "target_column", "schema"),
                         required<std::string>(doc, "positive_class_label", "schema"),
                         required<std::string>(doc, "negative_class_label", "schema"));
}

FeatureSchema FeatureSchema::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open schema: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string FeatureSchema::to_json_text() const {
    json feats = json::array();
    for (const auto& f : features_) {
        json j{{"name", f.name}, {"kind", to_string(f.kind)}, {"mutable", f.mutable_},
               {"addable", f.problem_space_addable}};
        if (f.kind == FeatureKind::onehot) j["group"] = f.group;
        feats.push_back(std::move(j));
    }
    json doc{{"target_column", target_column_},
             {"positive_class_label", positive_label_},
             {"negative_class_label", negative_label_},
             {"features", std::move(feats)}};
    return doc.dump(2) + "\n";
}

std::size_t Dataset::count(int label) const {
    return static_cast<std::size_t>(std::count(y.begin(), y.end(), label));
}

Dataset Dataset::subset(std::span<const std::size_t> idx) const {
    Dataset out{X.select_rows(idx), {}, schema};
    out.y.reserve(idx.size());
    for (auto i : idx) out.y.push_back(y.at(i));
    return out;
}

Dataset Dataset::input_class() const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < y.size(); ++i)
        if (y[i] == 1) idx.push_back(i);
    return subset(idx);
}

void Dataset::validate() const {
    if (X.cols() != schema.size() && !(X.rows() == 0 && X.cols() == 0))
        throw ShapeError("column count does not match schema");
    if (X.rows() != y.size()) throw ShapeError("row count does not match label count");
    for (int label : y)
        if (label != 0 && label != 1) throw ShapeError("labels must be 0 or 1");
    for (std::size_t j = 0; j < X.cols(); ++j) {
        const auto& spec = schema.feature(j);
        if (!spec.is_discrete()) continue;
        for (std::size_t r = 0; r < X.rows(); ++r) {
            double v = X(r, j);
            if (spec.kind == FeatureKind::onehot && v != 0.0 && v != 1.0)
                throw ParseError("one-hot column '" + spec.name + "' must be 0 or 1", r);
            if (v != std::floor(v))
                throw ParseError("discrete column '" + spec.name + "' must be integer", r);
        }
    }
}

namespace {

double parse_number(const std::string& text, const std::string& column, std::size_t row) {
    std::string_view sv(text);
    while (!sv.empty() && std::isspace(static_cast<unsigned char>(sv.front()))) sv.remove_prefix(1);
    while (!sv.empty() && std::isspace(static_cast<unsigned char>(sv.back()))) sv.remove_suffix(1);
    if (!sv.empty() && sv.front() == '+') sv.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
    if (sv.empty() || ec != std::errc() || ptr != sv.data() + sv.size() || !std::isfinite(v))
        throw ParseError("non-numeric value '" + text + "' in column '" + column + "'", row);
    return v;
}

std::string trim(std::string s) {
    auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

}  // namespace

Dataset load_dataset(std::istream& csv_source, const FeatureSchema& schema) {
    csv::Reader reader(csv_source);
    std::vector<std::string> header;
    if (!reader.next(header)) throw SchemaError("CSV is empty; header row required");
    for (auto& h : header) h = trim(h);
    if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF")) header[0].erase(0, 3);

    std::unordered_map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (!col.emplace(header[i], i).second)
            throw SchemaError("duplicate CSV column: " + header[i]);
    }
    auto label_it = col.find(schema.target_column());
    if (label_it == col.end()) throw SchemaError("missing label column: " + schema.target_column());

    // How each feature is sourced: a direct numeric column, or a categorical
    // column whose value selects one member of a group.
    struct Source {
        std::size_t csv_column;
        std::string category;  // non-empty: 1 iff cell == category
    };
    std::vector<Source> sources;
    std::map<std::string, std::set<std::string>> group_categories;
    for (const auto& f : schema.features()) {
        if (auto it = col.find(f.name); it != col.end()) {
            sources.push_back({it->second, {}});
            continue;
        }
        if (f.kind == FeatureKind::onehot && f.name.starts_with(f.group + "=")) {
            if (auto it = col.find(f.group); it != col.end()) {
                std::string cat = f.name.substr(f.group.size() + 1);
                group_categories[f.group].insert(cat);
                sources.push_back({it->second, cat});
                continue;
            }
        }
        throw SchemaError("missing column for feature: " + f.name);
    }

    Dataset ds{Matrix(0, schema.size()), {}, schema};
    std::vector<std::string> fields;
    std::vector<double> row(schema.size());
    std::size_t data_row = 1;  // 1-based, header excluded
    while (reader.next(fields)) {
        if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
        if (fields.size() != header.size())
            throw ParseError("expected " + std::to_string(header.size()) + " fields, got " +
                                 std::to_string(fields.size()),
                             data_row);
        for (std::size_t j = 0; j < schema.size(); ++j) {
            const auto& spec = schema.feature(j);
            const auto& src = sources[j];
            std::string cell = trim(fields[src.csv_column]);
            if (cell.empty()) throw ParseError("missing value in column '" + header[src.csv_column] + "'", data_row);
            if (!src.category.empty()) {
                if (!group_categories[spec.group].contains(cell))
                    throw ParseError("unknown category '" + cell + "' for '" + spec.group + "'", data_row);
                row[j] = cell == src.category ? 1.0 : 0.0;
                continue;
            }
            double v = parse_number(cell, spec.name, data_row);
            if (spec.is_discrete() && v != std::floor(v))
                throw ParseError("non-integer value in discrete column '" + spec.name + "'", data_row);
            if (spec.kind == FeatureKind::onehot && v != 0.0 && v != 1.0)
                throw ParseError("one-hot column '" + spec.name + "' must be 0 or 1", data_row);
            row[j] = v;
        }
        // Exactly one hot per group.
        std::map<std::string, int> hot;
        for (std::size_t j = 0; j < schema.size(); ++j)
            if (schema.feature(j).kind == FeatureKind::onehot) hot[schema.feature(j).group] += row[j] == 1.0;
        for (const auto& [group, n] : hot)
            if (n != 1) throw ParseError("one-hot group '" + group + "' must have exactly one 1", data_row);

        std::string label = trim(fields[label_it->second]);
        if (label == schema.positive_label()) {
            ds.y.push_back(1);
        } else if (label == schema.negative_label()) {
            ds.y.push_back(0);
        } else {
            throw ParseError("unknown class label '" + label + "'", data_row);
        }
        ds.X.append_row(row);
        ++data_row;
    }
    return ds;
}

Dataset load_dataset(const std::filesystem::path& csv_path, const FeatureSchema& schema) {
    std::ifstream in(csv_path, std::ios::binary);
    if (!in) throw IoError("cannot open dataset: " + csv_path.string());
    return load_dataset(in, schema);
}

void write_dataset_csv(std::ostream& out, const Matrix& X, const std::vector<int>* y,
                       const FeatureSchema& schema) {
    auto header = schema.names();
    if (y) header.push_back(schema.target_column());
    csv::write_row(out, header);
    std::vector<std::string> fields;
    for (std::size_t r = 0; r < X.rows(); ++r) {
        fields.clear();
        for (double v : X.row(r)) fields.push_back(csv::format_double(v));
        if (y) fields.push_back((*y)[r] == 1 ? schema.positive_label() : schema.negative_label());
        csv::write_row(out, fields);
    }
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction,
                                  std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw StratificationError("train fraction must lie in (0,1)");
    std::array<std::vector<std::size_t>, 2> by_class;
    for (std::size_t i = 0; i < dataset.y.size(); ++i) by_class[dataset.y[i]].push_back(i);
    if (by_class[0].size() < 2 || by_class[1].size() < 2)
        throw StratificationError("stratified split needs at least 2 rows of each class");

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> train_idx, test_idx;
    for (auto& rows : by_class) {
        std::shuffle(rows.begin(), rows.end(), rng);
        auto k = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(rows.size())));
        k = std::clamp<std::size_t>(k, 1, rows.size() - 1);
        train_idx.insert(train_idx.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(k));
        test_idx.insert(test_idx.end(), rows.begin() + static_cast<std::ptrdiff_t>(k), rows.end());
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    return {dataset.subset(train_idx), dataset.subset(test_idx)};
}

ScalerState::ScalerState(std::vector<FeatureRange> ranges) : ranges_(std::move(ranges)) {
    for (const auto& r : ranges_)
        if (r.min > r.max) throw ShapeError("scaler range with min > max");
}

ScalerState fit_scaler(const Matrix& X) {
    if (X.rows() == 0) throw ShapeError("cannot fit scaler on empty data");
    std::vector<FeatureRange> ranges(X.cols());
    for (std::size_t j = 0; j < X.cols(); ++j) ranges[j] = {X(0, j), X(0, j)};
    for (std::size_t r = 1; r < X.rows(); ++r) {
        for (std::size_t j = 0; j < X.cols(); ++j) {
            double v = X(r, j);
            ranges[j].min = std::min(ranges[j].min, v);
            ranges[j].max = std::max(ranges[j].max, v);
        }
    }
    return ScalerState(std::move(ranges));
}

ScalerState fit_scaler(const Dataset& train) { return fit_scaler(train.X); }

std::vector<double> transform(std::span<const double> x, const ScalerState& scaler) {
    if (x.size() != scaler.size()) throw ShapeError("sample length does not match scaler");
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto& r = scaler.range(i);
        out[i] = r.constant() ? 0.0 : (x[i] - r.min) / (r.max - r.min);
    }
    return out;
}

std::vector<double> inverse_transform(std::span<const double> x_scaled, const ScalerState& scaler) {
    if (x_scaled.size() != scaler.size()) throw ShapeError("sample length does not match scaler");
    std::vector<double> out(x_scaled.size());
    for (std::size_t i = 0; i < x_scaled.size(); ++i) {
        const auto& r = scaler.range(i);
        out[i] = r.constant() ? r.min : x_scaled[i] * (r.max - r.min) + r.min;
    }
    return out;
}

Matrix transform(const Matrix& X, const ScalerState& scaler) {
    if (X.cols() != scaler.size()) throw ShapeError("matrix width does not match scaler");
    Matrix out(X.rows(), X.cols());
    for (std::size_t r = 0; r < X.rows(); ++r) {
        auto scaled = transform(X.row(r), scaler);
        std::copy(scaled.begin(), scaled.end(), out.row(r).begin());
    }
    return out;
}

}  // namespace figa
