#include "figa/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numeric>
#include <thread>
#include <tuple>

#include "figa/csv.hpp"
#include "figa/error.hpp"

namespace figa {

double recall(std::span<const int> predicted, std::span<const int> y) {
    if (predicted.size() != y.size()) throw ShapeError("prediction and label counts differ");
    std::size_t tp = 0, positives = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] == 1) {
            ++positives;
            tp += predicted[i] == 1;
        }
    }
    if (positives == 0) throw MetricError("recall is undefined without positive samples");
    return static_cast<double>(tp) / static_cast<double>(positives);
}

double recall(const Model& model, const Matrix& X, std::span<const int> y) {
    return recall(model.predict(X), y);
}

double success_rate(double baseline_recall, double attack_recall) {
    if (!(baseline_recall > 0.0)) throw MetricError("success rate is undefined for zero baseline recall");
    return (baseline_recall - attack_recall) / baseline_recall;
}

double auprc(std::span<const double> scores, std::span<const int> y) {
    if (scores.size() != y.size()) throw ShapeError("score and label counts differ");
    std::size_t positives = 0;
    for (int label : y) positives += label == 1;
    if (positives == 0 || positives == y.size()) throw MetricError("AUPRC needs both classes present");

    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    double area = 0.0, prev_recall = 0.0;
    std::size_t tp = 0, seen = 0;
    for (std::size_t k = 0; k < idx.size();) {
        // Consume the whole tie group before emitting a curve point.
        std::size_t end = k;
        while (end < idx.size() && scores[idx[end]] == scores[idx[k]]) {
            tp += y[idx[end]] == 1;
            ++end;
        }
        seen = end;
        double r = static_cast<double>(tp) / static_cast<double>(positives);
        double p = static_cast<double>(tp) / static_cast<double>(seen);
        area += (r - prev_recall) * p;
        prev_recall = r;
        k = end;
    }
    return area;
}

namespace {

Matrix attacked_copy(const Matrix& X, std::span<const int> y, const AttackPlan& plan) {
    Matrix out = X;
    for (std::size_t r = 0; r < X.rows(); ++r) {
        if (y[r] != 1) continue;
        auto row = perturb(X.row(r), plan);
        std::copy(row.begin(), row.end(), out.row(r).begin());
    }
    return out;
}

}  // namespace

EvaluationReport evaluate_attack(const Model& model, const Dataset& test, const AttackPlan& plan) {
    if (test.features() != plan.scaler().size()) throw ShapeError("test width does not match plan");
    EvaluationReport report;
    report.model = model.kind();
    report.config = plan.config();
    report.selected = plan.selected();

    auto base_scores = model.predict_score(test.X);
    Matrix attacked = attacked_copy(test.X, test.y, plan);
    auto attack_scores = model.predict_score(attacked);
    auto threshold = [](const std::vector<double>& s) {
        std::vector<int> out(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[i] >= 0.5 ? 1 : 0;
        return out;
    };
    report.baseline_recall = recall(threshold(base_scores), test.y);
    report.attack_recall = recall(threshold(attack_scores), test.y);
    report.success_rate = success_rate(report.baseline_recall, report.attack_recall);
    report.auprc_baseline = auprc(base_scores, test.y);
    report.auprc_attack = auprc(attack_scores, test.y);
    return report;
}

std::vector<double> linspace(double lo, double hi, std::size_t steps) {
    if (steps == 0) return {};
    if (steps == 1) return {lo};
    std::vector<double> out(steps);
    const double width = hi - lo;
    for (std::size_t i = 0; i < steps; ++i)
        out[i] = lo + width * static_cast<double>(i) / static_cast<double>(steps - 1);
    out.back() = hi;
    return out;
}

void GridSpec::validate() const {
    if (n_values.empty() || epsilon_values.empty() || methods.empty() || models.empty())
        throw Error("grid spec lists must all be non-empty");
    if (!std::is_sorted(epsilon_values.begin(), epsilon_values.end()))
        throw Error("grid epsilon values must be ascending");
    for (double e : epsilon_values)
        if (!(e >= 0.0)) throw Error("grid epsilon values must be >= 0");
    for (auto n : n_values)
        if (n == 0) throw Error("grid n values must be positive");
}

std::vector<GridRecord> GridResult::for_model(ModelKind model) const {
    std::vector<GridRecord> out;
    for (const auto& r : records)
        if (r.model == model) out.push_back(r);
    return out;
}

namespace {

const char* kGridHeader[] = {"model", "method", "n", "epsilon", "baseline_recall", "attack_recall", "success_rate"};

std::vector<std::string> record_fields(const GridRecord& r) {
    return {to_string(r.model),
            to_string(r.method),
            std::to_string(r.n),
            csv::format_double(r.epsilon),
            csv::format_double(r.baseline_recall),
            csv::format_double(r.attack_recall),
            csv::format_double(r.success_rate)};
}

double parse_double_field(const std::string& s) {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw ParseError("bad number '" + s + "' in grid CSV");
    return v;
}

// Cell identity used for checkpoint reuse.
using CellKey = std::tuple<ModelKind, RankingMethod, std::size_t, std::string>;

CellKey key_of(const GridRecord& r) { return {r.model, r.method, r.n, csv::format_double(r.epsilon)}; }

}  // namespace

void write_grid_csv(std::ostream& out, const GridResult& grid) {
    csv::write_row(out, {std::begin(kGridHeader), std::end(kGridHeader)});
    for (const auto& r : grid.records) csv::write_row(out, record_fields(r));
}

GridResult read_grid_csv(std::istream& in) {
    csv::Reader reader(in);
    std::vector<std::string> fields;
    if (!reader.next(fields)) throw ParseError("grid CSV is empty");
    if (fields != std::vector<std::string>(std::begin(kGridHeader), std::end(kGridHeader)))
        throw ParseError("unexpected grid CSV header");
    GridResult grid;
    while (reader.next(fields)) {
        if (fields.size() == 1 && fields[0].empty()) continue;
        if (fields.size() != 7) throw ParseError("grid CSV row has wrong field count", reader.line());
        try {
            grid.records.push_back({parse_model_kind(fields[0]), parse_ranking_method(fields[1]),
                                    static_cast<std::size_t>(std::stoull(fields[2])), parse_double_field(fields[3]),
                                    parse_double_field(fields[4]), parse_double_field(fields[5]),
                                    parse_double_field(fields[6])});
        } catch (const std::logic_error&) {
            throw ParseError("malformed grid CSV row", reader.line());
        }
    }
    return grid;
}

GridResult grid_search(const Dataset& train, const Dataset& test, const GridSpec& spec, const GridOptions& options) {
    spec.validate();
    if (test.count(1) == 0) throw MetricError("test set has no input-class rows");

    // Resume state.
    std::map<CellKey, GridRecord> done;
    if (options.checkpoint && std::filesystem::exists(*options.checkpoint)) {
        std::ifstream in(*options.checkpoint);
        if (in.peek() != std::ifstream::traits_type::eof())
            for (const auto& r : read_grid_csv(in).records) done.emplace(key_of(r), r);
    }
    std::ofstream checkpoint_out;
    if (options.checkpoint) {
        bool fresh = !std::filesystem::exists(*options.checkpoint) || std::filesystem::file_size(*options.checkpoint) == 0;
        checkpoint_out.open(*options.checkpoint, std::ios::app);
        if (!checkpoint_out) throw IoError("cannot open checkpoint: " + options.checkpoint->string());
        if (fresh) csv::write_row(checkpoint_out, {std::begin(kGridHeader), std::end(kGridHeader)});
        checkpoint_out.flush();
    }

    std::vector<Model> models;
    std::vector<double> baseline;
    for (auto kind : spec.models) {
        Hyperparameters hp;
        if (auto it = options.hyperparameters.find(kind); it != options.hyperparameters.end()) hp = it->second;
        models.push_back(fit(kind, train, hp, options.seed));
        baseline.push_back(recall(models.back(), test.X, test.y));
    }

    RankingOptions ranking_options = options.ranking;
    ranking_options.seed = options.seed;
    const auto direction = compute_direction(train);
    const auto scaler = fit_scaler(train);

    struct Cell {
        std::size_t method;
        std::size_t n;
        std::size_t eps;
    };
    std::vector<FeatureRanking> rankings;
    for (auto m : spec.methods) rankings.push_back(rank_features(train, m, ranking_options));
    std::vector<Cell> cells;
    for (std::size_t m = 0; m < spec.methods.size(); ++m)
        for (std::size_t n = 0; n < spec.n_values.size(); ++n)
            for (std::size_t e = 0; e < spec.epsilon_values.size(); ++e) cells.push_back({m, n, e});

    // results[cell][model]
    std::vector<std::vector<GridRecord>> results(cells.size());
    std::mutex checkpoint_mutex;
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto work = [&] {
        for (std::size_t c = next++; c < cells.size(); c = next++) {
            try {
                const auto& cell = cells[c];
                auto& out = results[c];
                out.resize(models.size());
                std::vector<std::size_t> todo;
                for (std::size_t k = 0; k < models.size(); ++k) {
                    GridRecord rec{spec.models[k], spec.methods[cell.method], spec.n_values[cell.n],
                                   spec.epsilon_values[cell.eps], baseline[k], 0.0, 0.0};
                    if (auto it = done.find(key_of(rec)); it != done.end()) {
                        out[k] = it->second;
                    } else {
                        out[k] = rec;
                        todo.push_back(k);
                    }
                }
                if (todo.empty()) continue;
                AttackConfig config;
                config.n = spec.n_values[cell.n];
                config.epsilon = spec.epsilon_values[cell.eps];
                config.method = spec.methods[cell.method];
                config.feature_mask = options.feature_mask;
                AttackPlan plan(rankings[cell.method], direction, config, scaler, train.schema);
                Matrix attacked = attacked_copy(test.X, test.y, plan);
                for (auto k : todo) {
                    out[k].attack_recall = recall(models[k], attacked, test.y);
                    out[k].success_rate = success_rate(out[k].baseline_recall, out[k].attack_recall);
                }
                if (options.checkpoint) {
                    std::lock_guard lock(checkpoint_mutex);
                    for (auto k : todo) csv::write_row(checkpoint_out, record_fields(out[k]));
                    checkpoint_out.flush();
                }
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = cells.size();
            }
        }
    };

    const std::size_t workers = std::max<std::size_t>(1, std::min(options.workers, cells.size()));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);

    GridResult grid;
    grid.records.reserve(cells.size() * models.size());
    for (std::size_t k = 0; k < models.size(); ++k)
        for (std::size_t c = 0; c < cells.size(); ++c) grid.records.push_back(results[c][k]);
    return grid;
}

CurveAxis parse_curve_axis(std::string_view name) {
    if (name == "n") return CurveAxis::n;
    if (name == "epsilon" || name == "eps") return CurveAxis::epsilon;
    if (name == "method") return CurveAxis::method;
    throw Error("unknown curve axis: " + std::string(name));
}

std::string to_string(CurveAxis axis) {
    switch (axis) {
    case CurveAxis::n: return "n";
    case CurveAxis::epsilon: return "epsilon";
    case CurveAxis::method: return "method";
    }
    return "?";
}

std::vector<CurvePoint> max_success_curve(const GridResult& grid, CurveAxis axis, ModelKind model) {
    std::vector<CurvePoint> curve;
    auto x_of = [&](const GridRecord& r) -> double {
        switch (axis) {
        case CurveAxis::n: return static_cast<double>(r.n);
        case CurveAxis::epsilon: return r.epsilon;
        case CurveAxis::method: return static_cast<double>(r.method);
        }
        return 0.0;
    };
    auto label_of = [&](const GridRecord& r) -> std::string {
        switch (axis) {
        case CurveAxis::n: return std::to_string(r.n);
        case CurveAxis::epsilon: return csv::format_double(r.epsilon);
        case CurveAxis::method: return to_string(r.method);
        }
        return {};
    };
    for (const auto& r : grid.records) {
        if (r.model != model) continue;
        double x = x_of(r);
        auto it = std::find_if(curve.begin(), curve.end(), [&](const CurvePoint& p) { return p.x == x; });
        if (it == curve.end()) {
            curve.push_back({label_of(r), x, r.success_rate, r});
        } else if (r.success_rate > it->success_rate) {
            it->success_rate = r.success_rate;
            it->best = r;
        }
    }
    std::stable_sort(curve.begin(), curve.end(), [](const CurvePoint& a, const CurvePoint& b) { return a.x < b.x; });
    return curve;
}

}  // namespace figa
