#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <sstream>
#include <mutex>
#include <thread>

#include "figa/attack.hpp"
#include "figa/csv.hpp"
#include "figa/data.hpp"
#include "figa/error.hpp"
#include "figa/eval.hpp"
#include "figa/models.hpp"
#include "figa/ranking.hpp"
#include "figa/report.hpp"
#include "figa/webspace.hpp"

namespace figa::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string data;
    std::string schema;
    std::uint64_t seed = 0;
    std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    std::string out_dir = "runs";
    std::string run_name;
    double train_fraction = -1.0;  // resolved per subcommand
    std::vector<std::string> hp;
    bool verbose = false;
};

struct AttackArgs {
    std::string method = "gini_impurity";
    std::size_t n = 1;
    double epsilon = 0.0;
    std::vector<std::string> mask;
    bool strict_onehot = false;
};

std::string timestamp() {
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream ss;
    ss << std::put_time(&tm, "%Y%m%d-%H%M%S");
    return ss.str();
}

class Run {
public:
    Run(const Common& c, std::string command, std::vector<std::string> argv)
        : command_(std::move(command)), argv_(std::move(argv)), seed_(c.seed) {
        std::string name = c.run_name.empty() ? command_ + "-" + timestamp() : c.run_name;
        dir_ = fs::path(c.out_dir) / name;
        if (c.run_name.empty())
            for (int k = 2; fs::exists(dir_); ++k) dir_ = fs::path(c.out_dir) / (name + "-" + std::to_string(k));
        fs::create_directories(dir_);
    }

    const fs::path& dir() const { return dir_; }

    void write(const std::string& relative, std::string_view contents) {
        auto path = dir_ / relative;
        fs::create_directories(path.parent_path());
        write_file_atomic(path, contents);
        outputs_.push_back(relative);
    }

    void adopt(const fs::path& path) { outputs_.push_back(fs::relative(path, dir_).generic_string()); }

    void finish(const json& extra = json::object()) {
        json m = {{"command", command_}, {"argv", argv_}, {"seed", seed_}, {"outputs", outputs_},
                  {"created_utc", timestamp()}};
        for (auto& [k, v] : extra.items()) m[k] = v;
        write_file_atomic(dir_ / "manifest.json", m.dump(2) + "\n");
    }

private:
    std::string command_;
    std::vector<std::string> argv_;
    std::uint64_t seed_;
    fs::path dir_;
    std::vector<std::string> outputs_;
};

Hyperparameters parse_hp(const std::vector<std::string>& items) {
    Hyperparameters hp;
    for (const auto& item : items) {
        auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("--hp expects key=value, got '" + item + "'");
        try {
            std::size_t used = 0;
            double v = std::stod(item.substr(eq + 1), &used);
            if (used != item.size() - eq - 1) throw std::invalid_argument(item);
            hp[item.substr(0, eq)] = v;
        } catch (const std::logic_error&) {
            throw UsageError("--hp value is not a number: '" + item + "'");
        }
    }
    return hp;
}

Dataset load(const Common& c) {
    if (c.data.empty() || c.schema.empty()) throw UsageError("--data and --schema are required");
    return load_dataset(fs::path(c.data), FeatureSchema::load(c.schema));
}

std::pair<Dataset, Dataset> train_test(const Dataset& ds, const Common& c) {
    if (c.train_fraction >= 1.0) return {ds, ds};
    return split(ds, c.train_fraction, c.seed);
}

std::vector<std::size_t> parse_mask(const std::vector<std::string>& names, const FeatureSchema& schema) {
    std::vector<std::size_t> out;
    for (const auto& n : names) out.push_back(schema.require_index(n));
    return out;
}

AttackConfig make_config(const AttackArgs& a, const FeatureSchema& schema) {
    AttackConfig cfg;
    cfg.n = a.n;
    cfg.epsilon = a.epsilon;
    cfg.method = parse_ranking_method(a.method);
    cfg.strict_onehot = a.strict_onehot;
    if (!a.mask.empty()) cfg.feature_mask = parse_mask(a.mask, schema);
    return cfg;
}

RankingOptions ranking_options(const Common& c) {
    RankingOptions o;
    o.seed = c.seed;
    return o;
}

std::string dataset_csv(const Matrix& X, const std::vector<int>& y, const FeatureSchema& schema) {
    std::ostringstream ss;
    write_dataset_csv(ss, X, &y, schema);
    return ss.str();
}

std::vector<fs::path> html_files(const fs::path& p) {
    if (!fs::exists(p)) throw IoError("no such file or directory: " + p.string());
    if (!fs::is_directory(p)) return {p};
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(p))
        if (e.is_regular_file() && (e.path().extension() == ".html" || e.path().extension() == ".htm"))
            out.push_back(e.path());
    std::sort(out.begin(), out.end());
    if (out.empty()) throw IoError("no .html files in " + p.string());
    return out;
}

// Runs fn(i) for i in [0, count) on up to `workers` threads; rethrows the first error.
template <class Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn fn) {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex mu;
    auto body = [&] {
        for (std::size_t i; (i = next++) < count;) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!failure) failure = std::current_exception();
                next = count;
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 1; w < std::min(workers, count); ++w) pool.emplace_back(body);
        body();
    }
    if (failure) std::rethrow_exception(failure);
}

void add_common(CLI::App* sub, Common& c, bool needs_data) {
    if (needs_data) {
        sub->add_option("--data", c.data, "Dataset CSV with header")->required();
        sub->add_option("--schema", c.schema, "Schema JSON")->required();
        sub->add_option("--train-fraction", c.train_fraction, "Stratified train share; 1 uses every row (default 0.8 for train/evaluate/gridsearch, else 1)")
            ->check(CLI::Range(0.0, 1.0));
    }
    sub->add_option("--seed", c.seed, "Random seed")->capture_default_str();
    sub->add_option("--workers", c.workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--out", c.out_dir, "Parent directory for run outputs")->capture_default_str();
    sub->add_option("--run-name", c.run_name, "Run directory name (default: <command>-<UTC timestamp>)");
    sub->add_flag("-v,--verbose", c.verbose, "Progress on stderr");
}

void add_attack(CLI::App* sub, AttackArgs& a) {
    sub->add_option("--method", a.method, "Ranking method")->capture_default_str();
    sub->add_option("--n", a.n, "Features to perturb")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--epsilon", a.epsilon, "Perturbation budget")->check(CLI::NonNegativeNumber)->capture_default_str();
    sub->add_option("--mask", a.mask, "Restrict perturbation to these feature names")->delimiter(',');
    sub->add_flag("--strict-onehot", a.strict_onehot, "Keep one-hot groups at exactly one hot");
}

// --- subcommands ---

void cmd_train(const Common& c, const std::string& model_name, Run& run, std::ostream& out) {
    auto ds = load(c);
    auto [train, test] = train_test(ds, c);
    auto model = fit(parse_model_kind(model_name), train, parse_hp(c.hp), c.seed);
    run.write("model.json", model.to_json_text());
    json metrics = {{"model", to_string(model.kind())}, {"train_rows", train.rows()}};
    if (c.train_fraction < 1.0) {
        metrics["test_rows"] = test.rows();
        metrics["test_recall"] = recall(model, test.X, test.y);
        metrics["test_auprc"] = auprc(model.predict_score(test.X), test.y);
    }
    run.write("metrics.json", metrics.dump(2) + "\n");
    run.finish();
    out << run.dir().string() << "\n";
}

void cmd_rank(const Common& c, std::vector<std::string> methods, Run& run, std::ostream& out) {
    auto ds = load(c);
    auto train = train_test(ds, c).first;
    if (methods.empty() || (methods.size() == 1 && methods[0] == "all")) {
        methods.clear();
        for (auto m : kAllRankingMethods) methods.push_back(to_string(m));
    }
    std::vector<double> ig(train.features());
    for (std::size_t f = 0; f < ig.size(); ++f) ig[f] = info_gain(train, f);
    std::ostringstream ss;
    csv::write_row(ss, {"feature_name", "method", "score", "rank", "info_gain"});
    for (const auto& name : methods) {
        auto method = parse_ranking_method(name);
        if (c.verbose) std::cerr << "ranking by " << to_string(method) << "\n";
        auto ranking = rank_features(train, method, ranking_options(c));
        for (std::size_t pos = 0; pos < ranking.order.size(); ++pos) {
            auto f = ranking.order[pos];
            csv::write_row(ss, {train.schema.feature(f).name, to_string(method), csv::format_double(ranking.scores[f]),
                                std::to_string(pos + 1), csv::format_double(ig[f])});
        }
    }
    run.write("rank.csv", ss.str());
    run.finish();
    out << run.dir().string() << "\n";
}

void cmd_attack(const Common& c, const AttackArgs& a, const std::string& input, const std::string& model_path,
                Run& run, std::ostream& out) {
    auto ds = load(c);
    auto train = train_test(ds, c).first;
    auto target = input.empty() ? ds : load_dataset(fs::path(input), ds.schema);
    auto plan = make_plan(train, make_config(a, ds.schema), ranking_options(c));
    auto rows = target.input_class();
    auto adv = perturb_batch(rows.X, plan);
    run.write("adversarial.csv", dataset_csv(adv, rows.y, ds.schema));

    std::ostringstream deltas;
    csv::write_row(deltas, {"row", "feature", "original", "perturbed", "delta"});
    for (std::size_t r = 0; r < adv.rows(); ++r)
        for (std::size_t f = 0; f < adv.cols(); ++f)
            if (adv(r, f) != rows.X(r, f))
                csv::write_row(deltas, {std::to_string(r), ds.schema.feature(f).name, csv::format_double(rows.X(r, f)),
                                        csv::format_double(adv(r, f)), csv::format_double(adv(r, f) - rows.X(r, f))});
    run.write("deltas.csv", deltas.str());

    json summary = {{"method", to_string(plan.config().method)}, {"n", a.n}, {"epsilon", a.epsilon}, {"rows", rows.rows()}};
    for (auto f : plan.selected())
        summary["selected"].push_back({{"feature", ds.schema.feature(f).name}, {"direction", plan.direction()[f]}});
    if (!model_path.empty()) {
        auto model = Model::load(model_path);
        summary["recall_before"] = recall(model, rows.X, rows.y);
        summary["recall_after"] = recall(model, adv, rows.y);
    }
    run.write("attack.json", summary.dump(2) + "\n");
    run.finish();
    out << run.dir().string() << "\n";
}

void cmd_evaluate(const Common& c, const AttackArgs& a, std::vector<std::string> models, Run& run,
                  std::ostream& out) {
    if (c.train_fraction >= 1.0) throw UsageError("evaluate needs a held-out split (--train-fraction < 1)");
    auto ds = load(c);
    auto [train, test] = split(ds, c.train_fraction, c.seed);
    auto plan = make_plan(train, make_config(a, ds.schema), ranking_options(c));
    if (models.empty()) models.push_back("logistic_regression");
    auto hp = parse_hp(c.hp);
    std::ostringstream ss;
    csv::write_row(ss, {"model", "method", "n", "epsilon", "baseline_recall", "attack_recall", "success_rate",
                        "auprc_baseline", "auprc_attack", "selected"});
    for (const auto& name : models) {
        auto kind = parse_model_kind(name);
        if (c.verbose) std::cerr << "fitting " << to_string(kind) << "\n";
        auto model = fit(kind, train, hp, c.seed);
        auto rep = evaluate_attack(model, test, plan);
        std::string selected;
        for (auto f : rep.selected) selected += (selected.empty() ? "" : ";") + ds.schema.feature(f).name;
        csv::write_row(ss, {to_string(kind), to_string(plan.config().method), std::to_string(a.n),
                            csv::format_double(a.epsilon), csv::format_double(rep.baseline_recall),
                            csv::format_double(rep.attack_recall), csv::format_double(rep.success_rate),
                            csv::format_double(rep.auprc_baseline), csv::format_double(rep.auprc_attack), selected});
    }
    run.write("evaluation.csv", ss.str());
    run.finish();
    out << run.dir().string() << "\n";
}

struct GridArgs {
    std::vector<std::string> models;
    std::vector<std::string> methods;
    std::size_t n_min = 1;
    std::size_t n_max = 14;
    double eps_min = 0.001;
    double eps_max = 4.0;
    std::size_t eps_steps = 50;
    std::vector<std::string> mask;
    std::string resume;
    bool report = false;
};

void cmd_gridsearch(const Common& c, const GridArgs& g, Run& run, std::ostream& out) {
    if (c.train_fraction >= 1.0) throw UsageError("gridsearch needs a held-out split (--train-fraction < 1)");
    if (g.n_min == 0 || g.n_min > g.n_max) throw UsageError("need 1 <= --n-min <= --n-max");
    if (!(g.eps_min <= g.eps_max) || g.eps_steps == 0) throw UsageError("need --eps-min <= --eps-max and --eps-steps >= 1");
    auto ds = load(c);
    auto [train, test] = split(ds, c.train_fraction, c.seed);

    GridSpec spec;
    for (auto n = g.n_min; n <= g.n_max; ++n) spec.n_values.push_back(n);
    spec.epsilon_values = g.eps_steps == 1 ? std::vector<double>{g.eps_min} : linspace(g.eps_min, g.eps_max, g.eps_steps);
    if (g.methods.empty())
        spec.methods.assign(std::begin(kAllRankingMethods), std::end(kAllRankingMethods));
    for (const auto& m : g.methods) spec.methods.push_back(parse_ranking_method(m));
    if (g.models.empty()) spec.models.assign(std::begin(kAllModelKinds), std::end(kAllModelKinds));
    for (const auto& m : g.models) spec.models.push_back(parse_model_kind(m));
    spec.validate();

    GridOptions opt;
    opt.seed = c.seed;
    opt.ranking = ranking_options(c);
    opt.workers = c.workers;
    auto hp = parse_hp(c.hp);
    if (!hp.empty())
        for (auto m : spec.models) opt.hyperparameters[m] = hp;
    if (!g.mask.empty()) opt.feature_mask = parse_mask(g.mask, ds.schema);
    auto checkpoint = g.resume.empty() ? run.dir() / "grid.partial.csv" : fs::path(g.resume);
    opt.checkpoint = checkpoint;

    auto t0 = std::chrono::steady_clock::now();
    auto grid = grid_search(train, test, spec, opt);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::ostringstream ss;
    write_grid_csv(ss, grid);
    run.write("grid.csv", ss.str());
    if (g.resume.empty()) fs::remove(checkpoint);
    if (g.report)
        for (const auto& p : emit_report(grid, run.dir() / "report")) run.adopt(p);
    run.finish({{"cells", grid.records.size()}, {"seconds", secs}});
    out << run.dir().string() << "\n";
}

void cmd_curves(const std::string& grid_path, Run& run, std::ostream& out) {
    std::ifstream in(grid_path);
    if (!in) throw IoError("cannot read " + grid_path);
    auto grid = read_grid_csv(in);
    for (const auto& p : emit_report(grid, run.dir())) run.adopt(p);
    run.finish({{"grid", grid_path}});
    out << run.dir().string() << "\n";
}

void cmd_extract(const Common& c, const std::string& pages, const std::string& label,
                 const std::vector<std::string>& addable, Run& run, std::ostream& out) {
    auto schema = web_feature_schema(addable);
    std::optional<int> y;
    if (!label.empty()) {
        if (label == schema.positive_label() || label == "1") y = 1;
        else if (label == schema.negative_label() || label == "0") y = 0;
        else throw UsageError("--label must be phishing, legitimate, 1 or 0");
    }
    auto files = html_files(pages);
    std::vector<WebFeatureVector> vectors(files.size());
    std::vector<std::string> urls(files.size());
    parallel_for(files.size(), c.workers, [&](std::size_t i) {
        auto page = load_page(files[i]);
        urls[i] = page.url;
        try {
            vectors[i] = extract_features(page);
        } catch (const ExtractionError& e) {
            throw ExtractionError(files[i].string() + ": " + e.what());
        }
    });

    std::ostringstream feats, index;
    std::vector<std::string> header(kWebFeatureNames.begin(), kWebFeatureNames.end());
    if (y) header.push_back(schema.target_column());
    csv::write_row(feats, header);
    csv::write_row(index, {"row", "file", "url"});
    for (std::size_t i = 0; i < files.size(); ++i) {
        std::vector<std::string> row;
        for (double v : vectors[i].values) row.push_back(csv::format_double(v));
        if (y) row.push_back(*y == 1 ? schema.positive_label() : schema.negative_label());
        csv::write_row(feats, row);
        csv::write_row(index, {std::to_string(i), files[i].filename().string(), urls[i]});
    }
    run.write("features.csv", feats.str());
    run.write("pages.csv", index.str());
    run.write("web_schema.json", schema.to_json_text());
    run.finish({{"pages", files.size()}});
    out << run.dir().string() << "\n";
}

void cmd_forge(const Common& c, const AttackArgs& a, const std::string& pages, const std::string& model_path,
               Run& run, std::ostream& out) {
    auto ds = load(c);
    if (ds.schema.size() != kWebFeatureCount) throw SchemaError("forge needs the 52-feature web schema");
    for (std::size_t i = 0; i < kWebFeatureCount; ++i)
        if (ds.schema.feature(i).name != kWebFeatureNames[i])
            throw SchemaError("web schema column " + std::to_string(i) + " must be " + std::string(kWebFeatureNames[i]));
    auto train = train_test(ds, c).first;
    auto model = Model::load(model_path);
    if (model.feature_names() != ds.schema.names()) throw SchemaError("model was not trained on web features");

    auto cfg = make_config(a, ds.schema);
    auto ranking = rank_features(train, cfg.method, ranking_options(c));
    auto direction = compute_direction(train);
    auto scaler = fit_scaler(train);

    auto files = html_files(pages);
    std::vector<ProblemSpaceResult> results(files.size());
    parallel_for(files.size(), c.workers, [&](std::size_t i) {
        results[i] = problem_space_attack(load_page(files[i]), ranking, direction, scaler, cfg, ds.schema, model);
    });

    std::ostringstream effects, summary;
    csv::write_row(effects, {"page", "feature", "original", "adversarial", "planned", "reextracted", "side_effect"});
    csv::write_row(summary, {"page", "score_before", "label_before", "score_after", "label_after", "bytes_added", "plan"});
    std::size_t flipped = 0;
    for (std::size_t i = 0; i < files.size(); ++i) {
        const auto& r = results[i];
        auto name = files[i].filename().string();
        run.write("pages/" + name, r.page.html);
        for (std::size_t f = 0; f < kWebFeatureCount; ++f) {
            double planned = static_cast<double>(r.plan.additions.count(f) ? r.plan.additions.at(f) : 0);
            if (planned == 0 && r.reextracted[f] == r.original[f]) continue;
            csv::write_row(effects, {name, std::string(kWebFeatureNames[f]), csv::format_double(r.original[f]),
                                     csv::format_double(r.adversarial[f]), csv::format_double(planned),
                                     csv::format_double(r.reextracted[f]),
                                     csv::format_double(r.reextracted[f] - r.original[f] - planned)});
        }
        std::string plan;
        for (auto [f, k] : r.plan.additions)
            plan += (plan.empty() ? "" : ";") + std::string(kWebFeatureNames[f]) + "+" + std::to_string(k);
        csv::write_row(summary, {name, csv::format_double(r.score_before), std::to_string(r.label_before),
                                 csv::format_double(r.score_after), std::to_string(r.label_after),
                                 std::to_string(r.page.html.size() - load_page(files[i]).html.size()), plan});
        if (r.label_before == 1 && r.label_after == 0) ++flipped;
    }
    run.write("side_effects.csv", effects.str());
    run.write("forge.csv", summary.str());
    run.finish({{"pages", files.size()}, {"flipped", flipped}});
    out << run.dir().string() << "\n";
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Feature importance guided evasion attacks on tabular data", "figa"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "figa 0.1.0");

    Common c;
    AttackArgs a;
    std::string model_name = "logistic_regression";
    std::vector<std::string> rank_methods;
    std::vector<std::string> eval_models;
    std::string input, model_path, grid_path, pages, label;
    std::vector<std::string> addable;
    GridArgs g;

    auto* train = app.add_subcommand("train", "Fit a model and save it as JSON");
    add_common(train, c, true);
    train->add_option("--model", model_name, "Model kind")->capture_default_str();
    train->add_option("--hp", c.hp, "Hyperparameter key=value (repeatable)");

    auto* rank = app.add_subcommand("rank", "Rank features");
    add_common(rank, c, true);
    rank->add_option("--method", rank_methods, "Ranking method(s) or 'all'")->delimiter(',');

    auto* attack = app.add_subcommand("attack", "Perturb the input-class rows of a dataset");
    add_common(attack, c, true);
    add_attack(attack, a);
    attack->add_option("--input", input, "Rows to perturb (default: --data)");
    attack->add_option("--model-file", model_path, "Report recall before/after with this model");

    auto* evaluate = app.add_subcommand("evaluate", "Fit models and measure one attack configuration");
    add_common(evaluate, c, true);
    add_attack(evaluate, a);
    evaluate->add_option("--model", eval_models, "Model kind(s)")->delimiter(',');
    evaluate->add_option("--hp", c.hp, "Hyperparameter key=value (repeatable)");

    auto* grid = app.add_subcommand("gridsearch", "Sweep models x methods x n x epsilon");
    add_common(grid, c, true);
    grid->add_option("--model", g.models, "Model kind(s); default all")->delimiter(',');
    grid->add_option("--method", g.methods, "Ranking method(s); default all")->delimiter(',');
    grid->add_option("--n-min", g.n_min)->capture_default_str();
    grid->add_option("--n-max", g.n_max)->capture_default_str();
    grid->add_option("--eps-min", g.eps_min)->capture_default_str();
    grid->add_option("--eps-max", g.eps_max)->capture_default_str();
    grid->add_option("--eps-steps", g.eps_steps)->capture_default_str();
    grid->add_option("--mask", g.mask, "Restrict perturbation to these feature names")->delimiter(',');
    grid->add_option("--resume", g.resume, "Checkpoint CSV to resume from and append to");
    grid->add_flag("--report", g.report, "Also write curves and the summary table");
    grid->add_option("--hp", c.hp, "Hyperparameter key=value applied to every model (repeatable)");

    auto* curves = app.add_subcommand("curves", "Max-success curves, charts and summary from a grid CSV");
    add_common(curves, c, false);
    curves->add_option("--grid", grid_path, "grid.csv from gridsearch")->required();

    auto* extract = app.add_subcommand("extract", "Extract the 52 URL/HTML features from pages");
    add_common(extract, c, false);
    extract->add_option("--pages", pages, "HTML file or directory")->required();
    extract->add_option("--label", label, "Label column value for every page (phishing|legitimate)");
    extract->add_option("--addable", addable, "Problem-space addable features for the emitted schema")->delimiter(',');

    auto* forge = app.add_subcommand("forge", "Problem-space attack: inject hidden HTML into pages");
    add_common(forge, c, true);
    add_attack(forge, a);
    forge->add_option("--pages", pages, "HTML file or directory")->required();
    forge->add_option("--model-file", model_path, "Model trained on web features")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        auto* sub = app.get_subcommands().front();
        std::string name = sub->get_name();
        if (c.train_fraction < 0)
            c.train_fraction = name == "train" || name == "evaluate" || name == "gridsearch" ? 0.8 : 1.0;
        if (!(c.train_fraction > 0.0)) throw UsageError("--train-fraction must be positive");
        if (name == "forge" && a.mask.empty())
            for (auto f : kInjectableFeatures) a.mask.emplace_back(f);
        if (name != "curves" && name != "extract" && !c.data.empty() && !fs::exists(c.data))
            throw IoError("no such file: " + c.data);
        Run run(c, name, args);
        if (name == "train") cmd_train(c, model_name, run, out);
        else if (name == "rank") cmd_rank(c, rank_methods, run, out);
        else if (name == "attack") cmd_attack(c, a, input, model_path, run, out);
        else if (name == "evaluate") cmd_evaluate(c, a, eval_models, run, out);
        else if (name == "gridsearch") cmd_gridsearch(c, g, run, out);
        else if (name == "curves") cmd_curves(grid_path, run, out);
        else if (name == "extract") cmd_extract(c, pages, label, addable, run, out);
        else if (name == "forge") cmd_forge(c, a, pages, model_path, run, out);
        return 0;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace figa::cli
