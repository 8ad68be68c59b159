#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "figa/attack.hpp"
#include "figa/eval.hpp"
#include "figa/webspace.hpp"

namespace py = pybind11;
using namespace figa;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
    if (a.ndim() != 2) throw ShapeError("expected a 2-D array");
    Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
    std::copy(a.data(), a.data() + a.size(), m.data().begin());
    return m;
}

Array to_array(const Matrix& m) {
    Array out({m.rows(), m.cols()});
    std::copy(m.data().begin(), m.data().end(), out.mutable_data());
    return out;
}

Array to_array(const std::vector<double>& v) {
    Array out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

std::vector<double> to_vector(const Array& a) {
    if (a.ndim() != 1) throw ShapeError("expected a 1-D array");
    return {a.data(), a.data() + a.size()};
}

py::dict record_dict(const GridRecord& r) {
    py::dict d;
    d["model"] = to_string(r.model);
    d["method"] = to_string(r.method);
    d["n"] = r.n;
    d["epsilon"] = r.epsilon;
    d["baseline_recall"] = r.baseline_recall;
    d["attack_recall"] = r.attack_recall;
    d["success_rate"] = r.success_rate;
    return d;
}

py::dict feature_dict(const WebFeatureVector& v) {
    py::dict d;
    for (std::size_t i = 0; i < kWebFeatureCount; ++i) d[py::str(std::string(kWebFeatureNames[i]))] = v[i];
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Feature-importance guided evasion attacks on tabular classifiers";
    py::register_exception<Error>(m, "FigaError", PyExc_ValueError);

    py::class_<FeatureSchema>(m, "FeatureSchema")
        .def_static("from_json", &FeatureSchema::from_json_text, py::arg("text"))
        .def_static("load", &FeatureSchema::load, py::arg("path"))
        .def("to_json", &FeatureSchema::to_json_text)
        .def_property_readonly("names", &FeatureSchema::names)
        .def_property_readonly("target_column", &FeatureSchema::target_column)
        .def("__len__", &FeatureSchema::size);

    py::class_<Dataset>(m, "Dataset")
        .def(py::init([](const Array& X, std::vector<int> y, FeatureSchema schema) {
                 Dataset d{to_matrix(X), std::move(y), std::move(schema)};
                 d.validate();
                 return d;
             }),
             py::arg("X"), py::arg("y"), py::arg("schema"))
        .def_property_readonly("X", [](const Dataset& d) { return to_array(d.X); })
        .def_readonly("y", &Dataset::y)
        .def_readonly("schema", &Dataset::schema)
        .def_property_readonly("rows", &Dataset::rows)
        .def_property_readonly("features", &Dataset::features)
        .def("input_class", &Dataset::input_class);

    m.def("load_dataset", py::overload_cast<const std::filesystem::path&, const FeatureSchema&>(&load_dataset),
          py::arg("path"), py::arg("schema"));
    m.def("split", &split, py::arg("dataset"), py::arg("train_fraction") = 0.8, py::arg("seed") = 0);

    py::class_<Model>(m, "Model")
        .def_property_readonly("kind", [](const Model& model) { return to_string(model.kind()); })
        .def_property_readonly("feature_names", &Model::feature_names)
        .def("predict_score", [](const Model& model, const Array& X) { return to_array(model.predict_score(to_matrix(X))); })
        .def("predict", [](const Model& model, const Array& X) { return model.predict(to_matrix(X)); })
        .def("feature_importances", &Model::feature_importances)
        .def("to_json", &Model::to_json_text)
        .def_static("from_json", &Model::from_json_text)
        .def("save", &Model::save)
        .def_static("load", &Model::load);

    m.def(
        "fit",
        [](const std::string& kind, const Dataset& train, const Hyperparameters& hp, std::uint64_t seed) {
            py::gil_scoped_release release;
            return fit(parse_model_kind(kind), train, hp, seed);
        },
        py::arg("kind"), py::arg("train"), py::arg("hyperparameters") = Hyperparameters{}, py::arg("seed") = 0);
    m.def("model_kinds", [] {
        std::vector<std::string> out;
        for (auto k : kAllModelKinds) out.push_back(to_string(k));
        return out;
    });

    py::class_<FeatureRanking>(m, "FeatureRanking")
        .def_readonly("order", &FeatureRanking::order)
        .def_readonly("scores", &FeatureRanking::scores)
        .def_property_readonly("method", [](const FeatureRanking& r) { return to_string(r.method); });
    m.def(
        "rank_features",
        [](const Dataset& train, const std::string& method, std::uint64_t seed) {
            RankingOptions opt;
            opt.seed = seed;
            py::gil_scoped_release release;
            return rank_features(train, parse_ranking_method(method), opt);
        },
        py::arg("train"), py::arg("method") = "gini_impurity", py::arg("seed") = 0);
    m.def("gini_gain", &gini_gain, py::arg("train"), py::arg("feature"));
    m.def("info_gain_ratio", &info_gain_ratio, py::arg("train"), py::arg("feature"));
    m.def("compute_direction", [](const Dataset& train) { return compute_direction(train).signs; });

    py::class_<AttackPlan>(m, "AttackPlan")
        .def_property_readonly("selected", &AttackPlan::selected)
        .def_property_readonly("direction", [](const AttackPlan& p) { return p.direction().signs; })
        .def_property_readonly("n", [](const AttackPlan& p) { return p.config().n; })
        .def_property_readonly("epsilon", [](const AttackPlan& p) { return p.config().epsilon; })
        .def("with_budget", &AttackPlan::with, py::arg("n"), py::arg("epsilon"))
        .def("perturb", [](const AttackPlan& p, const Array& x) {
            if (x.ndim() == 1) return to_array(perturb(to_vector(x), p));
            return to_array(perturb_batch(to_matrix(x), p));
        });
    m.def(
        "make_plan",
        [](const Dataset& train, std::size_t n, double epsilon, const std::string& method,
           std::optional<std::vector<std::size_t>> mask, bool strict_onehot, std::uint64_t seed) {
            AttackConfig cfg;
            cfg.n = n;
            cfg.epsilon = epsilon;
            cfg.method = parse_ranking_method(method);
            cfg.feature_mask = std::move(mask);
            cfg.strict_onehot = strict_onehot;
            RankingOptions opt;
            opt.seed = seed;
            py::gil_scoped_release release;
            return make_plan(train, cfg, opt);
        },
        py::arg("train"), py::arg("n") = 1, py::arg("epsilon") = 0.0, py::arg("method") = "gini_impurity",
        py::arg("mask") = py::none(), py::arg("strict_onehot") = false, py::arg("seed") = 0);

    m.def("success_rate", &success_rate, py::arg("baseline_recall"), py::arg("attack_recall"));
    m.def(
        "recall", [](const std::vector<int>& p, const std::vector<int>& y) { return recall(p, y); },
        py::arg("predicted"), py::arg("y"));
    m.def(
        "auprc", [](const std::vector<double>& s, const std::vector<int>& y) { return auprc(s, y); },
        py::arg("scores"), py::arg("y"));
    m.def("linspace", &linspace, py::arg("lo"), py::arg("hi"), py::arg("steps"));
    m.def(
        "evaluate_attack",
        [](const Model& model, const Dataset& test, const AttackPlan& plan) {
            auto r = evaluate_attack(model, test, plan);
            py::dict d;
            d["selected"] = r.selected;
            d["baseline_recall"] = r.baseline_recall;
            d["attack_recall"] = r.attack_recall;
            d["success_rate"] = r.success_rate;
            d["auprc_baseline"] = r.auprc_baseline;
            d["auprc_attack"] = r.auprc_attack;
            return d;
        },
        py::arg("model"), py::arg("test"), py::arg("plan"));
    m.def(
        "grid_search",
        [](const Dataset& train, const Dataset& test, std::vector<std::size_t> n_values, std::vector<double> epsilons,
           const std::vector<std::string>& methods, const std::vector<std::string>& models, std::uint64_t seed,
           std::size_t workers) {
            GridSpec spec{std::move(n_values), std::move(epsilons), {}, {}};
            for (const auto& s : methods) spec.methods.push_back(parse_ranking_method(s));
            for (const auto& s : models) spec.models.push_back(parse_model_kind(s));
            GridOptions opt;
            opt.seed = seed;
            opt.workers = workers;
            GridResult grid;
            {
                py::gil_scoped_release release;
                grid = grid_search(train, test, spec, opt);
            }
            py::list out;
            for (const auto& r : grid.records) out.append(record_dict(r));
            return out;
        },
        py::arg("train"), py::arg("test"), py::arg("n_values"), py::arg("epsilon_values"),
        py::arg("methods") = std::vector<std::string>{"gini_impurity"},
        py::arg("models") = std::vector<std::string>{"logistic_regression"}, py::arg("seed") = 0,
        py::arg("workers") = 1);

    m.attr("web_feature_names") = [] {
        std::vector<std::string> names(kWebFeatureNames.begin(), kWebFeatureNames.end());
        return names;
    }();
    m.def(
        "extract_features", [](const std::string& url, const std::string& html) {
            return feature_dict(extract_features({url, html}));
        },
        py::arg("url"), py::arg("html"));
    m.def(
        "inject",
        [](const std::string& url, const std::string& html, const std::map<std::string, long>& additions) {
            InjectionPlan plan;
            for (const auto& [name, count] : additions) plan.additions[web_feature_index(name)] = count;
            return inject({url, html}, plan).html;
        },
        py::arg("url"), py::arg("html"), py::arg("additions"));
}
