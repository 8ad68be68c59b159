#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "figa/csv.hpp"
#include "figa/error.hpp"
#include "figa/report.hpp"
#include "support.hpp"

using namespace figa;

namespace {

GridResult one_model_grid() {
    GridResult g;
    for (auto m : {RankingMethod::gini_impurity, RankingMethod::info_gain_ratio})
        for (std::size_t n : {1u, 2u})
            for (double e : {0.5, 1.0}) {
                double s = 0.1 * static_cast<double>(n) + 0.2 * e + (m == RankingMethod::gini_impurity ? 0.05 : 0.0);
                g.records.push_back({ModelKind::random_forest, m, n, e, 0.9, 0.9 * (1 - s), s});
            }
    return g;
}

// Minimal well-formedness check: balanced tags, one root, quoted attributes.
bool well_formed_xml(const std::string& text) {
    std::vector<std::string> stack;
    std::size_t roots = 0;
    for (std::size_t i = text.find('<'); i != std::string::npos; i = text.find('<', i + 1)) {
        auto end = text.find('>', i);
        if (end == std::string::npos) return false;
        std::string tag = text.substr(i + 1, end - i - 1);
        if (tag.empty() || tag[0] == '?' || tag[0] == '!') continue;
        if (std::count(tag.begin(), tag.end(), '"') % 2) return false;
        if (tag[0] == '/') {
            if (stack.empty() || stack.back() != tag.substr(1)) return false;
            stack.pop_back();
            continue;
        }
        std::string name = tag.substr(0, tag.find_first_of(" /"));
        if (stack.empty()) ++roots;
        if (tag.back() != '/') stack.push_back(name);
    }
    return stack.empty() && roots == 1;
}

}  // namespace

TEST(Report, OneModelCardinality) {
    figa::testing::TempDir dir;
    auto files = emit_report(one_model_grid(), dir.path());
    std::size_t csvs = 0, svgs = 0;
    for (const auto& f : files) {
        EXPECT_TRUE(std::filesystem::exists(f));
        if (f.filename() == "summary.csv") continue;
        csvs += f.extension() == ".csv";
        svgs += f.extension() == ".svg";
    }
    EXPECT_EQ(csvs, 3u);
    EXPECT_EQ(svgs, 3u);

    std::ifstream in(dir.path() / "summary.csv");
    auto rows = csv::read_all(in);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"model", "baseline_recall", "attack_recall", "success_rate", "n",
                                                 "epsilon", "method"}));
    EXPECT_EQ(rows[1][0], "random_forest");
    EXPECT_EQ(rows[1][4], "2");
    EXPECT_EQ(rows[1][5], "1");
    EXPECT_EQ(rows[1][6], "gini_impurity");
}

TEST(Report, SvgIsWellFormed) {
    auto g = one_model_grid();
    for (auto r : one_model_grid().records) {
        r.model = ModelKind::mlp;
        g.records.push_back(r);
    }
    for (auto axis : {CurveAxis::n, CurveAxis::epsilon, CurveAxis::method}) {
        auto svg = render_curve_svg(g, axis);
        EXPECT_TRUE(well_formed_xml(svg)) << svg;
        EXPECT_NE(svg.find("random_forest"), std::string::npos);
        EXPECT_NE(svg.find("mlp"), std::string::npos);
    }
}

TEST(Report, EmptyGridFails) {
    figa::testing::TempDir dir;
    EXPECT_THROW(emit_report(GridResult{}, dir.path()), MetricError);
}

TEST(Report, SummaryRespectsEpsilonCap) {
    auto rows = summarize(one_model_grid(), 0.5);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].epsilon, 0.5);
}

TEST(Report, AtomicWriteReplaces) {
    figa::testing::TempDir dir;
    auto p = dir.path() / "f.txt";
    write_file_atomic(p, "one");
    write_file_atomic(p, "two");
    std::ifstream in(p);
    std::string s;
    in >> s;
    EXPECT_EQ(s, "two");
    EXPECT_FALSE(std::filesystem::exists(dir.path() / "f.txt.tmp"));
}
