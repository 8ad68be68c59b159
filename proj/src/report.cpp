#include "figa/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "figa/csv.hpp"
#include "figa/error.hpp"

namespace figa {

namespace {

std::vector<ModelKind> models_in(const GridResult& grid) {
    std::vector<ModelKind> out;
    for (const auto& r : grid.records)
        if (std::find(out.begin(), out.end(), r.model) == out.end()) out.push_back(r.model);
    return out;
}

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

std::string fixed(double v, int digits) {
    std::ostringstream ss;
    ss.setf(std::ios::fixed);
    ss.precision(digits);
    ss << v;
    return ss.str();
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

}  // namespace

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) throw IoError("failed writing " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move " + tmp.string() + " to " + path.string());
    }
}

std::vector<SummaryRow> summarize(const GridResult& grid, std::optional<double> max_epsilon) {
    std::vector<SummaryRow> rows;
    for (auto model : models_in(grid)) {
        const GridRecord* best = nullptr;
        for (const auto& r : grid.records) {
            if (r.model != model || (max_epsilon && r.epsilon > *max_epsilon)) continue;
            if (!best || r.success_rate > best->success_rate) best = &r;
        }
        if (!best) continue;
        rows.push_back({model, best->baseline_recall, best->attack_recall, best->success_rate, best->n, best->epsilon,
                        best->method});
    }
    return rows;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
    csv::write_row(out, {"model", "baseline_recall", "attack_recall", "success_rate", "n", "epsilon", "method"});
    for (const auto& r : rows)
        csv::write_row(out, {to_string(r.model), csv::format_double(r.baseline_recall),
                             csv::format_double(r.attack_recall), csv::format_double(r.success_rate),
                             std::to_string(r.n), csv::format_double(r.epsilon), to_string(r.method)});
}

void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve, CurveAxis axis) {
    csv::write_row(out, {to_string(axis), "success_rate", "method", "n", "epsilon", "attack_recall"});
    for (const auto& p : curve)
        csv::write_row(out, {p.label, csv::format_double(p.success_rate), to_string(p.best.method),
                             std::to_string(p.best.n), csv::format_double(p.best.epsilon),
                             csv::format_double(p.best.attack_recall)});
}

std::string render_curve_svg(const GridResult& grid, CurveAxis axis) {
    constexpr double W = 640, H = 400, L = 60, R = 170, T = 30, B = 50;
    constexpr double pw = W - L - R, ph = H - T - B;
    auto models = models_in(grid);

    std::vector<std::vector<CurvePoint>> curves;
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool first = true;
    for (auto m : models) {
        curves.push_back(max_success_curve(grid, axis, m));
        for (const auto& p : curves.back()) {
            if (first) {
                xmin = xmax = p.x;
                first = false;
            }
            xmin = std::min(xmin, p.x);
            xmax = std::max(xmax, p.x);
            ymin = std::min(ymin, p.success_rate);
            ymax = std::max(ymax, p.success_rate);
        }
    }
    if (!(xmax > xmin)) xmax = xmin + 1;
    auto sx = [&](double x) { return L + (x - xmin) / (xmax - xmin) * pw; };
    auto sy = [&](double y) { return T + (1.0 - (y - ymin) / (ymax - ymin)) * ph; };

    std::ostringstream s;
    s << R"(<svg xmlns="http://www.w3.org/2000/svg" width=")" << W << R"(" height=")" << H << R"(" viewBox="0 0 )"
      << W << ' ' << H << "\">\n";
    s << R"(<rect width="100%" height="100%" fill="white"/>)" << '\n';
    s << "<text x=\"" << L + pw / 2 << "\" y=\"18\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
      << "max success rate by " << xml_escape(to_string(axis)) << "</text>\n";
    s << R"(<g stroke="black" stroke-width="1">)"
      << "<line x1=\"" << L << "\" y1=\"" << T + ph << "\" x2=\"" << L + pw << "\" y2=\"" << T + ph << "\"/>"
      << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << T + ph << "\"/></g>\n";

    s << R"(<g font-family="sans-serif" font-size="10">)" << '\n';
    for (int k = 0; k <= 4; ++k) {
        double y = ymin + (ymax - ymin) * k / 4.0;
        s << "<text x=\"" << L - 6 << "\" y=\"" << sy(y) + 3 << "\" text-anchor=\"end\">" << fixed(y, 2) << "</text>\n";
    }
    if (axis == CurveAxis::method) {
        std::vector<std::pair<double, std::string>> ticks;
        for (const auto& c : curves)
            for (const auto& p : c)
                if (std::none_of(ticks.begin(), ticks.end(), [&](const auto& t) { return t.first == p.x; }))
                    ticks.emplace_back(p.x, p.label);
        for (const auto& [x, label] : ticks)
            s << "<text x=\"" << sx(x) << "\" y=\"" << T + ph + 15 << "\" text-anchor=\"middle\">" << xml_escape(label)
              << "</text>\n";
    } else {
        for (int k = 0; k <= 4; ++k) {
            double x = xmin + (xmax - xmin) * k / 4.0;
            s << "<text x=\"" << sx(x) << "\" y=\"" << T + ph + 15 << "\" text-anchor=\"middle\">"
              << (axis == CurveAxis::n ? fixed(x, 0) : fixed(x, 2)) << "</text>\n";
        }
    }
    s << "<text x=\"" << L + pw / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">"
      << xml_escape(to_string(axis)) << "</text>\n</g>\n";

    for (std::size_t i = 0; i < curves.size(); ++i) {
        const char* color = kPalette[i % std::size(kPalette)];
        s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t k = 0; k < curves[i].size(); ++k)
            s << (k ? " " : "") << fixed(sx(curves[i][k].x), 2) << ',' << fixed(sy(curves[i][k].success_rate), 2);
        s << "\"/>\n";
        double ly = T + 12 + 18 * static_cast<double>(i);
        s << "<line x1=\"" << L + pw + 15 << "\" y1=\"" << ly << "\" x2=\"" << L + pw + 35 << "\" y2=\"" << ly
          << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>";
        s << "<text x=\"" << L + pw + 40 << "\" y=\"" << ly + 4
          << "\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(to_string(models[i])) << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

std::vector<std::filesystem::path> emit_report(const GridResult& grid, const std::filesystem::path& out_dir) {
    if (grid.records.empty()) throw MetricError("cannot report on an empty grid");
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> written;
    constexpr CurveAxis kAxes[] = {CurveAxis::n, CurveAxis::epsilon, CurveAxis::method};
    for (auto model : models_in(grid)) {
        for (auto axis : kAxes) {
            std::ostringstream ss;
            write_curve_csv(ss, max_success_curve(grid, axis, model), axis);
            auto path = out_dir / ("curve_" + to_string(model) + "_" + to_string(axis) + ".csv");
            write_file_atomic(path, ss.str());
            written.push_back(path);
        }
    }
    for (auto axis : kAxes) {
        auto path = out_dir / ("curve_" + to_string(axis) + ".svg");
        write_file_atomic(path, render_curve_svg(grid, axis));
        written.push_back(path);
    }
    std::ostringstream ss;
    write_summary_csv(ss, summarize(grid));
    auto path = out_dir / "summary.csv";
    write_file_atomic(path, ss.str());
    written.push_back(path);
    return written;
}

}  // namespace figa
