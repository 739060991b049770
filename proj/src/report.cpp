#include "jitchrono/report.hpp"

#include "jitchrono/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace jitchrono {

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> out;
    std::size_t begin = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || text[i] == sep) {
            out.push_back(text.substr(begin, i - begin));
            begin = i + 1;
        }
    }
    return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
    std::vector<std::string_view> out;
    for (auto line : split(text, '\n')) {
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) out.push_back(line);
    }
    return out;
}

double parse_double(std::string_view s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw Error(ErrorCode::MalformedRow, "not a number: '" + std::string(s) + "'");
    return v;
}

int parse_index(std::string_view s) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw Error(ErrorCode::MalformedRow, "not a period index: '" + std::string(s) + "'");
    return v;
}

std::string fixed(double v, int digits = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string escape_xml(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

struct Rgb {
    int r, g, b;
};

std::string blend(Rgb from, Rgb to, double t) {
    t = std::clamp(t, 0.0, 1.0);
    auto mix = [&](int a, int b) { return static_cast<int>(std::lround(a + (b - a) * t)); };
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", mix(from.r, to.r), mix(from.g, to.g), mix(from.b, to.b));
    return buf;
}

constexpr Rgb kWhite{255, 255, 255};
constexpr Rgb kRed{203, 24, 29};
constexpr Rgb kBlue{33, 102, 172};

const char* const kFamilyColours[kFamilyCount] = {"#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00"};

std::string svg_open(int width, int height) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) + "\" height=\"" +
           std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) + " " + std::to_string(height) +
           "\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
}

std::string text(double x, double y, std::string_view content, std::string_view extra = "") {
    std::string out = "<text x=\"" + fixed(x) + "\" y=\"" + fixed(y) + "\"";
    if (!extra.empty()) out += " " + std::string(extra);
    return out + ">" + escape_xml(content) + "</text>\n";
}

}  // namespace

std::string format_number(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) throw Error(ErrorCode::InvalidArgument, "cannot format number");
    return std::string(buf, ptr);
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create directory '" + path.parent_path().string() + "': " + ec.message());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::Io, "write to '" + path.string() + "' failed");
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string matrix_to_csv(const PerformanceMatrix& m) {
    const int n = m.n_periods();
    std::string out = "train\\test";
    for (int j = 1; j <= n; ++j) out += "," + std::to_string(j);
    out += "\n";
    for (int i = 1; i <= n; ++i) {
        out += std::to_string(i);
        for (int j = 1; j <= n; ++j) {
            out += ",";
            if (const auto v = m.get(i, j)) out += format_number(*v);
        }
        out += "\n";
    }
    return out;
}

PerformanceMatrix matrix_from_csv(std::string_view csv, MetricKind metric, Strategy strategy) {
    const auto lines = lines_of(csv);
    if (lines.empty()) throw Error(ErrorCode::EmptyInput, "empty matrix CSV");
    const auto header = split(lines.front(), ',');
    const int n = static_cast<int>(header.size()) - 1;
    for (int j = 1; j <= n; ++j)
        if (parse_index(header[static_cast<std::size_t>(j)]) != j)
            throw Error(ErrorCode::MalformedRow, "matrix header must list periods 1..n");
    if (static_cast<int>(lines.size()) != n + 1)
        throw Error(ErrorCode::MalformedRow, "matrix CSV must have one row per period");
    PerformanceMatrix m(metric, strategy, n);
    for (int i = 1; i <= n; ++i) {
        const auto fields = split(lines[static_cast<std::size_t>(i)], ',');
        if (static_cast<int>(fields.size()) != n + 1 || parse_index(fields[0]) != i)
            throw Error(ErrorCode::MalformedRow, "matrix row " + std::to_string(i) + " is malformed");
        for (int j = 1; j <= n; ++j) {
            const auto f = fields[static_cast<std::size_t>(j)];
            if (!f.empty()) m.set(i, j, parse_double(f));
        }
    }
    return m;
}

void emit_matrix_csv(const PerformanceMatrix& m, const std::filesystem::path& path) {
    write_text_file(path, matrix_to_csv(m));
}

std::string importance_to_csv(const ImportanceSeries& s) {
    std::string out = "test_period";
    for (Family f : kFamilies) out += "," + std::string(to_string(f));
    out += "\n";
    for (const auto& [test, scores] : s.points) {
        out += std::to_string(test);
        for (double v : scores) out += "," + format_number(v);
        out += "\n";
    }
    return out;
}

ImportanceSeries importance_from_csv(std::string_view csv, ImportanceKind kind, Horizon horizon) {
    const auto lines = lines_of(csv);
    if (lines.empty()) throw Error(ErrorCode::EmptyInput, "empty importance CSV");
    const auto header = split(lines.front(), ',');
    if (header.size() != kFamilyCount + 1) throw Error(ErrorCode::MalformedRow, "importance header must have 6 fields");
    for (std::size_t f = 0; f < kFamilyCount; ++f)
        if (header[f + 1] != to_string(kFamilies[f]))
            throw Error(ErrorCode::MalformedRow, "unexpected family column '" + std::string(header[f + 1]) + "'");
    ImportanceSeries s;
    s.kind = kind;
    s.horizon = horizon;
    for (std::size_t l = 1; l < lines.size(); ++l) {
        const auto fields = split(lines[l], ',');
        if (fields.size() != kFamilyCount + 1) throw Error(ErrorCode::MalformedRow, "importance row is malformed");
        FamilyScores scores{};
        for (std::size_t f = 0; f < kFamilyCount; ++f) scores[f] = parse_double(fields[f + 1]);
        s.points[parse_index(fields[0])] = scores;
    }
    return s;
}

void emit_importance_csv(const ImportanceSeries& s, const std::filesystem::path& path) {
    write_text_file(path, importance_to_csv(s));
}

std::string kw_groups_to_csv(const KwResult& kw) {
    std::string out = "strategy,train_period,value\n";
    const Strategy order[3] = {Strategy::SPM, Strategy::LPM, Strategy::Weighted};
    for (std::size_t g = 0; g < 3; ++g) {
        for (std::size_t k = 0; k < kw.groups[g].size(); ++k)
            out += std::string(to_string(order[g])) + "," + std::to_string(kw.train_periods[g].at(k)) + "," +
                   format_number(kw.groups[g][k]) + "\n";
    }
    return out;
}

BoxStats box_stats(std::vector<double> values) {
    if (values.empty()) throw Error(ErrorCode::InvalidArgument, "box summary of an empty group");
    std::sort(values.begin(), values.end());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, values.size() - 1);
        return values[lo] + (values[hi] - values[lo]) * (pos - static_cast<double>(lo));
    };
    BoxStats s;
    s.min = values.front();
    s.max = values.back();
    s.q1 = quantile(0.25);
    s.median = quantile(0.5);
    s.q3 = quantile(0.75);
    const double iqr = s.q3 - s.q1;
    s.whisker_low = s.max;
    s.whisker_high = s.min;
    for (double v : values) {
        if (v >= s.q1 - 1.5 * iqr) s.whisker_low = std::min(s.whisker_low, v);
        if (v <= s.q3 + 1.5 * iqr) s.whisker_high = std::max(s.whisker_high, v);
    }
    return s;
}

std::string heatmap_svg(const PerformanceMatrix& m, std::string_view title) {
    const int n = std::max(1, m.n_periods());
    constexpr int cell = 44, left = 70, top = 60, right = 20, bottom = 50;
    const int width = left + n * cell + right;
    const int height = top + n * cell + bottom;

    double lo = 1.0, hi = 0.0;
    for (const auto& [_, v] : m.cells()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const bool auc_ramp = m.metric() == MetricKind::AUC;
    auto intensity = [&](double v) {
        if (hi - lo <= 0.0) return 0.5;
        const double t = (v - lo) / (hi - lo);
        return auc_ramp ? t : 1.0 - t;
    };

    std::string out = svg_open(width, height);
    const std::string heading = title.empty() ? std::string(to_string(m.strategy())) + " " +
                                                    std::string(to_string(m.metric()))
                                              : std::string(title);
    out += text(left, 24, heading, "font-size=\"15\" class=\"title\"");
    out += text(left + n * cell / 2.0, height - 12, "testing period", "font-size=\"12\" text-anchor=\"middle\"");
    out += "<text x=\"16\" y=\"" + fixed(top + n * cell / 2.0) + "\" font-size=\"12\" text-anchor=\"middle\" " +
           "transform=\"rotate(-90 16 " + fixed(top + n * cell / 2.0) + ")\">training period</text>\n";
    for (int k = 1; k <= n; ++k) {
        out += text(left + (k - 0.5) * cell, top - 8, std::to_string(k), "font-size=\"11\" text-anchor=\"middle\"");
        out += text(left - 8, top + (k - 0.5) * cell + 4, std::to_string(k), "font-size=\"11\" text-anchor=\"end\"");
    }
    for (int i = 1; i <= n; ++i) {
        for (int j = 1; j <= n; ++j) {
            const double x = left + (j - 1) * cell;
            const double y = top + (i - 1) * cell;
            const auto v = m.get(i, j);
            if (!v) {
                out += "<rect class=\"empty\" x=\"" + fixed(x) + "\" y=\"" + fixed(y) + "\" width=\"" +
                       std::to_string(cell) + "\" height=\"" + std::to_string(cell) +
                       "\" fill=\"#f2f2f2\" stroke=\"#ffffff\"/>\n";
                continue;
            }
            const double t = intensity(*v);
            const std::string fill = blend(kWhite, auc_ramp ? kRed : kBlue, t);
            out += "<rect class=\"cell\" x=\"" + fixed(x) + "\" y=\"" + fixed(y) + "\" width=\"" +
                   std::to_string(cell) + "\" height=\"" + std::to_string(cell) + "\" fill=\"" + fill +
                   "\" stroke=\"#ffffff\"/>\n";
            out += text(x + cell / 2.0, y + cell / 2.0 + 4, fixed(*v),
                        std::string("class=\"label\" font-size=\"11\" text-anchor=\"middle\" fill=\"") +
                            (t > 0.6 ? "#ffffff" : "#000000") + "\"");
        }
    }
    return out + "</svg>\n";
}

void emit_heatmap_svg(const PerformanceMatrix& m, const std::filesystem::path& path, std::string_view title) {
    write_text_file(path, heatmap_svg(m, title));
}

std::string importance_svg(const ImportanceSeries& s, std::string_view title) {
    constexpr int left = 60, top = 50, plot_w = 480, plot_h = 260, legend_w = 130, bottom = 50;
    const int width = left + plot_w + legend_w;
    const int height = top + plot_h + bottom;
    int first = 1, last = 2;
    if (!s.points.empty()) {
        first = s.points.begin()->first;
        last = std::max(first + 1, s.points.rbegin()->first);
    }
    auto px = [&](int period) { return left + plot_w * static_cast<double>(period - first) / (last - first); };
    auto py = [&](double v) { return top + plot_h * (1.0 - std::clamp(v, 0.0, 1.0)); };

    std::string out = svg_open(width, height);
    const std::string heading = title.empty() ? std::string(to_string(s.horizon)) + " period, " +
                                                    (s.kind == ImportanceKind::TypeI ? "Type I" : "Type II")
                                              : std::string(title);
    out += text(left, 26, heading, "font-size=\"15\" class=\"title\"");
    out += "<rect x=\"" + std::to_string(left) + "\" y=\"" + std::to_string(top) + "\" width=\"" +
           std::to_string(plot_w) + "\" height=\"" + std::to_string(plot_h) +
           "\" fill=\"none\" stroke=\"#999999\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double v = k / 4.0;
        out += text(left - 6, py(v) + 4, fixed(v), "font-size=\"10\" text-anchor=\"end\"");
    }
    for (int p = first; p <= last; ++p)
        out += text(px(p), top + plot_h + 16, std::to_string(p), "font-size=\"10\" text-anchor=\"middle\"");
    out += text(left + plot_w / 2.0, height - 10, "testing period", "font-size=\"12\" text-anchor=\"middle\"");

    for (std::size_t f = 0; f < kFamilyCount; ++f) {
        std::string points;
        for (const auto& [test, scores] : s.points) {
            if (!points.empty()) points += " ";
            points += fixed(px(test)) + "," + fixed(py(scores[f]));
        }
        out += "<polyline class=\"series\" data-family=\"" + std::string(to_string(kFamilies[f])) +
               "\" fill=\"none\" stroke=\"" + kFamilyColours[f] + "\" stroke-width=\"2\" points=\"" + points +
               "\"/>\n";
        for (const auto& [test, scores] : s.points)
            out += "<circle class=\"point\" cx=\"" + fixed(px(test)) + "\" cy=\"" + fixed(py(scores[f])) +
                   "\" r=\"3\" fill=\"" + kFamilyColours[f] + "\"/>\n";
        const double ly = top + 14 + 20.0 * static_cast<double>(f);
        out += "<g class=\"legend\"><rect x=\"" + std::to_string(left + plot_w + 16) + "\" y=\"" + fixed(ly - 9) +
               "\" width=\"12\" height=\"12\" fill=\"" + kFamilyColours[f] + "\"/>" +
               text(left + plot_w + 34, ly + 1, to_string(kFamilies[f]), "font-size=\"12\"") + "</g>\n";
    }
    return out + "</svg>\n";
}

void emit_importance_svg(const ImportanceSeries& s, const std::filesystem::path& path, std::string_view title) {
    write_text_file(path, importance_svg(s, title));
}

std::string box_summary_svg(std::span<const BoxGroup> groups, std::string_view title) {
    constexpr int left = 60, top = 50, slot = 110, plot_h = 260, bottom = 50, right = 20;
    const int width = left + slot * static_cast<int>(std::max<std::size_t>(1, groups.size())) + right;
    const int height = top + plot_h + bottom;
    double lo = 1.0, hi = 0.0;
    for (const auto& g : groups)
        for (double v : g.values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    if (lo > hi) {
        lo = 0.0;
        hi = 1.0;
    }
    const double pad = hi - lo > 0.0 ? 0.08 * (hi - lo) : 0.05;
    lo -= pad;
    hi += pad;
    auto py = [&](double v) { return top + plot_h * (1.0 - (v - lo) / (hi - lo)); };

    std::string out = svg_open(width, height);
    out += text(left, 26, title.empty() ? "strategy comparison" : title, "font-size=\"15\" class=\"title\"");
    out += "<line x1=\"" + std::to_string(left) + "\" y1=\"" + std::to_string(top) + "\" x2=\"" +
           std::to_string(left) + "\" y2=\"" + std::to_string(top + plot_h) + "\" stroke=\"#999999\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double v = lo + (hi - lo) * k / 4.0;
        out += text(left - 6, py(v) + 4, fixed(v, 3), "font-size=\"10\" text-anchor=\"end\"");
    }
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const double cx = left + slot * (static_cast<double>(g) + 0.5);
        out += text(cx, top + plot_h + 18, groups[g].label + " (n=" + std::to_string(groups[g].values.size()) + ")",
                    "font-size=\"11\" text-anchor=\"middle\"");
        if (groups[g].values.empty()) continue;
        const BoxStats b = box_stats(groups[g].values);
        const double half = slot * 0.25;
        out += "<g class=\"box\" data-group=\"" + escape_xml(groups[g].label) + "\" data-median=\"" +
               format_number(b.median) + "\">\n";
        out += "<line class=\"whisker\" x1=\"" + fixed(cx) + "\" y1=\"" + fixed(py(b.whisker_low)) + "\" x2=\"" +
               fixed(cx) + "\" y2=\"" + fixed(py(b.whisker_high)) + "\" stroke=\"#333333\"/>\n";
        for (double w : {b.whisker_low, b.whisker_high})
            out += "<line class=\"cap\" x1=\"" + fixed(cx - half / 2) + "\" y1=\"" + fixed(py(w)) + "\" x2=\"" +
                   fixed(cx + half / 2) + "\" y2=\"" + fixed(py(w)) + "\" stroke=\"#333333\"/>\n";
        out += "<rect class=\"iqr\" x=\"" + fixed(cx - half) + "\" y=\"" + fixed(py(b.q3)) + "\" width=\"" +
               fixed(2 * half) + "\" height=\"" + fixed(std::max(1.0, py(b.q1) - py(b.q3))) +
               "\" fill=\"#c6dbef\" stroke=\"#333333\"/>\n";
        out += "<line class=\"median\" x1=\"" + fixed(cx - half) + "\" y1=\"" + fixed(py(b.median)) + "\" x2=\"" +
               fixed(cx + half) + "\" y2=\"" + fixed(py(b.median)) + "\" stroke=\"#000000\" stroke-width=\"2\"/>\n";
        for (double v : groups[g].values)
            if (v < b.whisker_low || v > b.whisker_high)
                out += "<circle class=\"outlier\" cx=\"" + fixed(cx) + "\" cy=\"" + fixed(py(v)) +
                       "\" r=\"2.5\" fill=\"none\" stroke=\"#333333\"/>\n";
        out += "</g>\n";
    }
    return out + "</svg>\n";
}

void emit_box_summary_svg(std::span<const BoxGroup> groups, const std::filesystem::path& path,
                          std::string_view title) {
    write_text_file(path, box_summary_svg(groups, title));
}

void write_dataset_csv(const Dataset& d, std::ostream& out) {
    out << "commit_id,commit_ts";
    for (const auto& n : metric_names()) out << ',' << n;
    out << ",bug\n";
    for (const auto& r : d.records()) {
        out << r.id << ',' << r.timestamp;
        for (double v : r.metrics) out << ',' << format_number(v);
        out << ',' << (r.defective ? 1 : 0) << '\n';
    }
}

nlohmann::json to_json(const DatasetSummary& s) {
    return {{"n_changes", s.n_changes},
            {"n_defective", s.n_defective},
            {"defect_ratio", s.defect_ratio},
            {"first", format_iso8601(s.first)},
            {"last", format_iso8601(s.last)}};
}

nlohmann::json to_json(const FilterReport& r) {
    nlohmann::json dropped = nlohmann::json::array();
    for (const auto& d : r.dropped) dropped.push_back({{"name", d.name}, {"partner", d.kept}, {"rho", d.rho}});
    return {{"threshold", r.threshold}, {"seed", r.seed},         {"retained", r.retained},
            {"dropped", dropped},       {"constant", r.constant}, {"warnings", r.warnings}};
}

nlohmann::json to_json(const TestResult& r) {
    return {{"statistic", r.statistic},
            {"p_value", r.p_value},
            {"n_effective", r.n_effective},
            {"method", to_string(r.method)},
            {"alternative", to_string(r.alternative)},
            {"warning", to_string(r.warning)}};
}

nlohmann::json to_json(const WsrtResult& r) {
    return {{"metric", to_string(r.metric)},   {"pairs", r.pairs},   {"median_spm", r.median_spm},
            {"median_lpm", r.median_lpm},      {"status", r.status}, {"test", to_json(r.test)},
            {"alternative_hypothesis", r.metric == MetricKind::AUC ? "LPM greater" : "LPM smaller"}};
}

nlohmann::json to_json(const KwResult& r) {
    nlohmann::json groups;
    const Strategy order[3] = {Strategy::SPM, Strategy::LPM, Strategy::Weighted};
    for (std::size_t g = 0; g < 3; ++g) {
        nlohmann::json entry = {{"values", r.groups[g]}};
        if (!r.groups[g].empty()) entry["median"] = box_stats(r.groups[g]).median;
        groups[std::string(to_string(order[g]))] = entry;
    }
    nlohmann::json out = {{"metric", to_string(r.metric)},
                          {"test_period", r.test_period},
                          {"status", r.status},
                          {"groups", groups}};
    out["test"] = r.test ? to_json(*r.test) : nlohmann::json(nullptr);
    return out;
}

nlohmann::json to_json(const ImportanceSeries& s) {
    nlohmann::json points = nlohmann::json::object();
    for (const auto& [test, scores] : s.points) {
        nlohmann::json p;
        for (std::size_t f = 0; f < kFamilyCount; ++f) p[std::string(to_string(kFamilies[f]))] = scores[f];
        points[std::to_string(test)] = p;
    }
    return {{"kind", to_string(s.kind)},
            {"horizon", to_string(s.horizon)},
            {"points", points},
            {"uniform_fallback", s.uniform_fallback}};
}

nlohmann::json to_json(const ExperimentConfig& c) {
    return {{"window_months", c.window_months},
            {"correlation_threshold", c.correlation_threshold},
            {"master_seed", c.master_seed},
            {"min_class_count", c.min_class_count},
            {"weighted_test_periods", c.weighted_test_periods},
            {"mask_first_train_period", c.mask_first_train_period},
            {"threads", c.threads},
            {"forest",
             {{"n_trees", c.forest.n_trees},
              {"mtry", c.forest.mtry},
              {"max_depth", c.forest.max_depth},
              {"min_samples_split", c.forest.min_samples_split}}}};
}

}  // namespace jitchrono
