#include "jitchrono/ingest.hpp"

#include "jitchrono/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <unordered_set>

namespace jitchrono {

namespace {

constexpr std::array<std::string_view, kMetricCount> kMetricNames = {
    "la", "ld", "lt", "ns", "nd", "nf", "entropy", "nuc", "ndev", "age", "exp", "rexp", "sexp", "fix",
};

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// Splits one delimited line. Double quotes group a field; "" inside quotes is a literal quote.
std::vector<std::string> split_fields(std::string_view line, char delimiter) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == delimiter) {
            fields.emplace_back(trim(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.emplace_back(trim(current));
    return fields;
}

std::optional<double> parse_real(std::string_view text) {
    text = trim(text);
    if (text.empty()) return std::nullopt;
    if (text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) return std::nullopt;
    return value;
}

std::optional<bool> parse_flag(std::string_view text) {
    const std::string t = lower(trim(text));
    if (t == "1" || t == "true" || t == "1.0") return true;
    if (t == "0" || t == "false" || t == "0.0") return false;
    return std::nullopt;
}

template <class Int>
bool parse_int(std::string_view s, Int& out) {
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

[[noreturn]] void malformed(std::size_t line, const std::string& what) {
    throw Error(ErrorCode::MalformedRow, "line " + std::to_string(line) + ": " + what);
}

}  // namespace

std::string_view metric_name(Metric m) noexcept { return kMetricNames[static_cast<std::size_t>(m)]; }

std::optional<Metric> metric_from_name(std::string_view name) noexcept {
    for (std::size_t i = 0; i < kMetricCount; ++i)
        if (kMetricNames[i] == name) return static_cast<Metric>(i);
    return std::nullopt;
}

const std::array<std::string, kMetricCount>& metric_names() {
    static const std::array<std::string, kMetricCount> names = [] {
        std::array<std::string, kMetricCount> out;
        for (std::size_t i = 0; i < kMetricCount; ++i) out[i] = std::string(kMetricNames[i]);
        return out;
    }();
    return names;
}

void validate_record(const ChangeRecord& record) {
    if (record.id.empty()) throw Error(ErrorCode::MalformedRow, "empty id");
    if (record.timestamp <= 0)
        throw Error(ErrorCode::MalformedRow, "record " + record.id + ": timestamp must be positive");
    for (std::size_t i = 0; i < kMetricCount; ++i) {
        const double v = record.metrics[i];
        const std::string name(kMetricNames[i]);
        if (!std::isfinite(v)) throw Error(ErrorCode::MalformedRow, "record " + record.id + ": " + name + " not finite");
        if (v < 0.0) throw Error(ErrorCode::MalformedRow, "record " + record.id + ": " + name + " negative");
    }
    const double fix = record.metric(Metric::fix);
    if (fix != 0.0 && fix != 1.0) throw Error(ErrorCode::MalformedRow, "record " + record.id + ": fix must be 0 or 1");
}

Dataset Dataset::from_records(std::vector<ChangeRecord> records, std::string name) {
    if (records.empty()) throw Error(ErrorCode::EmptyInput, "dataset '" + name + "' has no records");
    for (const auto& r : records) validate_record(r);
    std::sort(records.begin(), records.end(), [](const ChangeRecord& a, const ChangeRecord& b) {
        return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.id < b.id;
    });
    std::unordered_set<std::string_view> seen;
    seen.reserve(records.size());
    for (const auto& r : records)
        if (!seen.insert(r.id).second) throw Error(ErrorCode::DuplicateId, "duplicate id '" + r.id + "'");
    Dataset d;
    d.records_ = std::move(records);
    d.name_ = std::move(name);
    return d;
}

const std::vector<std::string>& SchemaMap::logical_columns() {
    static const std::vector<std::string> columns = [] {
        std::vector<std::string> out{"id", "timestamp"};
        for (auto n : kMetricNames) out.emplace_back(n);
        out.emplace_back("label");
        return out;
    }();
    return columns;
}

SchemaMap SchemaMap::defaults() {
    SchemaMap s;
    s.columns_["id"] = "commit_id";
    s.columns_["timestamp"] = "commit_ts";
    for (auto n : kMetricNames) s.columns_[std::string(n)] = std::string(n);
    s.columns_["label"] = "bug";
    return s;
}

void SchemaMap::set(const std::string& logical, const std::string& header) {
    const auto& cols = logical_columns();
    if (std::find(cols.begin(), cols.end(), logical) == cols.end())
        throw Error(ErrorCode::InvalidArgument, "unknown logical column '" + logical + "'");
    columns_[logical] = header;
}

const std::string& SchemaMap::header_for(const std::string& logical) const {
    const auto it = columns_.find(logical);
    if (it == columns_.end()) throw Error(ErrorCode::SchemaMismatch, "no mapping for column '" + logical + "'");
    return it->second;
}

Dataset load_dataset(std::istream& source, const SchemaMap& schema, std::string name, const LoadOptions& options) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(source, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
        if (!trim(line).empty()) {
            header = split_fields(line, options.delimiter);
            break;
        }
    }
    if (header.empty()) throw Error(ErrorCode::EmptyInput, "'" + name + "' has no header row");

    // Column positions for id, timestamp, metrics..., label.
    const auto& logical = SchemaMap::logical_columns();
    std::vector<std::size_t> position(logical.size());
    for (std::size_t k = 0; k < logical.size(); ++k) {
        const std::string& wanted = schema.header_for(logical[k]);
        const auto it = std::find(header.begin(), header.end(), wanted);
        if (it == header.end())
            throw Error(ErrorCode::SchemaMismatch,
                        "column '" + wanted + "' (for " + logical[k] + ") not found in header of '" + name + "'");
        position[k] = static_cast<std::size_t>(it - header.begin());
    }
    const std::size_t needed = *std::max_element(position.begin(), position.end()) + 1;

    std::vector<ChangeRecord> records;
    while (std::getline(source, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line, options.delimiter);
        if (fields.size() < needed)
            malformed(line_no, "expected at least " + std::to_string(needed) + " fields, got " +
                                   std::to_string(fields.size()));
        ChangeRecord r;
        r.id = fields[position[0]];
        if (r.id.empty()) malformed(line_no, "empty id");
        const auto ts = parse_timestamp(fields[position[1]]);
        if (!ts || *ts <= 0) malformed(line_no, "bad timestamp '" + fields[position[1]] + "'");
        r.timestamp = *ts;
        for (std::size_t m = 0; m < kMetricCount; ++m) {
            const std::string& field = fields[position[2 + m]];
            std::optional<double> v = parse_real(field);
            if (static_cast<Metric>(m) == Metric::fix && !v) {
                if (const auto flag = parse_flag(field)) v = *flag ? 1.0 : 0.0;
            }
            if (!v) malformed(line_no, "bad value '" + field + "' for " + std::string(kMetricNames[m]));
            r.metrics[m] = *v;
        }
        const auto label = parse_flag(fields[position.back()]);
        if (!label) malformed(line_no, "bad label '" + fields[position.back()] + "'");
        r.defective = *label;
        try {
            validate_record(r);
        } catch (const Error& e) {
            malformed(line_no, e.what());
        }
        records.push_back(std::move(r));
    }
    if (records.empty()) throw Error(ErrorCode::EmptyInput, "'" + name + "' has a header but no data rows");
    return Dataset::from_records(std::move(records), std::move(name));
}

Dataset load_dataset_file(const std::string& path, const SchemaMap& schema, const LoadOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
    std::string name = path;
    if (const auto slash = name.find_last_of("/\\"); slash != std::string::npos) name.erase(0, slash + 1);
    if (const auto dot = name.find_last_of('.'); dot != std::string::npos && dot > 0) name.erase(dot);
    return load_dataset(in, schema, name, options);
}

std::optional<Timestamp> parse_timestamp(std::string_view text) {
    using namespace std::chrono;
    text = trim(text);
    if (text.empty()) return std::nullopt;

    // Epoch seconds: plain integer, or a decimal with zero fraction.
    if (text.find('-', 1) == std::string_view::npos && text.find(':') == std::string_view::npos) {
        Timestamp secs = 0;
        if (parse_int(text, secs)) return secs;
        const auto v = parse_real(text);
        if (v && *v == std::floor(*v) && std::abs(*v) < 9.0e15) return static_cast<Timestamp>(*v);
        return std::nullopt;
    }

    if (text.size() < 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    int y = 0;
    unsigned mo = 0, d = 0;
    if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), mo) || !parse_int(text.substr(8, 2), d))
        return std::nullopt;
    const year_month_day ymd{year{y}, month{mo}, day{d}};
    if (!ymd.ok()) return std::nullopt;
    std::int64_t secs = sys_days{ymd}.time_since_epoch().count() * 86400LL;

    std::string_view rest = text.substr(10);
    if (rest.empty()) return secs;
    if (rest.front() != 'T' && rest.front() != 't' && rest.front() != ' ') return std::nullopt;
    rest.remove_prefix(1);
    if (rest.size() < 5 || rest[2] != ':') return std::nullopt;
    int hh = 0, mm = 0, ss = 0;
    if (!parse_int(rest.substr(0, 2), hh) || !parse_int(rest.substr(3, 2), mm)) return std::nullopt;
    rest.remove_prefix(5);
    if (!rest.empty() && rest.front() == ':') {
        if (rest.size() < 3 || !parse_int(rest.substr(1, 2), ss)) return std::nullopt;
        rest.remove_prefix(3);
        if (!rest.empty() && (rest.front() == '.' || rest.front() == ',')) {
            rest.remove_prefix(1);
            while (!rest.empty() && std::isdigit(static_cast<unsigned char>(rest.front()))) rest.remove_prefix(1);
        }
    }
    if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
    secs += hh * 3600LL + mm * 60LL + ss;

    if (rest.empty() || rest == "Z" || rest == "z") return secs;
    if (rest.front() != '+' && rest.front() != '-') return std::nullopt;
    const int sign = rest.front() == '+' ? 1 : -1;
    rest.remove_prefix(1);
    int oh = 0, om = 0;
    if (rest.size() == 5 && rest[2] == ':') {
        if (!parse_int(rest.substr(0, 2), oh) || !parse_int(rest.substr(3, 2), om)) return std::nullopt;
    } else if (rest.size() == 4) {
        if (!parse_int(rest.substr(0, 2), oh) || !parse_int(rest.substr(2, 2), om)) return std::nullopt;
    } else if (rest.size() == 2) {
        if (!parse_int(rest, oh)) return std::nullopt;
    } else {
        return std::nullopt;
    }
    return secs - sign * (oh * 3600LL + om * 60LL);
}

Timestamp add_months(Timestamp t, int months) {
    using namespace std::chrono;
    const auto tp = sys_seconds{seconds{t}};
    const auto day_point = floor<days>(tp);
    const auto time_of_day = tp - day_point;
    year_month_day ymd{day_point};
    ymd += std::chrono::months{months};
    if (!ymd.ok()) ymd = ymd.year() / ymd.month() / last;
    return (sys_days{ymd} + time_of_day).time_since_epoch().count();
}

std::string format_iso8601(Timestamp t) {
    using namespace std::chrono;
    const auto tp = sys_seconds{seconds{t}};
    const auto day_point = floor<days>(tp);
    const year_month_day ymd{day_point};
    const hh_mm_ss hms{tp - day_point};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return buf;
}

const Period& PeriodizedDataset::period(int index) const {
    if (index < 1 || static_cast<std::size_t>(index) > periods_.size())
        throw Error(ErrorCode::InvalidArgument, "period index " + std::to_string(index) + " out of range 1.." +
                                                    std::to_string(periods_.size()));
    return periods_[static_cast<std::size_t>(index - 1)];
}

PeriodizedDataset stratify(std::shared_ptr<const Dataset> dataset, int window_months) {
    if (window_months < 1) throw Error(ErrorCode::InvalidArgument, "window_months must be >= 1");
    if (!dataset || dataset->size() == 0) throw Error(ErrorCode::EmptyInput, "cannot stratify an empty dataset");
    const auto records = dataset->records();
    const Timestamp origin = records.front().timestamp;

    std::vector<Period> periods;
    std::size_t cursor = 0;
    for (int k = 0; cursor < records.size(); ++k) {
        Period p;
        p.index = k + 1;
        p.start = add_months(origin, k * window_months);
        p.end = add_months(origin, (k + 1) * window_months);
        p.first = cursor;
        while (cursor < records.size() && records[cursor].timestamp < p.end) ++cursor;
        p.records = records.subspan(p.first, cursor - p.first);
        periods.push_back(p);
    }
    return PeriodizedDataset(std::move(dataset), window_months, std::move(periods));
}

PeriodizedDataset stratify(Dataset dataset, int window_months) {
    return stratify(std::make_shared<const Dataset>(std::move(dataset)), window_months);
}

DatasetSummary summarize(const Dataset& dataset) {
    DatasetSummary s;
    const auto records = dataset.records();
    s.n_changes = records.size();
    s.n_defective = static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(), [](const ChangeRecord& r) { return r.defective; }));
    s.defect_ratio = s.n_changes ? static_cast<double>(s.n_defective) / static_cast<double>(s.n_changes) : 0.0;
    if (!records.empty()) {
        s.first = records.front().timestamp;
        s.last = records.back().timestamp;
    }
    return s;
}

}  // namespace jitchrono
