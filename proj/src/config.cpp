#include "jitchrono/config.hpp"

#include "jitchrono/error.hpp"

#include <charconv>
#include <sstream>

namespace jitchrono {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, std::string_view expected) {
    throw Error(ErrorCode::InvalidArgument,
                "config key '" + key + "': expected " + std::string(expected) + ", got '" + value + "'");
}

template <typename T>
T parse_integer(const std::string& key, const std::string& value) {
    T out{};
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) bad_value(key, value, "an integer");
    return out;
}

double parse_real(const std::string& key, const std::string& value) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) bad_value(key, value, "a number");
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
    if (value == "0" || value == "false" || value == "no" || value == "off") return false;
    bad_value(key, value, "a boolean");
}

int positive_int(const std::string& key, const std::string& value) {
    const int v = parse_integer<int>(key, value);
    if (v < 1) bad_value(key, value, "a positive integer");
    return v;
}

}  // namespace

std::map<std::string, std::string> parse_key_values(std::string_view text) {
    std::map<std::string, std::string> out;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw Error(ErrorCode::InvalidArgument, "config line " + std::to_string(line_no) + ": missing '='");
        const auto key = trim(line.substr(0, eq));
        if (key.empty())
            throw Error(ErrorCode::InvalidArgument, "config line " + std::to_string(line_no) + ": empty key");
        out[std::string(key)] = std::string(trim(line.substr(eq + 1)));
    }
    return out;
}

RunConfig apply_run_config(RunConfig base, const std::map<std::string, std::string>& values) {
    auto& ex = base.experiment;
    for (const auto& [key, value] : values) {
        if (key == "window_months") {
            ex.window_months = positive_int(key, value);
        } else if (key == "seed") {
            ex.master_seed = parse_integer<std::uint64_t>(key, value);
        } else if (key == "trees") {
            ex.forest.n_trees = positive_int(key, value);
        } else if (key == "threads") {
            ex.threads = static_cast<unsigned>(positive_int(key, value));
        } else if (key == "out_dir") {
            if (value.empty()) bad_value(key, value, "a directory");
            base.out_dir = value;
        } else if (key == "mtry") {
            ex.forest.mtry = parse_integer<int>(key, value);
            if (ex.forest.mtry < 0) bad_value(key, value, "a nonnegative integer");
        } else if (key == "max_depth") {
            ex.forest.max_depth = parse_integer<int>(key, value);
            if (ex.forest.max_depth < 0) bad_value(key, value, "a nonnegative integer");
        } else if (key == "min_samples_split") {
            const int v = parse_integer<int>(key, value);
            if (v < 2) bad_value(key, value, "an integer >= 2");
            ex.forest.min_samples_split = v;
        } else if (key == "correlation_threshold") {
            const double v = parse_real(key, value);
            if (!(v > 0.0 && v <= 1.0)) bad_value(key, value, "a number in (0, 1]");
            ex.correlation_threshold = v;
        } else if (key == "min_class_count") {
            ex.min_class_count = static_cast<std::size_t>(parse_integer<unsigned>(key, value));
        } else if (key == "mask_first_train_period") {
            ex.mask_first_train_period = parse_bool(key, value);
        } else if (key == "weighted_test_periods") {
            ex.weighted_test_periods.clear();
            std::istringstream list(value);
            std::string item;
            while (std::getline(list, item, ','))
                ex.weighted_test_periods.push_back(positive_int(key, std::string(trim(item))));
        } else if (key == "delimiter") {
            if (value == "\\t" || value == "tab")
                base.load.delimiter = '\t';
            else if (value.size() == 1)
                base.load.delimiter = value[0];
            else
                bad_value(key, value, "a single character");
        } else if (key.rfind("column.", 0) == 0) {
            base.schema.set(key.substr(7), value);
        } else {
            throw Error(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
        }
    }
    return base;
}

SyntheticJob parse_synthetic_job(std::string_view text) {
    SyntheticJob job;
    auto& s = job.spec;
    for (const auto& [key, value] : parse_key_values(text)) {
        if (key == "n_periods") {
            s.n_periods = positive_int(key, value);
        } else if (key == "rows_per_period") {
            s.rows_per_period = positive_int(key, value);
        } else if (key == "drift") {
            if (value == "stationary" || value == "none")
                s.drift = DriftKind::Stationary;
            else if (value == "coefficient" || value == "coefficient_drift")
                s.drift = DriftKind::CoefficientDrift;
            else
                bad_value(key, value, "'stationary' or 'coefficient'");
        } else if (key == "drift_rate") {
            s.drift_rate = parse_real(key, value);
        } else if (key == "base_defect_rate") {
            s.base_defect_rate = parse_real(key, value);
        } else if (key == "noise_features") {
            s.noise_features = parse_integer<int>(key, value);
        } else if (key == "signal") {
            s.signal = parse_real(key, value);
        } else if (key == "window_months") {
            s.window_months = positive_int(key, value);
        } else if (key == "start") {
            const auto t = parse_timestamp(value);
            if (!t) bad_value(key, value, "a timestamp");
            s.start = *t;
        } else if (key == "seed") {
            job.seed = parse_integer<std::uint64_t>(key, value);
        } else if (key == "name") {
            s.name = value;
        } else {
            throw Error(ErrorCode::InvalidArgument, "unknown synthetic spec key '" + key + "'");
        }
    }
    s.validate();
    return job;
}

}  // namespace jitchrono
