#pragma once

#include "jitchrono/experiment.hpp"
#include "jitchrono/ingest.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace jitchrono {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_number(double value);

/// Writes `content` to `path`, creating parent directories. Throws Io with the path on failure.
void write_text_file(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);

// ---- performance matrices --------------------------------------------------
//
// n x n grid plus a header row and column of period indexes. Row = training
// period, column = test period. Undefined cells are empty fields.

std::string matrix_to_csv(const PerformanceMatrix& m);
PerformanceMatrix matrix_from_csv(std::string_view csv, MetricKind metric, Strategy strategy);
void emit_matrix_csv(const PerformanceMatrix& m, const std::filesystem::path& path);

// ---- importance series -----------------------------------------------------
//
// Header "test_period,Size,Diffusion,History,Experience,Purpose", one row per
// test period that has a value.

std::string importance_to_csv(const ImportanceSeries& s);
ImportanceSeries importance_from_csv(std::string_view csv, ImportanceKind kind, Horizon horizon);
void emit_importance_csv(const ImportanceSeries& s, const std::filesystem::path& path);

// ---- strategy groups at one test period -------------------------------------

struct BoxGroup {
    std::string label;
    std::vector<double> values;
};

/// Long format: "strategy,train_period,value".
std::string kw_groups_to_csv(const KwResult& kw);

struct BoxStats {
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
    double whisker_low = 0, whisker_high = 0;  // furthest points within 1.5 IQR
};
/// Quartiles by linear interpolation between order statistics.
BoxStats box_stats(std::vector<double> values);

// ---- SVG -----------------------------------------------------------------------

/// Red ramp for AUC (higher is redder), blue ramp for Brier (lower is bluer).
std::string heatmap_svg(const PerformanceMatrix& m, std::string_view title = "");
void emit_heatmap_svg(const PerformanceMatrix& m, const std::filesystem::path& path, std::string_view title = "");

std::string importance_svg(const ImportanceSeries& s, std::string_view title = "");
void emit_importance_svg(const ImportanceSeries& s, const std::filesystem::path& path, std::string_view title = "");

std::string box_summary_svg(std::span<const BoxGroup> groups, std::string_view title = "");
void emit_box_summary_svg(std::span<const BoxGroup> groups, const std::filesystem::path& path,
                          std::string_view title = "");

// ---- datasets and JSON fragments --------------------------------------------

/// Default-schema CSV (commit_id, commit_ts, la ... fix, bug), epoch-second timestamps.
void write_dataset_csv(const Dataset& d, std::ostream& out);

nlohmann::json to_json(const DatasetSummary& s);
nlohmann::json to_json(const FilterReport& r);
nlohmann::json to_json(const TestResult& r);
nlohmann::json to_json(const WsrtResult& r);
nlohmann::json to_json(const KwResult& r);
nlohmann::json to_json(const ImportanceSeries& s);
nlohmann::json to_json(const ExperimentConfig& c);

}  // namespace jitchrono
