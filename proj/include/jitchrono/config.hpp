#pragma once

#include "jitchrono/experiment.hpp"
#include "jitchrono/ingest.hpp"
#include "jitchrono/synthetic.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace jitchrono {

/// `key = value` lines; `#` starts a comment, blank lines are ignored.
/// Throws InvalidArgument naming the line on anything else. Later keys win.
std::map<std::string, std::string> parse_key_values(std::string_view text);

/// Everything a CLI run needs besides the subcommand and its input file.
struct RunConfig {
    ExperimentConfig experiment;
    SchemaMap schema = SchemaMap::defaults();
    LoadOptions load;
    std::optional<std::filesystem::path> out_dir;
};

/// Applies recognized keys onto `base`:
///   window_months, seed, trees, threads, out_dir, mtry, max_depth,
///   min_samples_split, correlation_threshold, min_class_count,
///   mask_first_train_period, weighted_test_periods (comma list), delimiter,
///   column.<logical> = <header>
/// Unknown keys and unparsable values throw InvalidArgument.
RunConfig apply_run_config(RunConfig base, const std::map<std::string, std::string>& values);

struct SyntheticJob {
    SyntheticSpec spec;
    std::uint64_t seed = 0;
};

/// Keys: n_periods, rows_per_period, drift (stationary|coefficient), drift_rate,
/// base_defect_rate, noise_features, signal, window_months, start, seed, name.
SyntheticJob parse_synthetic_job(std::string_view text);

}  // namespace jitchrono
