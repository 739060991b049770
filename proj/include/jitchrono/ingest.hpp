#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace jitchrono {

/// The fourteen change metrics, in canonical order.
enum class Metric : std::size_t {
    la, ld, lt,                 // size
    ns, nd, nf, entropy,        // diffusion
    nuc, ndev, age,             // history
    exp, rexp, sexp,            // experience
    fix,                        // purpose
};

inline constexpr std::size_t kMetricCount = 14;

std::string_view metric_name(Metric m) noexcept;
std::optional<Metric> metric_from_name(std::string_view name) noexcept;
const std::array<std::string, kMetricCount>& metric_names();

/// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

struct ChangeRecord {
    std::string id;
    Timestamp timestamp = 0;
    std::array<double, kMetricCount> metrics{};
    bool defective = false;

    double metric(Metric m) const { return metrics[static_cast<std::size_t>(m)]; }
};

/// Throws MalformedRow describing the first violated field constraint.
void validate_record(const ChangeRecord& record);

/// Records sorted by (timestamp, id) with unique ids. Immutable once built.
class Dataset {
public:
    /// Validates, sorts and checks id uniqueness. Throws EmptyInput, MalformedRow or DuplicateId.
    static Dataset from_records(std::vector<ChangeRecord> records, std::string name);

    std::span<const ChangeRecord> records() const noexcept { return records_; }
    const std::string& name() const noexcept { return name_; }
    std::size_t size() const noexcept { return records_.size(); }

private:
    Dataset() = default;
    std::vector<ChangeRecord> records_;
    std::string name_;
};

/// Logical column -> header name. Logical columns are "id", "timestamp", the
/// fourteen metric names and "label".
class SchemaMap {
public:
    /// commit_id, commit_ts, la ... fix, bug
    static SchemaMap defaults();

    void set(const std::string& logical, const std::string& header);
    const std::string& header_for(const std::string& logical) const;
    const std::map<std::string, std::string>& entries() const noexcept { return columns_; }

    static const std::vector<std::string>& logical_columns();

private:
    std::map<std::string, std::string> columns_;
};

struct LoadOptions {
    char delimiter = ',';
};

/// Parses delimited text with a header row. Fails on the first bad row.
Dataset load_dataset(std::istream& source, const SchemaMap& schema, std::string name,
                     const LoadOptions& options = {});
Dataset load_dataset_file(const std::string& path, const SchemaMap& schema,
                          const LoadOptions& options = {});

/// Accepts integer (or integral decimal) epoch seconds, or ISO-8601
/// "YYYY-MM-DD[THH:MM[:SS[.frac]]][Z|+HH:MM|-HH:MM]"; a space may replace 'T'.
std::optional<Timestamp> parse_timestamp(std::string_view text);

/// Calendar-month addition; day of month is clamped to the target month's length
/// and the time of day is preserved.
Timestamp add_months(Timestamp t, int months);

std::string format_iso8601(Timestamp t);

struct Period {
    int index = 0;  // 1-based
    Timestamp start = 0;
    Timestamp end = 0;  // exclusive
    std::size_t first = 0;  // offset into the dataset's records
    std::span<const ChangeRecord> records;

    std::size_t size() const noexcept { return records.size(); }
};

class PeriodizedDataset {
public:
    PeriodizedDataset(std::shared_ptr<const Dataset> dataset, int window_months, std::vector<Period> periods)
        : dataset_(std::move(dataset)), window_months_(window_months), periods_(std::move(periods)) {}

    const Dataset& dataset() const noexcept { return *dataset_; }
    int window_months() const noexcept { return window_months_; }
    std::size_t size() const noexcept { return periods_.size(); }
    std::span<const Period> periods() const noexcept { return periods_; }
    /// 1-based, matching period indexes.
    const Period& period(int index) const;

private:
    std::shared_ptr<const Dataset> dataset_;
    int window_months_;
    std::vector<Period> periods_;
};

/// Splits into consecutive windows of `window_months` calendar months, the first
/// starting at the earliest record. Window k starts at add_months(first, (k-1)*window_months).
PeriodizedDataset stratify(std::shared_ptr<const Dataset> dataset, int window_months);
PeriodizedDataset stratify(Dataset dataset, int window_months);

struct DatasetSummary {
    std::size_t n_changes = 0;
    std::size_t n_defective = 0;
    double defect_ratio = 0.0;
    Timestamp first = 0;
    Timestamp last = 0;
};

DatasetSummary summarize(const Dataset& dataset);

}  // namespace jitchrono
