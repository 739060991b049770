#pragma once

#include "jitchrono/forest.hpp"
#include "jitchrono/ingest.hpp"
#include "jitchrono/preprocess.hpp"
#include "jitchrono/stats.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace jitchrono {

enum class Strategy { SPM, LPM, Weighted };
enum class MetricKind { AUC, Brier };
enum class Horizon { Short, Long };
enum class Family { Size, Diffusion, History, Experience, Purpose };

inline constexpr std::size_t kFamilyCount = 5;
inline constexpr std::array<Family, kFamilyCount> kFamilies = {Family::Size, Family::Diffusion, Family::History,
                                                              Family::Experience, Family::Purpose};

std::string_view to_string(Strategy s) noexcept;
std::string_view to_string(MetricKind m) noexcept;
std::string_view to_string(Horizon h) noexcept;
std::string_view to_string(Family f) noexcept;
std::string_view to_string(ImportanceKind k) noexcept;

/// Feature name -> family. Must cover all fourteen metrics exactly once.
class FamilyMap {
public:
    /// Size={la,ld,lt}, Diffusion={ns,nd,nf,entropy}, History={nuc,ndev,age},
    /// Experience={exp,rexp,sexp}, Purpose={fix}.
    static FamilyMap defaults();
    static FamilyMap from(std::map<std::string, Family> mapping);

    std::optional<Family> family_of(const std::string& feature) const;
    const std::map<std::string, Family>& entries() const noexcept { return mapping_; }

private:
    std::map<std::string, Family> mapping_;
};

struct ExperimentConfig {
    int window_months = 6;
    ForestConfig forest;
    double correlation_threshold = 0.7;
    std::uint64_t master_seed = 0;
    std::size_t min_class_count = 5;
    /// Test periods at which the weighted strategy is evaluated; empty means the last period.
    std::vector<int> weighted_test_periods;
    /// Drop training period 1 from the statistical comparisons (cells are still computed).
    bool mask_first_train_period = false;
    unsigned threads = 1;
};

/// Train period x test period grid; only cells with test > train may be set.
class PerformanceMatrix {
public:
    PerformanceMatrix() = default;
    PerformanceMatrix(MetricKind metric, Strategy strategy, int n_periods)
        : metric_(metric), strategy_(strategy), n_periods_(n_periods) {}

    MetricKind metric() const noexcept { return metric_; }
    Strategy strategy() const noexcept { return strategy_; }
    int n_periods() const noexcept { return n_periods_; }

    /// Throws InvalidArgument unless 1 <= train < test <= n_periods and value in [0, 1].
    void set(int train, int test, double value);
    std::optional<double> get(int train, int test) const;
    const std::map<std::pair<int, int>, double>& cells() const noexcept { return cells_; }
    std::size_t size() const noexcept { return cells_.size(); }

    friend bool operator==(const PerformanceMatrix&, const PerformanceMatrix&) = default;

private:
    MetricKind metric_ = MetricKind::AUC;
    Strategy strategy_ = Strategy::SPM;
    int n_periods_ = 0;
    std::map<std::pair<int, int>, double> cells_;
};

using FamilyScores = std::array<double, kFamilyCount>;

struct ImportanceSeries {
    ImportanceKind kind = ImportanceKind::TypeI;
    Horizon horizon = Horizon::Short;
    std::map<int, FamilyScores> points;  // test period -> normalized family scores
    std::vector<int> uniform_fallback;    // test periods where every family clamped to 0
};

// Training-set construction. Row lists are indices into pd.dataset().records(),
// ascending. `i` must satisfy 1 <= i < number of periods.
std::vector<std::size_t> spm_rows(const PeriodizedDataset& pd, int i);
std::vector<std::size_t> lpm_rows(const PeriodizedDataset& pd, int i);
/// For k = 1..i: a seeded sample without replacement of ceil(k/i * |period k|) rows.
std::vector<std::size_t> weighted_rows(const PeriodizedDataset& pd, int i, std::uint64_t seed);

FeatureMatrix matrix_for_rows(const Dataset& dataset, std::span<const std::size_t> rows);

/// Throw InsufficientClass when either class has fewer than min_class_count rows.
FeatureMatrix build_spm_training(const PeriodizedDataset& pd, int i, std::size_t min_class_count = 5);
FeatureMatrix build_lpm_training(const PeriodizedDataset& pd, int i, std::size_t min_class_count = 5);
FeatureMatrix build_weighted_training(const PeriodizedDataset& pd, int i, std::uint64_t seed,
                                      std::size_t min_class_count = 5);

/// A forest fitted through the full pipeline: correlation filter fitted on the
/// training rows, then undersampling, then training.
struct TrainedModel {
    FilterReport filter;
    FeatureMatrix balanced;  // undersampled training rows, retained features only
    RandomForest forest;
};

TrainedModel fit_model(const FeatureMatrix& train, const ExperimentConfig& config, std::uint64_t seed,
                       unsigned threads = 1);

struct CellScore {
    std::optional<double> auc;
    std::optional<double> brier;
    std::string status = "ok";
};

CellScore score_model(const TrainedModel& model, std::span<const ChangeRecord> test, unsigned threads = 1);

struct CellResult {
    CellScore score;
    ImportanceVector type1;
    ImportanceVector type2;
    FilterReport filter;
};

/// One train/test evaluation including both importance measures.
CellResult evaluate_cell(const FeatureMatrix& train, std::span<const ChangeRecord> test, const ExperimentConfig& config,
                         std::uint64_t seed);

/// Seed for the model trained on training period i. Shared by every strategy,
/// so identical training sets give identical models.
std::uint64_t model_seed(std::uint64_t master_seed, int train_period);
std::uint64_t weighted_sample_seed(std::uint64_t master_seed, int train_period);

struct CellStatus {
    Strategy strategy = Strategy::SPM;
    int train = 0;
    int test = 0;
    std::string status;
};

struct ModelRecord {
    Strategy strategy = Strategy::SPM;
    int train = 0;
    std::size_t train_rows = 0;     // before undersampling
    std::size_t balanced_rows = 0;  // after undersampling
    std::string status = "ok";
    std::optional<FilterReport> filter;
};

struct Rq1Result {
    PerformanceMatrix spm_auc, lpm_auc, spm_brier, lpm_brier;
    std::vector<CellStatus> cells;
    std::vector<ModelRecord> models;
};

struct Rq2Result {
    ImportanceSeries short_type1, short_type2, long_type1, long_type2;
    std::vector<std::string> warnings;
};

struct WsrtResult {
    MetricKind metric = MetricKind::AUC;
    TestResult test;
    std::size_t pairs = 0;
    double median_spm = 0.0;
    double median_lpm = 0.0;
    std::string status = "ok";
};

struct KwResult {
    MetricKind metric = MetricKind::AUC;
    int test_period = 0;
    std::array<std::vector<double>, 3> groups;  // SPM, LPM, Weighted; indexed by Strategy
    std::array<std::vector<int>, 3> train_periods;  // training period of each group value
    std::optional<TestResult> test;
    std::string status = "ok";
};

struct Rq3Result {
    WsrtResult wsrt_auc, wsrt_brier;
    KwResult kw_auc, kw_brier;
    PerformanceMatrix weighted_auc, weighted_brier;
};

struct FullRun {
    Rq1Result rq1;
    Rq2Result rq2;
    Rq3Result rq3;
};

Rq1Result run_rq1(const PeriodizedDataset& pd, const ExperimentConfig& config);
Rq2Result run_rq2(const PeriodizedDataset& pd, const ExperimentConfig& config,
                  const FamilyMap& families = FamilyMap::defaults());
/// Pairs LPM against SPM over the cells defined in both. Alternative: LPM
/// greater for AUC, LPM smaller for Brier.
WsrtResult run_rq3_wsrt(const PerformanceMatrix& spm, const PerformanceMatrix& lpm,
                        bool mask_first_train_period = false);
/// Kruskal-Wallis across the three strategies at one test period (default: last).
KwResult run_rq3_kw(const PerformanceMatrix& spm, const PerformanceMatrix& lpm, const PerformanceMatrix& weighted,
                    int test_period = 0, bool mask_first_train_period = false);
Rq3Result run_rq3(const PeriodizedDataset& pd, const ExperimentConfig& config);
/// Trains every (strategy, training period) model once and derives all three analyses.
FullRun run_all(const PeriodizedDataset& pd, const ExperimentConfig& config,
                const FamilyMap& families = FamilyMap::defaults());

/// Sum importances per family, clamp negative family totals to 0 and normalize
/// to 1. Returns nullopt when every family total is 0.
std::optional<FamilyScores> family_shares(const ImportanceVector& importance, const FamilyMap& families);

double median(std::vector<double> values);

}  // namespace jitchrono
