#include "jitchrono/experiment.hpp"

#include "jitchrono/error.hpp"
#include "jitchrono/metrics.hpp"
#include "jitchrono/parallel.hpp"
#include "jitchrono/random.hpp"

#include <algorithm>
#include <cmath>

namespace jitchrono {

std::string_view to_string(Strategy s) noexcept {
    switch (s) {
    case Strategy::SPM: return "spm";
    case Strategy::LPM: return "lpm";
    case Strategy::Weighted: return "weighted";
    }
    return "?";
}

std::string_view to_string(MetricKind m) noexcept { return m == MetricKind::AUC ? "auc" : "brier"; }
std::string_view to_string(Horizon h) noexcept { return h == Horizon::Short ? "short" : "long"; }
std::string_view to_string(ImportanceKind k) noexcept { return k == ImportanceKind::TypeI ? "type1" : "type2"; }

std::string_view to_string(Family f) noexcept {
    switch (f) {
    case Family::Size: return "Size";
    case Family::Diffusion: return "Diffusion";
    case Family::History: return "History";
    case Family::Experience: return "Experience";
    case Family::Purpose: return "Purpose";
    }
    return "?";
}

FamilyMap FamilyMap::defaults() {
    return from({{"la", Family::Size},          {"ld", Family::Size},         {"lt", Family::Size},
                 {"ns", Family::Diffusion},     {"nd", Family::Diffusion},    {"nf", Family::Diffusion},
                 {"entropy", Family::Diffusion}, {"nuc", Family::History},     {"ndev", Family::History},
                 {"age", Family::History},      {"exp", Family::Experience},  {"rexp", Family::Experience},
                 {"sexp", Family::Experience},  {"fix", Family::Purpose}});
}

FamilyMap FamilyMap::from(std::map<std::string, Family> mapping) {
    for (const auto& name : metric_names())
        if (!mapping.contains(name)) throw Error(ErrorCode::InvalidArgument, "family map does not cover '" + name + "'");
    if (mapping.size() != kMetricCount)
        throw Error(ErrorCode::InvalidArgument, "family map names features that are not change metrics");
    FamilyMap fm;
    fm.mapping_ = std::move(mapping);
    return fm;
}

std::optional<Family> FamilyMap::family_of(const std::string& feature) const {
    const auto it = mapping_.find(feature);
    if (it == mapping_.end()) return std::nullopt;
    return it->second;
}

void PerformanceMatrix::set(int train, int test, double value) {
    if (train < 1 || test <= train || test > n_periods_)
        throw Error(ErrorCode::InvalidArgument, "cell (" + std::to_string(train) + ", " + std::to_string(test) +
                                                    ") outside the lower triangle of " +
                                                    std::to_string(n_periods_) + " periods");
    if (!(value >= 0.0 && value <= 1.0)) throw Error(ErrorCode::InvalidArgument, "cell value outside [0, 1]");
    cells_[{train, test}] = value;
}

std::optional<double> PerformanceMatrix::get(int train, int test) const {
    const auto it = cells_.find({train, test});
    if (it == cells_.end()) return std::nullopt;
    return it->second;
}

namespace {

void check_train_index(const PeriodizedDataset& pd, int i) {
    if (i < 1 || static_cast<std::size_t>(i) >= pd.size())
        throw Error(ErrorCode::InvalidArgument, "training period " + std::to_string(i) + " needs 1 <= i < " +
                                                    std::to_string(pd.size()));
}

void append_period(const PeriodizedDataset& pd, int k, std::vector<std::size_t>& rows) {
    const Period& p = pd.period(k);
    for (std::size_t r = 0; r < p.size(); ++r) rows.push_back(p.first + r);
}

void class_guard(const FeatureMatrix& m, std::size_t min_class_count) {
    const std::size_t pos = m.positives();
    const std::size_t neg = m.negatives();
    if (pos < min_class_count || neg < min_class_count)
        throw Error(ErrorCode::InsufficientClass, std::to_string(pos) + " defective / " + std::to_string(neg) +
                                                      " clean rows, need at least " +
                                                      std::to_string(min_class_count) + " of each");
}

bool is_cell_failure(const Error& e) {
    switch (e.code()) {
    case ErrorCode::InsufficientClass:
    case ErrorCode::SingleClass:
    case ErrorCode::DegenerateInput:
    case ErrorCode::EmptyInput:
        return true;
    default:
        return false;
    }
}

struct Job {
    Strategy strategy;
    int train;
    std::vector<int> tests;
    bool importance;
};

struct JobOutput {
    ModelRecord record;
    std::map<int, CellScore> scores;
    std::optional<ImportanceVector> type1;
    std::optional<ImportanceVector> type2;
};

std::vector<std::size_t> rows_for(const PeriodizedDataset& pd, Strategy s, int i, std::uint64_t master_seed) {
    switch (s) {
    case Strategy::SPM: return spm_rows(pd, i);
    case Strategy::LPM: return lpm_rows(pd, i);
    case Strategy::Weighted: return weighted_rows(pd, i, weighted_sample_seed(master_seed, i));
    }
    return {};
}

JobOutput run_job(const PeriodizedDataset& pd, const ExperimentConfig& config, const Job& job) {
    JobOutput out;
    out.record.strategy = job.strategy;
    out.record.train = job.train;
    try {
        const auto rows = rows_for(pd, job.strategy, job.train, config.master_seed);
        out.record.train_rows = rows.size();
        const FeatureMatrix train = matrix_for_rows(pd.dataset(), rows);
        class_guard(train, config.min_class_count);
        const TrainedModel model = fit_model(train, config, model_seed(config.master_seed, job.train));
        out.record.balanced_rows = model.balanced.rows();
        out.record.filter = model.filter;
        for (int j : job.tests) out.scores[j] = score_model(model, pd.period(j).records);
        if (job.importance) {
            out.type2 = importance_type2(model.forest);
            try {
                out.type1 = importance_type1(model.forest, model.balanced);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::NoOob) throw;
            }
        }
    } catch (const Error& e) {
        if (!is_cell_failure(e)) throw;
        out.record.status = e.what();
        for (int j : job.tests) out.scores[j] = CellScore{std::nullopt, std::nullopt, e.what()};
    }
    return out;
}

std::vector<int> weighted_tests(const ExperimentConfig& config, int n) {
    std::vector<int> tests = config.weighted_test_periods;
    if (tests.empty()) tests.push_back(n);
    std::sort(tests.begin(), tests.end());
    tests.erase(std::unique(tests.begin(), tests.end()), tests.end());
    for (int t : tests)
        if (t < 2 || t > n)
            throw Error(ErrorCode::InvalidArgument, "weighted test period " + std::to_string(t) + " outside 2.." +
                                                        std::to_string(n));
    return tests;
}

struct EngineRequest {
    bool spm = false, lpm = false, weighted = false;
    bool score = true;
    bool importance = false;
};

std::vector<JobOutput> run_engine(const PeriodizedDataset& pd, const ExperimentConfig& config,
                                  const EngineRequest& request) {
    const int n = static_cast<int>(pd.size());
    if (n < 2) throw Error(ErrorCode::InvalidArgument, "need at least two periods, have " + std::to_string(n));
    std::vector<Job> jobs;
    auto later = [&](int i) {
        std::vector<int> t;
        if (request.score)
            for (int j = i + 1; j <= n; ++j) t.push_back(j);
        return t;
    };
    for (int i = 1; i < n; ++i) {
        if (request.spm) jobs.push_back({Strategy::SPM, i, later(i), request.importance});
        if (request.lpm) jobs.push_back({Strategy::LPM, i, later(i), request.importance});
    }
    if (request.weighted) {
        const auto tests = weighted_tests(config, n);
        for (int i = 1; i < n; ++i) {
            std::vector<int> t;
            for (int j : tests)
                if (j > i) t.push_back(j);
            if (!t.empty()) jobs.push_back({Strategy::Weighted, i, std::move(t), false});
        }
    }
    std::vector<JobOutput> outputs(jobs.size());
    parallel_for(jobs.size(), config.threads, [&](std::size_t k) { outputs[k] = run_job(pd, config, jobs[k]); });
    return outputs;
}

Rq1Result assemble_rq1(const std::vector<JobOutput>& outputs, int n) {
    Rq1Result r{PerformanceMatrix(MetricKind::AUC, Strategy::SPM, n), PerformanceMatrix(MetricKind::AUC, Strategy::LPM, n),
                PerformanceMatrix(MetricKind::Brier, Strategy::SPM, n),
                PerformanceMatrix(MetricKind::Brier, Strategy::LPM, n), {}, {}};
    for (const auto& o : outputs) {
        const Strategy s = o.record.strategy;
        if (s == Strategy::Weighted) continue;
        r.models.push_back(o.record);
        auto& auc_m = s == Strategy::SPM ? r.spm_auc : r.lpm_auc;
        auto& brier_m = s == Strategy::SPM ? r.spm_brier : r.lpm_brier;
        for (const auto& [j, score] : o.scores) {
            if (score.auc) auc_m.set(o.record.train, j, *score.auc);
            if (score.brier) brier_m.set(o.record.train, j, *score.brier);
            r.cells.push_back({s, o.record.train, j, score.status});
        }
    }
    return r;
}

Rq2Result assemble_rq2(const std::vector<JobOutput>& outputs, const FamilyMap& families) {
    Rq2Result r;
    r.short_type1 = {ImportanceKind::TypeI, Horizon::Short, {}, {}};
    r.short_type2 = {ImportanceKind::TypeII, Horizon::Short, {}, {}};
    r.long_type1 = {ImportanceKind::TypeI, Horizon::Long, {}, {}};
    r.long_type2 = {ImportanceKind::TypeII, Horizon::Long, {}, {}};
    auto add = [&](ImportanceSeries& series, const std::optional<ImportanceVector>& imp, int test) {
        if (!imp) return;
        const auto shares = family_shares(*imp, families);
        if (shares) {
            series.points[test] = *shares;
        } else {
            FamilyScores uniform;
            uniform.fill(1.0 / static_cast<double>(kFamilyCount));
            series.points[test] = uniform;
            series.uniform_fallback.push_back(test);
            r.warnings.push_back(std::string(to_string(series.horizon)) + " " +
                                 std::string(to_string(series.kind)) + " test period " + std::to_string(test) +
                                 ": all family importances clamped to 0, uniform shares used");
        }
    };
    for (const auto& o : outputs) {
        const Strategy s = o.record.strategy;
        if (s == Strategy::Weighted) continue;
        const int test = o.record.train + 1;
        if (o.record.status != "ok") {
            r.warnings.push_back(std::string(to_string(s)) + " model for training period " +
                                 std::to_string(o.record.train) + " unavailable: " + o.record.status);
            continue;
        }
        if (!o.type1)
            r.warnings.push_back(std::string(to_string(s)) + " model for training period " +
                                 std::to_string(o.record.train) + " has no out-of-bag rows; Type I skipped");
        add(s == Strategy::SPM ? r.short_type1 : r.long_type1, o.type1, test);
        add(s == Strategy::SPM ? r.short_type2 : r.long_type2, o.type2, test);
    }
    return r;
}

std::pair<PerformanceMatrix, PerformanceMatrix> assemble_weighted(const std::vector<JobOutput>& outputs, int n) {
    PerformanceMatrix auc_m(MetricKind::AUC, Strategy::Weighted, n);
    PerformanceMatrix brier_m(MetricKind::Brier, Strategy::Weighted, n);
    for (const auto& o : outputs) {
        if (o.record.strategy != Strategy::Weighted) continue;
        for (const auto& [j, score] : o.scores) {
            if (score.auc) auc_m.set(o.record.train, j, *score.auc);
            if (score.brier) brier_m.set(o.record.train, j, *score.brier);
        }
    }
    return {std::move(auc_m), std::move(brier_m)};
}

Rq3Result assemble_rq3(const Rq1Result& rq1, const std::vector<JobOutput>& outputs, const ExperimentConfig& config,
                       int n) {
    Rq3Result r;
    r.wsrt_auc = run_rq3_wsrt(rq1.spm_auc, rq1.lpm_auc, config.mask_first_train_period);
    r.wsrt_brier = run_rq3_wsrt(rq1.spm_brier, rq1.lpm_brier, config.mask_first_train_period);
    auto [wa, wb] = assemble_weighted(outputs, n);
    r.weighted_auc = std::move(wa);
    r.weighted_brier = std::move(wb);
    const int last = weighted_tests(config, n).back();
    r.kw_auc = run_rq3_kw(rq1.spm_auc, rq1.lpm_auc, r.weighted_auc, last, config.mask_first_train_period);
    r.kw_brier = run_rq3_kw(rq1.spm_brier, rq1.lpm_brier, r.weighted_brier, last, config.mask_first_train_period);
    return r;
}

}  // namespace

std::vector<std::size_t> spm_rows(const PeriodizedDataset& pd, int i) {
    check_train_index(pd, i);
    std::vector<std::size_t> rows;
    append_period(pd, i, rows);
    return rows;
}

std::vector<std::size_t> lpm_rows(const PeriodizedDataset& pd, int i) {
    check_train_index(pd, i);
    std::vector<std::size_t> rows;
    for (int k = 1; k <= i; ++k) append_period(pd, k, rows);
    return rows;
}

std::vector<std::size_t> weighted_rows(const PeriodizedDataset& pd, int i, std::uint64_t seed) {
    check_train_index(pd, i);
    std::vector<std::size_t> rows;
    for (int k = 1; k <= i; ++k) {
        const Period& p = pd.period(k);
        // ceil(k/i * size) in integer arithmetic
        const std::size_t take = (static_cast<std::size_t>(k) * p.size() + static_cast<std::size_t>(i) - 1) /
                                 static_cast<std::size_t>(i);
        Rng rng(derive_seed(seed, "weighted-period", {static_cast<std::uint64_t>(k)}));
        auto picked = rng.sample_indices(p.size(), take);
        std::sort(picked.begin(), picked.end());
        for (std::size_t r : picked) rows.push_back(p.first + r);
    }
    return rows;
}

FeatureMatrix matrix_for_rows(const Dataset& dataset, std::span<const std::size_t> rows) {
    const auto records = dataset.records();
    const auto& names = metric_names();
    std::vector<double> values;
    values.reserve(rows.size() * kMetricCount);
    std::vector<std::uint8_t> labels;
    labels.reserve(rows.size());
    for (std::size_t r : rows) {
        const auto& rec = records[r];
        values.insert(values.end(), rec.metrics.begin(), rec.metrics.end());
        labels.push_back(rec.defective ? 1 : 0);
    }
    return FeatureMatrix({names.begin(), names.end()}, std::move(values), std::move(labels), {rows.begin(), rows.end()});
}

FeatureMatrix build_spm_training(const PeriodizedDataset& pd, int i, std::size_t min_class_count) {
    auto m = matrix_for_rows(pd.dataset(), spm_rows(pd, i));
    class_guard(m, min_class_count);
    return m;
}

FeatureMatrix build_lpm_training(const PeriodizedDataset& pd, int i, std::size_t min_class_count) {
    auto m = matrix_for_rows(pd.dataset(), lpm_rows(pd, i));
    class_guard(m, min_class_count);
    return m;
}

FeatureMatrix build_weighted_training(const PeriodizedDataset& pd, int i, std::uint64_t seed,
                                      std::size_t min_class_count) {
    auto m = matrix_for_rows(pd.dataset(), weighted_rows(pd, i, seed));
    class_guard(m, min_class_count);
    return m;
}

std::uint64_t model_seed(std::uint64_t master_seed, int train_period) {
    return derive_seed(master_seed, "model", {static_cast<std::uint64_t>(train_period)});
}

std::uint64_t weighted_sample_seed(std::uint64_t master_seed, int train_period) {
    return derive_seed(master_seed, "weighted", {static_cast<std::uint64_t>(train_period)});
}

TrainedModel fit_model(const FeatureMatrix& train, const ExperimentConfig& config, std::uint64_t seed,
                       unsigned threads) {
    FilterReport filter = correlation_filter(train, config.correlation_threshold, derive_seed(seed, "filter"));
    if (filter.retained.empty()) throw Error(ErrorCode::DegenerateInput, "no usable features after filtering");
    FeatureMatrix balanced = undersample(train.select_features(filter.retained), derive_seed(seed, "undersample"));
    ForestConfig forest_config = config.forest;
    forest_config.seed = derive_seed(seed, "forest");
    RandomForest forest = train_forest(balanced, forest_config, threads);
    return {std::move(filter), std::move(balanced), std::move(forest)};
}

CellScore score_model(const TrainedModel& model, std::span<const ChangeRecord> test, unsigned threads) {
    CellScore score;
    if (test.empty()) {
        score.status = "empty test period";
        return score;
    }
    const FeatureMatrix m = FeatureMatrix::from_records(test).select_features(model.filter.retained);
    const auto probs = model.forest.predict_proba(m, threads);
    score.brier = brier(probs, m.labels());
    try {
        score.auc = auc(probs, m.labels());
    } catch (const Error& e) {
        if (e.code() != ErrorCode::SingleClass) throw;
        score.status = "auc undefined: test period has a single class";
    }
    return score;
}

CellResult evaluate_cell(const FeatureMatrix& train, std::span<const ChangeRecord> test, const ExperimentConfig& config,
                         std::uint64_t seed) {
    class_guard(train, config.min_class_count);
    const TrainedModel model = fit_model(train, config, seed, config.threads);
    CellResult out;
    out.score = score_model(model, test, config.threads);
    out.type1 = importance_type1(model.forest, model.balanced, config.threads);
    out.type2 = importance_type2(model.forest);
    out.filter = model.filter;
    return out;
}

std::optional<FamilyScores> family_shares(const ImportanceVector& importance, const FamilyMap& families) {
    FamilyScores sums{};
    for (const auto& [feature, score] : importance.scores) {
        const auto family = families.family_of(feature);
        if (!family) throw Error(ErrorCode::InvalidArgument, "feature '" + feature + "' has no family");
        sums[static_cast<std::size_t>(*family)] += score;
    }
    double total = 0.0;
    for (double& s : sums) {
        s = std::max(0.0, s);
        total += s;
    }
    if (total <= 0.0) return std::nullopt;
    for (double& s : sums) s /= total;
    return sums;
}

double median(std::vector<double> values) {
    if (values.empty()) throw Error(ErrorCode::InvalidArgument, "median of an empty sequence");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

Rq1Result run_rq1(const PeriodizedDataset& pd, const ExperimentConfig& config) {
    EngineRequest request;
    request.spm = request.lpm = true;
    return assemble_rq1(run_engine(pd, config, request), static_cast<int>(pd.size()));
}

Rq2Result run_rq2(const PeriodizedDataset& pd, const ExperimentConfig& config, const FamilyMap& families) {
    EngineRequest request;
    request.spm = request.lpm = true;
    request.score = false;
    request.importance = true;
    return assemble_rq2(run_engine(pd, config, request), families);
}

WsrtResult run_rq3_wsrt(const PerformanceMatrix& spm, const PerformanceMatrix& lpm, bool mask_first_train_period) {
    if (spm.metric() != lpm.metric()) throw Error(ErrorCode::InvalidArgument, "matrices measure different metrics");
    WsrtResult r;
    r.metric = spm.metric();
    std::vector<double> a, b;  // a = LPM, b = SPM
    for (const auto& [cell, spm_value] : spm.cells()) {
        if (mask_first_train_period && cell.first == 1) continue;
        const auto lpm_value = lpm.get(cell.first, cell.second);
        if (!lpm_value) continue;
        a.push_back(*lpm_value);
        b.push_back(spm_value);
    }
    r.pairs = a.size();
    if (a.empty()) {
        r.status = "no cells defined in both matrices";
        return r;
    }
    r.median_lpm = median(a);
    r.median_spm = median(b);
    r.test = wilcoxon_signed_rank(a, b, r.metric == MetricKind::AUC ? Alternative::AGreater : Alternative::BGreater);
    return r;
}

KwResult run_rq3_kw(const PerformanceMatrix& spm, const PerformanceMatrix& lpm, const PerformanceMatrix& weighted,
                    int test_period, bool mask_first_train_period) {
    if (spm.metric() != lpm.metric() || spm.metric() != weighted.metric())
        throw Error(ErrorCode::InvalidArgument, "matrices measure different metrics");
    KwResult r;
    r.metric = spm.metric();
    r.test_period = test_period > 0 ? test_period : spm.n_periods();
    const PerformanceMatrix* sources[3] = {&spm, &lpm, &weighted};
    for (std::size_t g = 0; g < 3; ++g)
        for (int i = mask_first_train_period ? 2 : 1; i < r.test_period; ++i)
            if (const auto v = sources[g]->get(i, r.test_period)) {
                r.groups[g].push_back(*v);
                r.train_periods[g].push_back(i);
            }
    const bool any_empty = std::any_of(r.groups.begin(), r.groups.end(), [](const auto& g) { return g.empty(); });
    const std::size_t total = r.groups[0].size() + r.groups[1].size() + r.groups[2].size();
    if (any_empty || total < 3) {
        r.status = "not enough values at test period " + std::to_string(r.test_period);
        return r;
    }
    r.test = kruskal_wallis(r.groups);
    if (r.test->warning != TestWarning::None) r.status = std::string(to_string(r.test->warning));
    return r;
}

Rq3Result run_rq3(const PeriodizedDataset& pd, const ExperimentConfig& config) {
    EngineRequest request;
    request.spm = request.lpm = request.weighted = true;
    const auto outputs = run_engine(pd, config, request);
    const int n = static_cast<int>(pd.size());
    return assemble_rq3(assemble_rq1(outputs, n), outputs, config, n);
}

FullRun run_all(const PeriodizedDataset& pd, const ExperimentConfig& config, const FamilyMap& families) {
    EngineRequest request;
    request.spm = request.lpm = request.weighted = true;
    request.importance = true;
    const auto outputs = run_engine(pd, config, request);
    const int n = static_cast<int>(pd.size());
    FullRun run;
    run.rq1 = assemble_rq1(outputs, n);
    run.rq2 = assemble_rq2(outputs, families);
    run.rq3 = assemble_rq3(run.rq1, outputs, config, n);
    return run;
}

}  // namespace jitchrono
