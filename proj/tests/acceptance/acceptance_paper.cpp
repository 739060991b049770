// Checks against the published project datasets. Expects JITCHRONO_DATA_DIR to
// hold jdt.csv, moz.csv, pla.csv and pos.csv, each optionally accompanied by a
// <name>.conf with column mappings. Exits 77 (skipped) when the data is absent.

#include "report.hpp"

#include "jitchrono/config.hpp"
#include "jitchrono/experiment.hpp"
#include "jitchrono/ingest.hpp"
#include "jitchrono/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <thread>

using namespace jitchrono;
using acceptance::Outcome;
namespace fs = std::filesystem;

namespace {

constexpr double kRatioTol = 0.01;
constexpr double kLoadBudgetSeconds = 10.0;
constexpr double kMedianTol = 0.03;
constexpr double kCellTol = 0.05;
constexpr double kAlpha = 0.05;
constexpr double kShareTol = 1e-9;
constexpr int kSeeds = 5;
constexpr int kDefaultTrees = 100;

struct Project {
    const char* key;
    const char* label;
    std::size_t changes;
    double ratio;
    double spm_auc;
    double lpm_auc;
};

constexpr Project kProjects[] = {
    {"jdt", "JDT", 35386, 0.14, 0.73, 0.75},
    {"moz", "Mozilla", 98275, 0.05, 0.80, 0.82},
    {"pla", "Platform", 64250, 0.15, 0.77, 0.78},
    {"pos", "Postgres", 20431, 0.25, 0.78, 0.80},
};

struct Loaded {
    RunConfig config;
    std::shared_ptr<const Dataset> dataset;
    double load_seconds = 0.0;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

Loaded load(const fs::path& dir, const Project& p, int trees) {
    Loaded l;
    const auto conf = dir / (std::string(p.key) + ".conf");
    if (fs::exists(conf)) l.config = apply_run_config(l.config, parse_key_values(read_text_file(conf)));
    l.config.experiment.forest.n_trees = trees;
    l.config.experiment.threads = std::max(1u, std::thread::hardware_concurrency());
    const auto start = std::chrono::steady_clock::now();
    l.dataset = std::make_shared<const Dataset>(
        load_dataset_file((dir / (std::string(p.key) + ".csv")).string(), l.config.schema, l.config.load));
    l.load_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return l;
}

Outcome table_summary(const Loaded& l, const Project& p) {
    const auto s = summarize(*l.dataset);
    const bool pass = s.n_changes == p.changes && std::abs(s.defect_ratio - p.ratio) <= kRatioTol &&
                      l.load_seconds < kLoadBudgetSeconds;
    return {pass, std::to_string(s.n_changes) + " changes" + fmt(", %.1f%% defective, loaded in %.1fs",
                                                                  100.0 * s.defect_ratio, l.load_seconds)};
}

struct SeedRuns {
    int direction_ok = 0;
    std::vector<double> spm_medians, lpm_medians;
    std::vector<double> spm27, lpm27;
    bool shares_ok = true;
    double worst_share = 0.0;
};

double sum(const FamilyScores& s) {
    double t = 0.0;
    for (double v : s) t += v;
    return t;
}

SeedRuns run_seeds(const Loaded& l) {
    SeedRuns r;
    const auto pd = stratify(l.dataset, l.config.experiment.window_months);
    for (int seed = 1; seed <= kSeeds; ++seed) {
        auto config = l.config.experiment;
        config.master_seed = static_cast<std::uint64_t>(seed);
        Rq1Result rq1;
        if (seed == 1) {
            const auto all = run_all(pd, config);
            rq1 = all.rq1;
            for (const auto* s : {&all.rq2.short_type1, &all.rq2.short_type2, &all.rq2.long_type1,
                                  &all.rq2.long_type2})
                for (const auto& [period, scores] : s->points) {
                    const double gap = std::abs(sum(scores) - 1.0);
                    r.worst_share = std::max(r.worst_share, gap);
                    if (!(gap <= kShareTol)) r.shares_ok = false;
                }
        } else {
            rq1 = run_rq1(pd, config);
        }
        const auto w = run_rq3_wsrt(rq1.spm_auc, rq1.lpm_auc, config.mask_first_train_period);
        if (w.status == "ok" && w.median_lpm > w.median_spm && w.test.p_value < kAlpha) ++r.direction_ok;
        r.spm_medians.push_back(w.median_spm);
        r.lpm_medians.push_back(w.median_lpm);
        if (const auto v = rq1.spm_auc.get(2, 7)) r.spm27.push_back(*v);
        if (const auto v = rq1.lpm_auc.get(2, 7)) r.lpm27.push_back(*v);
    }
    return r;
}

Outcome wsrt_direction(const SeedRuns& r, const Project& p, bool check_cells) {
    const double spm = median(r.spm_medians), lpm = median(r.lpm_medians);
    bool pass = r.direction_ok == kSeeds && std::abs(spm - p.spm_auc) <= kMedianTol &&
                std::abs(lpm - p.lpm_auc) <= kMedianTol;
    std::string detail = std::to_string(r.direction_ok) + "/" + std::to_string(kSeeds) +
                         fmt(" seeds LPM > SPM at p < 0.05; medians SPM %.3f LPM %.3f (paper %.2f", spm, lpm,
                             p.spm_auc) +
                         fmt("/%.2f)", p.lpm_auc);
    if (check_cells) {
        if (r.spm27.empty() || r.lpm27.empty()) return {false, detail + "; cell (2,7) missing"};
        const double s27 = median(r.spm27), l27 = median(r.lpm27);
        pass = pass && std::abs(s27 - 0.69) <= kCellTol && std::abs(l27 - 0.70) <= kCellTol;
        detail += fmt("; cell (2,7) SPM %.3f LPM %.3f (paper 0.69/0.70)", s27, l27);
    }
    return {pass, detail};
}

}  // namespace

int main() {
    const char* env = std::getenv("JITCHRONO_DATA_DIR");
    if (!env || !*env) {
        std::puts("SKIP paper datasets: JITCHRONO_DATA_DIR is not set");
        return 77;
    }
    const fs::path dir(env);
    for (const auto& p : kProjects)
        if (!fs::exists(dir / (std::string(p.key) + ".csv"))) {
            std::printf("SKIP paper datasets: %s not found\n", (dir / (std::string(p.key) + ".csv")).c_str());
            return 77;
        }
    int trees = kDefaultTrees;
    if (const char* t = std::getenv("JITCHRONO_PAPER_TREES")) trees = std::atoi(t);

    acceptance::Suite suite;
    for (const auto& p : kProjects) {
        std::optional<Loaded> loaded;
        suite.run(std::string("1 table-summary ") + p.label, [&] {
            loaded = load(dir, p, trees);
            return table_summary(*loaded, p);
        });
        if (!loaded) continue;
        std::optional<SeedRuns> runs;
        suite.run(std::string("2 wsrt ") + p.label, [&] {
            runs = run_seeds(*loaded);
            return wsrt_direction(*runs, p, std::string(p.key) == "jdt");
        });
        if (!runs) continue;
        suite.run(std::string("3 importance-normalization ") + p.label, [&] {
            return Outcome{runs->shares_ok, fmt("max |column sum - 1| %.3g", runs->worst_share)};
        });
    }
    return suite.exit_code();
}
