#include "jitchrono/cli.hpp"

#include "jitchrono/config.hpp"
#include "jitchrono/error.hpp"
#include "jitchrono/experiment.hpp"
#include "jitchrono/report.hpp"
#include "jitchrono/synthetic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <memory>

namespace jitchrono {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GlobalFlags {
    int window_months = 6;
    std::uint64_t seed = 0;
    int trees = 500;
    std::string out_dir;
    std::string config_path;
    unsigned threads = 1;
    bool mask_first = false;
};

class Stopwatch {
public:
    double lap() {
        const auto now = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        return s;
    }

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

std::string with_thousands(std::size_t n) {
    std::string digits = std::to_string(n);
    std::string out;
    for (std::size_t i = 0; i < digits.size(); ++i) {
        if (i > 0 && (digits.size() - i) % 3 == 0) out.push_back(',');
        out.push_back(digits[i]);
    }
    return out;
}

std::string percent(double ratio, int digits = 1) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f%%", digits, 100.0 * ratio);
    return buf;
}

std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::string pvalue(double p) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", p);
    return buf;
}

// Collects written files so the manifest only lists artifacts that exist.
class Artifacts {
public:
    explicit Artifacts(fs::path root) : root_(std::move(root)) {}

    const fs::path& root() const noexcept { return root_; }

    void write(const std::string& relative, std::string_view content) {
        write_text_file(root_ / relative, content);
        paths_.push_back(relative);
    }

    const std::vector<std::string>& paths() const noexcept { return paths_; }

private:
    fs::path root_;
    std::vector<std::string> paths_;
};

std::string file_stub(Strategy s, MetricKind m) {
    return std::string(to_string(s)) + "_" + std::string(to_string(m));
}

std::string strategy_label(Strategy s) {
    switch (s) {
    case Strategy::SPM: return "SPM";
    case Strategy::LPM: return "LPM";
    case Strategy::Weighted: return "Weighted";
    }
    return "?";
}

std::string metric_label(MetricKind m) { return m == MetricKind::AUC ? "AUC" : "Brier"; }

void emit_matrix(Artifacts& a, const std::string& dir, const PerformanceMatrix& m, const std::string& dataset) {
    const std::string stub = dir + "/" + file_stub(m.strategy(), m.metric());
    a.write(stub + ".csv", matrix_to_csv(m));
    a.write(stub + ".svg",
            heatmap_svg(m, dataset + ": " + strategy_label(m.strategy()) + " " + metric_label(m.metric())));
}

json cells_json(const std::vector<CellStatus>& cells) {
    json out = json::array();
    for (const auto& c : cells)
        out.push_back({{"strategy", to_string(c.strategy)}, {"train", c.train}, {"test", c.test}, {"status", c.status}});
    return out;
}

json models_json(const std::vector<ModelRecord>& models) {
    json out = json::array();
    for (const auto& m : models) {
        json entry = {{"strategy", to_string(m.strategy)},
                      {"train", m.train},
                      {"train_rows", m.train_rows},
                      {"balanced_rows", m.balanced_rows},
                      {"status", m.status}};
        entry["filter"] = m.filter ? to_json(*m.filter) : json(nullptr);
        out.push_back(std::move(entry));
    }
    return out;
}

json periods_json(const PeriodizedDataset& pd) {
    json out = json::array();
    for (const auto& p : pd.periods())
        out.push_back({{"index", p.index},
                       {"start", format_iso8601(p.start)},
                       {"end", format_iso8601(p.end)},
                       {"changes", p.records.size()}});
    return out;
}

void emit_rq1(Artifacts& a, const Rq1Result& r, const std::string& dataset, json& results) {
    for (const auto* m : {&r.spm_auc, &r.lpm_auc, &r.spm_brier, &r.lpm_brier}) emit_matrix(a, "rq1", *m, dataset);
    results["rq1"] = {{"cells", cells_json(r.cells)}, {"models", models_json(r.models)}};
}

void emit_rq2(Artifacts& a, const Rq2Result& r, const std::string& dataset, json& results, json& warnings) {
    for (const auto* s : {&r.short_type1, &r.short_type2, &r.long_type1, &r.long_type2}) {
        const std::string stub =
            "rq2/" + std::string(to_string(s->horizon)) + "_" + std::string(to_string(s->kind));
        a.write(stub + ".csv", importance_to_csv(*s));
        const std::string title = dataset + ": " + (s->horizon == Horizon::Short ? "short" : "long") +
                                  " period, " + (s->kind == ImportanceKind::TypeI ? "Type I" : "Type II");
        a.write(stub + ".svg", importance_svg(*s, title));
        results["rq2"][stub.substr(4)] = to_json(*s);
    }
    for (const auto& w : r.warnings) warnings.push_back(w);
}

void emit_rq3(Artifacts& a, const Rq3Result& r, const std::string& dataset, json& results) {
    emit_matrix(a, "rq3", r.weighted_auc, dataset);
    emit_matrix(a, "rq3", r.weighted_brier, dataset);
    for (const auto* kw : {&r.kw_auc, &r.kw_brier}) {
        const std::string stub = "rq3/kw_" + std::string(to_string(kw->metric));
        a.write(stub + ".csv", kw_groups_to_csv(*kw));
        std::vector<BoxGroup> groups;
        for (Strategy s : {Strategy::SPM, Strategy::LPM, Strategy::Weighted})
            groups.push_back({strategy_label(s), kw->groups[static_cast<std::size_t>(s)]});
        a.write(stub + ".svg", box_summary_svg(groups, dataset + ": " + metric_label(kw->metric) +
                                                           " at test period " + std::to_string(kw->test_period)));
    }
    json tests = {{"wsrt_auc", to_json(r.wsrt_auc)},
                  {"wsrt_brier", to_json(r.wsrt_brier)},
                  {"kw_auc", to_json(r.kw_auc)},
                  {"kw_brier", to_json(r.kw_brier)}};
    a.write("rq3/tests.json", tests.dump(2) + "\n");
    results["rq3"] = tests;
}

void print_rq1(std::ostream& out, const Rq1Result& r) {
    for (const auto* m : {&r.spm_auc, &r.lpm_auc, &r.spm_brier, &r.lpm_brier}) {
        std::vector<double> values;
        for (const auto& [_, v] : m->cells()) values.push_back(v);
        out << strategy_label(m->strategy()) << " " << metric_label(m->metric()) << ": " << values.size()
            << " cells";
        if (!values.empty()) out << ", median " << fixed3(median(values));
        out << "\n";
    }
}

void print_rq3(std::ostream& out, const Rq3Result& r) {
    for (const auto* w : {&r.wsrt_auc, &r.wsrt_brier}) {
        out << "WSRT " << metric_label(w->metric) << ": SPM " << fixed3(w->median_spm) << ", LPM "
            << fixed3(w->median_lpm) << ", p = " << pvalue(w->test.p_value) << " (" << w->pairs
            << " pairs";
        if (w->status != "ok") out << ", " << w->status;
        out << ")\n";
    }
    for (const auto* kw : {&r.kw_auc, &r.kw_brier}) {
        out << "Kruskal-Wallis " << metric_label(kw->metric) << " at period " << kw->test_period << ": ";
        if (kw->test)
            out << "H = " << fixed3(kw->test->statistic) << ", p = " << pvalue(kw->test->p_value);
        else
            out << kw->status;
        out << "\n";
    }
}

fs::path resolve_out_dir(const GlobalFlags& flags, bool flag_given, const RunConfig& rc) {
    if (flag_given) return flags.out_dir;
    if (rc.out_dir) return *rc.out_dir;
    if (const char* env = std::getenv("JITCHRONO_OUT"); env && *env) return env;
    return "jitchrono-out";
}

int run_command(const std::string& command, const std::string& input, const RunConfig& rc, const fs::path& out_dir,
                const std::vector<std::string>& args, std::ostream& out) {
    Stopwatch clock;
    json timings;
    json warnings = json::array();
    json results = json::object();
    Artifacts artifacts(out_dir);
    json manifest = {{"tool", "jitchrono"}, {"version", kToolVersion}, {"command", command}, {"arguments", args}};

    if (command == "synth") {
        const auto job = parse_synthetic_job(read_text_file(input));
        const Dataset d = generate_synthetic(job.spec, job.seed);
        timings["generate_s"] = clock.lap();
        std::ostringstream csv;
        write_dataset_csv(d, csv);
        artifacts.write(job.spec.name + ".csv", csv.str());
        timings["write_s"] = clock.lap();
        const auto s = summarize(d);
        manifest["synthetic"] = {{"seed", job.seed},
                                 {"n_periods", job.spec.n_periods},
                                 {"rows_per_period", job.spec.rows_per_period},
                                 {"drift", job.spec.drift == DriftKind::Stationary ? "stationary" : "coefficient"},
                                 {"drift_rate", job.spec.drift_rate},
                                 {"base_defect_rate", job.spec.base_defect_rate},
                                 {"noise_features", job.spec.noise_features},
                                 {"signal", job.spec.signal},
                                 {"window_months", job.spec.window_months}};
        manifest["dataset"] = to_json(s);
        out << "wrote " << with_thousands(s.n_changes) << " changes (" << percent(s.defect_ratio)
            << " defective) to " << (out_dir / (job.spec.name + ".csv")).string() << "\n";
    } else {
        auto dataset = std::make_shared<const Dataset>(load_dataset_file(input, rc.schema, rc.load));
        timings["load_s"] = clock.lap();
        const auto s = summarize(*dataset);
        const auto pd = stratify(dataset, rc.experiment.window_months);

        if (command == "summarize") {
            out << "dataset: " << dataset->name() << "\n"
                << "changes: " << with_thousands(s.n_changes) << "\n"
                << "defective: " << with_thousands(s.n_defective) << " (" << percent(s.defect_ratio) << ")\n"
                << "first: " << format_iso8601(s.first) << "\n"
                << "last: " << format_iso8601(s.last) << "\n"
                << "periods: " << pd.size() << " of " << rc.experiment.window_months << " months\n";
            return kOk;
        }

        manifest["input"] = input;
        manifest["config"] = to_json(rc.experiment);
        manifest["dataset"] = to_json(s);
        manifest["dataset"]["name"] = dataset->name();
        manifest["periods"] = periods_json(pd);
        if (pd.size() < 2) throw Error(ErrorCode::InsufficientClass, "dataset spans fewer than two periods");

        const std::string& name = dataset->name();
        if (command == "rq1") {
            const auto r = run_rq1(pd, rc.experiment);
            timings["run_s"] = clock.lap();
            emit_rq1(artifacts, r, name, results);
            print_rq1(out, r);
        } else if (command == "rq2") {
            const auto r = run_rq2(pd, rc.experiment);
            timings["run_s"] = clock.lap();
            emit_rq2(artifacts, r, name, results, warnings);
        } else if (command == "rq3") {
            const auto r = run_rq3(pd, rc.experiment);
            timings["run_s"] = clock.lap();
            emit_rq3(artifacts, r, name, results);
            print_rq3(out, r);
        } else if (command == "all") {
            const auto r = run_all(pd, rc.experiment);
            timings["run_s"] = clock.lap();
            emit_rq1(artifacts, r.rq1, name, results);
            emit_rq2(artifacts, r.rq2, name, results, warnings);
            emit_rq3(artifacts, r.rq3, name, results);
            print_rq1(out, r.rq1);
            print_rq3(out, r.rq3);
        }
        timings["write_s"] = clock.lap();
        manifest["results"] = results;
    }

    manifest["artifacts"] = artifacts.paths();
    manifest["timings"] = timings;
    manifest["warnings"] = warnings;
    write_text_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
    out << "wrote " << artifacts.paths().size() + 1 << " files under " << out_dir.string() << "\n";
    return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Longitudinal just-in-time defect prediction experiments.", "jitchrono"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);
    app.fallthrough();

    GlobalFlags flags;
    auto* window_opt =
        app.add_option("--window-months", flags.window_months, "Period length in months (default 6)")
            ->check(CLI::PositiveNumber);
    auto* seed_opt = app.add_option("--seed", flags.seed, "Master seed");
    auto* trees_opt = app.add_option("--trees", flags.trees, "Trees per forest (default 500)")->check(CLI::PositiveNumber);
    auto* out_opt = app.add_option("--out-dir", flags.out_dir, "Output directory (fallback: $JITCHRONO_OUT)");
    app.add_option("--config", flags.config_path, "Config file of key = value lines");
    auto* threads_opt =
        app.add_option("--threads", flags.threads, "Worker threads (default 1)")->check(CLI::PositiveNumber);
    auto* mask_opt = app.add_flag("--mask-first-train-period", flags.mask_first,
                                  "Leave training period 1 out of the statistical comparisons");

    std::string input;
    struct Sub {
        const char* name;
        const char* help;
        const char* arg;
    };
    const Sub subs[] = {
        {"summarize", "Print change counts and defect ratio", "file"},
        {"rq1", "SPM and LPM performance matrices", "file"},
        {"rq2", "Family importance over time", "file"},
        {"rq3", "Strategy comparison tests and weighted sampling", "file"},
        {"synth", "Generate a synthetic dataset from a spec file", "spec-file"},
        {"all", "Every analysis from one set of trained models", "file"},
    };
    for (const auto& s : subs) app.add_subcommand(s.name, s.help)->add_option(s.arg, input)->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << kToolVersion << "\n";
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kUsage;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    RunConfig rc;
    fs::path out_dir;
    try {
        if (!flags.config_path.empty()) {
            std::string text;
            try {
                text = read_text_file(flags.config_path);
            } catch (const Error& e) {
                throw UsageError(e.what());
            }
            rc = apply_run_config(rc, parse_key_values(text));
        }
        if (window_opt->count()) rc.experiment.window_months = flags.window_months;
        if (seed_opt->count()) rc.experiment.master_seed = flags.seed;
        if (trees_opt->count()) rc.experiment.forest.n_trees = flags.trees;
        if (threads_opt->count()) rc.experiment.threads = flags.threads;
        if (mask_opt->count()) rc.experiment.mask_first_train_period = true;
        out_dir = resolve_out_dir(flags, out_opt->count() > 0, rc);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }

    try {
        return run_command(command, input, rc, out_dir, args, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        if (e.is_data_error()) return kData;
        if (e.code() == ErrorCode::InvalidArgument) return kUsage;
        return kInternal;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kInternal;
    }
}

int cli_main(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace jitchrono
