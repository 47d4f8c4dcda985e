#include "sgmrd/benchgen.hpp"
#include "sgmrd/engine.hpp"
#include "sgmrd/ensemble.hpp"
#include "sgmrd/error.hpp"
#include "sgmrd/evalkit.hpp"
#include "sgmrd/io.hpp"
#include "sgmrd/stream.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifndef SGMRD_VERSION
#define SGMRD_VERSION "unknown"
#endif

using namespace sgmrd;
using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

// Wall-clock time per named phase, in seconds.
class Timings {
public:
    template <typename F>
    auto time(const std::string& phase, F&& f) {
        const auto start = std::chrono::steady_clock::now();
        struct Stop {
            Timings* self;
            std::string phase;
            std::chrono::steady_clock::time_point start;
            ~Stop() {
                self->phases_[phase] +=
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            }
        } stop{this, phase, start};
        return f();
    }
    json to_json() const {
        json j = json::object();
        for (const auto& [k, v] : phases_) j[k] = v;
        return j;
    }

private:
    std::map<std::string, double> phases_;
};

struct Manifest {
    std::string command;
    std::vector<std::string> args;  // resolved flags, enough to replay the command
    json config = json::object();
    json inputs = json::object();
    json outputs = json::object();
    json results = json::object();
    Timings timings;

    void write(const fs::path& path) const {
        json j;
        j["tool"] = "sgmrd";
        j["version"] = SGMRD_VERSION;
        j["command"] = command;
        j["args"] = args;
        j["config"] = config;
        j["inputs"] = inputs;
        j["outputs"] = outputs;
        if (!results.empty()) j["results"] = results;
        j["timings_seconds"] = timings.to_json();
        std::ofstream out(path);
        out << j.dump(2) << '\n';
        if (!out) throw DataError("cannot write manifest " + path.string());
    }
};

fs::path manifest_path(const fs::path& out) { return fs::path(out.string() + ".manifest.json"); }

void ensure_parent(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

// Every option is recorded as "--name=value" so `replay` can feed it back.
std::vector<std::string> resolved_args(const CLI::App& sub) {
    std::vector<std::string> args{sub.get_name()};
    for (const auto* opt : sub.get_options()) {
        const auto& lnames = opt->get_lnames();
        if (lnames.empty() || lnames.front() == "help") continue;
        for (const auto& v : opt->results()) args.push_back("--" + lnames.front() + "=" + v);
    }
    return args;
}

std::vector<std::string> csv_header(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    return cols;
}

CsvStream load_stream(const fs::path& path, const std::string& label_column) {
    const auto cols = csv_header(path);
    const bool labelled = std::find(cols.begin(), cols.end(), label_column) != cols.end();
    return read_csv_stream(path, labelled ? std::optional(label_column) : std::nullopt);
}

void env(CLI::Option* opt, const std::string& name) { opt->envname("SGMRD_" + name); }

// ---- generate ----

struct GenerateArgs {
    GeneratorConfig cfg;
    std::string out = "stream.csv";
};

int cmd_generate(const GenerateArgs& a, const CLI::App& sub) {
    Manifest m;
    m.command = "generate";
    m.args = resolved_args(sub);
    const fs::path out(a.out);
    const fs::path spec = fs::path(out).replace_extension(".spec.json");
    ensure_parent(out);
    const auto data = m.timings.time("generate", [&] { return generate(a.cfg); });
    m.timings.time("write", [&] {
        write_dataset_csv(out, data);
        std::ofstream(spec) << spec_json(a.cfg, data) << '\n';
        return 0;
    });
    const auto& c = a.cfg;
    m.config = {{"dims", c.dims},           {"phases", c.phases},
                {"per_phase", c.per_phase}, {"outlier_prob", c.outlier_prob},
                {"max_subspace_dim", c.max_subspace_dim},
                {"delta_min", c.delta_min}, {"delta_max", c.delta_max},
                {"seed", c.seed}};
    std::size_t outliers = 0;
    for (const auto& o : data.observations) outliers += o.label.value_or(false);
    m.outputs = {{"dataset", out.string()}, {"spec", spec.string()}};
    m.results = {{"observations", data.observations.size()}, {"outliers", outliers}};
    m.write(manifest_path(out));
    std::cerr << "generated " << data.observations.size() << " observations (" << outliers
              << " outliers) -> " << out.string() << '\n';
    return kOk;
}

// ---- run ----

struct RunArgs {
    std::string input = "stream.csv";
    std::string out = "snapshots.jsonl";
    std::string label_column = "label";
    std::string policy = "ts";
    EngineConfig cfg;
};

int cmd_run(RunArgs a, const CLI::App& sub) {
    Manifest m;
    m.command = "run";
    m.args = resolved_args(sub);
    const auto mode = parse_policy(a.policy);
    if (!mode) throw ConfigError("unknown policy '" + a.policy + "'");
    a.cfg.policy = *mode;

    const auto csv = m.timings.time("read", [&] { return load_stream(a.input, a.label_column); });
    if (csv.observations.empty()) throw DataError(a.input + " has no observations");
    const std::size_t d = csv.columns.size();
    a.cfg.validate(d);
    if (csv.observations.size() < a.cfg.window_size) {
        throw DataError("input has " + std::to_string(csv.observations.size()) +
                        " observations, shorter than the window of " +
                        std::to_string(a.cfg.window_size));
    }

    const fs::path out(a.out);
    ensure_parent(out);
    std::ofstream file(out, std::ios::binary);
    if (!file) throw DataError("cannot write " + out.string());
    std::uint64_t steps = 0, evaluations = 0;
    const std::uint64_t total = csv.observations.size() - a.cfg.window_size + 1;
    m.timings.time("engine", [&] {
        run(csv.observations, a.cfg, [&](const Snapshot& s) {
            file << snapshot_json_line(s) << '\n';
            evaluations = s.evaluations;
            if (++steps % 1000 == 0 || steps == total) {
                std::cerr << "\rstep " << steps << "/" << total << std::flush;
            }
        });
        return 0;
    });
    std::cerr << '\n';
    file.close();
    if (!file) throw DataError("failed writing " + out.string());

    const auto& c = a.cfg;
    m.config = {{"window", c.window_size},
                {"step", c.step_size},
                {"plays", c.plays},
                {"gamma", c.gamma},
                {"iterations", c.estimator.iterations},
                {"slice_mass", c.estimator.slice_mass},
                {"policy", std::string(to_string(c.policy))},
                {"monitor_every_step", c.monitor_every_step},
                {"seed", c.seed},
                {"estimator_seed", substream(c.seed, "estimator")},
                {"policy_seed", substream(c.seed, "policy")},
                {"threads", c.threads},
                {"label_column", a.label_column}};
    m.inputs = {{"stream", a.input}, {"columns", csv.columns}};
    m.outputs = {{"snapshots", out.string()}};
    m.results = {{"snapshots", steps}, {"evaluations", evaluations}};
    m.write(manifest_path(out));
    return kOk;
}

// ---- detect ----

struct DetectArgs {
    std::string input = "stream.csv";
    std::string snapshots = "snapshots.jsonl";
    std::string out = "scores.csv";
    std::string label_column = "label";
    std::size_t k = 10;
    bool sweep = false;
    bool full_space = false;
    std::size_t eval_every = 100;
    std::size_t threads = 1;
};

int cmd_detect(const DetectArgs& a, const CLI::App& sub) {
    Manifest m;
    m.command = "detect";
    m.args = resolved_args(sub);
    const auto csv = m.timings.time("read", [&] { return load_stream(a.input, a.label_column); });
    std::vector<Snapshot> snaps;
    if (!a.full_space) snaps = m.timings.time("read", [&] { return read_snapshots(a.snapshots); });
    if (csv.observations.empty()) throw DataError(a.input + " has no observations");

    ScoringConfig sc;
    sc.eval_every = a.eval_every;
    sc.threads = a.threads;
    sc.ks = a.sweep ? kDefaultKGrid : std::vector<std::size_t>{a.k};
    if (a.full_space) {
        const std::size_t n = csv.observations.size();
        sc.window_size = std::min<std::size_t>(n, 1000);
        if (sub.count("--window")) sc.window_size = sub.get_option("--window")->as<std::size_t>();
    } else {
        if (snaps.empty()) throw DataError(a.snapshots + " holds no snapshots");
        sc.window_size = static_cast<std::size_t>(snaps.front().t);
        if (snaps.front().subspaces.size() != csv.columns.size()) {
            throw DataError("snapshots cover " + std::to_string(snaps.front().subspaces.size()) +
                            " dimensions but the input has " + std::to_string(csv.columns.size()));
        }
    }

    const auto table = m.timings.time("score", [&] {
        return a.full_space ? score_stream_full_space(csv.observations, sc)
                            : score_stream(csv.observations, snaps, sc);
    });

    std::vector<ScoreRecord> chosen = table.records.front();
    std::size_t chosen_k = table.ks.front();
    if (a.sweep) {
        const auto sweep = best_k_sweep(table);
        chosen = sweep.best_scores;
        chosen_k = sweep.best_k;
        json per_k = json::array();
        for (const auto& r : sweep.per_k) per_k.push_back({{"k", r.k}, {"auc", r.metrics.auc}});
        m.results["per_k"] = per_k;
        std::cerr << "best k = " << chosen_k << '\n';
    }
    m.results["k"] = chosen_k;

    const fs::path out(a.out);
    ensure_parent(out);
    m.timings.time("write", [&] {
        write_scores_csv(out, chosen);
        return 0;
    });
    m.config = {{"k", a.sweep ? json(kDefaultKGrid) : json(a.k)},
                {"k_sweep", a.sweep},
                {"eval_every", a.eval_every},
                {"window", sc.window_size},
                {"full_space", a.full_space},
                {"threads", a.threads},
                {"label_column", a.label_column}};
    m.inputs = {{"stream", a.input}};
    if (!a.full_space) m.inputs["snapshots"] = a.snapshots;
    m.outputs = {{"scores", out.string()}};
    m.write(manifest_path(out));
    return kOk;
}

// ---- evaluate ----

struct EvaluateArgs {
    std::string scores;
    std::string labels;
    std::string label_column = "label";
    std::string monitor_log;
    std::string gold_log;
    std::string out = "metrics.json";
};

json ranking_json(const RankingMetrics& r) {
    json j;
    j["auc"] = r.auc;
    j["ap"] = r.ap;
    for (const auto& pr : r.top) {
        const std::string pct = std::to_string(static_cast<int>(pr.percent));
        j["precision_at_" + pct + "pct"] = pr.precision;
        j["recall_at_" + pct + "pct"] = pr.recall;
    }
    return j;
}

int cmd_evaluate(const EvaluateArgs& a, const CLI::App& sub) {
    Manifest m;
    m.command = "evaluate";
    m.args = resolved_args(sub);
    json metrics;
    std::ostringstream summary;

    if (!a.scores.empty()) {
        auto records = m.timings.time("read", [&] { return read_scores_csv(a.scores); });
        m.inputs["scores"] = a.scores;
        if (!a.labels.empty()) {
            const auto csv = read_csv_stream(a.labels, a.label_column);
            if (csv.observations.size() != records.size()) {
                throw DataError("labels file has " + std::to_string(csv.observations.size()) +
                                " rows but there are " + std::to_string(records.size()) + " scores");
            }
            for (std::size_t i = 0; i < records.size(); ++i) records[i].label = csv.observations[i].label;
            m.inputs["labels"] = a.labels;
        }
        for (const auto& r : records) {
            if (!r.label) throw DataError("ranking metrics need a label for every score");
        }
        const auto r = ranking_metrics(scores_of(records), labels_of(records));
        metrics["ranking"] = ranking_json(r);
        char buf[160];
        std::snprintf(buf, sizeof buf, "AUC %.4f  AP %.4f  P@1%% %.4f  R@1%% %.4f  P@5%% %.4f  R@5%% %.4f",
                      r.auc, r.ap, r.top[0].precision, r.top[0].recall, r.top[2].precision,
                      r.top[2].recall);
        summary << buf;
    }

    if (!a.monitor_log.empty()) {
        const auto log = MonitorLog::from_snapshots(read_snapshots(a.monitor_log));
        m.inputs["monitor_log"] = a.monitor_log;
        const auto q = average_quality(log);
        const auto sr = success_rate(log);
        json mon;
        mon["steps"] = log.steps.size();
        mon["average_quality"] = q.overall;
        mon["update_frequency"] = update_frequency(log);
        mon["attempts"] = sr.attempts;
        mon["successes"] = sr.successes;
        mon["success_per_attempt"] = sr.per_attempt ? json(*sr.per_attempt) : json(nullptr);
        mon["success_per_dim_step"] = sr.per_dim_step ? json(*sr.per_dim_step) : json(nullptr);
        char buf[160];
        std::snprintf(buf, sizeof buf, "%sQ %.4f  U %s", summary.str().empty() ? "" : "  ",
                      q.overall,
                      sr.per_attempt ? std::to_string(*sr.per_attempt).c_str() : "n/a");
        summary << buf;
        if (!a.gold_log.empty()) {
            const auto gold = MonitorLog::from_snapshots(read_snapshots(a.gold_log));
            m.inputs["gold_log"] = a.gold_log;
            const auto rg = regret(log, gold);
            mon["regret_total"] = rg.total;
            mon["regret_per_step"] = rg.per_step;
            std::snprintf(buf, sizeof buf, "  R %.4f", rg.total);
            summary << buf;
        }
        metrics["monitoring"] = mon;
    } else if (!a.gold_log.empty()) {
        throw ConfigError("--gold-log needs --monitor-log");
    }

    if (metrics.is_null()) throw ConfigError("give --scores and/or --monitor-log");
    const fs::path out(a.out);
    ensure_parent(out);
    std::ofstream(out) << metrics.dump(2) << '\n';
    m.config = {{"label_column", a.label_column}};
    m.outputs = {{"metrics", out.string()}};
    m.write(manifest_path(out));
    std::cout << summary.str() << '\n';
    return kOk;
}

struct Cli {
    CLI::App app{"Streaming subspace monitoring and outlier detection"};
    GenerateArgs gen;
    RunArgs run;
    DetectArgs det;
    EvaluateArgs eval;
    std::string replay_manifest;
    CLI::App* generate = nullptr;
    CLI::App* runner = nullptr;
    CLI::App* detect = nullptr;
    CLI::App* evaluate = nullptr;
    CLI::App* replay = nullptr;

    Cli() {
        app.name("sgmrd");
        app.require_subcommand(1);
        app.set_version_flag("--version", SGMRD_VERSION);

        generate = app.add_subcommand("generate", "Write a drifting benchmark stream");
        env(generate->add_option("--dims", gen.cfg.dims, "Dimensions")->capture_default_str(), "DIMS");
        env(generate->add_option("--phases", gen.cfg.phases, "Number of distributions drifted through")
                ->capture_default_str(), "PHASES");
        env(generate->add_option("--per-phase", gen.cfg.per_phase, "Observations per distribution")
                ->capture_default_str(), "PER_PHASE");
        env(generate->add_option("--outlier-prob", gen.cfg.outlier_prob, "Outlier probability per point")
                ->capture_default_str(), "OUTLIER_PROB");
        env(generate->add_option("--max-subspace-dim", gen.cfg.max_subspace_dim)->capture_default_str(),
            "MAX_SUBSPACE_DIM");
        env(generate->add_option("--seed", gen.cfg.seed)->capture_default_str(), "SEED");
        env(generate->add_option("--out", gen.out, "Dataset CSV; spec JSON and manifest go beside it")
                ->capture_default_str(), "OUT");

        runner = app.add_subcommand("run", "Stream a CSV through the monitoring engine");
        env(runner->add_option("--input", run.input)->capture_default_str(), "INPUT");
        env(runner->add_option("--label-column", run.label_column, "Excluded from the dimensions if present")
                ->capture_default_str(), "LABEL_COLUMN");
        env(runner->add_option("--window", run.cfg.window_size)->capture_default_str(), "WINDOW");
        env(runner->add_option("--step", run.cfg.step_size, "Update every v-th observation")
                ->capture_default_str(), "STEP");
        env(runner->add_option("--plays", run.cfg.plays, "Dimensions re-searched per update")
                ->capture_default_str(), "PLAYS");
        env(runner->add_option("--gamma", run.cfg.gamma)->capture_default_str(), "GAMMA");
        env(runner->add_option("--iterations", run.cfg.estimator.iterations, "Monte-Carlo iterations")
                ->capture_default_str(), "ITERATIONS");
        env(runner->add_option("--slice-mass", run.cfg.estimator.slice_mass)->capture_default_str(),
            "SLICE_MASS");
        env(runner->add_option("--policy", run.policy)
                ->check(CLI::IsMember({"ts", "rd", "gd", "batch", "init", "gold"}))
                ->capture_default_str(), "POLICY");
        env(runner->add_option("--seed", run.cfg.seed)->capture_default_str(), "SEED");
        env(runner->add_option("--threads", run.cfg.threads)->capture_default_str(), "THREADS");
        env(runner->add_option("--out", run.out, "JSON-lines snapshots")->capture_default_str(), "OUT");

        detect = app.add_subcommand("detect", "Score a stream with the subspace LOF ensemble");
        env(detect->add_option("--input", det.input)->capture_default_str(), "INPUT");
        env(detect->add_option("--label-column", det.label_column)->capture_default_str(), "LABEL_COLUMN");
        env(detect->add_option("--snapshots", det.snapshots)->capture_default_str(), "SNAPSHOTS");
        auto* k = detect->add_option("--k", det.k, "LOF neighbourhood size")->capture_default_str();
        env(k, "K");
        auto* sweep = detect->add_flag("--k-sweep", det.sweep, "Try k in {1,2,5,10,20,50,100}, keep the best AUC");
        env(sweep, "K_SWEEP");
        k->excludes(sweep);
        env(detect->add_option("--eval-every", det.eval_every)->capture_default_str(), "EVAL_EVERY");
        auto* full = detect->add_flag("--full-space", det.full_space, "Baseline: LOF on all dimensions");
        env(full, "FULL_SPACE");
        detect->add_option("--window", "Window for --full-space (default min(n, 1000))")
            ->type_name("UINT")
            ->needs(full);
        env(detect->add_option("--threads", det.threads)->capture_default_str(), "THREADS");
        env(detect->add_option("--out", det.out, "Score CSV")->capture_default_str(), "OUT");

        evaluate = app.add_subcommand("evaluate", "Compute ranking and monitoring metrics");
        env(evaluate->add_option("--scores", eval.scores, "Score CSV"), "SCORES");
        env(evaluate->add_option("--labels", eval.labels, "CSV with a label column aligned to the scores"),
            "LABELS");
        env(evaluate->add_option("--label-column", eval.label_column)->capture_default_str(), "LABEL_COLUMN");
        env(evaluate->add_option("--monitor-log", eval.monitor_log, "Snapshots of the evaluated run"),
            "MONITOR_LOG");
        env(evaluate->add_option("--gold-log", eval.gold_log, "Snapshots of a gold run, for regret"),
            "GOLD_LOG");
        env(evaluate->add_option("--out", eval.out, "Metrics JSON")->capture_default_str(), "OUT");

        replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
        replay->add_option("manifest", replay_manifest)->required()->check(CLI::ExistingFile);
    }

    int dispatch() {
        if (generate->parsed()) return cmd_generate(gen, *generate);
        if (runner->parsed()) return cmd_run(run, *runner);
        if (detect->parsed()) return cmd_detect(det, *detect);
        if (evaluate->parsed()) return cmd_evaluate(eval, *evaluate);
        return kInternal;
    }
};

int execute(std::vector<std::string> args);

int run_replay(const std::string& path) {
    json j;
    try {
        j = json::parse(std::ifstream(path));
    } catch (const json::exception& e) {
        throw DataError("cannot parse manifest " + path + ": " + e.what());
    }
    if (!j.contains("args") || !j["args"].is_array()) throw DataError(path + " has no args");
    return execute(j["args"].get<std::vector<std::string>>());
}

int execute(std::vector<std::string> args) {
    Cli cli;
    try {
        // CLI11 takes arguments in reverse order
        std::reverse(args.begin(), args.end());
        cli.app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = cli.app.exit(e);
        return code == 0 ? kOk : kUsage;
    }
    if (cli.replay->parsed()) return run_replay(cli.replay_manifest);
    return cli.dispatch();
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        return execute(args);
    } catch (const ConfigError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const ShapeError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const IndexError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kInternal;
    }
}
