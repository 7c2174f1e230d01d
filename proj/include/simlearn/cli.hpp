#pragma once

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "simlearn/analytics.hpp"
#include "simlearn/error.hpp"
#include "simlearn/experiment.hpp"

namespace simlearn::cli {

inline constexpr std::string_view kVersion = "0.3.0";
inline constexpr const char* kOutputRootEnv = "SIMLEARN_OUTPUT_ROOT";

enum Exit : int { ok = 0, usage = 1, failure = 2 };

inline std::filesystem::path output_root() {
    const char* env = std::getenv(kOutputRootEnv);
    return env && *env ? std::filesystem::path(env) : std::filesystem::path("runs");
}

// Flag values; unset ones leave the config untouched.
struct Overrides {
    std::optional<std::string> config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> agents;
    std::optional<int> replications;
    std::optional<int> jobs;
    std::optional<int> max_depth;
    std::optional<std::string> policy;
    std::optional<std::string> selection;
    std::optional<std::string> box_layout;
    std::optional<std::string> interval;
    std::optional<std::string> problems;
    std::optional<std::string> out;
    bool no_pretrain = false;
    bool no_constant_fallback = false;
};

struct Resolved {
    ExperimentConfig cfg;
    IntervalKind interval = IntervalKind::normal;
    std::optional<std::filesystem::path> problems;
    std::optional<std::filesystem::path> out;
    nlohmann::json snapshot;
};

inline const std::set<std::string>& config_keys() {
    static const std::set<std::string> keys{"study",     "agents",          "replications", "seed",
                                            "jobs",      "pretrain",        "hard_only",    "max_depth",
                                            "policy",    "constant_fallback", "selection",  "box_layout",
                                            "interval",  "problems",        "out"};
    return keys;
}

inline nlohmann::json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    try {
        auto j = nlohmann::json::parse(in);
        // a run manifest carries its config under "config"
        if (j.is_object() && j.contains("config") && j.contains("version")) j = j.at("config");
        if (!j.is_object()) throw ConfigError("config " + path.string() + " is not a JSON object");
        return j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
}

// Target is a study name or a config path; flags win over file values.
inline Resolved resolve(const std::string& target, const Overrides& o) {
    nlohmann::json j = nlohmann::json::object();
    if (auto study = parse_study(target)) {
        j["study"] = std::string(study_name(*study));
        if (o.config_path) {
            auto file = load_json_file(*o.config_path);
            if (file.contains("study") && parse_study(file.at("study").get<std::string>()) != study)
                throw ConfigError("config study " + file.at("study").dump() + " conflicts with '" + target + "'");
            file.erase("study");
            j.update(file);
        }
    } else {
        if (o.config_path) throw ConfigError("give either a config path or --config, not both");
        if (!std::filesystem::exists(target)) throw ConfigError("unknown study or missing config: " + target);
        j = load_json_file(target);
        if (!j.contains("study")) throw ConfigError("config " + target + " has no study");
    }
    for (const auto& [key, value] : j.items())
        if (!config_keys().contains(key)) throw ConfigError("unknown config key '" + key + "'");

    if (o.seed) j["seed"] = *o.seed;
    if (o.agents) j["agents"] = *o.agents;
    if (o.replications) j["replications"] = *o.replications;
    if (o.jobs) j["jobs"] = *o.jobs;
    if (o.max_depth) j["max_depth"] = *o.max_depth;
    if (o.policy) j["policy"] = *o.policy;
    if (o.selection) j["selection"] = *o.selection;
    if (o.box_layout) j["box_layout"] = *o.box_layout;
    if (o.interval) j["interval"] = *o.interval;
    if (o.problems) j["problems"] = *o.problems;
    if (o.out) j["out"] = *o.out;
    if (o.no_pretrain) j["pretrain"] = false;
    if (o.no_constant_fallback) j["constant_fallback"] = false;

    Resolved r;
    r.cfg = ExperimentConfig::from_json(j);
    r.cfg.validate();
    try {
        const std::string interval = j.value("interval", std::string("normal"));
        if (interval == "wilson")
            r.interval = IntervalKind::wilson;
        else if (interval != "normal")
            throw ConfigError("unknown interval " + interval);
        if (j.contains("problems")) r.problems = j.at("problems").get<std::string>();
        if (j.contains("out")) r.out = j.at("out").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    r.snapshot = r.cfg.to_json();
    r.snapshot["interval"] = r.interval == IntervalKind::wilson ? "wilson" : "normal";
    if (r.problems) r.snapshot["problems"] = r.problems->string();
    return r;
}

inline std::filesystem::path default_dir(const ExperimentConfig& cfg) {
    return output_root() / (std::string(study_name(cfg.study)) + "-seed" + std::to_string(cfg.seed));
}

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + path.string());
    return f;
}

inline std::vector<AgentPlan> load_plans(const std::filesystem::path& path, const ExperimentConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read problem set " + path.string());
    auto plans = read_problem_set(in);
    if (plans.empty()) throw SchemaError("problem set " + path.string() + " is empty");
    for (const auto& plan : plans)
        for (const auto& p : plan.problems)
            if (is_fraction_type(p.script.type) != (cfg.study == Study::fractions))
                throw ConfigError("problem set " + path.string() + " does not match study " +
                                  std::string(study_name(cfg.study)));
    return plans;
}

struct Model {
    std::string name;
    FormulaSpec formula;
};

inline std::vector<Model> study_models(const TransactionLog& log) {
    if (is_box_log(log)) return {{"hard_with_count", box_formula(true)}, {"hard", box_formula(false)}};
    return {{"tutor", fraction_tutor_formula()}, {"posttest", fraction_posttest_formula()}};
}

// Fits one model and records the result; returns the summary on success.
inline std::optional<RegressionSummary> fit_and_record(const TransactionLog& log, const Model& m,
                                                       const std::string& replication, std::ostream& csv) {
    try {
        auto s = fit_logistic(log, m.formula);
        write_regression_csv_rows(csv, m.name, replication, s);
        return s;
    } catch (const SeparationError& e) {
        write_regression_csv_failure(csv, m.name, replication, e);
    } catch (const DesignError&) {
        write_regression_csv_failure(csv, m.name, replication, "", "design");
    }
    return std::nullopt;
}

inline void write_regressions(const TransactionLog& log, std::ostream& txt, std::ostream& csv) {
    write_regression_csv_header(csv);
    const auto models = study_models(log);
    const auto reps = split_by_replication(log);
    for (const auto& m : models) {
        const std::string term = condition_term(m.formula);
        if (auto s = fit_and_record(log, m, "all", csv)) {
            write_regression_table(txt, m.name + " (pooled)", *s);
        } else {
            txt << m.name << " (pooled): fit failed, see regression.csv\n";
        }
        int lower = 0, higher = 0, failed = 0;
        for (const auto& [rep, part] : reps) {
            auto s = fit_and_record(part, m, std::to_string(rep), csv);
            if (!s) {
                ++failed;
                continue;
            }
            const auto& c = s->at(term);
            if (c.p_value < 0.05) (c.odds_ratio < 1 ? lower : higher) += 1;
        }
        txt << "  per replication, " << term << ": " << lower << " significant OR<1, " << higher
            << " significant OR>1, " << failed << " failed fits, of " << reps.size() << "\n\n";
    }
}

inline int cmd_run(const std::string& target, const Overrides& o, std::ostream& out) {
    const auto t0 = std::chrono::steady_clock::now();
    const Resolved r = resolve(target, o);
    const auto plans = r.problems ? load_plans(*r.problems, r.cfg) : plan_study(r.cfg);
    const TransactionLog log = run_plans(plans, r.cfg);

    const auto dir = r.out ? *r.out : default_dir(r.cfg);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create " + dir.string() + ": " + ec.message());
    const auto transactions = dir / "transactions.csv";
    const auto curves = dir / "curves.csv";
    const auto reg_txt = dir / "regression.txt";
    const auto reg_csv = dir / "regression.csv";
    const auto manifest = dir / "manifest.json";

    {
        auto f = open_output(transactions);
        write_log_csv(f, log);
    }
    {
        CurveOptions opt;
        opt.interval = r.interval;
        if (r.cfg.study == Study::box_arrows && r.cfg.hard_only) {
            opt.only_type = ProblemType::box_hard;
            opt.axis = CurveAxis::opportunity;
        }
        auto f = open_output(curves);
        write_curves_csv(f, learning_curve(log, opt));
    }
    {
        auto txt = open_output(reg_txt);
        auto csv = open_output(reg_csv);
        write_regressions(log, txt, csv);
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    nlohmann::json m{{"tool", "simlearn"},
                     {"version", std::string(kVersion)},
                     {"config", r.snapshot},
                     {"seed", r.cfg.seed},
                     {"transactions", log.size()},
                     {"outputs",
                      {{"transactions", transactions.string()},
                       {"curves", curves.string()},
                       {"regression_table", reg_txt.string()},
                       {"regression_records", reg_csv.string()}}},
                     {"duration_seconds", seconds}};
    {
        auto f = open_output(manifest);
        f << m.dump(2) << '\n';
    }
    out << dir.string() << '\n';
    return ok;
}

inline int cmd_gen_problems(const std::string& target, const Overrides& o, std::ostream& out) {
    const Resolved r = resolve(target, o);
    const auto plans = plan_study(r.cfg);
    if (r.out && r.out->string() == "-") {
        write_problem_set(out, plans);
        return ok;
    }
    const auto path = r.out ? *r.out : default_dir(r.cfg) / "problems.jsonl";
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw ConfigError("cannot create " + path.parent_path().string() + ": " + ec.message());
    }
    auto f = open_output(path);
    write_problem_set(f, plans);
    out << path.string() << '\n';
    return ok;
}

inline void print_direction(std::ostream& out, const std::string& label, const TransactionLog& log,
                            const FormulaSpec& f) {
    char buf[256];
    try {
        const auto s = fit_logistic(log, f);
        const auto& c = s.at(condition_term(f));
        std::snprintf(buf, sizeof buf, "  %-10s %s OR %.3f [%.3f, %.3f] p=%.3g (%s)\n", label.c_str(),
                      c.term.c_str(), c.odds_ratio, c.ci_low, c.ci_high, c.p_value,
                      c.odds_ratio < 1 ? "lower odds of a correct problem" : "higher odds of a correct problem");
        out << buf;
    } catch (const SeparationError& e) {
        out << "  " << label << " separation on " << e.term() << '\n';
    } catch (const DesignError& e) {
        out << "  " << label << " not estimable: " << e.what() << '\n';
    }
}

inline int cmd_report(const std::string& path, std::ostream& out) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot read " + path);
    const TransactionLog log = read_log_csv(in);
    const auto rows = problem_rows(log);
    const bool box = is_box_log(log);

    // (phase, type group, condition) -> (correct, total)
    std::map<std::tuple<Phase, std::string, std::string>, std::pair<int, int>> cells;
    std::set<int> reps;
    for (const auto& r : rows) {
        const std::string group = box ? type_label(r.type) : "all";
        auto& [c, n] = cells[{r.phase, group, r.condition}];
        c += r.correct ? 1 : 0;
        n += 1;
        reps.insert(r.replication);
    }
    out << log.size() << " transactions, " << rows.size() << " problems, " << reps.size() << " replications\n";
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-9s %-6s %-14s %9s %9s\n", "phase", "items", "condition", "problems", "accuracy");
    out << buf;
    for (const auto& [key, counts] : cells) {
        const auto& [phase, group, condition] = key;
        std::snprintf(buf, sizeof buf, "%-9s %-6s %-14s %9d %8.1f%%\n", std::string(phase_name(phase)).c_str(),
                      group.c_str(), condition.c_str(), counts.second, 100.0 * counts.first / counts.second);
        out << buf;
    }
    out << "regression directions\n";
    if (box) {
        print_direction(out, "hard", log, box_formula(false));
    } else {
        print_direction(out, "tutor", log, fraction_tutor_formula());
        print_direction(out, "posttest", log, fraction_posttest_formula());
    }
    return ok;
}

inline void add_run_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config_path, "JSON config or run manifest; flags override it");
    cmd->add_option("--seed", o.seed, "Base seed; replication i uses seed+i");
    cmd->add_option("--agents", o.agents, "Agents per replication");
    cmd->add_option("--replications", o.replications, "Number of replications");
    cmd->add_option("--jobs", o.jobs, "Worker threads");
    cmd->add_option("--max-depth", o.max_depth, "Explanation search depth");
    cmd->add_option("--policy", o.policy, "Condition policy: discriminative or most_specific");
    cmd->add_option("--selection", o.selection, "Step selection: canonical or free");
    cmd->add_option("--box-layout", o.box_layout, "Hard box position: right, left or mixed");
    cmd->add_flag("--no-pretrain", o.no_pretrain, "Disable the box-arrows pretraining arm");
    cmd->add_flag("--no-constant-fallback", o.no_constant_fallback, "Fail induction instead of learning a constant");
}

inline int exit_for(const Error& e) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const SchemaError*>(&e)) return usage;
    return failure;
}

inline int main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Simulated learners in tutoring experiments"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    Overrides run_o, gen_o;
    std::string run_target, gen_target, report_path;

    auto* run = app.add_subcommand("run", "Simulate a study and write its outputs");
    run->add_option("study", run_target, "fractions, box-arrows, or a config path")->required();
    add_run_flags(run, run_o);
    run->add_option("--interval", run_o.interval, "Curve interval: normal or wilson");
    run->add_option("--problems", run_o.problems, "Replay a problem-set file instead of generating");
    run->add_option("--out", run_o.out, "Output directory (default $" + std::string(kOutputRootEnv) + "/<study>-seed<seed>)");

    auto* report = app.add_subcommand("report", "Summarize a transactions CSV");
    report->add_option("log", report_path, "transactions.csv")->required();

    auto* gen = app.add_subcommand("gen-problems", "Write the problem set a run would use");
    gen->add_option("study", gen_target, "fractions, box-arrows, or a config path")->required();
    add_run_flags(gen, gen_o);
    gen->add_option("--out", gen_o.out, "Output file, or - for stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ok : usage;
    }

    try {
        if (run->parsed()) return cmd_run(run_target, run_o, out);
        if (gen->parsed()) return cmd_gen_problems(gen_target, gen_o, out);
        return cmd_report(report_path, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_for(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return failure;
    }
}

}  // namespace simlearn::cli
