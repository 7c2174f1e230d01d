#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <exception>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "simlearn/agent.hpp"
#include "simlearn/box_tutor.hpp"
#include "simlearn/error.hpp"
#include "simlearn/fraction_tutor.hpp"
#include "simlearn/problem_io.hpp"
#include "simlearn/tutor.hpp"

namespace simlearn {

enum class Study { fractions, box_arrows };

inline std::string_view study_name(Study s) { return s == Study::fractions ? "fractions" : "box-arrows"; }

inline std::optional<Study> parse_study(std::string_view s) {
    if (s == "fractions") return Study::fractions;
    if (s == "box-arrows" || s == "box_arrows") return Study::box_arrows;
    return std::nullopt;
}

enum class Phase { pretrain, tutor, posttest };

inline std::string_view phase_name(Phase p) {
    switch (p) {
        case Phase::pretrain:
            return "pretrain";
        case Phase::tutor:
            return "tutor";
        case Phase::posttest:
            return "posttest";
    }
    return "?";
}

inline std::optional<Phase> parse_phase(std::string_view s) {
    if (s == "pretrain") return Phase::pretrain;
    if (s == "tutor") return Phase::tutor;
    if (s == "posttest") return Phase::posttest;
    return std::nullopt;
}

struct FractionCurriculum {
    int add_same = 10;
    int add_diff = 14;
    int multiply = 24;
    int post_add_same = 2;
    int post_add_diff = 2;
    int post_multiply = 4;

    int training_total() const { return add_same + add_diff + multiply; }
    int posttest_total() const { return post_add_same + post_add_diff + post_multiply; }
};

struct BoxCurriculum {
    int easy = 16;
    int hard = 16;
    int pretrain_easy = 16;
};

struct ExperimentConfig {
    Study study = Study::fractions;
    int n_agents = 78;
    int replications = 10;
    std::uint64_t seed = 0;
    int jobs = 1;
    FractionCurriculum fractions;
    BoxCurriculum box;
    bool pretrain_arm = true;  // box-arrows: half the agents see easy problems first
    bool hard_only = true;     // box-arrows analysis scope
    InductionConfig induction;
    StepSelection selection = StepSelection::canonical;
    BoxLayout box_layout = BoxLayout::mixed;

    static ExperimentConfig defaults(Study s) {
        ExperimentConfig c;
        c.study = s;
        c.n_agents = s == Study::fractions ? 78 : 202;
        return c;
    }

    void validate() const {
        if (n_agents <= 0) throw ConfigError("agents must be positive");
        if (replications <= 0) throw ConfigError("replications must be positive");
        if (jobs <= 0) throw ConfigError("jobs must be positive");
        if (induction.max_depth < 0 || induction.max_depth > 3) throw ConfigError("max_depth must be in [0, 3]");
        const auto& f = fractions;
        if (study == Study::fractions) {
            if (f.add_same != 10 || f.add_diff != 14 || f.multiply != 24)
                throw ConfigError("fractions curriculum must be 10 add_same + 14 add_diff + 24 multiply");
            if (f.post_multiply != 4 || f.post_add_same != 2 || f.post_add_diff != 2)
                throw ConfigError("fractions posttest must be 4 multiply + 2 add_same + 2 add_diff");
        } else {
            if (box.easy != 16 || box.hard != 16)
                throw ConfigError("box-arrows curriculum must be 16 easy + 16 hard");
            if (box.pretrain_easy < 0) throw ConfigError("pretrain_easy must be non-negative");
        }
    }

    nlohmann::json to_json() const {
        return {{"study", std::string(study_name(study))},
                {"agents", n_agents},
                {"replications", replications},
                {"seed", seed},
                {"jobs", jobs},
                {"pretrain", pretrain_arm},
                {"hard_only", hard_only},
                {"max_depth", induction.max_depth},
                {"constant_fallback", induction.constant_fallback},
                {"policy", induction.policy == ConditionPolicy::discriminative ? "discriminative" : "most_specific"},
                {"selection", selection == StepSelection::canonical ? "canonical" : "free"},
                {"box_layout", std::string(layout_name(box_layout))}};
    }

    // Applies the keys present in j on top of the defaults for its study.
    static ExperimentConfig from_json(const nlohmann::json& j) {
        try {
            auto study = parse_study(j.at("study").get<std::string>());
            if (!study) throw ConfigError("unknown study " + j.at("study").dump());
            ExperimentConfig c = defaults(*study);
            c.n_agents = j.value("agents", c.n_agents);
            c.replications = j.value("replications", c.replications);
            c.seed = j.value("seed", c.seed);
            c.jobs = j.value("jobs", c.jobs);
            c.pretrain_arm = j.value("pretrain", c.pretrain_arm);
            c.hard_only = j.value("hard_only", c.hard_only);
            c.induction.max_depth = j.value("max_depth", c.induction.max_depth);
            c.induction.constant_fallback = j.value("constant_fallback", c.induction.constant_fallback);
            const std::string policy = j.value("policy", std::string("discriminative"));
            if (policy == "discriminative")
                c.induction.policy = ConditionPolicy::discriminative;
            else if (policy == "most_specific")
                c.induction.policy = ConditionPolicy::most_specific;
            else
                throw ConfigError("unknown policy " + policy);
            const std::string selection = j.value("selection", std::string("canonical"));
            if (selection == "canonical")
                c.selection = StepSelection::canonical;
            else if (selection == "free")
                c.selection = StepSelection::free;
            else
                throw ConfigError("unknown selection " + selection);
            const auto layout = parse_layout(j.value("box_layout", std::string("mixed")));
            if (!layout) throw ConfigError("unknown box_layout " + j.at("box_layout").dump());
            c.box_layout = *layout;
            return c;
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }
    }
};

// Independent stream per (seed, agent).
inline std::mt19937_64 agent_rng(std::uint64_t seed, int agent_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(agent_id), 0x5eedu};
    return std::mt19937_64(seq);
}

enum class FractionCondition { blocked, interleaved };

inline std::string_view condition_name(FractionCondition c) {
    return c == FractionCondition::blocked ? "blocked" : "interleaved";
}

// Training sequence: blocked runs add_same, add_diff, multiply as contiguous
// blocks (shuffled within each); interleaved shuffles all problems.
template <class Rng>
std::vector<ProblemScript> sequence_fractions(FractionCondition condition, Rng& rng,
                                              const FractionCurriculum& cur = {}) {
    std::vector<ProblemScript> out;
    auto block = [&](ProblemType t, int n) {
        std::vector<ProblemScript> b;
        for (int i = 0; i < n; ++i) b.push_back(gen_fraction_problem(t, rng));
        return b;
    };
    std::vector<std::vector<ProblemScript>> blocks{block(ProblemType::add_same, cur.add_same),
                                                   block(ProblemType::add_diff, cur.add_diff),
                                                   block(ProblemType::multiply, cur.multiply)};
    if (condition == FractionCondition::blocked) {
        for (auto& b : blocks) {
            std::shuffle(b.begin(), b.end(), rng);
            out.insert(out.end(), b.begin(), b.end());
        }
    } else {
        for (auto& b : blocks) out.insert(out.end(), b.begin(), b.end());
        std::shuffle(out.begin(), out.end(), rng);
    }
    return out;
}

struct PlannedProblem {
    Phase phase = Phase::tutor;
    ProblemScript script;
};

// Everything one agent will see, decided before any simulation runs.
struct AgentPlan {
    int replication = 0;
    int agent_id = 0;
    std::string condition;
    bool pretrain = false;
    std::vector<PlannedProblem> problems;
};

inline std::string make_problem_id(int rep, int agent, Phase phase, int position) {
    char buf[48];
    const char tag = phase == Phase::tutor ? 'T' : (phase == Phase::posttest ? 'P' : 'E');
    std::snprintf(buf, sizeof buf, "r%d-a%d-%c%02d", rep, agent, tag, position);
    return buf;
}

inline AgentPlan plan_fraction_agent(const ExperimentConfig& cfg, int rep, int agent) {
    auto rng = agent_rng(cfg.seed + static_cast<std::uint64_t>(rep), agent);
    const auto cond = agent % 2 == 0 ? FractionCondition::blocked : FractionCondition::interleaved;
    AgentPlan plan{rep, agent, std::string(condition_name(cond)), false, {}};
    auto training = sequence_fractions(cond, rng, cfg.fractions);
    std::vector<ProblemScript> post;
    for (int i = 0; i < cfg.fractions.post_multiply; ++i) post.push_back(gen_fraction_problem(ProblemType::multiply, rng));
    for (int i = 0; i < cfg.fractions.post_add_same; ++i) post.push_back(gen_fraction_problem(ProblemType::add_same, rng));
    for (int i = 0; i < cfg.fractions.post_add_diff; ++i) post.push_back(gen_fraction_problem(ProblemType::add_diff, rng));
    std::shuffle(post.begin(), post.end(), rng);
    int pos = 0;
    for (auto& p : training) {
        p.problem_id = make_problem_id(rep, agent, Phase::tutor, ++pos);
        p.tags = {plan.condition};
        plan.problems.push_back({Phase::tutor, std::move(p)});
    }
    pos = 0;
    for (auto& p : post) {
        p.problem_id = make_problem_id(rep, agent, Phase::posttest, ++pos);
        p.tags = {plan.condition};
        plan.problems.push_back({Phase::posttest, std::move(p)});
    }
    return plan;
}

// Box-arrows arms are crossed 2x2: constraint alternates with agent id,
// pretraining with agent id / 2.
inline AgentPlan plan_box_agent(const ExperimentConfig& cfg, int rep, int agent) {
    auto rng = agent_rng(cfg.seed + static_cast<std::uint64_t>(rep), agent);
    const auto constraint = agent % 2 == 0 ? BoxConstraint::constrained : BoxConstraint::unconstrained;
    const bool pretrain = cfg.pretrain_arm && (agent / 2) % 2 == 1;
    AgentPlan plan{rep, agent, std::string(constraint_name(constraint)), pretrain, {}};
    if (pretrain) {
        for (int i = 0; i < cfg.box.pretrain_easy; ++i) {
            auto p = gen_box_problem(BoxDifficulty::easy, constraint, rng, make_problem_id(rep, agent, Phase::pretrain, i + 1));
            plan.problems.push_back({Phase::pretrain, std::move(p)});
        }
    }
    std::vector<ProblemScript> seq;
    for (int i = 0; i < cfg.box.easy; ++i) seq.push_back(gen_box_problem(BoxDifficulty::easy, constraint, rng));
    for (int i = 0; i < cfg.box.hard; ++i) seq.push_back(gen_box_problem(BoxDifficulty::hard, constraint, rng, {}, cfg.box_layout));
    std::shuffle(seq.begin(), seq.end(), rng);
    int pos = 0;
    for (auto& p : seq) {
        p.problem_id = make_problem_id(rep, agent, Phase::tutor, ++pos);
        plan.problems.push_back({Phase::tutor, std::move(p)});
    }
    return plan;
}

inline std::vector<AgentPlan> plan_study(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<AgentPlan> plans;
    for (int rep = 0; rep < cfg.replications; ++rep)
        for (int a = 0; a < cfg.n_agents; ++a)
            plans.push_back(cfg.study == Study::fractions ? plan_fraction_agent(cfg, rep, a) : plan_box_agent(cfg, rep, a));
    return plans;
}

struct TrialRecord {
    int agent_id = 0;
    int replication = 0;
    std::string condition;
    Phase phase = Phase::tutor;
    std::string problem_id;
    ProblemType problem_type = ProblemType::add_same;
    int opportunity = 0;
    Role step_id = Role::done;
    StepOutcome outcome = StepOutcome::hint;
    bool problem_correct = false;
    int position = 0;  // 1-based within (agent, phase); not a CSV column
};

using TransactionLog = std::vector<TrialRecord>;

inline constexpr std::string_view kLogHeader =
    "agent_id,replication,condition,phase,problem_id,problem_type,opportunity,step_id,outcome,problem_correct";

// Runs one planned agent from an empty skill store.
inline TransactionLog run_agent(const AgentPlan& plan, const AgentConfig& agent_cfg) {
    Agent agent(agent_cfg);
    TransactionLog log;
    std::map<ProblemType, int> opportunity;
    std::map<Phase, int> position;
    for (const auto& planned : plan.problems) {
        const SessionMode mode = planned.phase == Phase::posttest ? SessionMode::posttest : SessionMode::training;
        TutorSession session(planned.script, mode);
        const ProblemResult result = agent.run_problem(session);
        if (planned.phase == Phase::pretrain) continue;
        const int opp = opportunity[planned.script.type]++;
        const int pos = ++position[planned.phase];
        for (const auto& step : result.steps) {
            log.push_back(TrialRecord{plan.agent_id, plan.replication, plan.condition, planned.phase,
                                      planned.script.problem_id, planned.script.type, opp, step.step, step.outcome,
                                      result.correct, pos});
        }
    }
    return log;
}

// Simulates every plan. Output order is (replication, agent, phase, problem)
// whatever the number of worker threads.
inline TransactionLog run_plans(const std::vector<AgentPlan>& plans, const ExperimentConfig& cfg) {
    AgentConfig agent_cfg;
    agent_cfg.induction = cfg.induction;
    agent_cfg.selection = cfg.selection;
    std::vector<TransactionLog> parts(plans.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= plans.size()) return;
            try {
                parts[i] = run_agent(plans[i], agent_cfg);
            } catch (...) {
                std::lock_guard lock(failure_mu);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    const int n = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(plans.size())));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<std::size_t> order(plans.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::pair(plans[a].replication, plans[a].agent_id) < std::pair(plans[b].replication, plans[b].agent_id);
    });
    TransactionLog log;
    for (std::size_t i : order) log.insert(log.end(), parts[i].begin(), parts[i].end());
    return log;
}

inline TransactionLog run_study(const ExperimentConfig& cfg) { return run_plans(plan_study(cfg), cfg); }

// ---- problem-set files (one JSON object per line) ----

inline void write_problem_set(std::ostream& os, const std::vector<AgentPlan>& plans) {
    for (const auto& plan : plans) {
        std::map<Phase, int> position;
        for (const auto& p : plan.problems) {
            auto j = problem_to_json(p.script);
            j["replication"] = plan.replication;
            j["agent_id"] = plan.agent_id;
            j["condition"] = plan.condition;
            j["pretrain"] = plan.pretrain;
            j["phase"] = std::string(phase_name(p.phase));
            j["position"] = ++position[p.phase];
            os << j.dump() << '\n';
        }
    }
}

inline std::vector<AgentPlan> read_problem_set(std::istream& is) {
    std::vector<AgentPlan> plans;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw SchemaError("problem set line " + std::to_string(lineno) + ": " + e.what());
        }
        try {
            const int rep = j.at("replication").get<int>();
            const int agent = j.at("agent_id").get<int>();
            auto phase = parse_phase(j.at("phase").get<std::string>());
            if (!phase) throw SchemaError("problem set line " + std::to_string(lineno) + ": bad phase");
            if (plans.empty() || plans.back().replication != rep || plans.back().agent_id != agent) {
                plans.push_back(AgentPlan{rep, agent, j.at("condition").get<std::string>(),
                                          j.value("pretrain", false), {}});
            }
            plans.back().problems.push_back({*phase, problem_from_json(j)});
        } catch (const nlohmann::json::exception& e) {
            throw SchemaError("problem set line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return plans;
}

// ---- transaction CSV ----

inline void write_log_csv(std::ostream& os, const TransactionLog& log) {
    os << kLogHeader << '\n';
    for (const auto& r : log) {
        os << r.agent_id << ',' << r.replication << ',' << r.condition << ',' << phase_name(r.phase) << ','
           << r.problem_id << ',' << type_name(r.problem_type) << ',' << r.opportunity << ',' << role_name(r.step_id)
           << ',' << outcome_name(r.outcome) << ',' << (r.problem_correct ? 1 : 0) << '\n';
    }
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

// Parses a transaction CSV and recovers each row's position from the order
// in which problems appear for its (replication, agent, phase).
inline TransactionLog read_log_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw SchemaError("transaction log is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kLogHeader) throw SchemaError("unexpected transaction log header: " + line);

    auto to_int = [](const std::string& s, int lineno) {
        int v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size())
            throw SchemaError("line " + std::to_string(lineno) + ": bad integer '" + s + "'");
        return v;
    };

    TransactionLog log;
    std::map<std::tuple<int, int, Phase>, std::pair<std::string, int>> last;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != 10)
            throw SchemaError("line " + std::to_string(lineno) + ": expected 10 columns, got " +
                              std::to_string(cells.size()));
        TrialRecord r;
        r.agent_id = to_int(cells[0], lineno);
        r.replication = to_int(cells[1], lineno);
        r.condition = cells[2];
        auto phase = parse_phase(cells[3]);
        auto type = parse_problem_type(cells[5]);
        auto step = parse_role(cells[7]);
        if (!phase || *phase == Phase::pretrain) throw SchemaError("line " + std::to_string(lineno) + ": bad phase");
        if (!type) throw SchemaError("line " + std::to_string(lineno) + ": bad problem_type");
        if (!step) throw SchemaError("line " + std::to_string(lineno) + ": bad step_id");
        if (r.condition.empty()) throw SchemaError("line " + std::to_string(lineno) + ": empty condition");
        r.phase = *phase;
        r.problem_id = cells[4];
        r.problem_type = *type;
        r.opportunity = to_int(cells[6], lineno);
        r.step_id = *step;
        if (cells[8] == "CORRECT")
            r.outcome = StepOutcome::correct;
        else if (cells[8] == "ERROR")
            r.outcome = StepOutcome::error;
        else if (cells[8] == "HINT")
            r.outcome = StepOutcome::hint;
        else
            throw SchemaError("line " + std::to_string(lineno) + ": bad outcome '" + cells[8] + "'");
        if (cells[9] != "0" && cells[9] != "1")
            throw SchemaError("line " + std::to_string(lineno) + ": bad problem_correct");
        r.problem_correct = cells[9] == "1";

        auto& [pid, pos] = last[{r.replication, r.agent_id, r.phase}];
        if (pid != r.problem_id) {
            pid = r.problem_id;
            ++pos;
        }
        r.position = pos;
        log.push_back(std::move(r));
    }
    if (log.empty()) throw SchemaError("transaction log has no rows");
    return log;
}

}  // namespace simlearn
