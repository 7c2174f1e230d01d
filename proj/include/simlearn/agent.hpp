#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "simlearn/conditions.hpp"
#include "simlearn/error.hpp"
#include "simlearn/induction.hpp"
#include "simlearn/tutor.hpp"
#include "simlearn/working_memory.hpp"

namespace simlearn {

struct Activation {
    std::string skill_id;
    std::map<Role, std::string> binding;
    SAI proposed;
    double utility_value = 0.0;
    UtilityStats stats;
};

struct RequestDemo {};

using Decision = std::variant<Activation, RequestDemo>;

inline bool is_fire(const Decision& d) { return std::holds_alternative<Activation>(d); }

// Every skill whose conditions hold in wm and whose procedure binds to an
// open target field, in store order.
inline std::vector<Activation> match_skills(const WorkingMemory& wm, const SkillStore& store) {
    const auto observed = observe(wm);
    std::vector<Activation> out;
    for (const Skill& s : store.skills()) {
        if (!s.conditions.matches(observed)) continue;
        const Field* target = wm.by_role(s.target_role);
        if (!target || target->state.filled()) continue;
        auto value = skill_output(s, wm);
        if (!value) continue;

        std::map<Role, std::string> binding;
        for (Role r : s.procedure.leaves()) binding[r] = wm.by_role(r)->id;
        std::optional<SAI> sai;
        switch (s.procedure.action) {
            case ActionKind::input_value:
                sai = SAI::input(target->id, *value);
                break;
            case ActionKind::check_box:
                sai = SAI::check_box(target->id);
                break;
            case ActionKind::press_done:
                sai = SAI::press_done(target->id);
                break;
        }
        out.push_back(Activation{s.skill_id, std::move(binding), *sai, s.utility.value(), s.utility});
    }
    return out;
}

// Picks the highest-utility activation (ties: more attempts, then smaller
// skill id), skipping skills listed in `exclude`. When `focus` is set only
// activations selecting that field compete. RequestDemo when nothing matches.
inline Decision decide(const WorkingMemory& wm, const SkillStore& store, const std::set<std::string>& exclude = {},
                       const std::optional<std::string>& focus = std::nullopt) {
    std::optional<Activation> best;
    for (auto& a : match_skills(wm, store)) {
        if (exclude.contains(a.skill_id)) continue;
        if (focus && a.proposed.selection() != *focus) continue;
        if (!best) {
            best = std::move(a);
            continue;
        }
        const int c = compare_utility(a.stats, best->stats);
        const bool better = c > 0 || (c == 0 && (a.stats.attempts > best->stats.attempts ||
                                                  (a.stats.attempts == best->stats.attempts &&
                                                   a.skill_id < best->skill_id)));
        if (better) best = std::move(a);
    }
    if (best) return *best;
    return RequestDemo{};
}

// Credits the outcome to the fired skill and refines its conditions.
inline void apply_feedback(SkillStore& store, const Activation& activation, bool correct, const WorkingMemory& wm,
                           const InductionConfig& cfg = {}) {
    Skill* s = store.find(activation.skill_id);
    if (!s) throw InvariantViolation("feedback for unknown skill '" + activation.skill_id + "'");
    s->utility.record(correct);
    *s = refine_conditions(std::move(*s), wm, correct, cfg);
}

enum class StepOutcome { correct, error, hint };

inline std::string_view outcome_name(StepOutcome o) {
    switch (o) {
        case StepOutcome::correct:
            return "CORRECT";
        case StepOutcome::error:
            return "ERROR";
        case StepOutcome::hint:
            return "HINT";
    }
    return "?";
}

struct StepTransaction {
    Role step = Role::done;
    StepOutcome outcome = StepOutcome::hint;
};

struct ProblemResult {
    std::vector<StepTransaction> steps;
    bool correct = false;
};

// canonical: only skills for the tutor's next step compete.
// free: every matching skill competes; the tutor rejects out-of-order entries.
enum class StepSelection { canonical, free };

struct AgentConfig {
    InductionConfig induction;
    StepSelection selection = StepSelection::canonical;
    // Hard cap on tutor interactions per problem; reaching it is a session
    // error. Training always terminates well below it.
    int max_actions_per_problem = 10'000;
};

// A simulated learner: a skill store plus the perceive-decide-act loop.
class Agent {
public:
    explicit Agent(AgentConfig cfg = {}) : cfg_(cfg) {}

    const SkillStore& skills() const noexcept { return store_; }
    SkillStore& skills() noexcept { return store_; }
    const AgentConfig& config() const noexcept { return cfg_; }
    std::size_t demonstrations() const noexcept { return demonstrations_; }
    std::size_t induction_failures() const noexcept { return induction_failures_; }

    ProblemResult run_problem(TutorSession& session) {
        return session.mode() == SessionMode::training ? train(session) : test(session);
    }

private:
    AgentConfig cfg_;
    SkillStore store_;
    std::size_t demonstrations_ = 0;
    std::size_t induction_failures_ = 0;

    std::optional<std::string> focus(const CanonicalStep& step) const {
        if (cfg_.selection == StepSelection::free) return std::nullopt;
        return TutorSession::field_id(step.role);
    }

    ProblemResult train(TutorSession& session) {
        ProblemResult result;
        int actions = 0;
        while (!session.complete()) {
            const auto step = session.next_step();
            std::set<std::string> tried;
            bool first = true;
            while (true) {
                if (++actions > cfg_.max_actions_per_problem)
                    throw SessionError("problem " + session.script().problem_id + " exceeded the action cap");
                const WorkingMemory wm = session.working_memory();
                const Decision d = decide(wm, store_, tried, focus(*step));
                if (const auto* act = std::get_if<Activation>(&d)) {
                    const Outcome o = session.submit(act->proposed);
                    if (o == Outcome::recorded) throw SessionError("training session returned a posttest outcome");
                    const bool ok = o == Outcome::correct;
                    if (first) result.steps.push_back({step->role, ok ? StepOutcome::correct : StepOutcome::error});
                    first = false;
                    apply_feedback(store_, *act, ok, wm, cfg_.induction);
                    if (ok) break;
                    tried.insert(act->skill_id);
                    continue;
                }
                if (first) result.steps.push_back({step->role, StepOutcome::hint});
                auto [target, sai] = session.demonstrate();
                ++demonstrations_;
                try {
                    induce_from_demo(wm, sai, target, store_, cfg_.induction);
                } catch (const InductionFailure&) {
                    ++induction_failures_;
                }
                break;
            }
        }
        result.correct = std::all_of(result.steps.begin(), result.steps.end(),
                                     [](const StepTransaction& t) { return t.outcome == StepOutcome::correct; });
        return result;
    }

    ProblemResult test(TutorSession& session) {
        ProblemResult result;
        int actions = 0;
        while (!session.complete()) {
            if (++actions > cfg_.max_actions_per_problem)
                throw SessionError("problem " + session.script().problem_id + " exceeded the action cap");
            const auto step = session.next_step();
            const WorkingMemory wm = session.working_memory();
            const Decision d = decide(wm, store_, {}, focus(*step));
            const auto* act = std::get_if<Activation>(&d);
            if (!act) {
                result.steps.push_back({step->role, StepOutcome::hint});
                session.forfeit();
                break;
            }
            session.submit(act->proposed);
            if (session.judged_incorrect()) {
                result.steps.push_back({step->role, StepOutcome::error});
                break;
            }
            result.steps.push_back({step->role, StepOutcome::correct});
        }
        result.correct = !session.judged_incorrect() && session.complete();
        return result;
    }
};

}  // namespace simlearn
