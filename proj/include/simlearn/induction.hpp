#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "simlearn/conditions.hpp"
#include "simlearn/error.hpp"
#include "simlearn/expression.hpp"
#include "simlearn/working_memory.hpp"

namespace simlearn {

// A procedure that explains one demonstrated step. Numeric entries carry an
// expression; box-checks and done presses are explained structurally.
struct Explanation {
    ActionKind action = ActionKind::input_value;
    std::optional<Expr> expr;

    static Explanation numeric(Expr e) { return {ActionKind::input_value, std::move(e)}; }
    static Explanation structural(ActionKind a) { return {a, std::nullopt}; }

    int depth() const { return expr ? expr->depth() : 0; }
    bool is_constant() const { return expr && expr->kind() == Expr::Kind::constant; }

    std::vector<Role> leaves() const { return expr ? expr->leaves() : std::vector<Role>{}; }

    std::string sexpr() const {
        if (action == ActionKind::press_done) return "(press-done)";
        if (action == ActionKind::check_box) return "(check-box)";
        return expr->sexpr();
    }

    static std::optional<Explanation> parse(const std::string& text) {
        if (text == "(press-done)") return structural(ActionKind::press_done);
        if (text == "(check-box)") return structural(ActionKind::check_box);
        auto e = Expr::parse(text);
        if (!e) return std::nullopt;
        return numeric(*e);
    }
};

// How skill conditions are seeded and refined.
//  most_specific:  conditions start as the full observed predicate set and
//                  only shrink (drop-literal on positives).
//  discriminative: conditions start as the structural binding predicates;
//                  the full observed set is kept as a pool, shrunk on
//                  positives, and an incorrect firing adds the first pool
//                  predicate that is false in the failing state.
enum class ConditionPolicy { most_specific, discriminative };

struct InductionConfig {
    int max_depth = 2;
    bool constant_fallback = true;
    ConditionPolicy policy = ConditionPolicy::discriminative;
};

struct UtilityStats {
    std::uint32_t successes = 0;
    std::uint32_t attempts = 0;

    // Laplace-smoothed success rate.
    double value() const { return (successes + 1.0) / (attempts + 2.0); }

    void record(bool correct) {
        ++attempts;
        if (correct) ++successes;
    }
};

// Exact comparison of Laplace utilities: <0 if a ranks below b.
inline int compare_utility(const UtilityStats& a, const UtilityStats& b) {
    const std::uint64_t lhs = std::uint64_t(a.successes + 1) * (b.attempts + 2);
    const std::uint64_t rhs = std::uint64_t(b.successes + 1) * (a.attempts + 2);
    return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

struct Skill {
    std::string skill_id;
    Explanation procedure;
    ConditionSet conditions;
    ConditionSet specific;  // predicates true in every positive example so far
    UtilityStats utility;
    Role target_role = Role::done;
};

// True when a should be preferred over b: higher utility, then more
// attempts, then smaller id.
inline bool ranks_before(const Skill& a, const Skill& b) {
    if (int c = compare_utility(a.utility, b.utility); c != 0) return c > 0;
    if (a.utility.attempts != b.utility.attempts) return a.utility.attempts > b.utility.attempts;
    return a.skill_id < b.skill_id;
}

class SkillStore {
public:
    const std::vector<Skill>& skills() const noexcept { return skills_; }
    std::vector<Skill>& skills() noexcept { return skills_; }
    std::size_t size() const noexcept { return skills_.size(); }
    bool empty() const noexcept { return skills_.empty(); }

    Skill* find(const std::string& id) {
        for (auto& s : skills_)
            if (s.skill_id == id) return &s;
        return nullptr;
    }
    const Skill* find(const std::string& id) const {
        for (const auto& s : skills_)
            if (s.skill_id == id) return &s;
        return nullptr;
    }

    // Assigns a fresh id and stores the skill.
    Skill& insert(Skill skill) {
        ++counter_;
        char buf[16];
        std::snprintf(buf, sizeof buf, "s%04u", counter_);
        skill.skill_id = buf;
        skills_.push_back(std::move(skill));
        return skills_.back();
    }

    nlohmann::json to_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& s : skills_) {
            arr.push_back({
                {"skill_id", s.skill_id},
                {"target_role", std::string(role_name(s.target_role))},
                {"action", std::string(action_name(s.procedure.action))},
                {"procedure", s.procedure.sexpr()},
                {"conditions", s.conditions.strings()},
                {"specific", s.specific.strings()},
                {"successes", s.utility.successes},
                {"attempts", s.utility.attempts},
            });
        }
        return arr;
    }

    static SkillStore from_json(const nlohmann::json& arr) {
        SkillStore store;
        try {
            for (const auto& j : arr) {
                Skill s;
                s.skill_id = j.at("skill_id").get<std::string>();
                auto role = parse_role(j.at("target_role").get<std::string>());
                auto proc = Explanation::parse(j.at("procedure").get<std::string>());
                if (!role || !proc) throw SchemaError("bad skill record " + s.skill_id);
                s.target_role = *role;
                s.procedure = *proc;
                s.conditions = parse_conditions(j.at("conditions"));
                s.specific = parse_conditions(j.value("specific", nlohmann::json::array()));
                s.utility.successes = j.at("successes").get<std::uint32_t>();
                s.utility.attempts = j.at("attempts").get<std::uint32_t>();
                if (s.utility.successes > s.utility.attempts)
                    throw SchemaError("skill " + s.skill_id + " has successes > attempts");
                store.skills_.push_back(std::move(s));
            }
        } catch (const nlohmann::json::exception& e) {
            throw SchemaError(std::string("skill store: ") + e.what());
        }
        store.counter_ = static_cast<std::uint32_t>(store.skills_.size());
        return store;
    }

private:
    std::vector<Skill> skills_;
    std::uint32_t counter_ = 0;

    static ConditionSet parse_conditions(const nlohmann::json& arr) {
        std::set<Predicate> preds;
        for (const auto& p : arr) {
            auto pred = Predicate::parse(p.get<std::string>());
            if (!pred) throw SchemaError("unknown predicate " + p.get<std::string>());
            preds.insert(*pred);
        }
        return ConditionSet(std::move(preds));
    }
};

namespace detail {

struct Candidate {
    Expr expr;
    Rational value;
    std::uint32_t mask;  // bit i set when field i of the leaf list is used
};

}  // namespace detail

// Explains a demonstrated step. For numeric input, enumerates expression
// trees over the visible numeric fields by iterative deepening and returns
// every tree at the shallowest depth that reproduces the input. Each field
// is used at most once per tree; commutative operators take operands in
// leaf order only. Order: depth, then operator (add, subtract, multiply,
// divide), then leftmost operands.
inline std::vector<Explanation> explain(const WorkingMemory& wm, const SAI& demo,
                                        const InductionConfig& cfg = {}) {
    if (demo.action() != ActionKind::input_value) return {Explanation::structural(demo.action())};

    const auto target = demo.input() ? demo.input()->numeric() : std::nullopt;
    if (!target) return {};

    std::vector<detail::Candidate> leaves;
    for (const Field& f : wm.fields()) {
        if (field_kind(f.state.role) != FieldKind::number || !f.state.value) continue;
        auto v = f.state.value->numeric();
        if (!v) continue;
        if (leaves.size() >= 32) break;
        leaves.push_back({Expr::field(f.state.role), *v, std::uint32_t(1) << leaves.size()});
    }

    std::vector<Explanation> found;
    for (const auto& c : leaves)
        if (c.value == *target) found.push_back(Explanation::numeric(c.expr));
    if (!found.empty()) return found;

    // Binary trees whose root combines operands from `pool` and has at least
    // one operand of depth `need`. With keep_all=false only the trees that
    // reproduce the target are materialized.
    auto grow = [&](const std::vector<detail::Candidate>& pool, int need, bool keep_all) {
        std::vector<detail::Candidate> out;
        for (Op op : kOps) {
            for (std::size_t i = 0; i < pool.size(); ++i) {
                for (std::size_t j = 0; j < pool.size(); ++j) {
                    if (i == j) continue;
                    if (is_commutative(op) && j < i) continue;
                    const auto& a = pool[i];
                    const auto& b = pool[j];
                    if (a.mask & b.mask) continue;
                    if (std::max(a.expr.depth(), b.expr.depth()) != need) continue;
                    auto v = apply_op(op, a.value, b.value);
                    if (!v) continue;
                    if (!keep_all && *v != *target) continue;
                    out.push_back({Expr::binary(op, a.expr, b.expr), *v, a.mask | b.mask});
                }
            }
        }
        return out;
    };

    std::vector<detail::Candidate> pool = leaves;
    for (int depth = 1; depth <= cfg.max_depth; ++depth) {
        auto level = grow(pool, depth - 1, depth < cfg.max_depth);
        for (const auto& c : level)
            if (c.value == *target) found.push_back(Explanation::numeric(c.expr));
        if (!found.empty()) return found;
        pool.insert(pool.end(), level.begin(), level.end());
    }

    if (cfg.constant_fallback) return {Explanation::numeric(Expr::constant(*target))};
    return {};
}

// Predicates a skill needs just to bind: its operand fields are filled and
// its target is still open.
inline std::set<Predicate> structural_conditions(const Explanation& e, Role target_role) {
    std::set<Predicate> out;
    for (Role r : e.leaves()) out.insert(Predicate::field_filled(r));
    switch (field_kind(target_role)) {
        case FieldKind::number:
        case FieldKind::checkbox:
            out.insert(Predicate::field_empty(target_role));
            break;
        default:
            break;
    }
    return out;
}

// Turns an explanation into a reusable skill by replacing the concrete values
// with role references. The skill is not yet in any store (empty id).
inline Skill generalize(const Explanation& explanation, const WorkingMemory& wm, const std::string& target,
                        const InductionConfig& cfg = {}) {
    const FieldState* t = wm.find(target);
    if (!t) throw InvariantViolation("generalize: target field '" + target + "' not in working memory");
    for (Role r : explanation.leaves()) {
        if (!wm.number(r))
            throw InvariantViolation("generalize: explanation references absent field '" +
                                     std::string(role_name(r)) + "'");
    }
    Skill s;
    s.procedure = explanation;
    s.target_role = t->role;
    s.specific = ConditionSet(observe(wm));
    s.conditions = cfg.policy == ConditionPolicy::most_specific
                       ? s.specific
                       : ConditionSet(structural_conditions(explanation, t->role));
    return s;
}

inline Skill refine_conditions(Skill skill, const std::set<Predicate>& observed, bool correct,
                               const InductionConfig& cfg = {}) {
    if (correct) {
        skill.conditions.retain_satisfied(observed);
        skill.specific.retain_satisfied(observed);
        return skill;
    }
    if (cfg.policy == ConditionPolicy::discriminative) {
        for (const Predicate& p : skill.specific.predicates()) {
            if (!skill.conditions.contains(p) && !observed.contains(p)) {
                skill.conditions.insert(p);
                break;
            }
        }
    }
    return skill;
}

inline Skill refine_conditions(Skill skill, const WorkingMemory& wm, bool correct, const InductionConfig& cfg = {}) {
    return refine_conditions(std::move(skill), observe(wm), correct, cfg);
}

// Value a skill would enter in wm regardless of its conditions, if it can
// bind at all.
inline std::optional<Token> skill_output(const Skill& s, const WorkingMemory& wm) {
    switch (s.procedure.action) {
        case ActionKind::press_done:
            return Token("done");
        case ActionKind::check_box:
            return kChecked;
        case ActionKind::input_value: {
            auto v = s.procedure.expr->evaluate(wm);
            if (!v) return std::nullopt;
            return Token(*v);
        }
    }
    return std::nullopt;
}

inline bool reproduces(const Skill& s, const WorkingMemory& wm, const SAI& demo, Role target_role) {
    if (s.target_role != target_role || s.procedure.action != demo.action()) return false;
    if (demo.action() != ActionKind::input_value) return true;
    auto out = skill_output(s, wm);
    auto want = demo.input()->numeric();
    return out && want && out->numeric() == want;
}

struct InductionResult {
    enum class Kind { credited, created, failed } kind = Kind::failed;
    std::string skill_id;
};

// Learns from a tutor demonstration on `target` (a field id of wm). An
// existing skill that already reproduces the step is credited as a positive
// example; otherwise the first explanation becomes a new skill.
inline InductionResult induce_from_demo(const WorkingMemory& wm, const SAI& demo, const std::string& target,
                                        SkillStore& store, const InductionConfig& cfg = {}) {
    const FieldState* t = wm.find(target);
    if (!t) throw InvariantViolation("induce_from_demo: target field '" + target + "' not in working memory");

    Skill* best = nullptr;
    for (auto& s : store.skills()) {
        if (!reproduces(s, wm, demo, t->role)) continue;
        if (!best || ranks_before(s, *best)) best = &s;
    }
    if (best) {
        *best = refine_conditions(std::move(*best), wm, true, cfg);
        best->utility.record(true);
        return {InductionResult::Kind::credited, best->skill_id};
    }

    auto explanations = explain(wm, demo, cfg);
    if (explanations.empty())
        throw InductionFailure("no explanation for demonstrated value on '" + target + "'");
    Skill& s = store.insert(generalize(explanations.front(), wm, target, cfg));
    return {InductionResult::Kind::created, s.skill_id};
}

}  // namespace simlearn
