#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "simlearn/error.hpp"
#include "simlearn/rational.hpp"
#include "simlearn/working_memory.hpp"

namespace simlearn {

enum class ProblemType { add_same, add_diff, multiply, box_easy, box_hard };

inline constexpr std::array<std::pair<ProblemType, std::string_view>, 5> kProblemTypeNames{{
    {ProblemType::add_same, "add_same"},
    {ProblemType::add_diff, "add_diff"},
    {ProblemType::multiply, "multiply"},
    {ProblemType::box_easy, "box_easy"},
    {ProblemType::box_hard, "box_hard"},
}};

inline std::string_view type_name(ProblemType t) {
    for (const auto& [type, name] : kProblemTypeNames)
        if (type == t) return name;
    return "?";
}

inline std::optional<ProblemType> parse_problem_type(std::string_view name) {
    for (const auto& [type, n] : kProblemTypeNames)
        if (n == name) return type;
    return std::nullopt;
}

inline bool is_fraction_type(ProblemType t) {
    return t == ProblemType::add_same || t == ProblemType::add_diff || t == ProblemType::multiply;
}

enum class TutorKind { fractions, box_arrows };

inline std::string_view tutor_name(TutorKind k) { return k == TutorKind::fractions ? "fractions" : "box_arrows"; }

// Roles each tutor may put on screen, in layout order.
inline std::vector<Role> tutor_vocabulary(TutorKind k) {
    if (k == TutorKind::fractions) {
        return {Role::num1,      Role::den1,      Role::op,         Role::num2,       Role::den2,
                Role::check_convert, Role::conv_num1, Role::conv_den1, Role::conv_num2, Role::conv_den2,
                Role::answer_num, Role::answer_den, Role::done};
    }
    return {Role::row1_left, Role::row1_op, Role::row1_right, Role::row2_left,   Role::row2_op,
            Role::row2_right, Role::box,    Role::arrow_target, Role::done};
}

inline std::vector<Role> problem_layout(ProblemType t) {
    switch (t) {
        case ProblemType::add_same:
        case ProblemType::add_diff:
        case ProblemType::multiply:
            // conversion fields are always on screen
            return tutor_vocabulary(TutorKind::fractions);
        case ProblemType::box_easy:
            return {Role::row1_left, Role::row1_op, Role::row1_right, Role::box, Role::done};
        case ProblemType::box_hard:
            return {Role::row1_left, Role::row1_op, Role::row1_right, Role::row2_left,
                    Role::row2_op,   Role::box,     Role::arrow_target, Role::done};
    }
    return {};
}

struct CanonicalStep {
    Role role = Role::done;
    ActionKind action = ActionKind::input_value;
    std::optional<Rational> value;  // input_value steps only
};

struct ProblemScript {
    std::string problem_id;
    ProblemType type = ProblemType::add_same;
    std::vector<std::pair<Role, Token>> givens;
    std::vector<CanonicalStep> steps;
    std::vector<std::string> tags;

    TutorKind tutor() const { return is_fraction_type(type) ? TutorKind::fractions : TutorKind::box_arrows; }

    const Token* given(Role r) const {
        for (const auto& [role, tok] : givens)
            if (role == r) return &tok;
        return nullptr;
    }

    std::optional<Rational> answer(Role r) const {
        for (const auto& s : steps)
            if (s.role == r) return s.value;
        return std::nullopt;
    }
};

// Raw tutor state as the interface exposes it, before the agent interprets
// role tokens.
struct RawField {
    std::string id;
    std::string role;
    std::optional<std::string> value;
    bool editable = false;
};

struct TutorSnapshot {
    std::string tutor;
    std::vector<RawField> fields;
};

inline WorkingMemory perceive(const TutorSnapshot& snap) {
    std::optional<TutorKind> kind;
    if (snap.tutor == "fractions") kind = TutorKind::fractions;
    if (snap.tutor == "box_arrows") kind = TutorKind::box_arrows;
    if (!kind) throw MalformedTutorError("unregistered tutor '" + snap.tutor + "'");
    if (snap.fields.empty()) throw MalformedTutorError("empty tutor snapshot");
    const auto vocab = tutor_vocabulary(*kind);
    WorkingMemory wm;
    for (const auto& f : snap.fields) {
        auto role = parse_role(f.role);
        if (!role || std::find(vocab.begin(), vocab.end(), *role) == vocab.end())
            throw MalformedTutorError("unknown role token '" + f.role + "' in " + snap.tutor + " tutor");
        FieldState st;
        st.role = *role;
        st.editable = f.editable;
        if (f.value) st.value = Token(*f.value);
        wm.add(f.id, std::move(st));
    }
    return wm;
}

// Hard box problems put the box on either side of the row-2 operator.
inline std::vector<Role> problem_layout(const ProblemScript& p) {
    if (p.type == ProblemType::box_hard && p.given(Role::row2_right))
        return {Role::row1_left, Role::row1_op,    Role::row1_right,   Role::box,
                Role::row2_op,   Role::row2_right, Role::arrow_target, Role::done};
    return problem_layout(p.type);
}

enum class SessionMode { training, posttest };

enum class Outcome { correct, incorrect, recorded };

// One problem in progress. Training sessions give correctness feedback and
// demonstrations; posttest sessions record silently and judge at the end.
class TutorSession {
public:
    TutorSession(ProblemScript script, SessionMode mode) : script_(std::move(script)), mode_(mode) {
        for (Role r : problem_layout(script_)) {
            Slot slot{r, std::nullopt, false};
            if (const Token* g = script_.given(r)) slot.value = *g;
            slots_.push_back(std::move(slot));
        }
        for (auto& s : slots_) s.editable = !s.value.has_value();
    }

    const ProblemScript& script() const noexcept { return script_; }
    SessionMode mode() const noexcept { return mode_; }
    bool complete() const noexcept { return complete_; }
    // Posttest only: a wrong entry or hint request was seen.
    bool judged_incorrect() const noexcept { return failed_; }

    std::optional<CanonicalStep> next_step() const {
        if (complete_ || next_ >= script_.steps.size()) return std::nullopt;
        return script_.steps[next_];
    }

    static std::string field_id(Role r) { return std::string(role_name(r)); }

    TutorSnapshot snapshot() const {
        TutorSnapshot snap;
        snap.tutor = std::string(tutor_name(script_.tutor()));
        for (const auto& s : slots_) {
            RawField f;
            f.id = field_id(s.role);
            f.role = std::string(role_name(s.role));
            if (s.value) f.value = s.value->text();
            f.editable = s.editable && !s.value.has_value();
            snap.fields.push_back(std::move(f));
        }
        return snap;
    }

    WorkingMemory working_memory() const { return perceive(snapshot()); }

    Outcome submit(const SAI& sai) {
        if (complete_) throw ProtocolError("submit on a finished problem");
        Slot* slot = find(sai.selection());
        if (!slot) throw ProtocolError("no field '" + sai.selection() + "'");
        if (slot->value) throw ProtocolError("field '" + sai.selection() + "' is locked");
        if ((sai.action() == ActionKind::input_value) != sai.input().has_value())
            throw ProtocolError("malformed SAI on '" + sai.selection() + "'");

        const bool ok = is_correct(sai);
        transcript_.emplace_back(sai, ok);
        if (ok) lock_next(sai);

        if (mode_ == SessionMode::posttest) {
            if (!ok) {
                failed_ = true;
                complete_ = true;
            }
            return Outcome::recorded;
        }
        return ok ? Outcome::correct : Outcome::incorrect;
    }

    // Correct SAI for the next canonical step, locked in on return.
    std::pair<std::string, SAI> demonstrate() {
        if (mode_ == SessionMode::posttest) {
            failed_ = true;
            complete_ = true;
            throw ProtocolError("hint requested during posttest");
        }
        auto step = next_step();
        if (!step) throw ProtocolError("demonstrate on a finished problem");
        SAI sai = correct_sai(*step);
        lock_next(sai);
        return {field_id(step->role), sai};
    }

    // Posttest: the hint-request branch ends the problem without a throw.
    void forfeit() {
        failed_ = true;
        complete_ = true;
    }

    const std::vector<std::pair<SAI, bool>>& transcript() const noexcept { return transcript_; }

    static SAI correct_sai(const CanonicalStep& step) {
        const std::string id = field_id(step.role);
        switch (step.action) {
            case ActionKind::press_done:
                return SAI::press_done(id);
            case ActionKind::check_box:
                return SAI::check_box(id);
            case ActionKind::input_value:
                return SAI::input(id, Token(*step.value));
        }
        return SAI::press_done(id);
    }

private:
    struct Slot {
        Role role;
        std::optional<Token> value;
        bool editable;
    };

    ProblemScript script_;
    SessionMode mode_;
    std::vector<Slot> slots_;
    std::size_t next_ = 0;
    bool complete_ = false;
    bool failed_ = false;
    std::vector<std::pair<SAI, bool>> transcript_;

    Slot* find(const std::string& id) {
        for (auto& s : slots_)
            if (field_id(s.role) == id) return &s;
        return nullptr;
    }

    bool is_correct(const SAI& sai) const {
        auto step = next_step();
        if (!step) return false;
        if (sai.selection() != field_id(step->role) || sai.action() != step->action) return false;
        if (step->action != ActionKind::input_value) return true;
        return sai.input()->text() == step->value->str();
    }

    void lock_next(const SAI& sai) {
        const CanonicalStep& step = script_.steps[next_];
        Slot* slot = find(field_id(step.role));
        switch (sai.action()) {
            case ActionKind::input_value:
                slot->value = *sai.input();
                break;
            case ActionKind::check_box:
                slot->value = kChecked;
                break;
            case ActionKind::press_done:
                slot->value = Token("done");
                break;
        }
        ++next_;
        if (next_ >= script_.steps.size()) complete_ = true;
    }
};

}  // namespace simlearn
