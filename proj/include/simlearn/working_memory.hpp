#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "simlearn/error.hpp"
#include "simlearn/rational.hpp"

namespace simlearn {

// Semantic role of an interface field. Declaration order is the "leftmost"
// order used when enumerating explanations and when ordering predicates.
enum class Role {
    // fraction arithmetic tutor
    num1,
    den1,
    op,
    num2,
    den2,
    check_convert,
    conv_num1,
    conv_den1,
    conv_num2,
    conv_den2,
    answer_num,
    answer_den,
    // box-and-arrows tutor
    row1_left,
    row1_op,
    row1_right,
    row2_left,
    row2_op,
    row2_right,
    box,
    arrow_target,
    // shared
    done,
};

inline constexpr std::array<std::pair<Role, std::string_view>, 21> kRoleNames{{
    {Role::num1, "num1"},
    {Role::den1, "den1"},
    {Role::op, "op"},
    {Role::num2, "num2"},
    {Role::den2, "den2"},
    {Role::check_convert, "check_convert"},
    {Role::conv_num1, "conv_num1"},
    {Role::conv_den1, "conv_den1"},
    {Role::conv_num2, "conv_num2"},
    {Role::conv_den2, "conv_den2"},
    {Role::answer_num, "answer_num"},
    {Role::answer_den, "answer_den"},
    {Role::row1_left, "row1_left"},
    {Role::row1_op, "row1_op"},
    {Role::row1_right, "row1_right"},
    {Role::row2_left, "row2_left"},
    {Role::row2_op, "row2_op"},
    {Role::row2_right, "row2_right"},
    {Role::box, "box"},
    {Role::arrow_target, "arrow_target"},
    {Role::done, "done"},
}};

inline std::string_view role_name(Role r) {
    for (const auto& [role, name] : kRoleNames)
        if (role == r) return name;
    return "?";
}

inline std::optional<Role> parse_role(std::string_view name) {
    for (const auto& [role, n] : kRoleNames)
        if (n == name) return role;
    return std::nullopt;
}

enum class FieldKind { number, symbol, checkbox, button };

inline FieldKind field_kind(Role r) {
    switch (r) {
        case Role::op:
        case Role::row1_op:
        case Role::row2_op:
            return FieldKind::symbol;
        case Role::check_convert:
            return FieldKind::checkbox;
        case Role::done:
            return FieldKind::button;
        default:
            return FieldKind::number;
    }
}

// A field value: an integer/rational literal or a symbol such as "+", "x",
// "checked".
class Token {
public:
    Token() = default;
    explicit Token(std::string text) : text_(std::move(text)) {}
    explicit Token(const Rational& r) : text_(r.str()) {}

    const std::string& text() const noexcept { return text_; }
    std::optional<Rational> numeric() const { return Rational::parse(text_); }

    friend bool operator==(const Token&, const Token&) = default;

private:
    std::string text_;
};

inline const Token kChecked{"checked"};

struct FieldState {
    std::optional<Token> value;
    Role role = Role::done;
    bool editable = false;

    bool filled() const noexcept { return value.has_value(); }
};

struct Field {
    std::string id;
    FieldState state;
};

// What the agent perceives: every visible field of the tutor, in layout order.
class WorkingMemory {
public:
    WorkingMemory() = default;

    void add(std::string id, FieldState state) {
        if (find(id)) throw MalformedTutorError("duplicate field id '" + id + "'");
        fields_.push_back(Field{std::move(id), std::move(state)});
    }

    std::span<const Field> fields() const noexcept { return fields_; }
    bool empty() const noexcept { return fields_.empty(); }

    const FieldState* find(std::string_view id) const {
        auto it = std::find_if(fields_.begin(), fields_.end(), [&](const Field& f) { return f.id == id; });
        return it == fields_.end() ? nullptr : &it->state;
    }

    const Field* by_role(Role role) const {
        auto it = std::find_if(fields_.begin(), fields_.end(), [&](const Field& f) { return f.state.role == role; });
        return it == fields_.end() ? nullptr : &*it;
    }

    std::optional<Rational> number(Role role) const {
        const Field* f = by_role(role);
        if (!f || !f->state.value) return std::nullopt;
        return f->state.value->numeric();
    }

    std::optional<std::string> symbol(Role role) const {
        const Field* f = by_role(role);
        if (!f || !f->state.value) return std::nullopt;
        return f->state.value->text();
    }

private:
    std::vector<Field> fields_;
};

enum class ActionKind { input_value, press_done, check_box };

inline std::string_view action_name(ActionKind a) {
    switch (a) {
        case ActionKind::input_value:
            return "input_value";
        case ActionKind::press_done:
            return "press_done";
        case ActionKind::check_box:
            return "check_box";
    }
    return "?";
}

// Selection-action-input step. input is present iff action is input_value.
class SAI {
public:
    static SAI input(std::string selection, Token value) {
        return SAI(std::move(selection), ActionKind::input_value, std::move(value));
    }
    static SAI press_done(std::string selection) {
        return SAI(std::move(selection), ActionKind::press_done, std::nullopt);
    }
    static SAI check_box(std::string selection) {
        return SAI(std::move(selection), ActionKind::check_box, std::nullopt);
    }

    const std::string& selection() const noexcept { return selection_; }
    ActionKind action() const noexcept { return action_; }
    const std::optional<Token>& input() const noexcept { return input_; }

    friend bool operator==(const SAI&, const SAI&) = default;

private:
    SAI(std::string selection, ActionKind action, std::optional<Token> input)
        : selection_(std::move(selection)), action_(action), input_(std::move(input)) {}

    std::string selection_;
    ActionKind action_;
    std::optional<Token> input_;
};

}  // namespace simlearn
