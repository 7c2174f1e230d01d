#pragma once

#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "simlearn/error.hpp"
#include "simlearn/expression.hpp"
#include "simlearn/tutor.hpp"

namespace simlearn {

enum class BoxDifficulty { easy, hard };
enum class BoxConstraint { constrained, unconstrained };
// Where the box sits in row 2 of a hard problem. `mixed` draws the side per
// problem.
enum class BoxSide { right, left };
enum class BoxLayout { right, left, mixed };

inline std::string_view layout_name(BoxLayout l) {
    switch (l) {
        case BoxLayout::right:
            return "right";
        case BoxLayout::left:
            return "left";
        case BoxLayout::mixed:
            return "mixed";
    }
    return "?";
}

inline std::optional<BoxLayout> parse_layout(std::string_view s) {
    if (s == "right") return BoxLayout::right;
    if (s == "left") return BoxLayout::left;
    if (s == "mixed") return BoxLayout::mixed;
    return std::nullopt;
}

inline std::string_view constraint_name(BoxConstraint c) {
    return c == BoxConstraint::constrained ? "constrained" : "unconstrained";
}

inline constexpr int kBoxOperandMin = 1;
inline constexpr int kBoxOperandMax = 30;
inline constexpr int kBoxMaxDraws = 10'000;

inline const std::array<std::string, 4> kBoxOps{"+", "-", "x", "/"};

inline std::optional<Rational> apply_symbol(const std::string& sym, const Rational& a, const Rational& b) {
    if (sym == "+") return checked_add(a, b);
    if (sym == "-") return checked_sub(a, b);
    if (sym == "x") return checked_mul(a, b);
    if (sym == "/") return checked_div(a, b);
    return std::nullopt;
}

struct NumberedField {
    Role role;
    Rational value;
};

// Depth-1 procedures (one operator over two distinct visible numbers) whose
// result equals `answer`, as normalized s-expressions. Commutative operators
// are counted once per pair.
inline std::vector<std::string> matching_candidates(const std::vector<NumberedField>& numbers,
                                                    const Rational& answer) {
    std::vector<std::string> out;
    for (Op op : kOps) {
        for (std::size_t i = 0; i < numbers.size(); ++i) {
            for (std::size_t j = 0; j < numbers.size(); ++j) {
                if (i == j || (is_commutative(op) && j < i)) continue;
                auto v = apply_op(op, numbers[i].value, numbers[j].value);
                if (v && *v == answer)
                    out.push_back(Expr::binary(op, Expr::field(numbers[i].role), Expr::field(numbers[j].role))
                                      .normalized());
            }
        }
    }
    return out;
}

inline std::vector<NumberedField> visible_numbers(const ProblemScript& p) {
    std::vector<NumberedField> out;
    for (const auto& [role, tok] : p.givens)
        if (field_kind(role) == FieldKind::number)
            if (auto v = tok.numeric()) out.push_back({role, *v});
    return out;
}

inline std::size_t candidate_ambiguity(const ProblemScript& p) {
    auto box = p.answer(Role::box);
    if (!box) return 0;
    return matching_candidates(visible_numbers(p), *box).size();
}

// Value of the easy rule (evaluate row 1) on any box problem.
inline std::optional<Rational> easy_rule_value(const ProblemScript& p) {
    const Token* a = p.given(Role::row1_left);
    const Token* op = p.given(Role::row1_op);
    const Token* b = p.given(Role::row1_right);
    if (!a || !op || !b) return std::nullopt;
    return apply_symbol(op->text(), *a->numeric(), *b->numeric());
}

inline ProblemScript make_box_easy(int a, const std::string& op, int b, std::string problem_id = {}) {
    auto v = apply_symbol(op, Rational(a), Rational(b));
    if (!v || !v->is_integer() || v->num() <= 0) throw ConfigError("easy box problem needs a positive whole answer");
    ProblemScript p;
    p.problem_id = std::move(problem_id);
    p.type = ProblemType::box_easy;
    p.givens = {{Role::row1_left, Token(Rational(a))}, {Role::row1_op, Token(op)}, {Role::row1_right, Token(Rational(b))}};
    p.steps = {CanonicalStep{Role::box, ActionKind::input_value, *v},
               CanonicalStep{Role::done, ActionKind::press_done, std::nullopt}};
    p.tags = {"easy"};
    return p;
}

// Hard layout: row 1 shows `a op1 b`; row 2 shows `given op2 [box]` (or
// `[box] op2 given` on the left side), and the arrow target shows the value
// row 2 must equal.
inline ProblemScript make_box_hard(int a, const std::string& op1, int b, int given, const std::string& op2, int x,
                                   std::string problem_id = {}, BoxSide side = BoxSide::right) {
    auto t = side == BoxSide::right ? apply_symbol(op2, Rational(given), Rational(x))
                                    : apply_symbol(op2, Rational(x), Rational(given));
    if (!t || !t->is_integer() || t->num() <= 0) throw ConfigError("hard box problem needs a positive whole target");
    ProblemScript p;
    p.problem_id = std::move(problem_id);
    p.type = ProblemType::box_hard;
    const Role given_role = side == BoxSide::right ? Role::row2_left : Role::row2_right;
    p.givens = {{Role::row1_left, Token(Rational(a))},  {Role::row1_op, Token(op1)},
                {Role::row1_right, Token(Rational(b))}, {given_role, Token(Rational(given))},
                {Role::row2_op, Token(op2)},            {Role::arrow_target, Token(*t)}};
    p.steps = {CanonicalStep{Role::box, ActionKind::input_value, Rational(x)},
               CanonicalStep{Role::done, ActionKind::press_done, std::nullopt}};
    p.tags = {"hard"};
    return p;
}

// Item-design rule for hard problems.
//   constrained:   exactly one depth-1 candidate reproduces the answer and
//                  the easy rule gives a non-integer.
//   unconstrained: two or more candidates reproduce the answer and the easy
//                  rule gives a whole number.
// In both, no visible number equals the answer.
inline bool satisfies_constraint(const ProblemScript& p, BoxConstraint c) {
    const auto x = p.answer(Role::box);
    if (!x) return false;
    for (const auto& n : visible_numbers(p))
        if (n.value == *x) return false;
    const auto easy = easy_rule_value(p);
    const std::size_t ambiguity = candidate_ambiguity(p);
    if (c == BoxConstraint::constrained) return ambiguity == 1 && easy && !easy->is_integer();
    return ambiguity >= 2 && easy && easy->is_integer() && easy->num() > 0;
}

template <class Rng>
ProblemScript gen_box_problem(BoxDifficulty difficulty, BoxConstraint constraint, Rng& rng,
                              std::string problem_id = {}, BoxLayout layout = BoxLayout::mixed) {
    std::uniform_int_distribution<int> operand(kBoxOperandMin, kBoxOperandMax);
    std::uniform_int_distribution<std::size_t> pick_op(0, kBoxOps.size() - 1);
    std::bernoulli_distribution pick_side(0.5);

    for (int draw = 0; draw < kBoxMaxDraws; ++draw) {
        const std::string& op1 = kBoxOps[pick_op(rng)];
        const int a = operand(rng);
        const int b = operand(rng);
        if (difficulty == BoxDifficulty::easy) {
            auto v = apply_symbol(op1, Rational(a), Rational(b));
            if (!v || !v->is_integer() || v->num() <= 0) continue;
            auto p = make_box_easy(a, op1, b, problem_id);
            p.tags.emplace_back(constraint_name(constraint));
            return p;
        }
        const std::string& op2 = kBoxOps[pick_op(rng)];
        const int given = operand(rng);
        const int x = operand(rng);
        BoxSide side = layout == BoxLayout::left ? BoxSide::left : BoxSide::right;
        if (layout == BoxLayout::mixed && pick_side(rng)) side = BoxSide::left;
        auto t = side == BoxSide::right ? apply_symbol(op2, Rational(given), Rational(x))
                                        : apply_symbol(op2, Rational(x), Rational(given));
        if (!t || !t->is_integer() || t->num() <= 0) continue;
        auto p = make_box_hard(a, op1, b, given, op2, x, problem_id, side);
        if (!satisfies_constraint(p, constraint)) continue;
        p.tags.emplace_back(constraint_name(constraint));
        return p;
    }
    throw GenerationError("box problem generator: no item satisfied the " + std::string(constraint_name(constraint)) +
                          " rule after " + std::to_string(kBoxMaxDraws) + " draws");
}

}  // namespace simlearn
