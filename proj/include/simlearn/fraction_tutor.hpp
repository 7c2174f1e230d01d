#pragma once

#include <random>
#include <string>

#include "simlearn/error.hpp"
#include "simlearn/tutor.hpp"

namespace simlearn {

inline constexpr int kMinNumerator = 1;
inline constexpr int kMaxNumerator = 9;
inline constexpr int kMinDenominator = 2;
inline constexpr int kMaxDenominator = 12;

inline const std::string kPlus = "+";
inline const std::string kTimes = "x";

// Builds the script for a fraction problem with the given operands. Answers
// are left unsimplified; different-denominator addition must go through the
// cross-multiplication conversion.
inline ProblemScript make_fraction_problem(ProblemType type, int num1, int den1, int num2, int den2,
                                           std::string problem_id = {}) {
    if (!is_fraction_type(type)) throw ConfigError("not a fraction problem type: " + std::string(type_name(type)));
    if (type == ProblemType::add_same && den1 != den2) throw ConfigError("add_same needs equal denominators");
    if (type == ProblemType::add_diff && den1 == den2) throw ConfigError("add_diff needs different denominators");

    ProblemScript p;
    p.problem_id = std::move(problem_id);
    p.type = type;
    const std::string& op = type == ProblemType::multiply ? kTimes : kPlus;
    p.givens = {{Role::num1, Token(Rational(num1))},
                {Role::den1, Token(Rational(den1))},
                {Role::op, Token(op)},
                {Role::num2, Token(Rational(num2))},
                {Role::den2, Token(Rational(den2))}};

    auto input = [](Role r, std::int64_t v) { return CanonicalStep{r, ActionKind::input_value, Rational(v)}; };
    switch (type) {
        case ProblemType::add_same:
            p.steps = {input(Role::answer_num, num1 + num2), input(Role::answer_den, den1)};
            break;
        case ProblemType::add_diff: {
            const int conv_den = den1 * den2;
            const int conv_num1 = num1 * den2;
            const int conv_num2 = num2 * den1;
            p.steps = {CanonicalStep{Role::check_convert, ActionKind::check_box, std::nullopt},
                       input(Role::conv_den1, conv_den),
                       input(Role::conv_den2, conv_den),
                       input(Role::conv_num1, conv_num1),
                       input(Role::conv_num2, conv_num2),
                       input(Role::answer_num, conv_num1 + conv_num2),
                       input(Role::answer_den, conv_den)};
            break;
        }
        case ProblemType::multiply:
            p.steps = {input(Role::answer_num, num1 * num2), input(Role::answer_den, den1 * den2)};
            break;
        default:
            break;
    }
    p.steps.push_back(CanonicalStep{Role::done, ActionKind::press_done, std::nullopt});
    return p;
}

template <class Rng>
ProblemScript gen_fraction_problem(ProblemType type, Rng& rng, std::string problem_id = {}) {
    if (!is_fraction_type(type)) throw ConfigError("not a fraction problem type: " + std::string(type_name(type)));
    std::uniform_int_distribution<int> num(kMinNumerator, kMaxNumerator);
    std::uniform_int_distribution<int> den(kMinDenominator, kMaxDenominator);
    const int n1 = num(rng);
    const int d1 = den(rng);
    const int n2 = num(rng);
    int d2 = den(rng);
    if (type == ProblemType::add_same) d2 = d1;
    while (type == ProblemType::add_diff && d2 == d1) d2 = den(rng);
    return make_fraction_problem(type, n1, d1, n2, d2, std::move(problem_id));
}

}  // namespace simlearn
