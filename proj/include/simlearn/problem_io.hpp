#pragma once

#include <istream>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "simlearn/box_tutor.hpp"
#include "simlearn/error.hpp"
#include "simlearn/fraction_tutor.hpp"
#include "simlearn/tutor.hpp"

namespace simlearn {

// One line of a problem-set file: {problem_id, type, givens, answers,
// condition_tags}. Callers add their own placement keys to the same object.
inline nlohmann::json problem_to_json(const ProblemScript& p) {
    nlohmann::json givens = nlohmann::json::object();
    for (const auto& [role, tok] : p.givens) givens[std::string(role_name(role))] = tok.text();
    nlohmann::json answers = nlohmann::json::object();
    for (const auto& s : p.steps)
        if (s.value) answers[std::string(role_name(s.role))] = s.value->str();
    return {{"problem_id", p.problem_id},
            {"type", std::string(type_name(p.type))},
            {"givens", givens},
            {"answers", answers},
            {"condition_tags", p.tags}};
}

// Rebuilds the script from its givens and checks the stored answers.
inline ProblemScript problem_from_json(const nlohmann::json& j) {
    try {
        const auto type = parse_problem_type(j.at("type").get<std::string>());
        if (!type) throw SchemaError("unknown problem type " + j.at("type").dump());
        const auto& g = j.at("givens");
        auto num = [&](const char* key) {
            auto v = Rational::parse(g.at(key).get<std::string>());
            if (!v || !v->is_integer()) throw SchemaError(std::string("non-integer given ") + key);
            return static_cast<int>(v->num());
        };
        auto sym = [&](const char* key) { return g.at(key).get<std::string>(); };
        const std::string id = j.at("problem_id").get<std::string>();

        ProblemScript p;
        switch (*type) {
            case ProblemType::add_same:
            case ProblemType::add_diff:
            case ProblemType::multiply:
                p = make_fraction_problem(*type, num("num1"), num("den1"), num("num2"), num("den2"), id);
                break;
            case ProblemType::box_easy:
                p = make_box_easy(num("row1_left"), sym("row1_op"), num("row1_right"), id);
                break;
            case ProblemType::box_hard: {
                const auto x = Rational::parse(j.at("answers").at("box").get<std::string>());
                if (!x || !x->is_integer()) throw SchemaError("hard box problem needs an integer answer");
                const bool left = g.contains("row2_right");
                p = make_box_hard(num("row1_left"), sym("row1_op"), num("row1_right"),
                                  num(left ? "row2_right" : "row2_left"), sym("row2_op"), static_cast<int>(x->num()), id,
                                  left ? BoxSide::left : BoxSide::right);
                if (p.given(Role::arrow_target)->text() != g.at("arrow_target").get<std::string>())
                    throw SchemaError("arrow target inconsistent with row 2 in " + id);
                break;
            }
        }
        p.tags = j.value("condition_tags", std::vector<std::string>{});
        for (const auto& [key, value] : j.at("answers").items()) {
            auto role = parse_role(key);
            if (!role) throw SchemaError("unknown answer field " + key);
            auto want = p.answer(*role);
            if (!want || want->str() != value.get<std::string>())
                throw SchemaError("answer for " + key + " in " + id + " does not follow the canonical procedure");
        }
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("problem record: ") + e.what());
    } catch (const ConfigError& e) {
        throw SchemaError(std::string("problem record: ") + e.what());
    }
}

}  // namespace simlearn
