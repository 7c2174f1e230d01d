#include <gtest/gtest.h>

#include <random>
#include <set>

#include "../oracles.hpp"
#include "helpers.hpp"

using namespace simlearn;
using namespace testing_helpers;

namespace {

std::set<std::string> normalized(const std::vector<Explanation>& es) {
    std::set<std::string> out;
    for (const auto& e : es) out.insert(e.expr->normalized());
    return out;
}

std::vector<oracle::Leaf> oracle_leaves(const WorkingMemory& wm) {
    std::vector<oracle::Leaf> out;
    for (const auto& f : wm.fields()) {
        if (field_kind(f.state.role) != FieldKind::number || !f.state.value) continue;
        const auto v = f.state.value->numeric();
        out.push_back({std::string(role_name(f.state.role)), oracle::Q(v->num(), v->den())});
    }
    return out;
}

}  // namespace

TEST(Explain, DenominatorProduct) {
    auto wm = fraction_wm(1, 2, "+", 1, 3, true);
    auto es = explain(wm, SAI::input("conv_den1", Token("6")));
    EXPECT_EQ(normalized(es), (std::set<std::string>{"(multiply den1 den2)"}));
}

TEST(Explain, CopyIsDepthZero) {
    auto wm = fraction_wm(5, 7, "+", 2, 7);
    auto es = explain(wm, SAI::input("answer_num", Token("5")));
    ASSERT_EQ(es.size(), 1u);
    EXPECT_EQ(es[0].expr->sexpr(), "num1");
    EXPECT_EQ(es[0].depth(), 0);
}

TEST(Explain, ThreeCandidatesForFour) {
    auto wm = make_wm({{Role::row1_left, "7"},
                       {Role::row1_op, "-"},
                       {Role::row1_right, "3"},
                       {Role::row2_left, "2"},
                       {Role::row2_op, "x"},
                       {Role::box, std::nullopt},
                       {Role::arrow_target, "2"}});
    auto es = explain(wm, SAI::input("box", Token("4")));
    EXPECT_EQ(normalized(es), (std::set<std::string>{"(subtract row1_left row1_right)", "(add arrow_target row2_left)",
                                                     "(multiply arrow_target row2_left)"}));
    for (const auto& e : es) EXPECT_EQ(e.depth(), 1);
}

TEST(Explain, EveryExplanationReproducesTheValue) {
    auto wm = fraction_wm(3, 4, "+", 5, 6, true);
    for (const char* v : {"24", "18", "20", "38", "9", "2"}) {
        for (const auto& e : explain(wm, SAI::input("conv_num1", Token(v)))) {
            ASSERT_TRUE(e.expr);
            EXPECT_EQ(e.expr->evaluate(wm)->str(), v);
            EXPECT_LE(e.depth(), 2);
        }
    }
}

TEST(Explain, ConstantOnlyWhenNothingFits) {
    auto wm = fraction_wm(1, 2, "+", 1, 3);
    InductionConfig cfg;
    auto es = explain(wm, SAI::input("answer_num", Token("997")), cfg);
    ASSERT_EQ(es.size(), 1u);
    EXPECT_TRUE(es[0].is_constant());
    cfg.constant_fallback = false;
    EXPECT_TRUE(explain(wm, SAI::input("answer_num", Token("997")), cfg).empty());
}

TEST(Explain, StructuralActions) {
    auto wm = fraction_wm(1, 2, "+", 1, 3);
    auto es = explain(wm, SAI::check_box("check_convert"));
    ASSERT_EQ(es.size(), 1u);
    EXPECT_EQ(es[0].sexpr(), "(check-box)");
    EXPECT_EQ(explain(wm, SAI::press_done("done"))[0].sexpr(), "(press-done)");
}

TEST(Explain, MatchesBruteForceOnRandomStates) {
    std::mt19937_64 rng(20240611);
    std::uniform_int_distribution<int> small(1, 12);
    std::bernoulli_distribution coin(0.5);
    int compared = 0;
    for (int trial = 0; trial < 100; ++trial) {
        WorkingMemory wm;
        if (coin(rng)) {
            wm = fraction_wm(small(rng), small(rng), coin(rng) ? "+" : "x", small(rng), small(rng), true);
        } else {
            wm = make_wm({{Role::row1_left, std::to_string(small(rng))},
                          {Role::row1_op, "+"},
                          {Role::row1_right, std::to_string(small(rng))},
                          {Role::row2_left, std::to_string(small(rng))},
                          {Role::row2_op, "-"},
                          {Role::box, std::nullopt},
                          {Role::arrow_target, std::to_string(small(rng))}});
        }
        const auto leaves = oracle_leaves(wm);
        oracle::Q target;
        if (coin(rng)) {
            auto trees = oracle::all_trees(leaves, 2);
            target = trees[std::uniform_int_distribution<std::size_t>(0, trees.size() - 1)(rng)].value;
        } else {
            target = oracle::Q(std::uniform_int_distribution<int>(-40, 200)(rng), small(rng));
        }
        const auto value = *Rational::make(target.numerator(), target.denominator());
        InductionConfig cfg;
        cfg.constant_fallback = false;
        auto got = normalized(explain(wm, SAI::input("box", Token(value)), cfg));
        auto want = oracle::explanations(leaves, target, 2);
        EXPECT_EQ(got, want) << "trial " << trial << " target " << value.str();
        ++compared;
    }
    EXPECT_EQ(compared, 100);
}
