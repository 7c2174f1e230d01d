#include <gtest/gtest.h>

#include <random>

#include "helpers.hpp"

using namespace simlearn;
using namespace testing_helpers;

namespace {

Skill skill_for(const std::string& expr, Role target, std::uint32_t successes, std::uint32_t attempts) {
    Skill s;
    s.procedure = Explanation::numeric(*Expr::parse(expr));
    s.target_role = target;
    s.conditions = ConditionSet({Predicate::field_empty(target)});
    s.utility = {successes, attempts};
    return s;
}

}  // namespace

TEST(Decide, EmptyStoreRequestsDemo) {
    SkillStore store;
    EXPECT_FALSE(is_fire(decide(fraction_wm(1, 2, "+", 1, 3), store)));
}

TEST(Decide, HighestUtilityFires) {
    SkillStore store;
    store.insert(skill_for("(add num1 num2)", Role::answer_num, 0, 0));   // 0.5
    store.insert(skill_for("(multiply num1 num2)", Role::answer_num, 3, 3));  // 0.8
    auto d = decide(fraction_wm(2, 3, "x", 4, 5), store);
    ASSERT_TRUE(is_fire(d));
    const auto& a = std::get<Activation>(d);
    EXPECT_EQ(a.skill_id, "s0002");
    EXPECT_DOUBLE_EQ(a.utility_value, 0.8);
    EXPECT_EQ(a.proposed, SAI::input("answer_num", Token("8")));
}

// Equal Laplace utility 0.5 needs an even attempt count, so the tie is
// checked as 4 attempts against 0 and against 2.
TEST(Decide, TieGoesToMoreAttempts) {
    for (std::uint32_t other : {0u, 2u}) {
        SkillStore store;
        store.insert(skill_for("(add num1 num2)", Role::answer_num, other / 2, other));
        store.insert(skill_for("(multiply num1 num2)", Role::answer_num, 2, 4));
        auto d = decide(fraction_wm(2, 3, "x", 4, 5), store);
        ASSERT_TRUE(is_fire(d));
        EXPECT_EQ(std::get<Activation>(d).skill_id, "s0002");
        EXPECT_DOUBLE_EQ(std::get<Activation>(d).utility_value, 0.5);
    }
}

TEST(Decide, FullTieGoesToSmallerId) {
    SkillStore store;
    store.insert(skill_for("(add num1 num2)", Role::answer_num, 1, 1));
    store.insert(skill_for("(multiply num1 num2)", Role::answer_num, 1, 1));
    EXPECT_EQ(std::get<Activation>(decide(fraction_wm(2, 3, "x", 4, 5), store)).skill_id, "s0001");
}

TEST(Decide, ExcludeAndFocus) {
    SkillStore store;
    store.insert(skill_for("(add num1 num2)", Role::answer_num, 3, 3));
    store.insert(skill_for("(multiply den1 den2)", Role::answer_den, 0, 0));
    auto wm = fraction_wm(2, 3, "x", 4, 5);
    EXPECT_EQ(std::get<Activation>(decide(wm, store, {"s0001"})).skill_id, "s0002");
    EXPECT_EQ(std::get<Activation>(decide(wm, store, {}, std::string("answer_den"))).skill_id, "s0002");
    EXPECT_FALSE(is_fire(decide(wm, store, {}, std::string("conv_num1"))));
}

TEST(Decide, FilledTargetDoesNotMatch) {
    SkillStore store;
    Skill s = skill_for("(add num1 num2)", Role::answer_num, 3, 3);
    s.conditions = ConditionSet();
    store.insert(s);
    auto wm = make_wm({{Role::num1, "1"}, {Role::num2, "2"}, {Role::answer_num, "3"}});
    EXPECT_FALSE(is_fire(decide(wm, store)));
}

TEST(Feedback, LaplaceUpdates) {
    SkillStore store;
    store.insert(skill_for("(add num1 num2)", Role::answer_num, 3, 4));
    store.insert(skill_for("(add num1 num2)", Role::answer_num, 0, 0));
    auto wm = fraction_wm(1, 2, "+", 1, 2);
    Activation a1{"s0001", {}, SAI::input("answer_num", Token("2")), 0, {}};
    Activation a2{"s0002", {}, SAI::input("answer_num", Token("2")), 0, {}};
    apply_feedback(store, a1, true, wm);
    apply_feedback(store, a2, false, wm);
    const auto& u1 = store.find("s0001")->utility;
    const auto& u2 = store.find("s0002")->utility;
    EXPECT_EQ(u1.successes, 4u);
    EXPECT_EQ(u1.attempts, 5u);
    EXPECT_NEAR(u1.value(), 5.0 / 7.0, 1e-15);
    EXPECT_NEAR(u1.value(), 0.714, 5e-4);
    EXPECT_EQ(u2.successes, 0u);
    EXPECT_EQ(u2.attempts, 1u);
    EXPECT_DOUBLE_EQ(u2.value(), 1.0 / 3.0);
}

TEST(Feedback, StaleSkillIsInvariantViolation) {
    SkillStore store;
    Activation a{"s0042", {}, SAI::press_done("done"), 0, {}};
    EXPECT_THROW(apply_feedback(store, a, true, fraction_wm(1, 2, "+", 1, 2)), InvariantViolation);
}

TEST(Feedback, CompareUtilityIsExact) {
    EXPECT_EQ(compare_utility({1, 2}, {2, 4}), 0);
    EXPECT_GT(compare_utility({3, 3}, {0, 0}), 0);
    EXPECT_LT(compare_utility({0, 1}, {0, 0}), 0);
}

TEST(Agent, NoSkillsFailsPosttestWithHint) {
    Agent agent;
    TutorSession session(make_fraction_problem(ProblemType::multiply, 2, 3, 3, 4, "p"), SessionMode::posttest);
    auto r = agent.run_problem(session);
    EXPECT_FALSE(r.correct);
    ASSERT_FALSE(r.steps.empty());
    EXPECT_EQ(r.steps[0].outcome, StepOutcome::hint);
    EXPECT_EQ(r.steps.size(), 1u);
}

TEST(Agent, MastersMultiplication) {
    std::mt19937_64 rng(11);
    for (auto selection : {StepSelection::canonical, StepSelection::free}) {
        AgentConfig cfg;
        cfg.selection = selection;
        Agent agent(cfg);
        for (int i = 0; i < 24; ++i) {
            TutorSession s(gen_fraction_problem(ProblemType::multiply, rng), SessionMode::training);
            agent.run_problem(s);
            ASSERT_TRUE(s.complete());
        }
        int correct = 0;
        for (int i = 0; i < 20; ++i) {
            TutorSession s(gen_fraction_problem(ProblemType::multiply, rng), SessionMode::posttest);
            auto r = agent.run_problem(s);
            if (r.correct) {
                ++correct;
                for (const auto& t : r.steps) EXPECT_EQ(t.outcome, StepOutcome::correct);
            }
        }
        EXPECT_EQ(correct, 20);
    }
}

TEST(Agent, WrongSkillsStillComplete) {
    Agent agent;
    for (int k = 0; k < 3; ++k) {
        Skill s;
        s.procedure = Explanation::numeric(Expr::constant(Rational(900 + k)));
        s.target_role = Role::answer_num;
        agent.skills().insert(s);
    }
    TutorSession session(make_fraction_problem(ProblemType::multiply, 2, 3, 3, 4, "p"), SessionMode::training);
    auto r = agent.run_problem(session);
    EXPECT_TRUE(session.complete());
    EXPECT_FALSE(r.correct);
    EXPECT_EQ(r.steps[0].outcome, StepOutcome::error);
    for (const auto& s : agent.skills().skills())
        if (s.procedure.is_constant() && s.utility.attempts > 0) {
            EXPECT_EQ(s.utility.successes, 0u);
        }
    EXPECT_GE(agent.demonstrations(), 1u);
}
