#include <gtest/gtest.h>

#include <limits>

#include "simlearn/expression.hpp"
#include "simlearn/rational.hpp"

using namespace simlearn;

TEST(Rational, StoredInLowestTerms) {
    auto r = Rational::make(6, -8);
    ASSERT_TRUE(r);
    EXPECT_EQ(r->num(), -3);
    EXPECT_EQ(r->den(), 4);
    EXPECT_EQ(r->str(), "-3/4");
    EXPECT_EQ(Rational(5).str(), "5");
}

TEST(Rational, ZeroDenominatorRejected) {
    EXPECT_FALSE(Rational::make(1, 0));
    EXPECT_FALSE(checked_div(Rational(3), Rational(0)));
}

TEST(Rational, Arithmetic) {
    auto half = *Rational::make(1, 2);
    auto third = *Rational::make(1, 3);
    EXPECT_EQ(checked_add(half, third)->str(), "5/6");
    EXPECT_EQ(checked_sub(half, third)->str(), "1/6");
    EXPECT_EQ(checked_mul(half, third)->str(), "1/6");
    EXPECT_EQ(checked_div(half, third)->str(), "3/2");
    EXPECT_LT(third, half);
}

TEST(Rational, OverflowIsReported) {
    const Rational big(std::numeric_limits<std::int64_t>::max());
    EXPECT_FALSE(checked_add(big, Rational(1)));
    EXPECT_FALSE(checked_mul(big, Rational(2)));
}

TEST(Rational, ParseRoundTrip) {
    for (const char* s : {"7", "-3", "7/2", "0"}) {
        auto r = Rational::parse(s);
        ASSERT_TRUE(r) << s;
        EXPECT_EQ(r->str(), s);
    }
    EXPECT_EQ(Rational::parse("4/2")->str(), "2");
    EXPECT_FALSE(Rational::parse(""));
    EXPECT_FALSE(Rational::parse("x"));
    EXPECT_FALSE(Rational::parse("1/0"));
    EXPECT_FALSE(Rational::parse("1.5"));
}

TEST(Expr, ParseRenderAndNormalize) {
    auto e = Expr::parse("(multiply den2 den1)");
    ASSERT_TRUE(e);
    EXPECT_EQ(e->sexpr(), "(multiply den2 den1)");
    EXPECT_EQ(e->normalized(), "(multiply den1 den2)");
    EXPECT_EQ(e->depth(), 1);
    EXPECT_EQ(Expr::parse("(subtract den2 den1)")->normalized(), "(subtract den2 den1)");
    EXPECT_FALSE(Expr::parse("(pow den1 den2)"));
    EXPECT_FALSE(Expr::parse("(add den1"));
}

TEST(Expr, EvaluatesAgainstWorkingMemory) {
    WorkingMemory wm;
    wm.add("den1", FieldState{Token(Rational(2)), Role::den1, false});
    wm.add("den2", FieldState{Token(Rational(3)), Role::den2, false});
    wm.add("conv_den1", FieldState{std::nullopt, Role::conv_den1, true});
    auto e = *Expr::parse("(divide (add den1 den2) den2)");
    EXPECT_EQ(e.evaluate(wm)->str(), "5/3");
    EXPECT_FALSE(Expr::parse("(add den1 conv_den1)")->evaluate(wm));
    EXPECT_FALSE(Expr::parse("(divide den1 (subtract den2 den2))")->evaluate(wm));
}
