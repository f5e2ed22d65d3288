#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "qpkt/expr.hpp"

using namespace qpkt;

namespace {

const std::vector<std::string> kX = {"x"};
const std::vector<std::string> kXYZ = {"x", "y", "z"};

double eval1(const ExprPtr& e, double x) {
    std::vector<double> v = {x};
    return eval(*e, v);
}

}  // namespace

TEST_CASE("parse builds the expected tree shapes") {
    ExprPtr sq = parse("x^2", kX);
    REQUIRE(sq->kind == NodeKind::PowConst);
    CHECK(sq->value == 2.0);
    CHECK(sq->a->kind == NodeKind::Variable);

    ExprPtr inv = parse("1/(x+273.15)", kX);
    REQUIRE(inv->kind == NodeKind::Div);
    CHECK(inv->a->kind == NodeKind::Constant);
    CHECK(inv->a->value == 1.0);
    REQUIRE(inv->b->kind == NodeKind::Add);
    CHECK(inv->b->a->kind == NodeKind::Variable);
    CHECK(inv->b->b->value == doctest::Approx(273.15));

    ExprPtr mag = parse("sqrt(x^2+y^2+z^2)", kXYZ);
    REQUIRE(mag->kind == NodeKind::Sqrt);
    REQUIRE(mag->a->kind == NodeKind::Add);
    CHECK(mag->a->b->kind == NodeKind::PowConst);

    // Constant subtrees fold at parse time.
    CHECK(parse("2*3+1", kX)->value == 7.0);
    CHECK(parse("x^(1+1)", kX)->kind == NodeKind::PowConst);
}

TEST_CASE("constant-base powers lower to exp") {
    ExprPtr e1 = parse("e^x", kX);
    REQUIRE(e1->kind == NodeKind::Exp);
    CHECK(e1->a->kind == NodeKind::Variable);

    ExprPtr e2 = parse("2^x", kX);
    REQUIRE(e2->kind == NodeKind::Exp);
    REQUIRE(e2->a->kind == NodeKind::Mul);
    CHECK(e2->a->a->value == doctest::Approx(std::log(2.0)));
    CHECK(eval1(e2, 10.0) == doctest::Approx(1024.0));
}

TEST_CASE("unary minus binds tighter than the power operator") {
    // "-x^2" reads (-x)^2, so it is positive.
    CHECK(eval1(parse("-x^2", kX), 3.0) == doctest::Approx(9.0));
    CHECK(eval1(parse("-(x^2)", kX), 3.0) == doctest::Approx(-9.0));
    CHECK(eval1(parse("x^-2", kX), 2.0) == doctest::Approx(0.25));
}

TEST_CASE("parse errors carry byte offsets") {
    CHECK_THROWS_AS(parse("x +* 2", kX), ParseError);
    try {
        parse("x +* 2", kX);
    } catch (const ParseError& e) {
        CHECK(e.offset == 3);
    }
    try {
        parse("foo(x)", kX);
        FAIL("expected an unknown-identifier error");
    } catch (const ParseError& e) {
        CHECK(e.offset == 0);
        CHECK(std::string(e.what()).find("foo") != std::string::npos);
    }
    try {
        parse("x^y", kXYZ);
        FAIL("expected a variable-exponent error");
    } catch (const ParseError& e) {
        CHECK(e.offset == 1);
    }
    CHECK_THROWS_AS(parse("(x+1", kX), ParseError);
    CHECK_THROWS_AS(parse("ln x", kX), ParseError);
}

TEST_CASE("derivatives come out in folded form") {
    CHECK(print(*differentiate(parse("x^2", kX), 0)) == "2*x");
    CHECK(print(*differentiate(parse("e^x", kX), 0)) == "exp(x)");

    // d/dx log2(x) = 1/(x*ln2) with the ln2 folded to a literal.
    ExprPtr dlog = differentiate(parse("log2(x)", kX), 0);
    REQUIRE(dlog->kind == NodeKind::Div);
    REQUIRE(dlog->b->kind == NodeKind::Mul);
    CHECK(dlog->b->b->value == doctest::Approx(std::log(2.0)));

    // Derivative with respect to an absent variable vanishes.
    CHECK(differentiate(parse("x^2", kXYZ), 2)->value == 0.0);
}

namespace {

struct DiffCase {
    const char* text;
    double lo, hi;  // sample domain, chosen inside the expression's domain
};

const DiffCase kDiffCases[] = {
    {"x^2", -10.0, 10.0},     {"x^3", -6.0, 6.0},
    {"ln(x)", 0.2, 50.0},     {"log2(x)", 0.2, 50.0},
    {"exp(x)", -4.0, 4.0},    {"sqrt(x)", 0.3, 40.0},
    {"1/(x+273.15)", -100.0, 200.0},
    {"tanh(x)", -3.0, 3.0},   {"sigmoid(x)", -4.0, 4.0},
    {"x^1.5", 0.5, 20.0},     {"x^2+3*x-1", -5.0, 5.0},
};

}  // namespace

TEST_CASE("first derivatives agree with central finite differences") {
    std::mt19937_64 rng(7001);
    for (const DiffCase& c : kDiffCases) {
        CAPTURE(c.text);
        ExprPtr f = parse(c.text, kX);
        ExprPtr d1 = differentiate(f, 0);
        std::uniform_real_distribution<double> dist(c.lo, c.hi);
        for (int i = 0; i < 100; ++i) {
            double x = dist(rng);
            double h = 1e-6 * std::max(1.0, std::fabs(x));
            double fd = (eval1(f, x + h) - eval1(f, x - h)) / (2.0 * h);
            double sym = eval1(d1, x);
            double denom = std::max(std::fabs(sym), 1e-6 * std::max(1.0, std::fabs(eval1(f, x))));
            CHECK(std::fabs(fd - sym) / denom <= 1e-5);
        }
    }
}

TEST_CASE("second derivatives agree with central finite differences") {
    std::mt19937_64 rng(7002);
    for (const DiffCase& c : kDiffCases) {
        CAPTURE(c.text);
        ExprPtr f = parse(c.text, kX);
        ExprPtr d2 = differentiate(differentiate(f, 0), 0);
        std::uniform_real_distribution<double> dist(c.lo, c.hi);
        for (int i = 0; i < 100; ++i) {
            double x = dist(rng);
            double h = 1e-4 * std::max(1.0, std::fabs(x));
            double fd =
                (eval1(f, x + h) - 2.0 * eval1(f, x) + eval1(f, x - h)) / (h * h);
            double sym = eval1(d2, x);
            double denom = std::max(std::fabs(sym), 1e-4 * std::max(1.0, std::fabs(eval1(f, x))));
            CHECK(std::fabs(fd - sym) / denom <= 1e-4);
        }
    }
}

TEST_CASE("partial derivatives of multivariate expressions") {
    ExprPtr f = parse("x*y*z", kXYZ);
    std::vector<double> at = {1.0, 2.0, 3.0};
    CHECK(eval(*differentiate(f, 0), at) == doctest::Approx(6.0));
    CHECK(eval(*differentiate(f, 1), at) == doctest::Approx(3.0));
    CHECK(eval(*differentiate(f, 2), at) == doctest::Approx(2.0));

    ExprPtr mag = parse("sqrt(x^2+y^2+z^2)", kXYZ);
    std::vector<double> p = {3.0, 0.0, 4.0};
    CHECK(eval(*differentiate(mag, 0), p) == doctest::Approx(0.6));
    CHECK(eval(*differentiate(mag, 2), p) == doctest::Approx(0.8));
}

TEST_CASE("singularity analysis covers divisions, logs, roots and powers") {
    auto s1 = singularities(parse("1/(x+2)", kX));
    REQUIRE(s1.size() == 1);
    CHECK(s1[0].kind == SingularKind::Point);
    CHECK(s1[0].value == doctest::Approx(-2.0));

    auto s2 = singularities(parse("log2(x)", kX));
    REQUIRE(s2.size() == 1);
    CHECK(s2[0].kind == SingularKind::AtOrBelow);
    CHECK(s2[0].value == 0.0);

    CHECK(singularities(parse("x^3", kX)).empty());
    CHECK(singularities(parse("tanh(x)+exp(x)", kX)).empty());

    auto s3 = singularities(parse("x^-2", kX));
    REQUIRE(s3.size() == 1);
    CHECK(s3[0].kind == SingularKind::Point);
    CHECK(s3[0].value == 0.0);

    auto s4 = singularities(parse("sqrt(5-x)", kX));
    REQUIRE(s4.size() == 1);
    CHECK(s4[0].kind == SingularKind::AtOrAbove);
    CHECK(s4[0].value == 5.0);

    // Fractional powers keep their half-line even via the derivative chain.
    DerivativeBundle b = analyze("x^1.5", kX);
    CHECK(singular_distance(b.sings, 0, 2.0) == doctest::Approx(2.0));
}

TEST_CASE("singular distance is a per-variable point/half-line distance") {
    std::vector<Singularity> s = {{0, SingularKind::Point, -2.0},
                                  {1, SingularKind::AtOrBelow, 0.0}};
    CHECK(singular_distance(s, 0, 1.0) == doctest::Approx(3.0));
    CHECK(singular_distance(s, 0, -2.0) == 0.0);
    CHECK(singular_distance(s, 1, 2.5) == doctest::Approx(2.5));
    CHECK(singular_distance(s, 1, -1.0) == 0.0);
    CHECK(std::isinf(singular_distance(s, 2, 0.0)));
}

namespace {

ExprPtr random_expr(std::mt19937_64& rng, int depth) {
    static const double consts[] = {0.5, 1.5, 2.0, 3.0, 273.15, 0.25, 7.0};
    static const double expos[] = {2.0, 3.0, -1.0, 0.5, -2.0, 1.5};
    std::uniform_int_distribution<int> leaf(0, 3);
    if (depth <= 0) {
        int k = leaf(rng);
        if (k == 0) return make_var(0, "x");
        if (k == 1) return make_var(1, "y");
        return make_const(consts[rng() % std::size(consts)]);
    }
    switch (rng() % 12) {
        case 0: return make_add(random_expr(rng, depth - 1), random_expr(rng, depth - 1));
        case 1: return make_sub(random_expr(rng, depth - 1), random_expr(rng, depth - 1));
        case 2: return make_mul(random_expr(rng, depth - 1), random_expr(rng, depth - 1));
        case 3: return make_div(random_expr(rng, depth - 1), random_expr(rng, depth - 1));
        case 4: return make_pow(random_expr(rng, depth - 1), expos[rng() % std::size(expos)]);
        case 5: return make_unary(NodeKind::Exp, random_expr(rng, depth - 1));
        case 6: return make_unary(NodeKind::Ln, random_expr(rng, depth - 1));
        case 7: return make_unary(NodeKind::Log2, random_expr(rng, depth - 1));
        case 8: return make_unary(NodeKind::Sqrt, random_expr(rng, depth - 1));
        case 9: return make_unary(NodeKind::Tanh, random_expr(rng, depth - 1));
        case 10: return make_unary(NodeKind::Sigmoid, random_expr(rng, depth - 1));
        default: return make_unary(NodeKind::Negate, random_expr(rng, depth - 1));
    }
}

}  // namespace

TEST_CASE("printing and reparsing reproduces the tree") {
    const std::vector<std::string> vars = {"x", "y"};
    std::mt19937_64 rng(7003);
    for (int i = 0; i < 500; ++i) {
        ExprPtr e = random_expr(rng, 4);
        std::string text = print(*e);
        CAPTURE(text);
        ExprPtr back = parse(text, vars);
        CHECK(equal(*e, *back));
    }
    // Spot checks for the paren rules.
    CHECK(print(*parse("(x+1)*(x-1)", kX)) == "(x+1)*(x-1)");
    CHECK(print(*parse("x-(y-1)", kXYZ)) == "x-(y-1)");
    CHECK(print(*parse("(x^2)^3", kX)) == "(x^2)^3");
}

TEST_CASE("compiled evaluation matches tree evaluation bit for bit") {
    const std::vector<std::string> vars = {"x", "y"};
    std::mt19937_64 rng(7004);
    std::uniform_real_distribution<double> dist(0.1, 5.0);
    for (int i = 0; i < 200; ++i) {
        ExprPtr e = random_expr(rng, 4);
        CompiledExpr ce(e);
        for (int j = 0; j < 5; ++j) {
            std::vector<double> at = {dist(rng), dist(rng)};
            double a = eval(*e, at);
            double b = ce(at);
            if (std::isnan(a)) {
                CHECK(std::isnan(b));
            } else {
                CHECK(a == b);
            }
        }
    }
}

TEST_CASE("evaluation is pure and out-of-domain inputs yield non-finite values") {
    ExprPtr e = parse("ln(x)", kX);
    double a = eval1(e, 2.5);
    double b = eval1(e, 2.5);
    CHECK(a == b);
    CHECK(std::isnan(eval1(e, -1.0)));
    CHECK(std::isinf(eval1(parse("1/(x-1)", kX), 1.0)));
}

TEST_CASE("analyze produces usable derivative bundles") {
    DerivativeBundle b = analyze("x^2", kX);
    std::vector<double> at = {3.0};
    CHECK(b.cf(at) == 9.0);
    CHECK(b.cd1[0](at) == 6.0);
    CHECK(b.cd2[0](at) == 2.0);
    CHECK(b.sings.empty());

    DerivativeBundle lb = analyze("ln(x)", kX);
    CHECK(singular_distance(lb.sings, 0, 0.5) == doctest::Approx(0.5));
}
