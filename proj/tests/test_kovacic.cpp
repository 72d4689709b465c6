#include <catch2/catch_amalgamated.hpp>

#include "invmellin/kovacic.hpp"
#include "invmellin/numerics.hpp"

using namespace invmellin;

namespace {

Poly from_ints(std::initializer_list<long> cs) {
    std::vector<Rat> c;
    for (long v : cs) c.emplace_back(v);
    return Poly(std::move(c));
}

Real rtol(int k) { return pow(Real(10), -k); }

// 4x(40-891x+1701x^2) + 9x^2(32-376x+459x^2) D + 18x^3(4-31x+27x^2) D^2
DiffOp order2_radical_op() {
    return DiffOp({from_ints({0, 160, -3564, 6804}),
                   from_ints({0, 0, 288, -3384, 4131}),
                   from_ints({0, 0, 0, 72, -558, 486})});
}

// (27x-4) + 9x(7x-4) D + 18x^2(x-1) D^2
DiffOp order2_sixthroot_op() {
    return DiffOp({from_ints({-4, 27}), from_ints({0, -36, 63}), from_ints({0, 0, -18, 18})});
}

ExprPtr one_minus_x() { return poly_to_expr(from_ints({1, -1})); }

// the two radical solutions of order2_radical_op, sign = +-1
ExprPtr radical_solution(int sign) {
    ExprPtr sq = ex_pow(one_minus_x(), make_rat(1, 2));
    auto shifted = [&](long c0, long csq) {
        return ex_add({ex_const(c0), ex_mul({ex_const(csq), sq}), ex_mul({ex_const(-1), ex_var()})});
    };
    return ex_mul({
        ex_const(-1),
        ex_pow(shifted(10, -6 * sign), make_rat(1, 2)),
        ex_pow(shifted(2, 2 * sign), make_rat(1, 6)),
        ex_pow(one_minus_x(), make_rat(-3, 2)),
        ex_pow(ex_var(), make_rat(-5, 3)),
        ex_pow(poly_to_expr(from_ints({-4, 27})), Rat(-1)),
    });
}

// the two sixth-root solutions of order2_sixthroot_op
ExprPtr sixthroot_solution(int sign) {
    ExprPtr sq = ex_pow(one_minus_x(), make_rat(1, 2));
    return ex_mul({
        ex_pow(ex_add({ex_const(2), ex_mul({ex_const(2 * sign), sq}),
                       ex_mul({ex_const(-1), ex_var()})}),
               make_rat(1, 6)),
        ex_pow(one_minus_x(), make_rat(-1, 2)),
        ex_pow(ex_var(), make_rat(-2, 3)),
    });
}

// fit c1, c2 with c1 y1 + c2 y2 = target at two points, check at a third
void check_in_span(const ExprPtr& y1, const ExprPtr& y2, const ExprPtr& target, int digits,
                   int tol_digits) {
    PrecisionGuard guard(digits + 10);
    Evaluator ev(digits);
    Real x1 = rat_cast<Real>(make_rat(1, 5)), x2 = rat_cast<Real>(make_rat(1, 2));
    Real x3 = rat_cast<Real>(make_rat(4, 5));
    Real a11 = ev.eval(y1, x1), a12 = ev.eval(y2, x1), b1 = ev.eval(target, x1);
    Real a21 = ev.eval(y1, x2), a22 = ev.eval(y2, x2), b2 = ev.eval(target, x2);
    Real det = a11 * a22 - a12 * a21;
    REQUIRE(abs(det) > rtol(digits / 2));
    Real c1 = (b1 * a22 - b2 * a12) / det;
    Real c2 = (a11 * b2 - a21 * b1) / det;
    Real pred = c1 * ev.eval(y1, x3) + c2 * ev.eval(y2, x3);
    Real want = ev.eval(target, x3);
    CHECK(abs(pred - want) <= rtol(tol_digits) * (1 + abs(want)));
}

}  // namespace

TEST_CASE("normal form of simple operators") {
    DiffOp constant({from_ints({-5}), Poly(), Poly(Rat(1))});
    NormalForm nf = to_normal_form(constant);
    CHECK(nf.r == RatFun(5));
    CHECK(expr_eq(nf.gauge, ex_const(1)));

    // x D^2 + D: r = -1/(4x^2), gauge = x^{-1/2}
    DiffOp euler({Poly(), Poly(Rat(1)), from_ints({0, 1})});
    NormalForm nfe = to_normal_form(euler);
    CHECK(nfe.r == RatFun(from_ints({-1}), from_ints({0, 0, 4})));
    CHECK(expr_eq(nfe.gauge, ex_pow(ex_var(), make_rat(-1, 2))));
    // gauge maps y = sqrt(x) to the constant solution
    ExprPtr mapped = normalize(ex_mul({nfe.gauge, ex_pow(ex_var(), make_rat(1, 2))}));
    CHECK(expr_eq(mapped, ex_const(1)));
}

TEST_CASE("normal form pole structure of the sixth-root operator") {
    NormalForm nf = to_normal_form(order2_sixthroot_op());
    CHECK(nf.r.valuation_at(Rat(0)) == -2);
    CHECK(nf.r.valuation_at(Rat(1)) == -2);
    CHECK(squarefree_part(nf.r.den()).degree() == 2);
}

TEST_CASE("case 1 candidates") {
    auto w1 = kovacic_case1(RatFun(1));
    REQUIRE(w1.has_value());
    CHECK(*w1 == RatFun(1));

    auto w2 = kovacic_case1(RatFun(from_ints({2}), from_ints({0, 0, 1})));
    REQUIRE(w2.has_value());
    CHECK(*w2 == RatFun(from_ints({2}), from_ints({0, 1})));

    CHECK_FALSE(kovacic_case1(RatFun(from_ints({0, 1}))).has_value());  // Airy r = x

    auto w0 = kovacic_case1(RatFun(0));
    REQUIRE(w0.has_value());
    CHECK(*w0 == RatFun(0));
}

TEST_CASE("case 2 fails on the Airy normal form") {
    CHECK_FALSE(kovacic_case2(RatFun(from_ints({0, 1}))).has_value());
    CHECK_FALSE(kovacic_case3_possible(RatFun(from_ints({0, 1}))));
}

TEST_CASE("Airy-type operator has no Liouvillian solutions") {
    DiffOp airy({from_ints({0, -1}), Poly(), Poly(Rat(1))});
    KovacicResult res = kovacic(airy);
    CHECK(res.case_tag == KovacicCase::NoLiouvillian);
    CHECK(res.solutions.empty());
}

TEST_CASE("D^2 - D is case 1 with rational omega") {
    DiffOp op({Poly(), from_ints({-1}), Poly(Rat(1))});
    KovacicResult res = kovacic(op);
    REQUIRE(res.case_tag == KovacicCase::RationalOmega);
    REQUIRE(res.omega.has_value());
    CHECK((*res.omega == RatFun(0) || *res.omega == RatFun(1)));
    REQUIRE(res.solutions.size() == 2);
    auto resid = verify_ode_residual(res.solutions[0], op, {Real(0.3), Real(0.6)}, 30);
    for (const auto& r : resid) CHECK(r <= rtol(25));
    auto resid2 = verify_ode_residual(res.solutions[1], op, {Real(0.3), Real(0.6)}, 30);
    for (const auto& r : resid2) CHECK(r <= rtol(20));
}

TEST_CASE("second solution by reduction of order") {
    DiffOp dd({Poly(), Poly(), Poly(Rat(1))});
    ExprPtr f2 = second_solution(dd, ex_const(1));
    CHECK(abs(eval_expr(f2, rat_cast<Real>(make_rat(2, 5)), 30) - Real(2) / 5) <= rtol(25));

    DiffOp euler({Poly(), Poly(Rat(1)), from_ints({0, 1})});
    ExprPtr g2 = second_solution(euler, ex_const(1));
    PrecisionGuard guard(40);
    Real x = rat_cast<Real>(make_rat(7, 10));
    Real want = log(x) - log(Real(1) / 2);
    CHECK(abs(eval_expr(g2, x, 30) - want) <= rtol(25));
}

TEST_CASE("radical helpers") {
    // exp(int 2/x) = x^2 up to a constant
    ExprPtr e = exp_integral_expr(RatFun(from_ints({2}), from_ints({0, 1})));
    CHECK(expr_eq(e, normalize(ex_pow(ex_var(), Rat(2)))));

    // int 1/sqrt(1-x) dx = -2 sqrt(1-x)
    ExprPtr anti = integrate_sqrt_rational(RatFun(from_ints({1}), from_ints({1, -1})),
                                           from_ints({1, -1}));
    for (double xd : {0.2, 0.5, 0.8}) {
        double got = eval_expr_plain<double>(anti, xd);
        CHECK(std::abs(got + 2 * std::sqrt(1 - xd)) < 1e-12);
    }

    CHECK_THROWS_AS(rationalize_quadratic_radical(RatFun(from_ints({2})), Rat(1)),
                    RadicandTooComplex);
}

TEST_CASE("case 2 solves the nested-radical operator") {
    DiffOp op = order2_radical_op();
    KovacicResult res = kovacic(op);
    REQUIRE(res.case_tag == KovacicCase::QuadraticOmega);
    REQUIRE(res.quad.has_value());
    auto [c1, c0] = riccati_quadratic_residual(op, res.quad->first, res.quad->second);
    CHECK(c1 == RatFun(0));
    CHECK(c0 == RatFun(0));
    REQUIRE(res.solutions.size() == 2);
    std::vector<Real> pts{Real(0.2), Real(0.35), Real(0.5), Real(0.65), Real(0.9)};
    for (const auto& s : res.solutions) {
        auto resid = verify_ode_residual(s, op, pts, 40);
        for (const auto& r : resid) CHECK(r <= rtol(30));
    }
    check_in_span(res.solutions[0], res.solutions[1], radical_solution(+1), 50, 30);
    check_in_span(res.solutions[0], res.solutions[1], radical_solution(-1), 50, 30);
}

TEST_CASE("case 2 solves the sixth-root operator") {
    DiffOp op = order2_sixthroot_op();
    KovacicResult res = kovacic(op);
    REQUIRE(res.case_tag == KovacicCase::QuadraticOmega);
    REQUIRE(res.solutions.size() == 2);
    std::vector<Real> pts{Real(0.2), Real(0.35), Real(0.5), Real(0.65), Real(0.9)};
    for (const auto& s : res.solutions) {
        auto resid = verify_ode_residual(s, op, pts, 40);
        for (const auto& r : resid) CHECK(r <= rtol(30));
    }
    check_in_span(res.solutions[0], res.solutions[1], sixthroot_solution(+1), 50, 30);
    check_in_span(res.solutions[0], res.solutions[1], sixthroot_solution(-1), 50, 30);
}
