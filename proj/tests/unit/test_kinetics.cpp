#include "nsir/errors.hpp"
#include "nsir/kinetics.hpp"

#include <doctest.h>

#include <cmath>

using namespace nsir;

namespace {

ModelParams base(double k)
{
    ModelParams p;
    p.a = 2;
    p.beta = 1;
    p.b = 1;
    p.gamma = 0.5;
    p.k = k;
    p.d = 1;
    return p;
}

ComparisonState generic_init()
{
    ComparisonState s;
    s.Vbar = 1.0;
    s.Vunder = 0.6;
    s.Ibar = 0.4;
    s.Iunder = 0.1;
    return s;
}

} // namespace

TEST_SUITE("kinetics") {

TEST_CASE("basic reproduction number")
{
    CHECK(r01(base(5)) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(r01(base(2)) == doctest::Approx(0.8).epsilon(1e-15));
    ModelParams p = base(1);
    p.k = p.b * (p.a + p.gamma) / (p.a - p.beta);
    CHECK(r01(p) == 1.0);
    CHECK(r01(base(1e-12)) < 1e-11);
}

TEST_CASE("equilibria")
{
    const Equilibria e = equilibria(base(5));
    REQUIRE(e.E2.has_value());
    CHECK(e.E2->S == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(e.E2->I == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(e.E2->R == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(std::abs(e.E2->S + e.E2->I + e.E2->R - e.N_star) < 1e-12);
    CHECK(e.N_star == 1.0);
    CHECK(e.E1.S == 1.0);
    CHECK(e.E1.S + e.E1.I + e.E1.R == e.N_star);
    CHECK(e.E0.S == 0.0);

    CHECK_FALSE(equilibria(base(2.5)).E2.has_value());
    CHECK_FALSE(equilibria(base(2)).E2.has_value());

    ModelParams q = base(6);  // R01 = 12/7.4
    q.a = 3;
    q.b = 2;
    q.gamma = 0.7;
    const Equilibria f = equilibria(q);
    REQUIRE(f.E2.has_value());
    CHECK(std::abs(f.E2->S + f.E2->I + f.E2->R - f.N_star) < 1e-12);
}

TEST_CASE("parameter validation")
{
    ModelParams p = base(5);
    p.beta = 3;  // a <= beta
    CHECK_THROWS_AS(p.validate(), Error);
    p = base(-1);
    CHECK_THROWS_AS(p.validate(), Error);
    const ModelParams c = ModelParams::with_capacity(2, 1, 4, 5, 0.5, 1);
    CHECK(c.n_star() == doctest::Approx(4.0));
}

TEST_CASE("logistic envelope")
{
    const ModelParams p = base(5);
    for (double t : {0.0, 0.3, 7.0, 100.0}) CHECK(logistic_envelope(1.0, p, t) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(logistic_envelope(2.0, p, 60.0) == doctest::Approx(1.0).epsilon(1e-14));
    const double e = std::exp(1.0);
    CHECK(logistic_envelope(0.5, p, 1.0) == doctest::Approx(e / (e + 1)).epsilon(1e-14));

    // independent RK4 of N' = N(1 - N)
    double n = 0.5;
    const double h = 1e-4;
    auto f = [](double x) { return x * (1 - x); };
    for (int i = 0; i < 10000; ++i) {
        const double k1 = f(n), k2 = f(n + 0.5 * h * k1), k3 = f(n + 0.5 * h * k2), k4 = f(n + h * k3);
        n += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    CHECK(std::abs(n - e / (e + 1)) < 1e-12);
}

TEST_CASE("comparison system fixed point")
{
    const ModelParams p = base(5);
    ComparisonState s;
    s.Vbar = s.Vunder = 0.9;
    s.Ibar = s.Iunder = 0.4;
    const auto tr = solve_comparison_system(p, s, 1.0, 1.0, 20.0);
    const auto& e = tr.back();
    CHECK(std::abs(e.Vbar - 0.9) < 1e-12);
    CHECK(std::abs(e.Vunder - 0.9) < 1e-12);
    CHECK(std::abs(e.Ibar - 0.4) < 1e-12);
    CHECK(std::abs(e.Iunder - 0.4) < 1e-12);
    const ComparisonState r = comparison_rhs(p, s, 1.0, 1.0);
    CHECK(std::abs(r.Vbar) + std::abs(r.Ibar) < 1e-15);
}

TEST_CASE("comparison system decays when R01 < 1")
{
    const auto tr = solve_comparison_system(base(2), generic_init(), 1.2, 0.7, 50.0);
    CHECK(tr.back().Ibar < 1e-4);
    CHECK(tr.back().Iunder <= tr.back().Ibar);
}

TEST_CASE("comparison system converges to the endemic pair when R01 > 1")
{
    const auto tr = solve_comparison_system(base(5), generic_init(), 1.2, 0.7, 100.0);
    const auto& e = tr.back();
    CHECK(std::abs(e.Vbar - 0.9) < 1e-4);
    CHECK(std::abs(e.Vunder - 0.9) < 1e-4);
    CHECK(std::abs(e.Ibar - 0.4) < 1e-4);
    CHECK(std::abs(e.Iunder - 0.4) < 1e-4);
}

TEST_CASE("comparison system input checks")
{
    CHECK_THROWS_AS(solve_comparison_system(base(5), generic_init(), 0.5, 0.7, 1.0), Error);
    ComparisonState z = generic_init();
    z.Iunder = 0;
    CHECK_THROWS_AS(solve_comparison_system(base(5), z, 1.2, 0.7, 1.0), Error);
}

TEST_CASE("matched euler agrees with rk4 to first order")
{
    const ModelParams p = base(5);
    const double dt = 1e-3;
    const auto eu = solve_comparison_euler(p, generic_init(), 1.2, 0.7, dt, 5000, 5000);
    const auto rk = solve_comparison_at(p, generic_init(), 1.2, 0.7, {5.0}, 1e-3);
    CHECK(std::abs(eu.back().Ibar - rk.back().Ibar) < 50 * dt);
    CHECK(std::abs(eu.back().Vunder - rk.back().Vunder) < 50 * dt);
}

TEST_CASE("lyapunov functional")
{
    const ModelParams p = base(5);
    const Equilibria eq = equilibria(p);
    ComparisonState s;
    s.Vbar = s.Vunder = 0.9;
    s.Ibar = s.Iunder = 0.4;
    CHECK(std::abs(lyapunov_F(s, eq, p, 0.0)) < 1e-15);

    for (int i = 1; i <= 20; ++i) {
        ComparisonState q;
        q.Vbar = 0.1 * i;
        q.Vunder = 0.05 * i;
        q.Ibar = 0.03 * i;
        q.Iunder = 0.02 * i;
        CHECK(lyapunov_F(q, eq, p, 0.0) >= 0.0);
    }

    const auto tr = solve_comparison_system(p, generic_init(), 1.2, 0.7, 60.0, {0, 100});
    const double w = lyapunov_weight(p, tr);
    double worst = -1e300;
    for (size_t i = 1; i < tr.size(); ++i)
        if (tr[i - 1].t >= 1.0) worst = std::max(worst, lyapunov_F(tr[i], eq, p, w) - lyapunov_F(tr[i - 1], eq, p, w));
    CHECK(worst <= 1e-10);

    CHECK_THROWS_AS(lyapunov_F(s, equilibria(base(2)), p, 0.0), Error);
}

TEST_CASE("quadratic form margin")
{
    // a = 2, gamma = 0.5: eigenvalues of the coupled 2x2 blocks stay positive
    CHECK(quadratic_form_margin(base(5)) > 0.0);
}

}
