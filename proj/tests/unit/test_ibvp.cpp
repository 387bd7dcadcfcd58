#include "nsir/errors.hpp"
#include "nsir/ibvp.hpp"
#include "nsir/spectral.hpp"

#include <doctest.h>

#include <cmath>

using namespace nsir;

namespace {

ModelParams base(double k, double d = 0.01)
{
    ModelParams p;
    p.a = 2;
    p.beta = 1;
    p.b = 1;
    p.gamma = 0.5;
    p.k = k;
    p.d = d;
    return p;
}

KernelMatrix sinkhorn(const Grid1D& g)
{
    return build_kernel({KernelFamily::TruncatedGaussian, 0.2, Normalization::SinkhornSymmetric}, g);
}

} // namespace

TEST_SUITE("ibvp") {

TEST_CASE("endemic constants are a fixed point of the Neumann scheme")
{
    const Grid1D g(-1, 1, 101);
    const KernelMatrix K = sinkhorn(g);
    const Trajectory tr = simulate_neumann(base(5), K, constant_state(g, 0.5, 0.4, 0.1), 10.0);
    CHECK(sup_distance(tr.final(), State3{0.5, 0.4, 0.1}) < 1e-8);
    CHECK(tr.final().t == doctest::Approx(10.0));
}

TEST_CASE("Neumann runs approach the predicted equilibrium")
{
    const Grid1D g(-1, 1, 101);
    const KernelMatrix K = sinkhorn(g);
    SUBCASE("R01 = 0.8")
    {
        const Trajectory tr = simulate_neumann(base(2), K, perturbed_state(g, 0.8, 0.2), 200.0);
        CHECK(sup_distance(tr.final(), State3{1, 0, 0}) < 1e-3);
        CHECK(verify_bounds(tr, base(2)).passed());
    }
    SUBCASE("R01 = 2")
    {
        const Trajectory tr = simulate_neumann(base(5), K, perturbed_state(g, 0.5, 0.4), 200.0);
        CHECK(sup_distance(tr.final(), State3{0.5, 0.4, 0.1}) < 1e-3);
        const BoundsReport b = verify_bounds(tr, base(5));
        CHECK(b.passed());
        CHECK(b.max_reduction_deviation <= 1e-12);
    }
}

TEST_CASE("Neumann input checks")
{
    const Grid1D g(-1, 1, 51);
    const KernelMatrix K = sinkhorn(g);
    FieldState s = constant_state(g, 0.5, 0.4, 0.1);
    s.I[3] = 0;
    CHECK_THROWS_AS(simulate_neumann(base(5), K, s, 1.0), Error);
    SimOptions o;
    o.dt = 1.0;
    try {
        simulate_neumann(base(5), K, constant_state(g, 0.5, 0.4, 0.1), 1.0, o);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::CFLViolation);
    }
    CHECK_THROWS_AS(simulate_neumann(base(5), K, constant_state(Grid1D(-1, 1, 31), 0.5, 0.4, 0.1), 1.0), Error);
}

TEST_CASE("oversized dt is caught by the bounds check")
{
    const Grid1D g(-1, 1, 51);
    const KernelMatrix K = sinkhorn(g);
    SimOptions o;
    o.dt = 10 * cfl_limit(base(5), g);
    o.enforce_cfl = false;
    o.check_positivity = false;
    o.record_every = 1;
    const Trajectory tr = simulate_neumann(base(5), K, perturbed_state(g, 0.5, 0.4, 0.5), 30 * o.dt, o);
    const BoundsReport b = verify_bounds(tr, base(5));
    CHECK_FALSE(b.positivity_ok);
    CHECK_FALSE(b.passed());
}

TEST_CASE("Dirichlet extinction when no logistic steady state exists")
{
    const ModelParams p = base(5, 1.0);
    REQUIRE(lambda1_local(p.beta - p.a, p.d, 2.0) > 0.0);
    const Grid1D g(-1, 1, 101);
    const KernelMatrix K = sinkhorn(g);
    const FieldState init = dirichlet_initial_data(g, p.n_star())[0];
    const Trajectory tr = simulate_dirichlet(p, K, init, 100.0);
    const FieldState& f = tr.final();
    CHECK(integrate(g, (f.S + f.I + f.R).eval()) < 1e-6);
    CHECK(tilde_N(p, g).extinct);
    const BoundsReport b = verify_bounds(tr, p);
    CHECK(b.passed());
}

TEST_CASE("Dirichlet total converges to the logistic steady state")
{
    const ModelParams p = base(5);
    const Grid1D g(-1, 1, 201);
    const KernelMatrix K = sinkhorn(g);
    const TildeN tn = tilde_N(p, g);
    REQUIRE_FALSE(tn.extinct);
    CHECK(tn.newton);
    CHECK(tn.N.segment(1, g.n - 2).minCoeff() > 0.0);
    const Trajectory tr = simulate_dirichlet(p, K, dirichlet_initial_data(g, p.n_star())[1], 100.0);
    const FieldState& f = tr.final();
    CHECK(((f.S + f.I + f.R) - tn.N).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("Dirichlet positivity after one step")
{
    const Grid1D g(-1, 1, 101);
    const KernelMatrix K = sinkhorn(g);
    for (const FieldState& s : dirichlet_initial_data(g, 1.0)) {
        CHECK(s.S[0] == 0.0);
        CHECK(s.I[g.n - 1] == 0.0);
        SimOptions o;
        o.record_every = 1;
        const Trajectory tr = simulate_dirichlet(base(5), K, s, default_dt(base(5), g, bound_M(base(5), s)), o);
        const FieldState& f = tr.final();
        CHECK(f.S.minCoeff() >= 0.0);
        CHECK(f.I.minCoeff() >= 0.0);
        CHECK(f.R.minCoeff() >= 0.0);
    }
    FieldState bad = dirichlet_initial_data(g, 1.0)[0];
    bad.S[0] = 0.1;
    CHECK_THROWS_AS(simulate_dirichlet(base(5), K, bad, 1.0), Error);
}

TEST_CASE("logistic steady state: Newton and time-marching agree")
{
    const ModelParams p = base(5);
    const Grid1D g(-1, 1, 201);
    const TildeN tn = tilde_N(p, g);
    Vector N0 = Vector::Zero(g.n);
    for (int i = 1; i + 1 < g.n; ++i) N0[i] = 0.5 * (1 - g.x(i) * g.x(i));
    const Vector m = march_logistic(p, g, N0, 1e-13, 4000);
    CHECK(std::abs(tn.N[g.n / 2] - m[g.n / 2]) < 1e-6);
    CHECK((tn.N - m).lpNorm<Eigen::Infinity>() < 1e-6);
    CHECK(tn.linearized_lambda1 > 0.0);
}

TEST_CASE("logistic steady state approaches the carrying capacity as d shrinks")
{
    const Grid1D g(-1, 1, 401);
    double prev = 1.0;
    for (double d : {1e-2, 1e-3, 1e-4}) {
        const TildeN tn = tilde_N(base(5, d), g);
        const double gap = std::abs(tn.N[g.n / 2] - 1.0);
        CHECK(gap < prev + 1e-15);
        prev = gap;
    }
    CHECK(prev < 1e-6);
    CHECK(tilde_N(base(5, 1.0), g).extinct);
}

TEST_CASE("existence check on both sides")
{
    const Grid1D g(-1, 1, 101);
    const KernelMatrix K = sinkhorn(g);
    SUBCASE("no logistic state")
    {
        const SteadyReport r = existence_check(base(5, 1.0), K);
        CHECK_FALSE(r.exists_predicted);
        CHECK(r.lambda1_local_check >= 0.0);
        CHECK(r.outcomes_match_prediction);
        for (const auto& m : r.runs) CHECK_FALSE(m.positive);
    }
    SUBCASE("positive steady state")
    {
        const SteadyReport r = existence_check(base(5), K);
        CHECK(r.exists_predicted);
        CHECK(r.converged);
        CHECK(r.outcomes_match_prediction);
        CHECK(r.runs.size() == 3);
        CHECK(r.max_pairwise_difference < 1e-4);
    }
    const KernelMatrix col = build_kernel({KernelFamily::TopHat, 0.3, Normalization::ColumnStochastic}, Grid1D(-1, 1, 101));
    if (!col.symmetric) CHECK_THROWS_AS(existence_check(base(5), col), Error);
}

TEST_CASE("comparison sandwich")
{
    const Grid1D g(-1, 1, 101);
    const KernelMatrix K = sinkhorn(g);
    SUBCASE("constant data match the matched Euler envelopes")
    {
        const Trajectory tr = simulate_neumann(base(5), K, constant_state(g, 0.7, 0.2, 0.05), 20.0);
        const ComparisonTrack c = comparison_for(tr, base(5), ComparisonScheme::MatchedEuler);
        const EnvelopeReport e = envelope_check(tr, c);
        CHECK(e.passed);
        CHECK(e.max_spread < 1e-10);
        CHECK(e.max_violation < 1e-10);
    }
    SUBCASE("perturbed data stay inside the RK4 envelopes")
    {
        for (double k : {2.0, 5.0}) {
            const Trajectory tr = simulate_neumann(base(k), K, perturbed_state(g, 0.6, 0.3), 100.0);
            const ComparisonTrack c = comparison_for(tr, base(k), ComparisonScheme::Rk4);
            const EnvelopeReport e = envelope_check(tr, c);
            CHECK(e.passed);
            CHECK(e.tol == doctest::Approx(1e-6 + 10 * tr.dt));
            const auto& last = c.states.back();
            if (k == 2.0) CHECK(last.Ibar < 1e-4);
            if (k == 5.0) CHECK(std::abs(last.Ibar - 0.4) + std::abs(last.Iunder - 0.4) < 1e-3);
        }
    }
    SUBCASE("Dirichlet runs are rejected")
    {
        const Trajectory tr = simulate_dirichlet(base(5), K, dirichlet_initial_data(g, 1.0)[0], 1.0);
        CHECK_THROWS_AS(comparison_for(tr, base(5), ComparisonScheme::Rk4), Error);
    }
}

TEST_CASE("bound M")
{
    const Grid1D g(-1, 1, 11);
    CHECK(bound_M(base(5), constant_state(g, 0.7, 0.2, 0.05)) == doctest::Approx(1.0));
    CHECK(bound_M(base(5), constant_state(g, 1.7, 0.2, 0.05)) == doctest::Approx(1.95));
}

}
