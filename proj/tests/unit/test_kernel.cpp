#include "nsir/errors.hpp"
#include "nsir/kernel.hpp"

#include <doctest.h>

#include <cmath>

using namespace nsir;

TEST_SUITE("kernel") {

TEST_CASE("trapezoid weights and integral")
{
    const Grid1D g(-1, 1, 5);
    const Vector w = g.weights();
    CHECK(w[0] == doctest::Approx(0.25));
    CHECK(w[2] == doctest::Approx(0.5));
    CHECK(w.sum() == doctest::Approx(2.0));
    // trapezoid is exact for linear functions
    const Vector u = (g.nodes().array() + 1.0).matrix();
    CHECK(integrate(g, u) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK_THROWS_AS(Grid1D(1, -1, 11).validate(), Error);
}

TEST_CASE("tridiagonal solve against dense")
{
    const int n = 7;
    Vector sub = Vector::Constant(n, -1.0), diag = Vector::Constant(n, 3.0), sup = Vector::Constant(n, -0.5);
    Vector rhs(n);
    for (int i = 0; i < n; ++i) rhs[i] = std::sin(i + 1.0);
    const Vector x = solve_tridiagonal(sub, diag, sup, rhs);
    Matrix A = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        A(i, i) = 3.0;
        if (i > 0) A(i, i - 1) = -1.0;
        if (i < n - 1) A(i, i + 1) = -0.5;
    }
    CHECK((A * x - rhs).lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("uniform column stochastic kernel is half the weight")
{
    const Grid1D g(-1, 1, 41);
    const KernelMatrix K = build_kernel({KernelFamily::Uniform, 1.0, Normalization::ColumnStochastic}, g);
    const Vector w = g.weights();
    double worst = 0;
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) worst = std::max(worst, std::abs(K.samples(i, j) - 0.5 * w[j]));
    CHECK(worst < 1e-15);
    const NormalizationReport r = check_normalization(K);
    CHECK(r.max_column_deviation < 1e-12);
    CHECK(r.max_asymmetry < 1e-12);
}

TEST_CASE("top-hat column stochastic sums")
{
    const Grid1D g(-1, 1, 201);
    const KernelMatrix K = build_kernel({KernelFamily::TopHat, 0.5, Normalization::ColumnStochastic}, g);
    CHECK(check_normalization(K).max_column_deviation < 1e-12);
    CHECK(K.samples.minCoeff() >= 0.0);
}

TEST_CASE("gaussian sinkhorn kernel is symmetric and doubly stochastic")
{
    const Grid1D g(-1, 1, 201);
    const KernelMatrix K = build_kernel({KernelFamily::TruncatedGaussian, 0.3, Normalization::SinkhornSymmetric}, g);
    CHECK(K.symmetric);
    const NormalizationReport r = check_normalization(K);
    CHECK(r.max_column_deviation < 1e-10);
    CHECK(r.max_row_deviation < 1e-10);
    CHECK(r.max_asymmetry < 1e-12);
    CHECK(K.samples.minCoeff() >= 0.0);
}

TEST_CASE("unnormalized narrow gaussian loses mass at the boundary")
{
    const Grid1D g(-1, 1, 201);
    const KernelMatrix K = build_kernel({KernelFamily::TruncatedGaussian, 0.1, Normalization::None}, g);
    const NormalizationReport r = check_normalization(K);
    CHECK(r.max_column_deviation > 0.3);
    // P itself stays symmetric, J(x - y)
    CHECK(r.max_asymmetry < 1e-12);
}

TEST_CASE("profiles are even with unit mass")
{
    for (const KernelSpec s : {KernelSpec{KernelFamily::TruncatedGaussian, 0.2, Normalization::None},
                               KernelSpec{KernelFamily::TopHat, 0.3, Normalization::None}}) {
        const double R = kernel_support(s);
        const int n = 200001;
        double sum = 0;
        bool even = true;
        for (int i = 0; i < n; ++i) {
            const double z = -R + 2 * R * i / (n - 1);
            const double wt = (i == 0 || i == n - 1) ? 0.5 : 1.0;
            sum += wt * kernel_profile(s, z);
            even = even && kernel_profile(s, z) == kernel_profile(s, -z);
        }
        CHECK(even);
        sum *= 2 * R / (n - 1);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-4));
        CHECK(kernel_profile(s, 1.01 * R) == 0.0);
    }
}

TEST_CASE("apply_nonlocal")
{
    const Grid1D g(-1, 1, 101);
    SUBCASE("zero in, zero out")
    {
        const KernelMatrix K = build_kernel({KernelFamily::TruncatedGaussian, 0.2, Normalization::None}, g);
        CHECK(apply_nonlocal(K, Vector::Zero(g.n)).lpNorm<Eigen::Infinity>() == 0.0);
    }
    SUBCASE("column stochastic preserves mass")
    {
        const KernelMatrix K = build_kernel({KernelFamily::TopHat, 0.4, Normalization::ColumnStochastic}, g);
        Vector u(g.n);
        for (int i = 0; i < g.n; ++i) u[i] = std::exp(g.x(i)) * (1.5 + std::cos(3 * g.x(i)));
        CHECK(std::abs(integrate(g, apply_nonlocal(K, u)) - integrate(g, u)) < 1e-10);
    }
    SUBCASE("uniform kernel averages a linear function")
    {
        const KernelMatrix K = build_kernel({KernelFamily::Uniform, 1.0, Normalization::None}, g);
        const Vector u = (g.nodes().array() + 1.0).matrix();
        const Vector v = apply_nonlocal(K, u);
        CHECK((v.array() - 1.0).abs().maxCoeff() < 1e-13);
    }
    SUBCASE("dimension mismatch")
    {
        const KernelMatrix K = build_kernel({KernelFamily::Uniform, 1.0, Normalization::None}, g);
        CHECK_THROWS_AS(apply_nonlocal(K, Vector::Zero(7)), Error);
    }
}

TEST_CASE("invalid specs")
{
    CHECK_THROWS_AS((KernelSpec{KernelFamily::TopHat, 0.0, Normalization::None}.validate()), Error);
    CHECK_THROWS_AS((KernelSpec{KernelFamily::TruncatedGaussian, -1.0, Normalization::None}.validate()), Error);
    CHECK_THROWS_AS(parse_family("lorentz"), Error);
    CHECK(parse_normalization("sinkhorn") == Normalization::SinkhornSymmetric);
}

}
