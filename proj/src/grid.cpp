#include "nsir/grid.hpp"
#include "nsir/errors.hpp"

#include <algorithm>
#include <cmath>

namespace nsir {

Grid1D::Grid1D(double l, double r, int nodes) : left(l), right(r), n(nodes) { validate(); }

void Grid1D::validate() const
{
    if (!(left < right) || !std::isfinite(left) || !std::isfinite(right))
        throw Error(ErrorCode::InvalidArgument, "grid requires left < right");
    if (n < 3) throw Error(ErrorCode::InvalidArgument, "grid requires n >= 3");
}

double Grid1D::x(int i) const
{
    if (i == n - 1) return right;
    return left + i * spacing();
}

Vector Grid1D::nodes() const
{
    Vector xs(n);
    for (int i = 0; i < n; ++i) xs[i] = x(i);
    return xs;
}

Vector Grid1D::weights() const
{
    Vector w = Vector::Constant(n, spacing());
    w[0] *= 0.5;
    w[n - 1] *= 0.5;
    return w;
}

double integrate(const Grid1D& g, const Vector& u)
{
    if (u.size() != g.n) throw Error(ErrorCode::DimensionMismatch, "integrate: size mismatch");
    return g.weights().dot(u);
}

Vector solve_tridiagonal(const Vector& sub, const Vector& diag, const Vector& sup, const Vector& rhs)
{
    const Eigen::Index n = diag.size();
    if (sub.size() != n || sup.size() != n || rhs.size() != n)
        throw Error(ErrorCode::DimensionMismatch, "tridiagonal solve: size mismatch");
    Vector c(n), x(n);
    double den = diag[0];
    c[0] = sup[0] / den;
    x[0] = rhs[0] / den;
    for (Eigen::Index i = 1; i < n; ++i) {
        den = diag[i] - sub[i] * c[i - 1];
        c[i] = i + 1 < n ? sup[i] / den : 0.0;
        x[i] = (rhs[i] - sub[i] * x[i - 1]) / den;
    }
    for (Eigen::Index i = n - 2; i >= 0; --i) x[i] -= c[i] * x[i + 1];
    return x;
}

double interp_linear(const Vector& xs, const Vector& ys, double x)
{
    const Eigen::Index n = xs.size();
    if (x <= xs[0]) return ys[0];
    if (x >= xs[n - 1]) return ys[n - 1];
    const double* b = xs.data();
    Eigen::Index j = std::upper_bound(b, b + n, x) - b - 1;
    j = std::clamp<Eigen::Index>(j, 0, n - 2);
    double t = (x - xs[j]) / (xs[j + 1] - xs[j]);
    return (1.0 - t) * ys[j] + t * ys[j + 1];
}

} // namespace nsir
