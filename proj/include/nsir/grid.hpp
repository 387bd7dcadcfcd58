#pragma once

#include <Eigen/Dense>

namespace nsir {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Grid1D {
    double left = -1.0;
    double right = 1.0;
    int n = 201;

    Grid1D() = default;
    Grid1D(double l, double r, int nodes);

    double spacing() const { return (right - left) / (n - 1); }
    double length() const { return right - left; }
    double x(int i) const;
    Vector nodes() const;
    // trapezoid weights
    Vector weights() const;
    void validate() const;
};

// trapezoid integral of u over the grid
double integrate(const Grid1D& g, const Vector& u);

// Thomas algorithm; sub[0] and sup[n-1] are ignored
Vector solve_tridiagonal(const Vector& sub, const Vector& diag, const Vector& sup, const Vector& rhs);

// linear interpolation of (xs, ys) at x, constant extension outside
double interp_linear(const Vector& xs, const Vector& ys, double x);

} // namespace nsir
