#pragma once

#include "nsir/grid.hpp"
#include "nsir/kernel.hpp"

#include <memory>

namespace nsir {

// -d D2 - diag(c1) K + diag(c2) with Dirichlet conditions on the grid ends.
struct EigenProblem {
    double d = 1.0;
    Grid1D grid;
    Vector c1;  // nodal values, size grid.n
    Vector c2;
    std::shared_ptr<const KernelMatrix> kernel;  // may be null when c1 == 0

    static EigenProblem constant(double d, double c1, double c2,
                                 std::shared_ptr<const KernelMatrix> K);
    static EigenProblem local(double d, const Grid1D& g, const Vector& q);
    void validate() const;
};

struct EigenResult {
    double lambda1 = 0;
    Vector phi;  // full grid, zero at both ends, max 1
    double residual = 0;
    int iterations = 0;
};

struct EigenOptions {
    double tol = 1e-10;
    int max_iter = 10000;
};

// interior operator, size (n-2) x (n-2)
Matrix assemble_operator(const EigenProblem& p);

EigenResult principal_eigenvalue(const EigenProblem& p, const EigenOptions& opt = {});
// dense eigendecomposition of the same matrix
double dense_principal_eigenvalue(const EigenProblem& p);

double rayleigh_quotient(const Vector& phi, const EigenProblem& p);

struct R02Result {
    double r02 = 0;
    double lambda1 = 0;
    Vector phi;
    int iterations = 0;
};

// sup of c1 <K phi, phi> / (d |phi'|^2 + c2 |phi|^2) for constant c1, c2
R02Result r02(const EigenProblem& p, const EigenOptions& opt = {});
double r02(double c1, double c2, double d, double left, double right, const KernelSpec& spec,
           int n = 0);
double dense_r02(const EigenProblem& p);

// node count used when only an interval is given
int resolution_for(double length, const KernelSpec& spec, int n_min = 201, int n_max = 801);

double lambda1_interval(double c1, double c2, double d, double left, double right,
                        const KernelSpec& spec, int n = 0);

struct CriticalLengthResult {
    double l_star = 0;
    double lambda1 = 0;
    int evaluations = 0;
};

CriticalLengthResult critical_length(double c1, double c2, double d, const KernelSpec& spec,
                                     double tol = 1e-6);

double lambda1_local(double q, double d, double length);
double lambda1_local(const Vector& q, double d, const Grid1D& g);

} // namespace nsir
