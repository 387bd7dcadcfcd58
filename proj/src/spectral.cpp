#include "nsir/spectral.hpp"
#include "nsir/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace nsir {

namespace {
constexpr double kEps = std::numeric_limits<double>::epsilon();
}

EigenProblem EigenProblem::constant(double d, double c1, double c2,
                                    std::shared_ptr<const KernelMatrix> K)
{
    if (!K) throw Error(ErrorCode::InvalidArgument, "constant eigen problem needs a kernel");
    EigenProblem p;
    p.d = d;
    p.grid = K->grid;
    p.c1 = Vector::Constant(p.grid.n, c1);
    p.c2 = Vector::Constant(p.grid.n, c2);
    p.kernel = std::move(K);
    return p;
}

EigenProblem EigenProblem::local(double d, const Grid1D& g, const Vector& q)
{
    EigenProblem p;
    p.d = d;
    p.grid = g;
    p.c1 = Vector::Zero(g.n);
    p.c2 = q;
    return p;
}

void EigenProblem::validate() const
{
    grid.validate();
    if (grid.n < 4) throw Error(ErrorCode::InvalidArgument, "eigen problem needs two interior nodes");
    if (!(d > 0.0)) throw Error(ErrorCode::InvalidArgument, "diffusivity must be positive");
    if (c1.size() != grid.n || c2.size() != grid.n)
        throw Error(ErrorCode::DimensionMismatch, "coefficient size does not match grid");
    const bool nonlocal = c1.cwiseAbs().maxCoeff() > 0.0;
    if (nonlocal && !kernel) throw Error(ErrorCode::InvalidArgument, "nonzero c1 needs a kernel");
    if (kernel && (kernel->n() != grid.n || kernel->grid.left != grid.left ||
                   kernel->grid.right != grid.right))
        throw Error(ErrorCode::DimensionMismatch, "kernel grid does not match problem grid");
}

Matrix assemble_operator(const EigenProblem& p)
{
    p.validate();
    const int m = p.grid.n - 2;
    const double h = p.grid.spacing();
    const double diag = 2.0 * p.d / (h * h);
    const double off = -p.d / (h * h);
    Matrix A = Matrix::Zero(m, m);
    if (p.kernel) {
        for (int i = 0; i < m; ++i) {
            const double c = p.c1[i + 1];
            if (c == 0.0) continue;
            for (int j = 0; j < m; ++j) A(i, j) = -c * p.kernel->samples(i + 1, j + 1);
        }
    }
    for (int i = 0; i < m; ++i) {
        A(i, i) += diag + p.c2[i + 1];
        if (i > 0) A(i, i - 1) += off;
        if (i + 1 < m) A(i, i + 1) += off;
    }
    return A;
}

namespace {

bool is_z_matrix(const Matrix& A)
{
    for (Eigen::Index j = 0; j < A.cols(); ++j)
        for (Eigen::Index i = 0; i < A.rows(); ++i)
            if (i != j && A(i, j) > 0.0) return false;
    return true;
}

// scale by the entry of largest magnitude, keeping its sign, so a Perron vector stays positive
void normalize_signed(Vector& x)
{
    Eigen::Index k;
    x.cwiseAbs().maxCoeff(&k);
    x /= x[k];
}

Vector embed(const Vector& interior)
{
    Vector full = Vector::Zero(interior.size() + 2);
    full.segment(1, interior.size()) = interior;
    return full;
}

} // namespace

EigenResult principal_eigenvalue(const EigenProblem& p, const EigenOptions& opt)
{
    const Matrix A = assemble_operator(p);
    const Eigen::Index m = A.rows();
    const double normA = A.cwiseAbs().rowwise().sum().maxCoeff();
    const bool zmat = is_z_matrix(A);
    const double floor_tol = 64.0 * kEps * normA;

    double shift = -(normA + 1.0);
    Eigen::PartialPivLU<Matrix> lu(A - shift * Matrix::Identity(m, m));
    Vector x = Vector::Ones(m);
    EigenResult res;
    double lambda = 0.0;
    for (int it = 1; it <= opt.max_iter; ++it) {
        x = lu.solve(x);
        normalize_signed(x);
        const Vector Ax = A * x;
        lambda = x.dot(Ax) / x.dot(x);
        const double resid = (Ax - lambda * x).cwiseAbs().maxCoeff() / x.cwiseAbs().maxCoeff();
        res.iterations = it;
        res.residual = resid;
        if (resid <= opt.tol * std::max(1.0, std::abs(lambda)) + floor_tol) break;
        if (it == opt.max_iter) {
            std::ostringstream os;
            os << "inverse iteration stalled, residual " << resid;
            throw Error(ErrorCode::NonConvergence, os.str());
        }
        if (it % 5 == 0) {
            double s = lambda;
            if (zmat && x.minCoeff() > 0.0) {
                // Collatz-Wielandt lower bound keeps the shift below the Perron eigenvalue
                const double lo = (Ax.array() / x.array()).minCoeff();
                s = std::min(lambda, lo - 1e-9 * (1.0 + std::abs(lo)));
            }
            shift = s;
            lu.compute(A - shift * Matrix::Identity(m, m));
        }
    }
    if (x.minCoeff() <= 0.0) {
        std::ostringstream os;
        os << "eigenvector has nonpositive interior entry " << x.minCoeff();
        throw Error(ErrorCode::NonPositiveEigenfunction, os.str());
    }
    res.lambda1 = lambda;
    res.phi = embed(x / x.maxCoeff());
    return res;
}

double dense_principal_eigenvalue(const EigenProblem& p)
{
    const Matrix A = assemble_operator(p);
    const double asym = (A - A.transpose()).cwiseAbs().maxCoeff();
    if (asym <= 1e-12 * std::max(1.0, A.cwiseAbs().maxCoeff())) {
        const Matrix S = 0.5 * (A + A.transpose());
        Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }
    Eigen::EigenSolver<Matrix> es(A, false);
    return es.eigenvalues().real().minCoeff();
}

double rayleigh_quotient(const Vector& phi, const EigenProblem& p)
{
    p.validate();
    const int n = p.grid.n;
    if (phi.size() != n) throw Error(ErrorCode::DimensionMismatch, "phi size does not match grid");
    const double scale = phi.cwiseAbs().maxCoeff();
    if (!(scale > 0.0)) throw Error(ErrorCode::ZeroFunction, "phi is identically zero");
    if (std::abs(phi[0]) > 1e-14 * scale || std::abs(phi[n - 1]) > 1e-14 * scale)
        throw Error(ErrorCode::InvalidArgument, "phi must vanish at the boundary nodes");

    const double h = p.grid.spacing();
    const Vector w = p.grid.weights();
    double grad = 0.0;
    for (int i = 0; i + 1 < n; ++i) {
        const double dphi = phi[i + 1] - phi[i];
        grad += dphi * dphi / h;
    }
    grad *= p.d;
    double nonlocal = 0.0;
    if (p.kernel && p.c1.cwiseAbs().maxCoeff() > 0.0) {
        const Vector Kphi = apply_nonlocal(*p.kernel, phi);
        for (int i = 0; i < n; ++i) nonlocal += w[i] * p.c1[i] * phi[i] * Kphi[i];
    }
    double local = 0.0, norm = 0.0;
    for (int i = 0; i < n; ++i) {
        local += w[i] * p.c2[i] * phi[i] * phi[i];
        norm += w[i] * phi[i] * phi[i];
    }
    if (!(norm > 0.0)) throw Error(ErrorCode::ZeroFunction, "phi has zero discrete norm");
    return (grad - nonlocal + local) / norm;
}

namespace {

struct Pencil {
    Matrix Kc;  // c1 times the symmetric part of the interior kernel block
    Matrix B;   // d L + c2
};

Pencil make_pencil(const EigenProblem& p)
{
    p.validate();
    const double c1 = p.c1[0];
    const double c2 = p.c2[0];
    if ((p.c1.array() != c1).any() || (p.c2.array() != c2).any())
        throw Error(ErrorCode::InvalidArgument, "r02 needs constant coefficients");
    if (!(c1 > 0.0) || !(c2 > 0.0))
        throw Error(ErrorCode::InvalidArgument, "r02 needs c1 > 0 and c2 > 0");
    const int m = p.grid.n - 2;
    const double h = p.grid.spacing();
    Pencil pc;
    const auto Kint = p.kernel->samples.block(1, 1, m, m);
    pc.Kc = 0.5 * c1 * (Kint + Kint.transpose());
    pc.B = Matrix::Zero(m, m);
    for (int i = 0; i < m; ++i) {
        pc.B(i, i) = 2.0 * p.d / (h * h) + c2;
        if (i > 0) pc.B(i, i - 1) = -p.d / (h * h);
        if (i + 1 < m) pc.B(i, i + 1) = -p.d / (h * h);
    }
    return pc;
}

} // namespace

R02Result r02(const EigenProblem& p, const EigenOptions& opt)
{
    const Pencil pc = make_pencil(p);
    const Eigen::Index m = pc.B.rows();
    const Eigen::LLT<Matrix> chol(pc.B);
    const double scale = pc.B.cwiseAbs().rowwise().sum().maxCoeff() +
                         pc.Kc.cwiseAbs().rowwise().sum().maxCoeff();

    Vector x = Vector::Ones(m);
    // Collatz-Wielandt upper bound of B^{-1} Kc bounds the largest generalized eigenvalue
    auto cw_upper = [&](const Vector& v) {
        const Vector Cv = chol.solve(pc.Kc * v);
        return (Cv.array() / v.array()).maxCoeff();
    };
    double sigma = cw_upper(x);
    sigma += 1e-9 * (1.0 + std::abs(sigma));
    Eigen::PartialPivLU<Matrix> lu(sigma * pc.B - pc.Kc);
    R02Result res;
    double rho = 0.0;
    for (int it = 1; it <= opt.max_iter; ++it) {
        x = lu.solve(pc.B * x);
        normalize_signed(x);
        const Vector Kx = pc.Kc * x;
        const Vector Bx = pc.B * x;
        rho = x.dot(Kx) / x.dot(Bx);
        const double resid = (Kx - rho * Bx).cwiseAbs().maxCoeff() / x.cwiseAbs().maxCoeff();
        res.iterations = it;
        if (resid <= opt.tol * std::max(1.0, rho) + 64.0 * kEps * scale * std::max(1.0, rho)) break;
        if (it == opt.max_iter) throw Error(ErrorCode::NonConvergence, "r02 iteration stalled");
        if (it % 5 == 0 && x.minCoeff() > 0.0) {
            const double up = cw_upper(x);
            sigma = std::max(rho, up + 1e-9 * (1.0 + std::abs(up)));
            lu.compute(sigma * pc.B - pc.Kc);
        }
    }
    res.r02 = rho;
    res.phi = embed(x / x.maxCoeff());

    const EigenResult ev = principal_eigenvalue(p, opt);
    res.lambda1 = ev.lambda1;
    const double lam_tol = 1e-9 * std::max(1.0, scale * 1e-3);
    if (std::abs(1.0 - rho) > 1e-9 && std::abs(ev.lambda1) > lam_tol &&
        ((1.0 - rho > 0) != (ev.lambda1 > 0))) {
        std::ostringstream os;
        os << "r02 = " << rho << " but lambda1 = " << ev.lambda1;
        throw Error(ErrorCode::InconsistentThreshold, os.str());
    }
    return res;
}

double dense_r02(const EigenProblem& p)
{
    const Pencil pc = make_pencil(p);
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(pc.Kc, pc.B, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

int resolution_for(double length, const KernelSpec& spec, int n_min, int n_max)
{
    int n = n_min;
    if (spec.family != KernelFamily::Uniform) {
        const double want = std::ceil(length / (spec.width / 4.0)) + 1.0;
        if (want > n) n = static_cast<int>(std::min<double>(want, n_max));
    }
    return std::max(n, n_min);
}

double r02(double c1, double c2, double d, double left, double right, const KernelSpec& spec, int n)
{
    if (n <= 0) n = resolution_for(right - left, spec);
    auto K = std::make_shared<const KernelMatrix>(build_kernel(spec, Grid1D(left, right, n)));
    return r02(EigenProblem::constant(d, c1, c2, K)).r02;
}

double lambda1_interval(double c1, double c2, double d, double left, double right,
                        const KernelSpec& spec, int n)
{
    if (n <= 0) n = resolution_for(right - left, spec);
    auto K = std::make_shared<const KernelMatrix>(build_kernel(spec, Grid1D(left, right, n)));
    return principal_eigenvalue(EigenProblem::constant(d, c1, c2, K)).lambda1;
}

CriticalLengthResult critical_length(double c1, double c2, double d, const KernelSpec& spec,
                                     double tol)
{
    spec.validate();
    if (!spec.convolution())
        throw Error(ErrorCode::InvalidArgument, "critical length needs a translation-invariant kernel");
    if (spec.normalization == Normalization::ColumnStochastic)
        throw Error(ErrorCode::InvalidArgument,
                    "column normalization depends on the interval; use none or sinkhorn");
    CriticalLengthResult out;
    if (c1 <= c2) {
        std::ostringstream os;
        os << "c1 = " << c1 << " <= c2 = " << c2 << ": lambda1 > 0 at every length";
        throw Error(ErrorCode::BracketFailure, os.str());
    }
    auto lam = [&](double L) {
        ++out.evaluations;
        return lambda1_interval(c1, c2, d, -0.5 * L, 0.5 * L, spec);
    };
    double lo = 4.0 * (2.0 / 200.0);
    double hi = 100.0 * std::sqrt(d / std::max(c1 - c2, 1e-6));
    double flo = lam(lo);
    if (!(flo > 0.0)) throw Error(ErrorCode::BracketFailure, "lambda1 not positive at the lower bracket");
    double fhi = lam(hi);
    for (int k = 0; k < 10 && fhi >= 0.0; ++k) {
        hi *= 2.0;
        fhi = lam(hi);
    }
    if (fhi >= 0.0) throw Error(ErrorCode::BracketFailure, "lambda1 stays nonnegative after expansion");

    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = lam(mid);
        out.l_star = mid;
        out.lambda1 = fm;
        if (std::abs(fm) < tol || hi - lo < 4.0 * kEps * hi) break;
        if (fm > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return out;
}

double lambda1_local(double q, double d, double length)
{
    return d * M_PI * M_PI / (length * length) + q;
}

double lambda1_local(const Vector& q, double d, const Grid1D& g)
{
    return principal_eigenvalue(EigenProblem::local(d, g, q)).lambda1;
}

} // namespace nsir
