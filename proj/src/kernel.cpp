#include "nsir/kernel.hpp"
#include "nsir/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nsir {

void KernelSpec::validate() const
{
    if (!(width > 0.0) || !std::isfinite(width))
        throw Error(ErrorCode::InvalidArgument, "kernel width must be positive");
}

double kernel_support(const KernelSpec& spec)
{
    switch (spec.family) {
    case KernelFamily::TruncatedGaussian: return kGaussianCut * spec.width;
    case KernelFamily::TopHat: return spec.width;
    case KernelFamily::Uniform: break;
    }
    return std::numeric_limits<double>::infinity();
}

double kernel_profile(const KernelSpec& spec, double z)
{
    const double az = std::abs(z);
    switch (spec.family) {
    case KernelFamily::TruncatedGaussian: {
        const double s = spec.width;
        if (az > kGaussianCut * s) return 0.0;
        static const double mass = std::erf(kGaussianCut / std::sqrt(2.0));
        return std::exp(-0.5 * (z / s) * (z / s)) / (s * std::sqrt(2.0 * M_PI) * mass);
    }
    case KernelFamily::TopHat:
        return az <= spec.width ? 0.5 / spec.width : 0.0;
    case KernelFamily::Uniform:
        break;
    }
    throw Error(ErrorCode::InvalidArgument, "uniform kernel has no convolution profile");
}

namespace {

// symmetric scaling f_i P_ij f_j so that sum_i w_i P_ij = 1
int sinkhorn_symmetric(RowMatrix& P, const Vector& w, const SinkhornOptions& opt)
{
    const Eigen::Index n = P.rows();
    for (Eigen::Index i = 0; i < n; ++i)
        if (P.row(i).maxCoeff() <= 0.0)
            throw Error(ErrorCode::SinkhornNonConvergence, "kernel has an all-zero row");

    const Vector sw = w.array().sqrt();
    RowMatrix A = sw.asDiagonal() * P * sw.asDiagonal();
    Vector f = sw;
    auto deviation = [&](const Vector& Af) {
        return ((f.array() * Af.array()) / w.array() - 1.0).abs().maxCoeff();
    };

    Vector Af = A * f;
    double dev = deviation(Af);
    int sweeps = 0;
    while (dev >= opt.tol) {
        if (sweeps >= opt.max_sweeps) {
            std::ostringstream os;
            os << "deviation " << dev << " after " << sweeps << " sweeps";
            throw Error(ErrorCode::SinkhornNonConvergence, os.str());
        }
        f = (f.array() * w.array() / Af.array()).sqrt();
        Af = A * f;
        dev = deviation(Af);
        ++sweeps;
    }
    // keep going while it still helps; the constant-state fixed points want roundoff level sums
    int stale = 0;
    while (stale < 5 && sweeps < opt.max_sweeps && dev > 1e-15) {
        Vector f2 = (f.array() * w.array() / Af.array()).sqrt();
        Vector Af2 = A * f2;
        double dev2 = deviation(Af2);
        ++sweeps;
        if (dev2 < dev) {
            f = f2;
            Af = Af2;
            dev = dev2;
            stale = 0;
        } else {
            ++stale;
        }
    }

    const Vector d = f.array() / sw.array();
    for (Eigen::Index i = 0; i < n; ++i) {
        P(i, i) = d[i] * P(i, i) * d[i];
        for (Eigen::Index j = i + 1; j < n; ++j) {
            double v = d[i] * P(i, j) * d[j];
            P(i, j) = v;
            P(j, i) = v;
        }
    }
    return sweeps;
}

} // namespace

KernelMatrix build_kernel(const KernelSpec& spec, const Grid1D& grid, const SinkhornOptions& sk)
{
    spec.validate();
    grid.validate();
    const int n = grid.n;
    KernelMatrix K;
    K.grid = grid;
    K.spec = spec;
    K.weights = grid.weights();
    const Vector xs = grid.nodes();

    RowMatrix P(n, n);
    if (spec.family == KernelFamily::Uniform) {
        P.setConstant(1.0 / grid.length());
    } else {
        if (spec.width < grid.spacing()) {
            std::ostringstream os;
            os << "kernel under-resolved: width " << spec.width << " < spacing " << grid.spacing();
            K.warnings.push_back(os.str());
        }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) P(i, j) = kernel_profile(spec, xs[i] - xs[j]);
    }

    switch (spec.normalization) {
    case Normalization::ColumnStochastic: {
        for (int j = 0; j < n; ++j) {
            double c = K.weights.dot(P.col(j));
            if (!(c > 0.0))
                throw Error(ErrorCode::InvalidArgument, "kernel column with zero mass");
            P.col(j) /= c;
        }
        break;
    }
    case Normalization::SinkhornSymmetric:
        K.sinkhorn_sweeps = sinkhorn_symmetric(P, K.weights, sk);
        break;
    case Normalization::None:
        break;
    }

    K.samples = P * K.weights.asDiagonal();
    K.column_integrals = P.transpose() * K.weights;
    K.max_asymmetry = (P - P.transpose()).cwiseAbs().maxCoeff();
    K.symmetric = K.max_asymmetry < 1e-12;

    K.band.resize(n);
    for (int i = 0; i < n; ++i) {
        int lo = 0, hi = n - 1;
        while (lo < n && K.samples(i, lo) == 0.0) ++lo;
        while (hi > lo && K.samples(i, hi) == 0.0) --hi;
        if (lo == n) hi = lo - 1;
        K.band[i] = {lo, hi};
    }
    return K;
}

Vector apply_nonlocal(const KernelMatrix& K, const Vector& u)
{
    if (u.size() != K.n()) throw Error(ErrorCode::DimensionMismatch, "apply_nonlocal: size mismatch");
    Vector v(K.n());
    for (int i = 0; i < K.n(); ++i) {
        auto [lo, hi] = K.band[i];
        double s = 0.0;
        for (int j = lo; j <= hi; ++j) s += K.samples(i, j) * u[j];
        v[i] = s;
    }
    return v;
}

NormalizationReport check_normalization(const KernelMatrix& K)
{
    NormalizationReport r;
    const int n = K.n();
    for (int j = 0; j < n; ++j) {
        double c = 0.0;
        for (int i = 0; i < n; ++i) c += K.weights[i] * K.value(i, j);
        r.max_column_deviation = std::max(r.max_column_deviation, std::abs(c - 1.0));
        r.max_row_deviation = std::max(r.max_row_deviation, std::abs(K.samples.row(j).sum() - 1.0));
        for (int i = 0; i < j; ++i)
            r.max_asymmetry = std::max(r.max_asymmetry, std::abs(K.value(i, j) - K.value(j, i)));
    }
    return r;
}

const char* to_string(KernelFamily f)
{
    switch (f) {
    case KernelFamily::Uniform: return "uniform";
    case KernelFamily::TruncatedGaussian: return "gaussian";
    case KernelFamily::TopHat: return "tophat";
    }
    return "?";
}

const char* to_string(Normalization n)
{
    switch (n) {
    case Normalization::ColumnStochastic: return "column";
    case Normalization::SinkhornSymmetric: return "sinkhorn";
    case Normalization::None: return "none";
    }
    return "?";
}

KernelFamily parse_family(const std::string& s)
{
    if (s == "uniform") return KernelFamily::Uniform;
    if (s == "gaussian" || s == "truncated_gaussian") return KernelFamily::TruncatedGaussian;
    if (s == "tophat" || s == "top_hat") return KernelFamily::TopHat;
    throw Error(ErrorCode::InvalidArgument, "unknown kernel family '" + s + "'");
}

Normalization parse_normalization(const std::string& s)
{
    if (s == "column" || s == "column_stochastic") return Normalization::ColumnStochastic;
    if (s == "sinkhorn" || s == "sinkhorn_symmetric") return Normalization::SinkhornSymmetric;
    if (s == "none") return Normalization::None;
    throw Error(ErrorCode::InvalidArgument, "unknown normalization '" + s + "'");
}

} // namespace nsir
