#pragma once

#include "nsir/grid.hpp"

#include <string>
#include <utility>
#include <vector>

namespace nsir {

enum class KernelFamily { Uniform, TruncatedGaussian, TopHat };
enum class Normalization { ColumnStochastic, SinkhornSymmetric, None };

struct KernelSpec {
    KernelFamily family = KernelFamily::TruncatedGaussian;
    // Gaussian: standard deviation; TopHat: half-width of the support
    double width = 0.2;
    Normalization normalization = Normalization::None;

    void validate() const;
    bool convolution() const { return family != KernelFamily::Uniform; }
};

// Gaussian kernels are cut at this many standard deviations and renormalized on the line.
inline constexpr double kGaussianCut = 4.0;

// J(z) for convolution families, with integral one over the real line.
double kernel_profile(const KernelSpec& spec, double z);
// radius outside of which J vanishes
double kernel_support(const KernelSpec& spec);

struct KernelMatrix {
    Grid1D grid;
    KernelSpec spec;
    RowMatrix samples;        // P(x_i, x_j) * w_j
    Vector weights;           // trapezoid weights
    Vector column_integrals;  // sum_i w_i P(x_i, x_j)
    bool symmetric = false;
    double max_asymmetry = 0.0;
    int sinkhorn_sweeps = 0;
    std::vector<std::string> warnings;
    std::vector<std::pair<int, int>> band;  // first/last nonzero column of each row

    int n() const { return grid.n; }
    double value(int i, int j) const { return samples(i, j) / weights[j]; }
};

struct SinkhornOptions {
    double tol = 1e-10;
    int max_sweeps = 100000;
};

KernelMatrix build_kernel(const KernelSpec& spec, const Grid1D& grid,
                          const SinkhornOptions& sk = {});

Vector apply_nonlocal(const KernelMatrix& K, const Vector& u);

struct NormalizationReport {
    double max_column_deviation = 0.0;
    double max_row_deviation = 0.0;
    double max_asymmetry = 0.0;
};

NormalizationReport check_normalization(const KernelMatrix& K);

const char* to_string(KernelFamily f);
const char* to_string(Normalization n);
KernelFamily parse_family(const std::string& s);
Normalization parse_normalization(const std::string& s);

} // namespace nsir
