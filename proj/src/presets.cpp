#include "nsir/config.hpp"
#include "nsir/errors.hpp"

namespace nsir {

namespace {

RunConfig neumann_base(double k)
{
    RunConfig c;
    c.model = ModelKind::Neumann;
    c.params.k = k;
    c.params.d = 0.01;
    c.kernel = {KernelFamily::TruncatedGaussian, 0.2, Normalization::SinkhornSymmetric};
    c.left = -1;
    c.right = 1;
    c.n = 201;
    c.T = 200;
    c.init_profile = "perturbed";
    return c;
}

RunConfig stefan_base()
{
    RunConfig c;
    c.model = ModelKind::Stefan;
    c.params = ModelParams{};  // a=2, beta=1, b=1, k=5, gamma=0.5, d=1
    c.params.h0 = 0.3;
    c.kernel = {KernelFamily::TruncatedGaussian, 0.1, Normalization::None};
    c.stefan_init = {0.5, 0.5, 0.0};
    c.T = 200;
    return c;
}

} // namespace

std::vector<std::string> preset_names()
{
    return {"thm22", "thm23", "thm33", "thm42", "thm43", "cor41", "thm45", "lstar"};
}

RunConfig preset(const std::string& name)
{
    RunConfig c;
    if (name == "thm22") {
        c = neumann_base(2.0);
    } else if (name == "thm23") {
        c = neumann_base(5.0);
    } else if (name == "thm33") {
        c = neumann_base(5.0);
        c.model = ModelKind::Dirichlet;
        c.init_profile = "dirichlet";
        c.existence = true;
        c.T = 100;
    } else if (name == "thm42") {
        c = stefan_base();
        c.params.mu = 0.01;
    } else if (name == "thm43") {
        c = stefan_base();
        c.params.d = 0.1;
        c.params.k = 4;
        c.params.h0 = 0.5;
        c.params.mu = 0.1;
        c.stefan.L_dom = 30;
    } else if (name == "cor41") {
        c = stefan_base();
        c.params.h0 = 1.2;
        c.params.mu = 0.05;
        c.stefan_init.S_skew = 0.2;
    } else if (name == "thm45") {
        c = stefan_base();
        c.model = ModelKind::Thresholds;
        c.params.mu = 0.01;
        c.stefan.max_span = 10;
        c.mu_lo = 0.01;
        c.mu_hi = 10;
        c.mu_tol = 0.1;
        c.delta = 0.05;
        c.eps = 0.1;
    } else if (name == "lstar") {
        c.model = ModelKind::Eigen;
        c.params.d = 1;
        c.kernel = {KernelFamily::TruncatedGaussian, 0.05, Normalization::None};
        c.c1 = 5;
        c.c2 = 2.5;
        c.length = 2;
        c.lstar = true;
    } else {
        throw Error(ErrorCode::ConfigInvalid, "run.preset: unknown preset '" + name + "'");
    }
    c.preset = name;
    return c;
}

} // namespace nsir
