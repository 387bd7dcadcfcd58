#include "nsir/stefan.hpp"
#include "nsir/errors.hpp"
#include "nsir/spectral.hpp"

#include "fpenv.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <sstream>

namespace nsir {

double StefanInit::S0(double x) const { return S_amp * (1.0 + S_skew * std::tanh(x)); }

double StefanInit::I0(double x, double h0) const
{
    if (std::abs(x) >= h0) return 0.0;
    return I_amp * std::cos(0.5 * M_PI * x / h0);
}

void StefanInit::validate(double h0) const
{
    if (!(h0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "h0 must be positive");
    if (!(S_amp > 0.0) || !(I_amp > 0.0))
        throw Error(ErrorCode::InvalidArgument, "initial amplitudes must be positive");
    if (!(std::abs(S_skew) < 1.0)) throw Error(ErrorCode::InvalidArgument, "|S_skew| must be below 1");
}

double StefanNumerics::domain(double h0) const
{
    return L_dom > 0.0 ? L_dom : std::max(20.0 * h0, 10.0);
}

void StefanNumerics::validate() const
{
    if (M < 4 || K < 4) throw Error(ErrorCode::InvalidArgument, "need at least 4 cells per zone");
    if (dt < 0.0 || max_span < 0.0 || L_dom < 0.0)
        throw Error(ErrorCode::InvalidArgument, "numerics must be nonnegative");
    if (snapshots < 1) throw Error(ErrorCode::InvalidArgument, "need at least one snapshot");
}

namespace {

struct Layout {
    int K, M, n;
    double L;
};

void place(const Layout& lay, double g, double h, Vector& x)
{
    const int K = lay.K, M = lay.M;
    for (int i = 0; i <= K; ++i) {
        const double wl = double(K - i) / K, wr = double(i) / K;
        x[i] = wl * (-lay.L) + wr * g;
        x[K + M + (K - i)] = wr * h + wl * lay.L;
    }
    for (int j = 0; j <= M; ++j) {
        const double wl = double(M - j) / M, wr = double(j) / M;
        x[K + j] = wl * g + wr * h;
    }
    x[K] = g;
    x[K + M] = h;
}

void velocities(const Layout& lay, double gp, double hp, Vector& v)
{
    const int K = lay.K, M = lay.M;
    for (int i = 0; i <= K; ++i) {
        const double wl = double(K - i) / K, wr = double(i) / K;
        v[i] = wr * gp;
        v[K + M + (K - i)] = wr * hp;
        (void)wl;
    }
    for (int j = 0; j <= M; ++j) {
        const double wl = double(M - j) / M, wr = double(j) / M;
        v[K + j] = wl * gp + wr * hp;
    }
}

// antiderivatives of J(z) and z J(z), clipped to the support
struct Moments {
    KernelSpec spec;
    double R;
    double gauss_scale = 0;

    explicit Moments(const KernelSpec& s) : spec(s), R(kernel_support(s))
    {
        if (s.family == KernelFamily::TruncatedGaussian)
            gauss_scale = 0.5 / std::erf(kGaussianCut / std::sqrt(2.0));
    }
    void eval(double z, double& F, double& H) const
    {
        z = std::clamp(z, -R, R);
        const double w = spec.width;
        if (spec.family == KernelFamily::TruncatedGaussian) {
            F = gauss_scale * std::erf(z / (w * std::sqrt(2.0)));
            H = -gauss_scale * w * std::sqrt(2.0 / M_PI) * std::exp(-0.5 * (z / w) * (z / w));
        } else {
            F = z / (2.0 * w);
            H = z * z / (4.0 * w);
        }
    }
};

// exact integral of J(x - y) I(y) dy for I linear between the nodes ys
void nonlocal_into(const Moments& mo, const double* ys, const double* I, int m, const double* x, int nx,
                   double* out)
{
    std::vector<double> F(m), H(m);
    for (int i = 0; i < nx; ++i) {
        const double xi = x[i];
        out[i] = 0.0;
        if (xi + mo.R <= ys[0] || xi - mo.R >= ys[m - 1]) continue;
        int j0 = int(std::upper_bound(ys, ys + m, xi - mo.R) - ys) - 1;
        int j1 = int(std::lower_bound(ys, ys + m, xi + mo.R) - ys);
        j0 = std::max(j0, 0);
        j1 = std::min(j1, m - 1);
        for (int j = j0; j <= j1; ++j) mo.eval(xi - ys[j], F[j], H[j]);
        double acc = 0.0;
        for (int j = j0; j < j1; ++j) {
            const double dy = ys[j + 1] - ys[j];
            if (!(dy > 0.0)) continue;
            const double s = (I[j + 1] - I[j]) / dy;
            acc += (I[j] + s * (xi - ys[j])) * (F[j] - F[j + 1]) - s * (H[j] - H[j + 1]);
        }
        out[i] = std::max(acc, 0.0);
    }
}

double sup_S0(const StefanInit& in)
{
    return in.S_amp * (1.0 + std::abs(in.S_skew));
}

KernelSpec line_kernel(const KernelSpec& spec)
{
    spec.validate();
    if (!spec.convolution())
        throw Error(ErrorCode::InvalidArgument, "free-boundary runs need a convolution kernel");
    KernelSpec s = spec;
    s.normalization = Normalization::None;
    return s;
}

} // namespace

Vector nonlocal_on_interval(const KernelSpec& spec, const Vector& ys, const Vector& I, const Vector& x)
{
    if (ys.size() != I.size() || ys.size() < 2)
        throw Error(ErrorCode::DimensionMismatch, "nonlocal_on_interval: size mismatch");
    const Moments mo(line_kernel(spec));
    Vector out(x.size());
    nonlocal_into(mo, ys.data(), I.data(), int(ys.size()), x.data(), int(x.size()), out.data());
    return out;
}

StefanTrajectory simulate_free_boundary(const ModelParams& p, const KernelSpec& spec_in,
                                        const StefanInit& init, const StefanNumerics& num, double T)
{
    p.validate();
    num.validate();
    init.validate(p.h0);
    const KernelSpec spec = line_kernel(spec_in);
    if (!(T > 0.0)) throw Error(ErrorCode::InvalidArgument, "horizon T must be positive");
    const auto wall0 = std::chrono::steady_clock::now();
    detail::FlushDenormals ftz;

    const Layout lay{num.K, num.M, 2 * num.K + num.M + 1, num.domain(p.h0)};
    const Moments mo(spec);
    if (!(lay.L > p.h0 + mo.R))
        throw Error(ErrorCode::DomainOverrun, "L_dom must exceed h0 plus the kernel support");
    if (2.0 * p.h0 < 3.0 * (2.0 * lay.L / (lay.n - 1)))
        throw Error(ErrorCode::FrontCollision, "initial interval spans fewer than 3 grid cells");

    StefanTrajectory tr;
    tr.params = p;
    tr.kernel = spec;
    tr.numerics = num;
    tr.init = init;
    tr.T = T;
    tr.A = std::max(sup_S0(init) + init.I_amp, p.n_star());
    const double A = tr.A;
    const double dt0 = num.dt > 0.0 ? num.dt : 0.2 / (p.a + p.beta + p.gamma + (p.b + p.k) * A);
    tr.dt_nominal = dt0;

    const int n = lay.n, K = lay.K, M = lay.M;
    double g = -p.h0, h = p.h0, t = 0.0;
    Vector x(n), v(n), S(n), I = Vector::Zero(M + 1), R = Vector::Zero(M + 1);
    place(lay, g, h, x);
    for (int i = 0; i < n; ++i) S[i] = init.S0(x[i]);
    for (int j = 1; j < M; ++j) I[j] = init.I0(x[K + j], p.h0);

    Vector P(n), Sn(n), In(M + 1), Rn(M + 1);
    Vector sub(n), dg(n), sup(n), rhs(n);
    Vector subI(M - 1), dgI(M - 1), supI(M - 1), rI(M - 1), rR(M - 1);

    auto front_speeds = [&](double& gp, double& hp) {
        const double dx = (h - g) / M;
        hp = p.mu * (4.0 * I[M - 1] - I[M - 2]) / (2.0 * dx);
        gp = -p.mu * (4.0 * I[1] - I[2]) / (2.0 * dx);
    };
    auto snapshot = [&](double gp, double hp) {
        FrontState fs;
        fs.t = t;
        fs.g = g;
        fs.h = h;
        fs.gp = gp;
        fs.hp = hp;
        fs.x = x;
        fs.S = S;
        fs.I = I;
        fs.R = R;
        tr.snapshots.push_back(std::move(fs));
    };
    const int n_fronts = 2000;
    int next_front = 0, next_snap = 0;
    auto record = [&](bool force) {
        double gp, hp;
        front_speeds(gp, hp);
        while (next_front <= n_fronts && t >= T * next_front / n_fronts - 1e-12 * T) ++next_front, force = true;
        if (force) tr.fronts.push_back({t, g, h, hp, -gp, I.maxCoeff()});
        bool snap = false;
        while (next_snap <= num.snapshots && t >= T * next_snap / num.snapshots - 1e-12 * T) ++next_snap, snap = true;
        return std::make_pair(snap, std::make_pair(gp, hp));
    };

    {
        auto r0 = record(true);
        snapshot(r0.second.first, r0.second.second);
    }
    tr.min_component = std::min({S.minCoeff(), I.minCoeff()});
    tr.max_total = 0.0;
    for (int i = 0; i < n; ++i) {
        const int j = i - K;
        const double N = S[i] + (j >= 0 && j <= M ? I[j] + R[j] : 0.0);
        tr.max_total = std::max(tr.max_total, N);
    }
    tr.min_front_step = std::numeric_limits<double>::infinity();

    const double a = p.a, be = p.beta, b = p.b, k = p.k, ga = p.gamma, d = p.d;
    long steps = 0;
    while (t < T * (1.0 - 1e-14)) {
        double gp, hp;
        front_speeds(gp, hp);
        velocities(lay, gp, hp, v);

        double dt = std::min(dt0, T - t);
        for (int i = 1; i + 1 < n; ++i) {
            if (v[i] > 0.0) dt = std::min(dt, 0.5 * (x[i + 1] - x[i]) / v[i]);
            else if (v[i] < 0.0) dt = std::min(dt, 0.5 * (x[i] - x[i - 1]) / -v[i]);
        }
        if (!(dt > 1e-14 * std::max(T, 1.0)))
            throw Error(ErrorCode::CFLViolation, "front speed forces a vanishing time step");

        if (I.maxCoeff() > 0.0) nonlocal_into(mo, x.data() + K, I.data(), M + 1, x.data(), n, P.data());
        else P.setZero();

        auto upwind = [&](const double* u, int i, int lo, int hi) {
            // u indexed on [lo, hi] with zero outside for I/R blocks
            if (v[i] > 0.0) {
                const double un = i + 1 <= hi ? u[i + 1 - lo] : 0.0;
                return v[i] * (un - u[i - lo]) / (x[i + 1] - x[i]);
            }
            if (v[i] < 0.0) {
                const double up = i - 1 >= lo ? u[i - 1 - lo] : 0.0;
                return v[i] * (u[i - lo] - up) / (x[i] - x[i - 1]);
            }
            return 0.0;
        };

        for (int i = 0; i < n; ++i) {
            const int j = i - K;
            const bool inner = j >= 0 && j <= M;
            const double s = S[i];
            const double N = s + (inner ? I[j] + R[j] : 0.0);
            rhs[i] = s + dt * (a * N - be * s - b * N * s - k * P[i] * s + upwind(S.data(), i, 0, n - 1));
        }
        for (int j = 1; j < M; ++j) {
            const int i = K + j;
            const double N = S[i] + I[j] + R[j];
            rI[j - 1] = I[j] + dt * (k * P[i] * S[i] - (ga + be) * I[j] - b * N * I[j] +
                                     upwind(I.data(), i, K, K + M));
            rR[j - 1] = R[j] + dt * (ga * I[j] - be * R[j] - b * N * R[j] + upwind(R.data(), i, K, K + M));
        }

        const double c = dt * d;
        for (int i = 1; i + 1 < n; ++i) {
            const double hm = x[i] - x[i - 1], hpp = x[i + 1] - x[i];
            const double al = 2.0 / (hm * (hm + hpp)), ar = 2.0 / (hpp * (hm + hpp));
            sub[i] = -c * al;
            sup[i] = -c * ar;
            dg[i] = 1.0 + c * (al + ar);
        }
        {
            const double h1 = x[1] - x[0], h2 = x[n - 1] - x[n - 2];
            sub[0] = 0.0;
            sup[0] = -2.0 * c / (h1 * h1);
            dg[0] = 1.0 + 2.0 * c / (h1 * h1);
            sup[n - 1] = 0.0;
            sub[n - 1] = -2.0 * c / (h2 * h2);
            dg[n - 1] = 1.0 + 2.0 * c / (h2 * h2);
        }
        Sn = solve_tridiagonal(sub, dg, sup, rhs);
        for (int j = 1; j < M; ++j) {
            subI[j - 1] = sub[K + j];
            supI[j - 1] = sup[K + j];
            dgI[j - 1] = dg[K + j];
        }
        const Vector Iin = solve_tridiagonal(subI, dgI, supI, rI);
        const Vector Rin = solve_tridiagonal(subI, dgI, supI, rR);
        In.setZero();
        Rn.setZero();
        In.segment(1, M - 1) = Iin;
        Rn.segment(1, M - 1) = Rin;

        S.swap(Sn);
        I.swap(In);
        R.swap(Rn);
        const double g_new = g + dt * gp, h_new = h + dt * hp;
        tr.min_front_step = std::min({tr.min_front_step, h_new - h, g - g_new});
        g = g_new;
        h = h_new;
        t += dt;
        ++steps;
        place(lay, g, h, x);
        tr.max_symmetry_defect = std::max(tr.max_symmetry_defect, std::abs(g + h));

        double mn = std::min(S.minCoeff(), std::min(I.minCoeff(), R.minCoeff()));
        double mx = 0.0;
        for (int i = 0; i < n; ++i) {
            const int j = i - K;
            mx = std::max(mx, S[i] + (j >= 0 && j <= M ? I[j] + R[j] : 0.0));
        }
        tr.min_component = std::min(tr.min_component, mn);
        tr.max_total = std::max(tr.max_total, mx);
        if (num.check_positivity && mn < -1e-12) {
            std::ostringstream os;
            os << "negative density " << mn << " at t = " << t;
            throw Error(ErrorCode::PositivityLoss, os.str());
        }
        if (!std::isfinite(mx)) throw Error(ErrorCode::PositivityLoss, "free-boundary solution blew up");
        if (h >= lay.L - mo.R || g <= -lay.L + mo.R) {
            std::ostringstream os;
            os << "front reached the truncated domain at t = " << t << " (g = " << g << ", h = " << h
               << ", L_dom = " << lay.L << ")";
            throw Error(ErrorCode::DomainOverrun, os.str());
        }

        const bool span_stop = num.max_span > 0.0 && h - g >= num.max_span;
        const bool last = span_stop || t >= T * (1.0 - 1e-14);
        auto rec = record(last);
        if (rec.first || last) snapshot(rec.second.first, rec.second.second);
        if (span_stop) {
            tr.stop = StopReason::SpanLimit;
            break;
        }
    }
    tr.steps = steps;
    if (steps == 0) tr.min_front_step = 0.0;
    tr.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    return tr;
}

const char* to_string(Verdict v)
{
    switch (v) {
    case Verdict::Spreading: return "Spreading";
    case Verdict::Vanishing: return "Vanishing";
    case Verdict::Undecided: return "Undecided";
    }
    return "?";
}

double stefan_l_star(const ModelParams& p, const KernelSpec& spec)
{
    return critical_length(p.k * p.n_star(), p.a + p.gamma, p.d, line_kernel(spec)).l_star;
}

double stefan_r02(const ModelParams& p, const KernelSpec& spec, double c2)
{
    return r02(p.k * p.n_star(), c2, p.d, -p.h0, p.h0, line_kernel(spec));
}

Classification classify(const StefanTrajectory& tr, double l_star, const ClassifyOptions& opt)
{
    Classification c;
    const FrontState& f = tr.final();
    c.t_end = f.t;
    c.final_span = f.h - f.g;
    c.I_max_final = f.I.maxCoeff();
    c.l_star_used = l_star;
    c.r02_initial = stefan_r02(tr.params, tr.kernel, tr.params.a + tr.params.gamma);

    // time-averaged h' - g' over the last tenth of the run
    const double t0 = 0.9 * c.t_end;
    const auto& fr = tr.fronts;
    double span0 = fr.front().h - fr.front().g;
    for (size_t i = 1; i < fr.size(); ++i) {
        if (fr[i].t >= t0) {
            const double w = (t0 - fr[i - 1].t) / (fr[i].t - fr[i - 1].t);
            span0 = (1.0 - w) * (fr[i - 1].h - fr[i - 1].g) + w * (fr[i].h - fr[i].g);
            break;
        }
    }
    c.span_rate = c.t_end > 0.0 ? (c.final_span - span0) / (c.t_end - t0) : 0.0;

    if (c.span_rate < opt.tol_rate && c.final_span <= l_star + opt.tol_span && c.I_max_final < opt.eps_I)
        c.verdict = Verdict::Vanishing;
    else if (c.final_span > l_star + opt.tol_span && c.span_rate > 10.0 * opt.tol_rate &&
             c.I_max_final > opt.eps_I)
        c.verdict = Verdict::Spreading;
    else
        c.verdict = Verdict::Undecided;
    return c;
}

MuBracket critical_mu(const ModelParams& p, const KernelSpec& spec, const StefanInit& init,
                      const StefanNumerics& num, double mu_lo, double mu_hi, double T,
                      const CriticalMuOptions& opt)
{
    if (!(mu_lo > 0.0 && mu_lo < mu_hi))
        throw Error(ErrorCode::BracketInvalid, "need 0 < mu_lo < mu_hi");
    const double l_star = stefan_l_star(p, spec);
    MuBracket out;
    auto probe = [&](double mu) {
        ModelParams q = p;
        q.mu = mu;
        double horizon = T;
        for (int k = 0;; ++k) {
            const Classification c = classify(simulate_free_boundary(q, spec, init, num, horizon), l_star,
                                              opt.classify);
            out.probes.push_back({mu, c.verdict, c.final_span, horizon});
            if (c.verdict != Verdict::Undecided) return c.verdict;
            if (k >= opt.horizon_doublings) {
                std::ostringstream os;
                os << "mu = " << mu << " stays undecided at T = " << horizon;
                throw Error(ErrorCode::UndecidedProbe, os.str());
            }
            horizon *= 2.0;
        }
    };
    if (probe(mu_lo) != Verdict::Vanishing) {
        std::ostringstream os;
        os << "mu_lo = " << mu_lo << " does not vanish";
        throw Error(ErrorCode::BracketInvalid, os.str());
    }
    if (probe(mu_hi) != Verdict::Spreading) {
        std::ostringstream os;
        os << "mu_hi = " << mu_hi << " does not spread";
        throw Error(ErrorCode::BracketInvalid, os.str());
    }
    double lo = mu_lo, hi = mu_hi;
    for (int it = 0; it < opt.max_iter && hi - lo >= opt.tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (probe(mid) == Verdict::Vanishing) lo = mid;
        else hi = mid;
    }
    out.mu_lo = lo;
    out.mu_hi = hi;
    std::vector<MuProbe> sorted = out.probes;
    std::stable_sort(sorted.begin(), sorted.end(), [](const MuProbe& x, const MuProbe& y) { return x.mu < y.mu; });
    bool seen_spread = false;
    for (const auto& pr : sorted) {
        if (pr.verdict == Verdict::Spreading) seen_spread = true;
        if (pr.verdict == Verdict::Vanishing && seen_spread) out.monotone = false;
    }
    return out;
}

UpperSolutionReport upper_solution_check(const ModelParams& p, const KernelSpec& spec_in,
                                         const StefanInit& init, double delta, double A_amp,
                                         double eps, double margin, int samples)
{
    p.validate();
    init.validate(p.h0);
    if (!(delta > 0.0 && delta < 0.5)) throw Error(ErrorCode::InvalidArgument, "delta must lie in (0, 1/2)");
    if (!(eps >= 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be nonnegative");
    if (samples < 4) throw Error(ErrorCode::InvalidArgument, "need at least 4 samples");
    const KernelSpec spec = line_kernel(spec_in);
    const double h0 = p.h0, Ns = p.n_star();

    UpperSolutionReport rep;
    rep.delta = delta;
    rep.eps = eps;

    const Grid1D grid(-h0, h0, samples + 2);
    auto Kp = std::make_shared<const KernelMatrix>(build_kernel(spec, grid));
    const EigenResult er =
        principal_eigenvalue(EigenProblem::constant(p.d, p.k * (Ns + eps), p.gamma + p.beta, Kp));
    rep.lambda_eps = er.lambda1;
    if (!(er.lambda1 > 0.0)) {
        std::ostringstream os;
        os << "lambda_eps = " << er.lambda1 << " is not positive";
        throw Error(ErrorCode::EigenvaluePositivityFailure, os.str());
    }
    const Vector& phi = er.phi;
    const Vector z = grid.nodes();
    const int n = grid.n;
    const double dz = grid.spacing();
    rep.phi_slope = std::max(std::abs(3.0 * phi[n - 1] - 4.0 * phi[n - 2] + phi[n - 3]),
                             std::abs(-3.0 * phi[0] + 4.0 * phi[1] - phi[2])) /
                    (2.0 * dz);

    const double s0 = 1.0 + delta;
    const int nx = 2001;
    if (A_amp <= 0.0) {
        double ratio = 0.0;
        for (int i = 1; i + 1 < nx; ++i) {
            const double xx = -h0 + 2.0 * h0 * i / (nx - 1);
            ratio = std::max(ratio, init.I0(xx, h0) / interp_linear(z, phi, xx / s0));
        }
        A_amp = (1.0 + margin) * ratio;
    }
    rep.A_amp = A_amp;
    rep.slack_initial = std::numeric_limits<double>::infinity();
    for (int i = 0; i < nx; ++i) {
        const double xx = -h0 + 2.0 * h0 * i / (nx - 1);
        rep.slack_initial = std::min(rep.slack_initial, A_amp * interp_linear(z, phi, xx / s0) - init.I0(xx, h0));
    }

    rep.mu0 = h0 * delta * delta * (1.0 + delta) / (A_amp * rep.phi_slope);

    // residual of I_t - d I_xx - k N* P[I] + (gamma + beta) I, divided by A e^{-delta t}
    const Vector w = grid.weights();
    const double t_max = 20.0 / delta;
    rep.slack_pde = std::numeric_limits<double>::infinity();
    rep.slack_front = std::numeric_limits<double>::infinity();
    Vector Ps(n);
    for (int it = 0; it < samples; ++it) {
        const double t = t_max * it / (samples - 1);
        const double e = std::exp(-delta * t);
        const double sg = 1.0 + 2.0 * delta - delta * e;
        const double sgp = delta * delta * e;
        for (int i = 1; i + 1 < n; ++i) {
            double acc = 0.0;
            for (int j = 1; j + 1 < n; ++j) acc += w[j] * kernel_profile(spec, sg * (z[i] - z[j])) * phi[j];
            Ps[i] = sg * acc;
        }
        for (int i = 1; i + 1 < n; ++i) {
            const double d2 = (phi[i - 1] - 2.0 * phi[i] + phi[i + 1]) / (dz * dz);
            const double d1 = (phi[i + 1] - phi[i - 1]) / (2.0 * dz);
            const double r = -delta * phi[i] - d1 * z[i] * sgp / sg - p.d * d2 / (sg * sg) -
                             p.k * Ns * Ps[i] + (p.gamma + p.beta) * phi[i];
            rep.slack_pde = std::min(rep.slack_pde, r);
        }
        const double mu = 0.5 * rep.mu0;
        rep.slack_front = std::min(rep.slack_front, h0 * delta * delta - mu * A_amp * rep.phi_slope / sg);
    }
    rep.pde_ok = rep.slack_pde > 0.0;
    rep.front_ok = rep.slack_front > 0.0;
    rep.initial_ok = rep.slack_initial > 0.0 && h0 * s0 > h0;
    return rep;
}

} // namespace nsir
