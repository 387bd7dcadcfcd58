#include "nsir/ibvp.hpp"
#include "nsir/errors.hpp"
#include "nsir/spectral.hpp"

#include "fpenv.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace nsir {

double bound_M(const ModelParams& p, const FieldState& init)
{
    return std::max((init.S + init.I + init.R).maxCoeff(), p.n_star());
}

double cfl_limit(const ModelParams& p, const Grid1D& g)
{
    const double h = g.spacing();
    return 0.9 * h * h / (2.0 * p.d);
}

double default_dt(const ModelParams& p, const Grid1D& g, double M)
{
    return std::min(cfl_limit(p, g), 0.2 / (p.a + p.gamma + p.k * M));
}

namespace {

void laplacian(const Vector& u, Vector& out, double inv_h2, Boundary bc)
{
    const Eigen::Index n = u.size();
    const double* x = u.data();
    double* o = out.data();
    for (Eigen::Index i = 1; i + 1 < n; ++i) o[i] = (x[i - 1] - 2.0 * x[i] + x[i + 1]) * inv_h2;
    if (bc == Boundary::Neumann) {
        o[0] = (2.0 * x[1] - 2.0 * x[0]) * inv_h2;
        o[n - 1] = (2.0 * x[n - 2] - 2.0 * x[n - 1]) * inv_h2;
    } else {
        o[0] = 0.0;
        o[n - 1] = 0.0;
    }
}

void check_state(const FieldState& s, const Grid1D& g)
{
    if (s.S.size() != g.n || s.I.size() != g.n || s.R.size() != g.n)
        throw Error(ErrorCode::DimensionMismatch, "initial state does not match the kernel grid");
    if (s.S.minCoeff() < 0.0 || s.I.minCoeff() < 0.0 || s.R.minCoeff() < 0.0)
        throw Error(ErrorCode::InvalidArgument, "initial state must be nonnegative");
}

} // namespace

Trajectory simulate(const ModelParams& p, const KernelMatrix& K, const FieldState& init, double T,
                    Boundary bc, const SimOptions& opt)
{
    p.validate();
    const Grid1D& g = K.grid;
    check_state(init, g);
    if (!(T > 0.0)) throw Error(ErrorCode::InvalidArgument, "horizon T must be positive");
    if (bc == Boundary::Dirichlet) {
        const double tolb = 1e-14;
        if (std::abs(init.S[0]) > tolb || std::abs(init.I[0]) > tolb || std::abs(init.R[0]) > tolb ||
            std::abs(init.S[g.n - 1]) > tolb || std::abs(init.I[g.n - 1]) > tolb ||
            std::abs(init.R[g.n - 1]) > tolb)
            throw Error(ErrorCode::InvalidArgument, "Dirichlet data must vanish at the ends");
    }
    const auto wall0 = std::chrono::steady_clock::now();
    detail::FlushDenormals ftz;

    const double M = bound_M(p, init);
    double dt = opt.dt > 0.0 ? opt.dt : default_dt(p, g, M);
    if (opt.enforce_cfl && dt > cfl_limit(p, g) * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "dt = " << dt << " exceeds 0.9 h^2/(2d) = " << cfl_limit(p, g);
        throw Error(ErrorCode::CFLViolation, os.str());
    }
    const long steps = std::max(1L, std::lround(std::ceil(T / dt - 1e-9)));
    dt = T / steps;

    Trajectory tr;
    tr.grid = g;
    tr.bc = bc;
    tr.params = p;
    tr.dt = dt;
    tr.record_every = opt.record_every > 0 ? opt.record_every : std::max(1L, steps / 400);

    const int n = g.n;
    const double h = g.spacing();
    const double inv_h2 = 1.0 / (h * h);
    const int i0 = bc == Boundary::Dirichlet ? 1 : 0;
    const int i1 = bc == Boundary::Dirichlet ? n - 1 : n;

    Vector S = init.S, I = init.I, R = init.R;
    if (bc == Boundary::Dirichlet) {
        S[0] = I[0] = R[0] = 0.0;
        S[n - 1] = I[n - 1] = R[n - 1] = 0.0;
    }
    Vector lS(n), lI(n), lR(n), Sn = S, In = I, Rn = R;

    tr.snapshots.push_back({0.0, S, I, R});
    tr.snapshot_steps.push_back(0);
    tr.min_component = std::min({S.minCoeff(), I.minCoeff(), R.minCoeff()});
    tr.max_total = (S + I + R).maxCoeff();

    const double a = p.a, be = p.beta, b = p.b, k = p.k, ga = p.gamma, d = p.d;
    int quiet = 0;
    long n_done = 0;
    for (long step = 1; step <= steps; ++step) {
        const Vector P = apply_nonlocal(K, I);
        laplacian(S, lS, inv_h2, bc);
        laplacian(I, lI, inv_h2, bc);
        laplacian(R, lR, inv_h2, bc);
        double change = 0.0, mn = 0.0, mx = 0.0, maxI = 0.0;
        for (int i = i0; i < i1; ++i) {
            const double s = S[i], ii = I[i], r = R[i];
            const double N = s + ii + r;
            const double inf = k * P[i] * s;
            Sn[i] = s + dt * (d * lS[i] + a * N - be * s - b * N * s - inf);
            In[i] = ii + dt * (d * lI[i] + inf - (ga + be) * ii - b * N * ii);
            Rn[i] = r + dt * (d * lR[i] + ga * ii - be * r - b * N * r);
            change = std::max({change, std::abs(Sn[i] - s), std::abs(In[i] - ii), std::abs(Rn[i] - r)});
            mn = std::min({mn, Sn[i], In[i], Rn[i]});
            mx = std::max(mx, Sn[i] + In[i] + Rn[i]);
            maxI = std::max(maxI, In[i]);
        }
        S.swap(Sn);
        I.swap(In);
        R.swap(Rn);
        n_done = step;
        tr.min_component = std::min(tr.min_component, mn);
        tr.max_total = std::max(tr.max_total, mx);
        if (opt.check_positivity && mn < -1e-12) {
            std::ostringstream os;
            os << "negative density " << mn << " at t = " << step * dt;
            throw Error(ErrorCode::PositivityLoss, os.str());
        }
        if (!std::isfinite(mx)) throw Error(ErrorCode::PositivityLoss, "solution blew up");

        bool stop = false;
        if (opt.stop_on_steady) {
            quiet = change / dt < opt.steady_tol ? quiet + 1 : 0;
            if (quiet >= opt.steady_window) {
                tr.steady = true;
                stop = true;
            }
        }
        if (opt.stop_below_I > 0.0 && maxI < opt.stop_below_I) stop = true;
        if (step % tr.record_every == 0 || step == steps || stop) {
            tr.snapshots.push_back({step * dt, S, I, R});
            tr.snapshot_steps.push_back(step);
        }
        if (stop) break;
    }
    tr.steps = n_done;
    tr.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    return tr;
}

Trajectory simulate_neumann(const ModelParams& p, const KernelMatrix& K, const FieldState& init,
                            double T, const SimOptions& opt)
{
    if (init.S.size() == K.n() && (init.S.minCoeff() <= 0.0 || init.I.minCoeff() <= 0.0))
        throw Error(ErrorCode::InvalidArgument, "Neumann data need S0, I0 > 0 on the closed interval");
    return simulate(p, K, init, T, Boundary::Neumann, opt);
}

Trajectory simulate_dirichlet(const ModelParams& p, const KernelMatrix& K, const FieldState& init,
                              double T, const SimOptions& opt)
{
    return simulate(p, K, init, T, Boundary::Dirichlet, opt);
}

FieldState constant_state(const Grid1D& g, double S, double I, double R)
{
    return {0.0, Vector::Constant(g.n, S), Vector::Constant(g.n, I), Vector::Constant(g.n, R)};
}

FieldState perturbed_state(const Grid1D& g, double S_ref, double I_ref, double amp)
{
    FieldState s;
    s.S.resize(g.n);
    s.I.resize(g.n);
    s.R = Vector::Zero(g.n);
    for (int i = 0; i < g.n; ++i) {
        const double c = 1.0 + amp * std::cos(M_PI * (g.x(i) - g.left) / g.length());
        s.S[i] = S_ref * c;
        s.I[i] = I_ref * c;
    }
    return s;
}

std::vector<FieldState> dirichlet_initial_data(const Grid1D& g, double N_star)
{
    std::vector<FieldState> out(3);
    for (auto& s : out) {
        s.S = Vector::Zero(g.n);
        s.I = Vector::Zero(g.n);
        s.R = Vector::Zero(g.n);
    }
    for (int i = 1; i + 1 < g.n; ++i) {
        const double xi = (g.x(i) - g.left) / g.length();
        const double sn = std::sin(M_PI * xi);
        out[0].S[i] = 0.5 * N_star * sn;
        out[0].I[i] = 0.3 * N_star * sn;
        out[1].S[i] = 0.8 * N_star * sn * sn;
        out[1].I[i] = 0.05 * N_star * std::sqrt(sn);
        out[2].S[i] = 0.2 * N_star * sn * (1.0 + xi);
        out[2].I[i] = 0.4 * N_star * sn * sn * (2.0 - xi);
        out[2].R[i] = 0.1 * N_star * sn;
    }
    return out;
}

double sup_distance(const FieldState& s, const State3& e)
{
    return std::max({(s.S.array() - e.S).abs().maxCoeff(), (s.I.array() - e.I).abs().maxCoeff(),
                     (s.R.array() - e.R).abs().maxCoeff()});
}

double sup_distance(const FieldState& a, const FieldState& b)
{
    return std::max({(a.S - b.S).cwiseAbs().maxCoeff(), (a.I - b.I).cwiseAbs().maxCoeff(),
                     (a.R - b.R).cwiseAbs().maxCoeff()});
}

Vector march_logistic(const ModelParams& p, const Grid1D& g, const Vector& N0, double tol,
                      double T_max)
{
    detail::FlushDenormals ftz;
    const int n = g.n;
    const double h = g.spacing();
    const double inv_h2 = 1.0 / (h * h);
    const double dt = std::min(cfl_limit(p, g), 0.2 / (p.a + p.b * std::max(N0.maxCoeff(), p.n_star())));
    const long steps = std::lround(std::ceil(T_max / dt));
    Vector N = N0, L(n), Nn = N0;
    N[0] = N[n - 1] = 0.0;
    Nn = N;
    int quiet = 0;
    for (long s = 0; s < steps; ++s) {
        laplacian(N, L, inv_h2, Boundary::Dirichlet);
        double change = 0.0;
        for (int i = 1; i + 1 < n; ++i) {
            Nn[i] = N[i] + dt * (p.d * L[i] + p.a * N[i] - p.beta * N[i] - p.b * N[i] * N[i]);
            change = std::max(change, std::abs(Nn[i] - N[i]));
        }
        N.swap(Nn);
        quiet = change / dt < tol ? quiet + 1 : 0;
        if (quiet >= 100) return N;
    }
    throw Error(ErrorCode::NonConvergence, "logistic time-march did not reach a steady state");
}

TildeN tilde_N(const ModelParams& p, const Grid1D& g, double tol)
{
    p.validate();
    g.validate();
    TildeN out;
    const double r = p.a - p.beta;
    if (lambda1_local(p.beta - p.a, p.d, g.length()) >= 0.0) {
        out.extinct = true;
        out.N = Vector::Zero(g.n);
        return out;
    }
    const int n = g.n, m = n - 2;
    const double h = g.spacing();
    const double c = p.d / (h * h);
    Vector N = Vector::Zero(n);
    for (int i = 1; i + 1 < n; ++i) N[i] = r / p.b * std::sin(M_PI * (g.x(i) - g.left) / g.length());

    auto residual = [&](const Vector& u) {
        Vector F(m);
        for (int i = 1; i + 1 < n; ++i)
            F[i - 1] = c * (2.0 * u[i] - u[i - 1] - u[i + 1]) - r * u[i] + p.b * u[i] * u[i];
        return F;
    };
    Vector F = residual(N);
    double fn = F.cwiseAbs().maxCoeff();
    bool ok = fn < tol;
    int it = 0;
    while (!ok && it < 100) {
        ++it;
        Vector sub = Vector::Constant(m, -c), sup = Vector::Constant(m, -c), dg(m);
        for (int i = 0; i < m; ++i) dg[i] = 2.0 * c - r + 2.0 * p.b * N[i + 1];
        const Vector delta = solve_tridiagonal(sub, dg, sup, -F);
        double lam = 1.0;
        bool accepted = false;
        while (lam >= 1e-4) {
            Vector trial = N;
            trial.segment(1, m) += lam * delta;
            if (trial.segment(1, m).minCoeff() > 0.0) {
                Vector Ft = residual(trial);
                const double ft = Ft.cwiseAbs().maxCoeff();
                if (ft < (1.0 - 1e-4 * lam) * fn || ft < tol) {
                    N = trial;
                    F = Ft;
                    fn = ft;
                    accepted = true;
                    break;
                }
            }
            lam *= 0.5;
        }
        if (!accepted) break;
        ok = fn < tol;
    }
    if (ok) {
        out.newton = true;
        out.iterations = it;
    } else {
        Vector guess = Vector::Zero(n);
        for (int i = 1; i + 1 < n; ++i)
            guess[i] = r / p.b * std::sin(M_PI * (g.x(i) - g.left) / g.length());
        try {
            N = march_logistic(p, g, guess, 1e-12, 1e5);
        } catch (const Error&) {
            throw Error(ErrorCode::NewtonStall, "Newton stalled and time-marching did not settle");
        }
        out.newton = false;
        out.iterations = it;
        fn = residual(N).cwiseAbs().maxCoeff();
    }
    out.N = N;
    out.residual = fn;
    Vector q = Vector::Zero(n);
    for (int i = 0; i < n; ++i) q[i] = -r + 2.0 * p.b * N[i];
    out.linearized_lambda1 = lambda1_local(q, p.d, g);
    if (!(out.linearized_lambda1 > 0.0))
        throw Error(ErrorCode::NewtonStall, "steady state is degenerate");
    return out;
}

SteadyReport existence_check(const ModelParams& p, const KernelMatrix& K, const ExistenceOptions& opt)
{
    p.validate();
    if (!K.symmetric) throw Error(ErrorCode::InvalidArgument, "existence check needs a symmetric kernel");
    const Grid1D& g = K.grid;
    SteadyReport rep;
    rep.lambda1_local_check = lambda1_local(p.beta - p.a, p.d, g.length());
    const TildeN tn = tilde_N(p, g);

    auto Kp = std::make_shared<const KernelMatrix>(K);
    EigenProblem ep;
    ep.d = p.d;
    ep.grid = g;
    ep.kernel = Kp;
    ep.c1 = p.k * tn.N;
    ep.c2 = (p.gamma + p.beta + p.b * tn.N.array()).matrix();
    rep.lambda1_nonlocal_check = principal_eigenvalue(ep).lambda1;
    rep.exists_predicted = rep.lambda1_local_check < 0.0 && rep.lambda1_nonlocal_check < 0.0;
    if (!opt.march) return rep;

    SimOptions so;
    so.stop_on_steady = true;
    so.stop_below_I = 1e-10;
    so.record_every = 1L << 40;
    rep.converged = true;
    bool all_match = true;
    for (const FieldState& init : dirichlet_initial_data(g, p.n_star())) {
        const Trajectory tr = simulate_dirichlet(p, K, init, opt.T_max, so);
        MarchOutcome mo;
        mo.final = tr.final();
        mo.t_end = tr.final().t;
        mo.steady = tr.steady;
        mo.max_I = mo.final.I.maxCoeff();
        mo.positive = mo.max_I > opt.positive_threshold;
        if (mo.positive && !mo.steady) rep.converged = false;
        if (mo.positive != rep.exists_predicted) all_match = false;
        rep.runs.push_back(mo);
    }
    for (size_t i = 0; i < rep.runs.size(); ++i)
        for (size_t j = i + 1; j < rep.runs.size(); ++j)
            rep.max_pairwise_difference =
                std::max(rep.max_pairwise_difference, sup_distance(rep.runs[i].final, rep.runs[j].final));
    rep.outcomes_match_prediction = all_match;
    rep.final = rep.runs.front().final;
    const FieldState& f = rep.final;
    rep.residual = sup_distance(f, rep.runs.back().final);
    return rep;
}

BoundsReport verify_bounds(const Trajectory& traj, const ModelParams& p)
{
    BoundsReport rep;
    const FieldState& s0 = traj.snapshots.front();
    rep.M = bound_M(p, s0);
    rep.min_component = traj.min_component;
    rep.max_total = traj.max_total;
    for (const auto& s : traj.snapshots) {
        rep.min_component = std::min({rep.min_component, s.S.minCoeff(), s.I.minCoeff(), s.R.minCoeff()});
        rep.max_total = std::max(rep.max_total, (s.S + s.I + s.R).maxCoeff());
    }
    rep.positivity_ok = rep.min_component >= -1e-12;
    rep.bound_ok = rep.max_total <= rep.M + 1e-10;

    const Grid1D& g = traj.grid;
    const int n = g.n;
    const double h = g.spacing();
    const double inv_h2 = 1.0 / (h * h);
    const double dt = traj.dt;
    const int i0 = traj.bc == Boundary::Dirichlet ? 1 : 0;
    const int i1 = traj.bc == Boundary::Dirichlet ? n - 1 : n;
    Vector N = s0.S + s0.I + s0.R, L(n), Nn = N;
    size_t next = 1;
    double dev = 0.0;
    {
        detail::FlushDenormals ftz;
        for (long step = 1; step <= traj.steps && next < traj.snapshots.size(); ++step) {
            laplacian(N, L, inv_h2, traj.bc);
            for (int i = i0; i < i1; ++i)
                Nn[i] = N[i] + dt * (p.d * L[i] + p.a * N[i] - p.beta * N[i] - p.b * N[i] * N[i]);
            N.swap(Nn);
            if (traj.snapshot_steps[next] == step) {
                const FieldState& s = traj.snapshots[next];
                const double scale = std::max(N.cwiseAbs().maxCoeff(), 1e-300);
                dev = std::max(dev, (s.S + s.I + s.R - N).cwiseAbs().maxCoeff() / scale);
                ++next;
            }
        }
    }
    rep.max_reduction_deviation = dev;
    rep.reduction_ok = dev <= 1e-12 && next == traj.snapshots.size();
    return rep;
}

ComparisonState comparison_init(const FieldState& s0, double* f0, double* g0)
{
    const Vector N = s0.S + s0.I + s0.R;
    const Vector V = s0.S + s0.I;
    ComparisonState c;
    c.Vbar = V.maxCoeff();
    c.Vunder = V.minCoeff();
    c.Ibar = s0.I.maxCoeff();
    c.Iunder = s0.I.minCoeff();
    *f0 = N.maxCoeff();
    *g0 = N.minCoeff();
    return c;
}

ComparisonTrack comparison_for(const Trajectory& traj, const ModelParams& p, ComparisonScheme scheme)
{
    if (traj.bc != Boundary::Neumann)
        throw Error(ErrorCode::InvalidArgument, "the comparison sandwich applies to Neumann runs");
    double f0 = 0, g0 = 0;
    const ComparisonState c0 = comparison_init(traj.snapshots.front(), &f0, &g0);
    ComparisonTrack out;
    if (scheme == ComparisonScheme::MatchedEuler) {
        out.states = solve_comparison_euler(p, c0, f0, g0, traj.dt, traj.steps, traj.record_every);
        double f = f0, g = g0;
        const double r = p.a - p.beta;
        size_t next = 0;
        for (long step = 0; step <= traj.steps && next < traj.snapshot_steps.size(); ++step) {
            if (step > 0) {
                f = f + traj.dt * (r * f - p.b * f * f);
                g = g + traj.dt * (r * g - p.b * g * g);
            }
            if (traj.snapshot_steps[next] == step) {
                out.f.push_back(f);
                out.g.push_back(g);
                ++next;
            }
        }
    } else {
        std::vector<double> times;
        for (const auto& s : traj.snapshots) times.push_back(s.t);
        const double cap = std::max({f0, c0.Vbar, c0.Ibar});
        out.states = solve_comparison_at(p, c0, f0, g0, times, default_comparison_dt(p, cap));
        for (double t : times) {
            out.f.push_back(logistic_envelope(f0, p, t));
            out.g.push_back(logistic_envelope(g0, p, t));
        }
    }
    if (out.states.size() != traj.snapshots.size())
        throw Error(ErrorCode::DimensionMismatch, "comparison does not line up with the snapshots");
    return out;
}

EnvelopeReport envelope_check(const Trajectory& traj, const ComparisonTrack& comp)
{
    EnvelopeReport rep;
    rep.tol = 1e-6 + 10.0 * traj.dt;
    if (comp.states.size() != traj.snapshots.size())
        throw Error(ErrorCode::DimensionMismatch, "comparison does not line up with the snapshots");
    for (size_t k = 0; k < traj.snapshots.size(); ++k) {
        const FieldState& s = traj.snapshots[k];
        const ComparisonState& c = comp.states[k];
        const double f = comp.f[k], g = comp.g[k];
        for (Eigen::Index i = 0; i < s.S.size(); ++i) {
            const double N = s.S[i] + s.I[i] + s.R[i];
            const double V = s.S[i] + s.I[i];
            const double I = s.I[i];
            rep.max_violation = std::max({rep.max_violation, N - f, g - N, V - c.Vbar, c.Vunder - V,
                                          I - c.Ibar, c.Iunder - I});
            rep.max_spread = std::max({rep.max_spread, std::abs(N - f), std::abs(N - g),
                                       std::abs(V - c.Vbar), std::abs(V - c.Vunder),
                                       std::abs(I - c.Ibar), std::abs(I - c.Iunder)});
        }
    }
    rep.passed = rep.max_violation <= rep.tol;
    return rep;
}

} // namespace nsir
