#include "nsir/kinetics.hpp"
#include "nsir/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

namespace nsir {

ModelParams ModelParams::with_capacity(double a, double beta, double M_cap, double k, double gamma,
                                       double d, double mu, double h0)
{
    if (!(M_cap > 0.0)) throw Error(ErrorCode::InvalidArgument, "M_cap must be positive");
    ModelParams p;
    p.a = a;
    p.beta = beta;
    p.b = (a - beta) / M_cap;
    p.k = k;
    p.gamma = gamma;
    p.d = d;
    p.mu = mu;
    p.h0 = h0;
    p.validate();
    return p;
}

void ModelParams::validate() const
{
    auto pos = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw Error(ErrorCode::InvalidArgument, std::string(name) + " must be positive");
    };
    pos(a, "a");
    pos(beta, "beta");
    pos(b, "b");
    pos(k, "k");
    pos(gamma, "gamma");
    pos(d, "d");
    pos(mu, "mu");
    pos(h0, "h0");
    if (!(a > beta)) throw Error(ErrorCode::InvalidArgument, "a must exceed beta");
}

double r01(const ModelParams& p) { return p.k * (p.a - p.beta) / (p.b * (p.a + p.gamma)); }

Equilibria equilibria(const ModelParams& p)
{
    Equilibria e;
    e.N_star = p.n_star();
    e.E1 = {e.N_star, 0.0, 0.0};
    e.R01 = r01(p);
    if (e.R01 > 1.0) {
        const double num = p.k * (p.a - p.beta) - p.b * (p.a + p.gamma);
        const double den = p.b * p.k * (p.a + p.gamma);
        e.E2 = State3{(p.a + p.gamma) / p.k, p.a * num / den, p.gamma * num / den};
    }
    return e;
}

double logistic_envelope(double n0, const ModelParams& p, double t)
{
    const double r = p.a - p.beta;
    return r * n0 / (p.b * n0 + (r - p.b * n0) * std::exp(-r * t));
}

ComparisonState comparison_rhs(const ModelParams& p, const ComparisonState& s, double f, double g)
{
    ComparisonState r;
    r.Vbar = p.a * f - p.gamma * s.Iunder - (p.beta + p.b * g) * s.Vbar;
    r.Vunder = p.a * g - p.gamma * s.Ibar - (p.beta + p.b * f) * s.Vunder;
    r.Ibar = p.k * s.Ibar * (s.Vbar - s.Ibar) - (p.gamma + p.beta) * s.Ibar - p.b * g * s.Ibar;
    r.Iunder = p.k * s.Iunder * (s.Vunder - s.Iunder) - (p.gamma + p.beta) * s.Iunder -
               p.b * f * s.Iunder;
    return r;
}

double default_comparison_dt(const ModelParams& p, double cap)
{
    return 1e-3 * std::min(1.0 / (p.a + p.gamma + p.k * cap), 1.0);
}

namespace {

bool positive(const ComparisonState& s)
{
    return s.Vbar > 0 && s.Vunder > 0 && s.Ibar > 0 && s.Iunder > 0;
}

ComparisonState axpy(const ComparisonState& s, double h, const ComparisonState& k)
{
    ComparisonState r = s;
    r.Vbar += h * k.Vbar;
    r.Vunder += h * k.Vunder;
    r.Ibar += h * k.Ibar;
    r.Iunder += h * k.Iunder;
    return r;
}

ComparisonState rk4_step(const ModelParams& p, const ComparisonState& s, double f0, double g0,
                         double h)
{
    const double t = s.t;
    auto F = [&](double tt) { return logistic_envelope(f0, p, tt); };
    auto G = [&](double tt) { return logistic_envelope(g0, p, tt); };
    ComparisonState k1 = comparison_rhs(p, s, F(t), G(t));
    ComparisonState k2 = comparison_rhs(p, axpy(s, 0.5 * h, k1), F(t + 0.5 * h), G(t + 0.5 * h));
    ComparisonState k3 = comparison_rhs(p, axpy(s, 0.5 * h, k2), F(t + 0.5 * h), G(t + 0.5 * h));
    ComparisonState k4 = comparison_rhs(p, axpy(s, h, k3), F(t + h), G(t + h));
    ComparisonState r = s;
    r.Vbar += h / 6.0 * (k1.Vbar + 2 * k2.Vbar + 2 * k3.Vbar + k4.Vbar);
    r.Vunder += h / 6.0 * (k1.Vunder + 2 * k2.Vunder + 2 * k3.Vunder + k4.Vunder);
    r.Ibar += h / 6.0 * (k1.Ibar + 2 * k2.Ibar + 2 * k3.Ibar + k4.Ibar);
    r.Iunder += h / 6.0 * (k1.Iunder + 2 * k2.Iunder + 2 * k3.Iunder + k4.Iunder);
    r.t = t + h;
    return r;
}

ComparisonState guarded_step(const ModelParams& p, const ComparisonState& s, double f0, double g0,
                             double h, int depth)
{
    ComparisonState r = rk4_step(p, s, f0, g0, h);
    if (positive(r)) return r;
    if (depth >= 10)
        throw Error(ErrorCode::StepSizeTooLarge,
                    "positivity lost at t = " + std::to_string(s.t) + " after 10 halvings");
    ComparisonState m = guarded_step(p, s, f0, g0, 0.5 * h, depth + 1);
    return guarded_step(p, m, f0, g0, 0.5 * h, depth + 1);
}

} // namespace

std::vector<ComparisonState> solve_comparison_system(const ModelParams& p, const ComparisonState& init,
                                                     double f0, double g0, double T,
                                                     const ComparisonOptions& opt)
{
    p.validate();
    if (!positive(init))
        throw Error(ErrorCode::InvalidArgument, "comparison initial state must be positive");
    if (!(f0 >= g0 && g0 > 0.0))
        throw Error(ErrorCode::InvalidArgument, "comparison envelopes need f0 >= g0 > 0");
    const double cap = std::max({f0, init.Vbar, init.Ibar});
    const double dt = opt.dt > 0 ? opt.dt : default_comparison_dt(p, cap);
    const long steps = std::max(1L, std::lround(std::ceil(T / dt - 1e-9)));
    const double h = T / steps;
    const int every = std::max(1, opt.record_every);

    std::vector<ComparisonState> out;
    out.reserve(steps / every + 2);
    ComparisonState s = init;
    s.t = 0.0;
    out.push_back(s);
    for (long n = 1; n <= steps; ++n) {
        s = guarded_step(p, s, f0, g0, h, 0);
        s.t = n * h;
        if (n % every == 0 || n == steps) out.push_back(s);
    }
    return out;
}

std::vector<ComparisonState> solve_comparison_at(const ModelParams& p, const ComparisonState& init,
                                                 double f0, double g0,
                                                 const std::vector<double>& times, double max_dt)
{
    std::vector<ComparisonState> out;
    ComparisonState s = init;
    s.t = 0.0;
    for (double t : times) {
        if (t < s.t) throw Error(ErrorCode::InvalidArgument, "sample times must increase");
        const long sub = std::max(1L, std::lround(std::ceil((t - s.t) / max_dt - 1e-9)));
        const double h = (t - s.t) / sub;
        for (long k = 0; k < sub && h > 0.0; ++k) s = guarded_step(p, s, f0, g0, h, 0);
        s.t = t;
        out.push_back(s);
    }
    return out;
}

std::vector<ComparisonState> solve_comparison_euler(const ModelParams& p, const ComparisonState& init,
                                                    double f0, double g0, double dt, long steps,
                                                    long every)
{
    std::vector<ComparisonState> out;
    ComparisonState s = init;
    s.t = 0.0;
    double f = f0, g = g0;
    const double r = p.a - p.beta;
    out.push_back(s);
    for (long n = 1; n <= steps; ++n) {
        ComparisonState rhs = comparison_rhs(p, s, f, g);
        s = axpy(s, dt, rhs);
        f = f + dt * (r * f - p.b * f * f);
        g = g + dt * (r * g - p.b * g * g);
        s.t = n * dt;
        if (n % every == 0 || n == steps) out.push_back(s);
    }
    return out;
}

double lyapunov_F(const ComparisonState& s, const Equilibria& eq, const ModelParams& p,
                  double lambda_weight)
{
    if (!eq.E2) throw Error(ErrorCode::InvalidArgument, "Lyapunov functional needs the endemic state");
    if (!(s.Ibar > 0.0) || !(s.Iunder > 0.0))
        throw Error(ErrorCode::NonpositiveI, "I components must be positive");
    const double Vs = eq.E2->S + eq.E2->I;
    const double Is = eq.E2->I;
    auto integral = [&](double x) { return (x - Is) - Is * std::log(x / Is); };
    return 0.5 * (s.Vbar - Vs) * (s.Vbar - Vs) + 0.5 * (s.Vunder - Vs) * (s.Vunder - Vs) +
           p.gamma / p.k * (integral(s.Ibar) + integral(s.Iunder)) +
           lambda_weight * std::exp(-(p.a - p.beta) * s.t);
}

double lyapunov_weight(const ModelParams& p, const std::vector<ComparisonState>& traj)
{
    double m = 0.0;
    for (const auto& s : traj) m = std::max({m, s.Vbar, s.Vunder, s.Ibar, s.Iunder});
    return 10.0 * (p.a + p.b + p.gamma + p.k) * (1.0 + m) * (1.0 + m);
}

double quadratic_form_margin(const ModelParams& p)
{
    // variables (Vbar - V*, Vunder - V*, Ibar - I*, Iunder - I*)
    Eigen::Matrix4d Q = Eigen::Matrix4d::Zero();
    Q(0, 0) = Q(1, 1) = p.a;
    Q(2, 2) = Q(3, 3) = p.gamma;
    Q(0, 2) = Q(2, 0) = -0.5 * p.gamma;
    Q(1, 3) = Q(3, 1) = -0.5 * p.gamma;
    Q(0, 3) = Q(3, 0) = 0.5 * p.gamma;
    Q(1, 2) = Q(2, 1) = 0.5 * p.gamma;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(Q, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

} // namespace nsir
