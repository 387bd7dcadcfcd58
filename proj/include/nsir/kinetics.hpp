#pragma once

#include <optional>
#include <vector>

namespace nsir {

struct ModelParams {
    double a = 2.0;
    double beta = 1.0;
    double b = 1.0;
    double k = 5.0;
    double gamma = 0.5;
    double d = 1.0;
    double mu = 1.0;
    double h0 = 0.3;

    static ModelParams with_capacity(double a, double beta, double M_cap, double k, double gamma,
                                     double d, double mu = 1.0, double h0 = 0.3);
    double n_star() const { return (a - beta) / b; }
    void validate() const;
};

struct State3 {
    double S = 0, I = 0, R = 0;
};

struct Equilibria {
    State3 E0;
    State3 E1;
    std::optional<State3> E2;
    double N_star = 0;
    double R01 = 0;
};

double r01(const ModelParams& p);
Equilibria equilibria(const ModelParams& p);
double logistic_envelope(double n0, const ModelParams& p, double t);

struct ComparisonState {
    double t = 0;
    double Vbar = 0, Vunder = 0, Ibar = 0, Iunder = 0;
};

// the four right-hand sides given the envelope values f (upper) and g (lower)
ComparisonState comparison_rhs(const ModelParams& p, const ComparisonState& s, double f, double g);

struct ComparisonOptions {
    double dt = 0;          // 0 picks the default step
    int record_every = 1;
};

double default_comparison_dt(const ModelParams& p, double cap);

// RK4 with closed-form logistic envelopes
std::vector<ComparisonState> solve_comparison_system(const ModelParams& p, const ComparisonState& init,
                                                     double f0, double g0, double T,
                                                     const ComparisonOptions& opt = {});

// RK4 sampled at the given increasing times, at most max_dt per substep
std::vector<ComparisonState> solve_comparison_at(const ModelParams& p, const ComparisonState& init,
                                                 double f0, double g0,
                                                 const std::vector<double>& times, double max_dt);

// Forward Euler with envelopes advanced by the same Euler map; this is the scheme the
// explicit PDE solver reduces to for spatially constant data. Records every `every` steps.
std::vector<ComparisonState> solve_comparison_euler(const ModelParams& p, const ComparisonState& init,
                                                    double f0, double g0, double dt, long steps,
                                                    long every);

double lyapunov_F(const ComparisonState& s, const Equilibria& eq, const ModelParams& p,
                  double lambda_weight);
double lyapunov_weight(const ModelParams& p, const std::vector<ComparisonState>& traj);

// smallest eigenvalue of the 4x4 quadratic form bounding dF/dt; positive iff definite
double quadratic_form_margin(const ModelParams& p);

} // namespace nsir
