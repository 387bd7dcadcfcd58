#pragma once

#include "nsir/grid.hpp"
#include "nsir/kernel.hpp"
#include "nsir/kinetics.hpp"

#include <string>
#include <vector>

namespace nsir {

// S0(x) = S_amp (1 + S_skew tanh x) on the line, I0(x) = I_amp cos(pi x / (2 h0)) on (-h0, h0)
struct StefanInit {
    double S_amp = 0.5;
    double I_amp = 0.5;
    double S_skew = 0.0;

    double S0(double x) const;
    double I0(double x, double h0) const;
    void validate(double h0) const;
};

struct StefanNumerics {
    int M = 200;             // intervals on the moving interval [g, h]
    int K = 400;             // intervals on each outer zone
    double L_dom = 0;        // 0 picks max(20 h0, 10)
    double dt = 0;           // 0 picks 0.2/(a + gamma + k A)
    double max_span = 0;     // > 0: stop once h - g reaches this
    int snapshots = 200;
    bool check_positivity = true;

    double domain(double h0) const;
    void validate() const;
};

// S lives on the whole node set; I and R on the inner block [K, K+M]
struct FrontState {
    double t = 0;
    double g = 0, h = 0;
    double gp = 0, hp = 0;   // front velocities used for the step that starts here
    Vector x;                // 2K+M+1 node positions
    Vector S;
    Vector I, R;             // M+1 values on [g, h]
};

struct FrontSample {
    double t, g, h, hp, mgp, maxI;
};

enum class StopReason { Horizon, SpanLimit };

struct StefanTrajectory {
    ModelParams params;
    KernelSpec kernel;
    StefanNumerics numerics;
    StefanInit init;
    double A = 0;                 // global bound max(sup S0 + sup I0, N*)
    double T = 0;
    long steps = 0;
    double dt_nominal = 0;
    StopReason stop = StopReason::Horizon;
    std::vector<FrontSample> fronts;
    std::vector<FrontState> snapshots;
    double min_component = 0;
    double max_total = 0;
    double min_front_step = 0;    // min over steps of h_{n+1} - h_n and g_n - g_{n+1}
    double max_symmetry_defect = 0;  // max |g + h|
    double wall_seconds = 0;

    const FrontState& final() const { return snapshots.back(); }
};

StefanTrajectory simulate_free_boundary(const ModelParams& p, const KernelSpec& spec,
                                        const StefanInit& init, const StefanNumerics& num, double T);

// P[I] at arbitrary points for I piecewise linear on the nodes ys (zero outside)
Vector nonlocal_on_interval(const KernelSpec& spec, const Vector& ys, const Vector& I, const Vector& x);

enum class Verdict { Spreading, Vanishing, Undecided };
const char* to_string(Verdict v);

struct ClassifyOptions {
    double eps_I = 1e-6;
    double tol_rate = 1e-5;
    double tol_span = 0.05;
};

struct Classification {
    Verdict verdict = Verdict::Undecided;
    double final_span = 0;
    double span_rate = 0;
    double I_max_final = 0;
    double l_star_used = 0;
    double r02_initial = 0;
    double t_end = 0;
};

Classification classify(const StefanTrajectory& tr, double l_star, const ClassifyOptions& opt = {});

// l* for c1 = k(a - beta)/b, c2 = a + gamma
double stefan_l_star(const ModelParams& p, const KernelSpec& spec);
// R02(k(a - beta)/b, c2, (-h0, h0))
double stefan_r02(const ModelParams& p, const KernelSpec& spec, double c2);

struct MuProbe {
    double mu;
    Verdict verdict;
    double final_span;
    double horizon;
};

struct MuBracket {
    double mu_lo = 0, mu_hi = 0;
    std::vector<MuProbe> probes;
    bool monotone = true;   // verdicts ordered Vanishing below Spreading
};

struct CriticalMuOptions {
    double tol = 0.1;
    int max_iter = 40;
    int horizon_doublings = 4;
    ClassifyOptions classify;
};

MuBracket critical_mu(const ModelParams& p, const KernelSpec& spec, const StefanInit& init,
                      const StefanNumerics& num, double mu_lo, double mu_hi, double T,
                      const CriticalMuOptions& opt = {});

struct UpperSolutionReport {
    double lambda_eps = 0;
    double delta = 0, A_amp = 0, eps = 0;
    double slack_pde = 0;      // min over the sample grid, scaled by A e^{-delta t}
    double slack_front = 0;    // at mu = mu0/2, scaled by e^{-delta t}
    double slack_initial = 0;  // min of A phi(x/sigma(0)) - I0(x)
    double phi_slope = 0;      // |phi'(h0)|
    double mu0 = 0;
    bool pde_ok = false, front_ok = false, initial_ok = false;
    bool passed() const { return pde_ok && front_ok && initial_ok; }
};

// A_amp <= 0 picks (1 + margin) max I0(x)/phi(x/sigma(0))
UpperSolutionReport upper_solution_check(const ModelParams& p, const KernelSpec& spec,
                                         const StefanInit& init, double delta, double A_amp,
                                         double eps, double margin = 0.05, int samples = 200);

} // namespace nsir
