#pragma once

#include "nsir/grid.hpp"
#include "nsir/kernel.hpp"
#include "nsir/kinetics.hpp"

#include <optional>
#include <vector>

namespace nsir {

enum class Boundary { Neumann, Dirichlet };

struct FieldState {
    double t = 0;
    Vector S, I, R;
};

struct SimOptions {
    double dt = 0;              // 0 picks the default step
    long record_every = 0;      // 0 picks about 400 snapshots
    bool stop_on_steady = false;
    double steady_tol = 1e-8;
    int steady_window = 100;
    double stop_below_I = 0;    // > 0: stop once max I falls below this
    bool enforce_cfl = true;
    bool check_positivity = true;
};

struct Trajectory {
    Grid1D grid;
    Boundary bc = Boundary::Neumann;
    ModelParams params;
    double dt = 0;
    long steps = 0;
    long record_every = 1;
    std::vector<FieldState> snapshots;
    std::vector<long> snapshot_steps;
    double min_component = 0;   // over every step, not only snapshots
    double max_total = 0;
    bool steady = false;
    double wall_seconds = 0;

    const FieldState& final() const { return snapshots.back(); }
};

double bound_M(const ModelParams& p, const FieldState& init);
double cfl_limit(const ModelParams& p, const Grid1D& g);
double default_dt(const ModelParams& p, const Grid1D& g, double M);

Trajectory simulate(const ModelParams& p, const KernelMatrix& K, const FieldState& init, double T,
                    Boundary bc, const SimOptions& opt = {});
Trajectory simulate_neumann(const ModelParams& p, const KernelMatrix& K, const FieldState& init,
                            double T, const SimOptions& opt = {});
Trajectory simulate_dirichlet(const ModelParams& p, const KernelMatrix& K, const FieldState& init,
                              double T, const SimOptions& opt = {});

// spatially constant state
FieldState constant_state(const Grid1D& g, double S, double I, double R);
// reference profile times (1 + amp cos(pi (x - left)/L)), R = 0
FieldState perturbed_state(const Grid1D& g, double S_ref, double I_ref, double amp = 0.2);
// three distinct positive profiles that vanish at the ends
std::vector<FieldState> dirichlet_initial_data(const Grid1D& g, double N_star);

double sup_distance(const FieldState& s, const State3& e);
double sup_distance(const FieldState& a, const FieldState& b);

struct TildeN {
    bool extinct = false;
    Vector N;                 // full grid, zero at the ends
    bool newton = true;       // false when time-marching produced it
    int iterations = 0;
    double residual = 0;
    double linearized_lambda1 = 0;  // > 0 means the Jacobian is nonsingular
};

TildeN tilde_N(const ModelParams& p, const Grid1D& g, double tol = 1e-10);
// scalar logistic FTCS to steady state, Dirichlet ends
Vector march_logistic(const ModelParams& p, const Grid1D& g, const Vector& N0, double tol,
                      double T_max);

struct MarchOutcome {
    bool positive = false;
    bool steady = false;
    double t_end = 0;
    double max_I = 0;
    FieldState final;
};

struct SteadyReport {
    bool converged = false;
    FieldState final;
    double residual = 0;
    double lambda1_local_check = 0;
    double lambda1_nonlocal_check = 0;
    bool exists_predicted = false;
    std::vector<MarchOutcome> runs;
    double max_pairwise_difference = 0;
    bool outcomes_match_prediction = false;
};

struct ExistenceOptions {
    double T_max = 4000;
    double positive_threshold = 1e-6;
    bool march = true;
};

SteadyReport existence_check(const ModelParams& p, const KernelMatrix& K,
                             const ExistenceOptions& opt = {});

struct BoundsReport {
    double min_component = 0;
    double max_total = 0;
    double M = 0;
    double max_reduction_deviation = 0;
    bool positivity_ok = false;
    bool bound_ok = false;
    bool reduction_ok = false;
    bool passed() const { return positivity_ok && bound_ok && reduction_ok; }
};

BoundsReport verify_bounds(const Trajectory& traj, const ModelParams& p);

struct EnvelopeReport {
    double tol = 0;
    double max_violation = 0;   // amount by which any component leaves its envelope
    double max_spread = 0;      // largest distance to either envelope
    bool passed = false;
};

enum class ComparisonScheme { Rk4, MatchedEuler };

struct ComparisonTrack {
    std::vector<ComparisonState> states;  // one per trajectory snapshot
    std::vector<double> f, g;             // envelope values at the same times
};

ComparisonState comparison_init(const FieldState& s0, double* f0, double* g0);
ComparisonTrack comparison_for(const Trajectory& traj, const ModelParams& p, ComparisonScheme scheme);
EnvelopeReport envelope_check(const Trajectory& traj, const ComparisonTrack& comp);

} // namespace nsir
