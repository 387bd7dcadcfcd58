#pragma once

#include "nsir/kernel.hpp"
#include "nsir/kinetics.hpp"
#include "nsir/stefan.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace nsir {

enum class ModelKind { Neumann, Dirichlet, Stefan, Eigen, Thresholds };
const char* to_string(ModelKind m);

struct RunConfig {
    ModelKind model = ModelKind::Neumann;
    std::string preset;
    std::string output;        // relative paths resolve against NSIR_OUTPUT_ROOT
    double T = 200;

    ModelParams params;
    std::optional<double> M_cap;  // when set, b = (a - beta)/M_cap
    KernelSpec kernel;

    // interval problems
    double left = -1, right = 1;
    int n = 201;
    double dt = 0;
    long record_every = 0;
    std::string init_profile = "perturbed";  // perturbed | constant | equilibrium | dirichlet
    double init_S = 0.7, init_I = 0.3, init_R = 0.0, init_amp = 0.2;
    int init_index = 0;
    bool existence = false;
    double existence_T_max = 4000;
    std::string comparison = "auto";         // auto | rk4 | euler

    // free boundary
    StefanNumerics stefan;
    StefanInit stefan_init;
    ClassifyOptions classify;
    int horizon_doublings = 4;

    // eigen
    double c1 = 5, c2 = 2.5, length = 2;
    int eig_n = 0;
    bool lstar = false;
    double lstar_tol = 1e-6;
    bool write_phi = true;

    // thresholds
    double mu_lo = 0.01, mu_hi = 10, mu_tol = 0.1;
    double delta = 0.05, eps = 0.1, margin = 0.05;
    bool verify_mu0 = true;

    void validate() const;  // ConfigInvalid naming the offending field
};

enum class Reducer { Classification, TerminalState, Lambda1 };
const char* to_string(Reducer r);

struct SweepConfig {
    RunConfig base;
    std::string axis;
    std::vector<double> values;
    Reducer reducer = Reducer::TerminalState;
    int workers = 0;  // 0 = available parallelism

    void validate() const;
};

using Settings = std::vector<std::pair<std::string, std::string>>;

// flat "section.key" assignments; unknown keys and bad values raise ConfigInvalid
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);
std::vector<std::string> config_keys();
bool is_numeric_key(const std::string& key);

Settings read_ini(const std::filesystem::path& path);
Settings parse_overrides(const std::vector<std::string>& assignments);

// a preset named by run.preset is applied first, then the remaining settings in order
RunConfig build_run_config(const Settings& s);
SweepConfig build_sweep_config(const Settings& s);
RunConfig load_run_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});
SweepConfig load_sweep_config(const std::filesystem::path& path,
                              const std::vector<std::string>& overrides = {});

RunConfig preset(const std::string& name);
std::vector<std::string> preset_names();

std::filesystem::path resolve_output(const RunConfig& cfg);

} // namespace nsir
