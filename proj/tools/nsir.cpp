#include "nsir/errors.hpp"
#include "nsir/harness.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

using namespace nsir;
namespace fs = std::filesystem;

namespace {

struct RunArgs {
    std::string config;
    std::string preset;
    std::vector<std::string> sets;
    std::string output;
};

void add_run_args(CLI::App* cmd, RunArgs& a)
{
    cmd->add_option("config", a.config, "INI configuration file");
    cmd->add_option("--preset", a.preset, "start from a shipped preset");
    cmd->add_option("--set", a.sets, "override a key, section.key=value")->allow_extra_args(false);
    cmd->add_option("-o,--output", a.output, "output directory");
}

RunConfig assemble(const RunArgs& a, std::optional<ModelKind> force)
{
    Settings s;
    if (!a.preset.empty()) s.emplace_back("run.preset", a.preset);
    if (!a.config.empty()) {
        const Settings f = read_ini(a.config);
        s.insert(s.end(), f.begin(), f.end());
    }
    if (force) s.emplace_back("run.model", to_string(*force));
    const Settings o = parse_overrides(a.sets);
    s.insert(s.end(), o.begin(), o.end());
    if (!a.output.empty()) s.emplace_back("run.output", a.output);
    if (a.config.empty() && a.preset.empty() && !force)
        throw Error(ErrorCode::ConfigInvalid, "run: give a config file or --preset");
    return build_run_config(s);
}

int do_run(const RunConfig& cfg)
{
    const fs::path dir = resolve_output(cfg);
    const RunOutcome out = execute(cfg);
    write_artifacts(out, dir);
    Json s = out.summary;
    s.erase("_comparison");
    s["output"] = dir.generic_string();
    std::cout << s.dump(2) << "\n";
    for (const auto& c : out.checks)
        if (!c.passed) std::cerr << "invariant check failed: " << c.name << "\n";
    return out.checks_passed() ? kExitOk : kExitInvariant;
}

template <class F>
int guarded(F&& f)
{
    try {
        return f();
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return is_config_error(e.code()) ? kExitConfig : kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolver;
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"nonlocal SIR laboratory"};
    app.require_subcommand(1);

    RunArgs run_a, neu_a, dir_a, ste_a;
    auto* run_cmd = app.add_subcommand("run", "run a configured scenario");
    add_run_args(run_cmd, run_a);
    auto* neu_cmd = app.add_subcommand("run-neumann", "Neumann interval problem");
    add_run_args(neu_cmd, neu_a);
    auto* dir_cmd = app.add_subcommand("run-dirichlet", "Dirichlet interval problem");
    add_run_args(dir_cmd, dir_a);
    auto* ste_cmd = app.add_subcommand("run-stefan", "free-boundary problem");
    add_run_args(ste_cmd, ste_a);

    std::string sweep_cfg, sweep_out;
    std::vector<std::string> sweep_sets;
    int sweep_workers = -1;
    auto* sweep_cmd = app.add_subcommand("sweep", "parameter sweep");
    sweep_cmd->add_option("config", sweep_cfg, "INI configuration with a [sweep] section")->required();
    sweep_cmd->add_option("--set", sweep_sets, "override a key, section.key=value");
    sweep_cmd->add_option("--workers", sweep_workers, "worker threads (0 = all cores)");
    sweep_cmd->add_option("-o,--output", sweep_out, "output directory");

    double c1 = 5, c2 = 2.5, d = 1, length = 2, width = 0.2, tol = 1e-6;
    int n = 0;
    std::string family = "gaussian", normalization = "none", phi_csv, eig_out;
    bool lstar = false;
    auto* eig_cmd = app.add_subcommand("eigen", "principal eigenvalue, R02 and critical length");
    eig_cmd->add_option("--c1", c1, "nonlocal coefficient");
    eig_cmd->add_option("--c2", c2, "local coefficient");
    eig_cmd->add_option("--d", d, "diffusivity");
    eig_cmd->add_option("--length", length, "interval length, centred at 0");
    eig_cmd->add_option("--n", n, "nodes (0 = automatic)");
    eig_cmd->add_option("--family", family, "uniform | gaussian | tophat");
    eig_cmd->add_option("--width", width, "kernel width");
    eig_cmd->add_option("--normalization", normalization, "none | column | sinkhorn");
    eig_cmd->add_flag("--lstar", lstar, "also compute the critical length");
    eig_cmd->add_option("--tol", tol, "critical length tolerance");
    eig_cmd->add_option("--phi-csv", phi_csv, "write the eigenfunction as x,phi");
    eig_cmd->add_option("-o,--output", eig_out, "also write eigen.json into this directory");

    std::string report_dir;
    auto* rep_cmd = app.add_subcommand("report", "aggregate check reports");
    rep_cmd->add_option("dir", report_dir, "run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    if (*run_cmd) return guarded([&] { return do_run(assemble(run_a, std::nullopt)); });
    if (*neu_cmd) return guarded([&] { return do_run(assemble(neu_a, ModelKind::Neumann)); });
    if (*dir_cmd)
        return guarded([&] {
            RunArgs a = dir_a;
            if (a.config.empty() && a.preset.empty()) a.sets.insert(a.sets.begin(), "init.profile=dirichlet");
            return do_run(assemble(a, ModelKind::Dirichlet));
        });
    if (*ste_cmd) return guarded([&] { return do_run(assemble(ste_a, ModelKind::Stefan)); });

    if (*sweep_cmd)
        return guarded([&] {
            std::vector<std::string> sets = sweep_sets;
            if (sweep_workers >= 0) sets.push_back("sweep.workers=" + std::to_string(sweep_workers));
            if (!sweep_out.empty()) sets.push_back("run.output=" + sweep_out);
            const SweepConfig sc = load_sweep_config(sweep_cfg, sets);
            fs::path dir = resolve_output(sc.base);
            if (sc.base.output.empty()) dir += "_sweep";
            const SweepTable tab = sweep(sc);
            write_text(dir / "sweep.csv", tab.csv());
            Json j = tab.json();
            write_json(dir / "sweep.json", j);
            j["output"] = dir.generic_string();
            std::cout << j.dump(2) << "\n";
            return kExitOk;
        });

    if (*eig_cmd)
        return guarded([&] {
            Settings s = {{"run.model", "eigen"},
                          {"eigen.c1", format_double(c1)},
                          {"eigen.c2", format_double(c2)},
                          {"params.d", format_double(d)},
                          {"eigen.length", format_double(length)},
                          {"eigen.n", std::to_string(n)},
                          {"kernel.family", family},
                          {"kernel.width", format_double(width)},
                          {"kernel.normalization", normalization},
                          {"eigen.lstar", lstar ? "true" : "false"},
                          {"eigen.tol", format_double(tol)}};
            const RunConfig cfg = build_run_config(s);
            const RunOutcome out = execute(cfg);
            const Json j = {{"lambda1", out.summary["lambda1"]}, {"r02", out.summary["r02"]},
                            {"l_star", out.summary["l_star"]}, {"residual", out.summary["residual"]},
                            {"n", out.summary["n"]}};
            if (!eig_out.empty()) write_json(fs::path(eig_out) / "eigen.json", j);
            if (!phi_csv.empty()) {
                std::ostringstream os;
                CsvWriter w(os, {"x", "phi"});
                const Vector x = out.eigen_grid.nodes();
                for (Eigen::Index i = 0; i < x.size(); ++i) {
                    w << x[i] << out.eigen->phi[i];
                    w.end_row();
                }
                write_text(phi_csv, os.str());
            }
            std::cout << j.dump(2) << "\n";
            return out.checks_passed() ? kExitOk : kExitInvariant;
        });

    if (*rep_cmd)
        return guarded([&] {
            const ReportResult r = report(report_dir);
            write_json(fs::path(report_dir) / "report.json", r.consolidated);
            write_text(fs::path(report_dir) / "report.txt", r.text);
            std::cout << r.text;
            return r.all_passed ? kExitOk : kExitInvariant;
        });
    return kExitConfig;
}
