#include "nsir/harness.hpp"
#include "nsir/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

namespace nsir {

namespace fs = std::filesystem;

bool RunOutcome::checks_passed() const
{
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

namespace {

Json params_json(const ModelParams& p)
{
    return {{"a", p.a}, {"beta", p.beta}, {"b", p.b}, {"k", p.k}, {"gamma", p.gamma},
            {"d", p.d}, {"mu", p.mu}, {"h0", p.h0}};
}

Json kernel_json(const KernelSpec& k)
{
    return {{"family", to_string(k.family)}, {"width", k.width}, {"normalization", to_string(k.normalization)}};
}

Json terminal_json(const FieldState& s)
{
    return {{"S_max", s.S.maxCoeff()}, {"I_max", s.I.maxCoeff()}, {"R_max", s.R.maxCoeff()},
            {"S_min", s.S.minCoeff()}, {"I_min", s.I.minCoeff()}, {"R_min", s.R.minCoeff()}};
}

Check normalization_check(const KernelMatrix& K)
{
    const NormalizationReport r = check_normalization(K);
    Check c;
    c.name = "normalization";
    c.detail = {{"normalization", to_string(K.spec.normalization)},
                {"max_column_deviation", r.max_column_deviation},
                {"max_row_deviation", r.max_row_deviation},
                {"max_asymmetry", r.max_asymmetry},
                {"symmetric", K.symmetric},
                // P > 0 everywhere, or only P >= 0 (compact support shorter than the interval)
                {"strictly_positive", K.samples.minCoeff() > 0.0},
                {"sinkhorn_sweeps", K.sinkhorn_sweeps},
                {"warnings", K.warnings}};
    switch (K.spec.normalization) {
    case Normalization::ColumnStochastic:
        c.passed = r.max_column_deviation < 1e-12;
        break;
    case Normalization::SinkhornSymmetric:
        c.passed = r.max_asymmetry < 1e-12 && r.max_column_deviation < 1e-9 && r.max_row_deviation < 1e-9;
        break;
    case Normalization::None:
        c.passed = true;
        break;
    }
    if (K.spec.family == KernelFamily::Uniform) c.passed = r.max_column_deviation < 1e-12 && r.max_asymmetry < 1e-12;
    return c;
}

bool spatially_constant(const FieldState& s)
{
    auto flat = [](const Vector& v) { return v.maxCoeff() == v.minCoeff(); };
    return flat(s.S) && flat(s.I) && flat(s.R);
}

void run_interval(const RunConfig& cfg, RunOutcome& out)
{
    const Grid1D g(cfg.left, cfg.right, cfg.n);
    const KernelMatrix K = build_kernel(cfg.kernel, g);
    const FieldState init = initial_state(cfg, g);
    SimOptions so;
    so.dt = cfg.dt;
    so.record_every = cfg.record_every;
    const ModelParams& p = cfg.params;
    const Boundary bc = cfg.model == ModelKind::Neumann ? Boundary::Neumann : Boundary::Dirichlet;
    Trajectory tr = bc == Boundary::Neumann ? simulate_neumann(p, K, init, cfg.T, so)
                                            : simulate_dirichlet(p, K, init, cfg.T, so);
    const Equilibria eq = equilibria(p);
    const FieldState& fin = tr.final();

    Json& s = out.summary;
    s["dt"] = tr.dt;
    s["steps"] = tr.steps;
    s["n"] = g.n;
    s["interval"] = {g.left, g.right};
    s["wall_seconds"] = tr.wall_seconds;
    s["R01"] = eq.R01;
    s["N_star"] = eq.N_star;
    s["t_end"] = fin.t;
    const Json term = terminal_json(fin);
    s["terminal"] = term;
    for (const auto& [k, v] : term.items()) s[k] = v;
    s["dist_E0"] = sup_distance(fin, eq.E0);
    s["dist_E1"] = sup_distance(fin, eq.E1);
    s["dist_E2"] = eq.E2 ? Json(sup_distance(fin, *eq.E2)) : Json(nullptr);
    if (eq.E2) s["E2"] = {eq.E2->S, eq.E2->I, eq.E2->R};

    out.checks.push_back(normalization_check(K));

    const BoundsReport b = verify_bounds(tr, p);
    out.checks.push_back({"bounds", b.passed(),
                          {{"min_component", b.min_component},
                           {"max_total", b.max_total},
                           {"M", b.M},
                           {"max_reduction_deviation", b.max_reduction_deviation},
                           {"positivity_ok", b.positivity_ok},
                           {"bound_ok", b.bound_ok},
                           {"reduction_ok", b.reduction_ok}}});

    if (bc == Boundary::Neumann) {
        ComparisonScheme scheme = ComparisonScheme::Rk4;
        if (cfg.comparison == "euler" || (cfg.comparison == "auto" && spatially_constant(init)))
            scheme = ComparisonScheme::MatchedEuler;
        const ComparisonTrack comp = comparison_for(tr, p, scheme);
        const EnvelopeReport e = envelope_check(tr, comp);
        out.checks.push_back({"envelope", e.passed,
                              {{"scheme", scheme == ComparisonScheme::Rk4 ? "rk4" : "euler"},
                               {"tol", e.tol},
                               {"max_violation", e.max_violation},
                               {"max_spread", e.max_spread}}});
        std::vector<double> F;
        if (eq.E2 && comp.states.front().Iunder > 0.0) {
            const double w = lyapunov_weight(p, comp.states);
            for (const auto& c : comp.states) F.push_back(lyapunov_F(c, eq, p, w));
        }
        Json rows = Json::array();
        for (size_t i = 0; i < comp.states.size(); ++i) {
            const auto& c = comp.states[i];
            rows.push_back({c.t, c.Vbar, c.Vunder, c.Ibar, c.Iunder, F.empty() ? Json(nullptr) : Json(F[i]),
                            comp.f[i], comp.g[i]});
        }
        out.summary["_comparison"] = std::move(rows);
    }

    if (cfg.existence) {
        ExistenceOptions eo;
        eo.T_max = cfg.existence_T_max;
        const SteadyReport r = existence_check(p, K, eo);
        Json runs = Json::array();
        for (const auto& m : r.runs)
            runs.push_back({{"positive", m.positive}, {"steady", m.steady}, {"t_end", m.t_end}, {"max_I", m.max_I}});
        const bool agree = !r.exists_predicted || (r.converged && r.max_pairwise_difference < 1e-4);
        out.checks.push_back({"existence", r.outcomes_match_prediction && agree,
                              {{"lambda1_local", r.lambda1_local_check},
                               {"lambda1_nonlocal", r.lambda1_nonlocal_check},
                               {"exists_predicted", r.exists_predicted},
                               {"converged", r.converged},
                               {"max_pairwise_difference", r.max_pairwise_difference},
                               {"outcomes_match_prediction", r.outcomes_match_prediction},
                               {"runs", runs}}});
        s["exists_predicted"] = r.exists_predicted;
        s["lambda1_local"] = r.lambda1_local_check;
        s["lambda1_nonlocal"] = r.lambda1_nonlocal_check;
    }
    out.trajectory = std::move(tr);
}

double s_deviation_near(const FrontState& f, double radius, double target)
{
    double dev = 0.0;
    for (Eigen::Index i = 0; i < f.x.size(); ++i)
        if (std::abs(f.x[i]) <= radius) dev = std::max(dev, std::abs(f.S[i] - target));
    return dev;
}

void run_stefan(const RunConfig& cfg, RunOutcome& out)
{
    const ModelParams& p = cfg.params;
    const double l_star = stefan_l_star(p, cfg.kernel);
    double T = cfg.T;
    StefanTrajectory tr;
    Classification c;
    for (int k = 0;; ++k) {
        tr = simulate_free_boundary(p, cfg.kernel, cfg.stefan_init, cfg.stefan, T);
        c = classify(tr, l_star, cfg.classify);
        if (c.verdict != Verdict::Undecided || k >= cfg.horizon_doublings || tr.stop != StopReason::Horizon) break;
        T *= 2.0;
    }
    const FrontState& f = tr.final();
    Json& s = out.summary;
    s["verdict"] = to_string(c.verdict);
    s["final_span"] = c.final_span;
    s["span_rate"] = c.span_rate;
    s["I_max_final"] = c.I_max_final;
    s["l_star"] = l_star;
    s["r02"] = c.r02_initial;
    s["r02_gamma_beta"] = stefan_r02(p, cfg.kernel, p.gamma + p.beta);
    s["mu"] = p.mu;
    s["t_end"] = c.t_end;
    s["horizon"] = T;
    s["stop"] = tr.stop == StopReason::Horizon ? "horizon" : "span_limit";
    s["steps"] = tr.steps;
    s["dt_nominal"] = tr.dt_nominal;
    s["g"] = f.g;
    s["h"] = f.h;
    s["A"] = tr.A;
    s["wall_seconds"] = tr.wall_seconds;
    s["S_deviation_2h0"] = s_deviation_near(f, 2.0 * p.h0, p.n_star());
    s["S_max"] = f.S.maxCoeff();
    s["I_max"] = f.I.maxCoeff();
    s["R_max"] = f.R.maxCoeff();
    s["S_min"] = f.S.minCoeff();
    s["I_min"] = f.I.minCoeff();
    s["R_min"] = f.R.minCoeff();
    s["dist_E0"] = nullptr;
    s["dist_E1"] = nullptr;
    s["dist_E2"] = nullptr;

    const bool symmetric_data = cfg.stefan_init.S_skew == 0.0;
    const bool mono = tr.min_front_step >= 0.0;
    const bool bound = tr.max_total <= tr.A + 1e-8;
    const bool pos = tr.min_component >= -1e-12;
    const bool sym = !symmetric_data || tr.max_symmetry_defect < 1e-10;
    out.checks.push_back({"front_invariants", mono && bound && pos && sym,
                          {{"min_front_step", tr.min_front_step},
                           {"front_monotone", mono},
                           {"max_total", tr.max_total},
                           {"A", tr.A},
                           {"bound_ok", bound},
                           {"min_component", tr.min_component},
                           {"positivity_ok", pos},
                           {"symmetric_data", symmetric_data},
                           {"max_symmetry_defect", tr.max_symmetry_defect},
                           {"symmetry_ok", sym}}});
    const bool dich = !(c.verdict == Verdict::Vanishing && c.final_span > l_star + cfg.classify.tol_span);
    out.checks.push_back({"dichotomy", dich,
                          {{"verdict", to_string(c.verdict)}, {"final_span", c.final_span}, {"l_star", l_star}}});
    out.fronts = std::move(tr);
}

void run_eigen(const RunConfig& cfg, RunOutcome& out)
{
    const double L = cfg.length;
    const int n = cfg.eig_n > 0 ? cfg.eig_n : resolution_for(L, cfg.kernel);
    const Grid1D g(-0.5 * L, 0.5 * L, n);
    EigenProblem ep;
    if (cfg.c1 > 0.0) {
        auto K = std::make_shared<const KernelMatrix>(build_kernel(cfg.kernel, g));
        ep = EigenProblem::constant(cfg.params.d, cfg.c1, cfg.c2, K);
    } else {
        ep = EigenProblem::local(cfg.params.d, g, Vector::Constant(n, cfg.c2));
    }
    const EigenResult r = principal_eigenvalue(ep);
    Json& s = out.summary;
    s["lambda1"] = r.lambda1;
    s["residual"] = r.residual;
    s["iterations"] = r.iterations;
    s["n"] = n;
    s["length"] = L;
    s["c1"] = cfg.c1;
    s["c2"] = cfg.c2;
    s["r02"] = (cfg.c1 > 0.0 && cfg.c2 > 0.0) ? Json(nsir::r02(ep).r02) : Json(nullptr);
    s["l_star"] = cfg.lstar ? Json(critical_length(cfg.c1, cfg.c2, cfg.params.d, cfg.kernel, cfg.lstar_tol).l_star)
                            : Json(nullptr);
    const bool positive = r.phi.segment(1, n - 2).minCoeff() > 0.0;
    out.checks.push_back({"eigenpair", positive && r.residual < 1e-8 * std::max(1.0, std::abs(r.lambda1)) + 1e-9,
                          {{"residual", r.residual}, {"phi_positive", positive}}});
    out.eigen = r;
    out.eigen_grid = g;
}

void run_thresholds(const RunConfig& cfg, RunOutcome& out)
{
    const ModelParams& p = cfg.params;
    Json& s = out.summary;
    const double sup_sum = cfg.stefan_init.S_amp * (1.0 + std::abs(cfg.stefan_init.S_skew)) + cfg.stefan_init.I_amp;
    const double r02gb = stefan_r02(p, cfg.kernel, p.gamma + p.beta);
    s["sup_S0_plus_sup_I0"] = sup_sum;
    s["r02_gamma_beta"] = r02gb;
    s["hypotheses_hold"] = sup_sum <= p.n_star() && r02gb < 1.0;

    const UpperSolutionReport us =
        upper_solution_check(p, cfg.kernel, cfg.stefan_init, cfg.delta, 0.0, cfg.eps, cfg.margin);
    s["upper_solution"] = {{"lambda_eps", us.lambda_eps}, {"delta", us.delta},       {"eps", us.eps},
                           {"A_amp", us.A_amp},           {"slack_pde", us.slack_pde}, {"slack_front", us.slack_front},
                           {"slack_initial", us.slack_initial}, {"phi_slope", us.phi_slope}, {"mu0", us.mu0}};
    s["mu0"] = us.mu0;
    out.checks.push_back({"upper_solution", us.passed(), s["upper_solution"]});

    const double l_star = stefan_l_star(p, cfg.kernel);
    s["l_star"] = l_star;
    if (cfg.verify_mu0) {
        ModelParams q = p;
        q.mu = 0.5 * us.mu0;
        const Classification c =
            classify(simulate_free_boundary(q, cfg.kernel, cfg.stefan_init, cfg.stefan, cfg.T), l_star, cfg.classify);
        s["mu0_half_verdict"] = to_string(c.verdict);
        out.checks.push_back({"mu0_vanishing", c.verdict == Verdict::Vanishing,
                              {{"mu", q.mu}, {"verdict", to_string(c.verdict)}, {"final_span", c.final_span}}});
    }

    CriticalMuOptions co;
    co.tol = cfg.mu_tol;
    co.horizon_doublings = cfg.horizon_doublings;
    co.classify = cfg.classify;
    const MuBracket br = critical_mu(p, cfg.kernel, cfg.stefan_init, cfg.stefan, cfg.mu_lo, cfg.mu_hi, cfg.T, co);
    Json probes = Json::array();
    for (const auto& pr : br.probes)
        probes.push_back({{"mu", pr.mu}, {"verdict", to_string(pr.verdict)}, {"final_span", pr.final_span},
                          {"horizon", pr.horizon}});
    s["mu_lo"] = br.mu_lo;
    s["mu_hi"] = br.mu_hi;
    s["bracket_width"] = br.mu_hi - br.mu_lo;
    s["monotone"] = br.monotone;
    s["probes"] = probes;
    out.checks.push_back({"mu_bracket", br.monotone && br.mu_hi - br.mu_lo < cfg.mu_tol,
                          {{"mu_lo", br.mu_lo}, {"mu_hi", br.mu_hi}, {"monotone", br.monotone}}});
}

void write_cell(CsvWriter& w, const Json& v)
{
    if (v.is_null()) w << "";
    else if (v.is_boolean()) w << (v.get<bool>() ? "true" : "false");
    else if (v.is_number_integer()) w << long(v.get<long long>());
    else if (v.is_number()) w << v.get<double>();
    else if (v.is_string()) w << v.get<std::string>();
    else w << v.dump();
}

} // namespace

FieldState initial_state(const RunConfig& cfg, const Grid1D& g)
{
    const ModelParams& p = cfg.params;
    const Equilibria eq = equilibria(p);
    if (cfg.init_profile == "dirichlet") return dirichlet_initial_data(g, eq.N_star)[cfg.init_index];
    if (cfg.model == ModelKind::Dirichlet)
        throw Error(ErrorCode::ConfigInvalid, "init.profile: Dirichlet runs need the dirichlet profile");
    if (cfg.init_profile == "constant") return constant_state(g, cfg.init_S, cfg.init_I, cfg.init_R);
    if (cfg.init_profile == "equilibrium") {
        const State3 e = eq.E2 ? *eq.E2 : eq.E1;
        return constant_state(g, e.S, e.I, e.R);
    }
    // E1 has no infected component, so below threshold the perturbation is taken around (0.8, 0.2) N*
    const State3 ref = eq.E2 ? *eq.E2 : State3{0.8 * eq.N_star, 0.2 * eq.N_star, 0.0};
    return perturbed_state(g, ref.S, ref.I, cfg.init_amp);
}

RunOutcome execute(const RunConfig& cfg)
{
    cfg.validate();
    RunOutcome out;
    out.config = cfg;
    out.summary = {{"model", to_string(cfg.model)},
                   {"preset", cfg.preset},
                   {"params", params_json(cfg.params)},
                   {"kernel", kernel_json(cfg.kernel)},
                   {"T", cfg.T}};
    switch (cfg.model) {
    case ModelKind::Neumann:
    case ModelKind::Dirichlet: run_interval(cfg, out); break;
    case ModelKind::Stefan: run_stefan(cfg, out); break;
    case ModelKind::Eigen: run_eigen(cfg, out); break;
    case ModelKind::Thresholds: run_thresholds(cfg, out); break;
    }
    out.summary["checks_passed"] = out.checks_passed();
    return out;
}

void write_artifacts(const RunOutcome& out, const fs::path& dir)
{
    fs::create_directories(dir);
    Json summary = out.summary;
    const Json comparison = summary.contains("_comparison") ? summary["_comparison"] : Json();
    summary.erase("_comparison");
    Json names = Json::array();
    for (const auto& c : out.checks) {
        Json j = c.detail;
        j["check"] = c.name;
        j["passed"] = c.passed;
        write_json(dir / ("check_" + c.name + ".json"), j);
        names.push_back(c.name);
    }
    summary["checks"] = names;
    write_json(dir / "summary.json", summary);

    if (out.trajectory) {
        std::ostringstream os;
        CsvWriter w(os, {"t", "x", "S", "I", "R"});
        const Vector x = out.trajectory->grid.nodes();
        for (const auto& s : out.trajectory->snapshots)
            for (Eigen::Index i = 0; i < x.size(); ++i) {
                w << s.t << x[i] << s.S[i] << s.I[i] << s.R[i];
                w.end_row();
            }
        write_text(dir / "trajectory.csv", os.str());
    }
    if (!comparison.is_null()) {
        std::ostringstream os;
        CsvWriter w(os, {"t", "Vbar", "Vunder", "Ibar", "Iunder", "F", "f", "g"});
        for (const auto& row : comparison) {
            for (const auto& v : row) write_cell(w, v);
            w.end_row();
        }
        write_text(dir / "comparison.csv", os.str());
    }
    if (out.fronts) {
        const StefanTrajectory& tr = *out.fronts;
        {
            std::ostringstream os;
            CsvWriter w(os, {"t", "g", "h", "h_prime", "minus_g_prime", "maxI"});
            for (const auto& f : tr.fronts) {
                w << f.t << f.g << f.h << f.hp << f.mgp << f.maxI;
                w.end_row();
            }
            write_text(dir / "fronts.csv", os.str());
        }
        {
            std::ostringstream os;
            CsvWriter w(os, {"t", "x", "S", "I", "R"});
            const int K = tr.numerics.K, M = tr.numerics.M;
            for (const auto& s : tr.snapshots)
                for (Eigen::Index i = 0; i < s.x.size(); ++i) {
                    const long j = long(i) - K;
                    const bool in = j >= 0 && j <= M;
                    w << s.t << s.x[i] << s.S[i] << (in ? s.I[j] : 0.0) << (in ? s.R[j] : 0.0);
                    w.end_row();
                }
            write_text(dir / "fields.csv", os.str());
        }
        write_json(dir / "classification.json",
                   {{"verdict", summary["verdict"]}, {"final_span", summary["final_span"]},
                    {"l_star", summary["l_star"]}, {"r02", summary["r02"]}, {"mu", summary["mu"]}});
    }
    if (out.eigen) {
        write_json(dir / "eigen.json", {{"lambda1", summary["lambda1"]}, {"r02", summary["r02"]},
                                        {"l_star", summary["l_star"]}, {"residual", summary["residual"]},
                                        {"n", summary["n"]}});
        if (out.config.write_phi) {
            std::ostringstream os;
            CsvWriter w(os, {"x", "phi"});
            const Vector x = out.eigen_grid.nodes();
            for (Eigen::Index i = 0; i < x.size(); ++i) {
                w << x[i] << out.eigen->phi[i];
                w.end_row();
            }
            write_text(dir / "phi.csv", os.str());
        }
    }
    if (out.config.model == ModelKind::Thresholds) write_json(dir / "thresholds.json", summary);
}

std::vector<std::string> reducer_columns(Reducer r)
{
    switch (r) {
    case Reducer::Classification:
        return {"verdict", "final_span", "span_rate", "I_max_final", "l_star", "r02", "t_end"};
    case Reducer::TerminalState:
        return {"t_end", "S_max", "I_max", "R_max", "S_min", "I_min", "R_min", "dist_E0", "dist_E1", "dist_E2"};
    case Reducer::Lambda1:
        return {"lambda1", "r02", "l_star", "residual", "n"};
    }
    return {};
}

std::vector<Json> reduce(const RunOutcome& out, Reducer r)
{
    std::vector<Json> cells;
    for (const auto& c : reducer_columns(r)) cells.push_back(out.summary.contains(c) ? out.summary[c] : Json(nullptr));
    return cells;
}

SweepTable sweep(const SweepConfig& sc)
{
    sc.validate();
    SweepTable tab;
    tab.axis = sc.axis;
    tab.reducer = sc.reducer;
    tab.columns = reducer_columns(sc.reducer);
    tab.rows.resize(sc.values.size());
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const size_t workers = std::min<size_t>(sc.workers > 0 ? size_t(sc.workers) : hw, sc.values.size());
    std::atomic<size_t> next{0};
    auto work = [&] {
        for (size_t i; (i = next.fetch_add(1)) < sc.values.size();) {
            SweepRow& row = tab.rows[i];
            row.value = sc.values[i];
            try {
                RunConfig cfg = sc.base;
                apply_setting(cfg, sc.axis, format_double(row.value));
                if (cfg.M_cap) cfg.params.b = (cfg.params.a - cfg.params.beta) / *cfg.M_cap;
                row.cells = reduce(execute(cfg), sc.reducer);
                row.ok = true;
            } catch (const std::exception& e) {
                row.ok = false;
                row.error = e.what();
                row.cells.assign(tab.columns.size(), nullptr);
            }
        }
    };
    std::vector<std::thread> pool;
    for (size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    if (sc.reducer == Reducer::Classification) {
        std::string prev;
        for (const auto& row : tab.rows) {
            if (!row.ok) continue;
            const std::string v = row.cells[0].get<std::string>();
            if (v == "Undecided") continue;
            if (!prev.empty() && v != prev) {
                ++tab.verdict_changes;
                const bool increasing = sc.values.size() < 2 || sc.values[1] > sc.values[0];
                const std::string expect_after = increasing ? "Spreading" : "Vanishing";
                if (v != expect_after) tab.monotone = false;
            }
            prev = v;
        }
        if (tab.verdict_changes > 1) tab.monotone = false;
    }
    return tab;
}

std::string SweepTable::csv() const
{
    std::vector<std::string> header{axis, "status", "error"};
    header.insert(header.end(), columns.begin(), columns.end());
    std::ostringstream os;
    CsvWriter w(os, header);
    for (const auto& r : rows) {
        w << r.value << (r.ok ? "ok" : "error") << r.error;
        for (const auto& c : r.cells) write_cell(w, c);
        w.end_row();
    }
    return os.str();
}

Json SweepTable::json() const
{
    size_t failed = 0, undecided = 0;
    for (const auto& r : rows) {
        if (!r.ok) ++failed;
        else if (reducer == Reducer::Classification && r.cells[0] == "Undecided") ++undecided;
    }
    Json j = {{"axis", axis}, {"reducer", to_string(reducer)}, {"points", rows.size()}, {"failed", failed}};
    if (reducer == Reducer::Classification) {
        j["verdict_changes"] = verdict_changes;
        j["monotone"] = monotone;
        j["undecided"] = undecided;
    }
    return j;
}

ReportResult report(const fs::path& dir)
{
    if (!fs::is_directory(dir)) throw Error(ErrorCode::MissingArtifact, dir.string() + " is not a directory");
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        const std::string name = e.path().filename().string();
        if (e.is_regular_file() && name.rfind("check_", 0) == 0 && e.path().extension() == ".json")
            files.push_back(e.path());
    }
    if (files.empty()) throw Error(ErrorCode::MissingArtifact, "no check_*.json artifacts under " + dir.string());
    std::sort(files.begin(), files.end());
    ReportResult rr;
    rr.all_passed = true;
    Json checks = Json::array();
    Json failed = Json::array();
    std::ostringstream txt;
    for (const auto& f : files) {
        const Json j = read_json(f);
        if (!j.is_object() || !j.contains("passed") || !j["passed"].is_boolean())
            throw Error(ErrorCode::MissingArtifact, f.string() + " lacks a boolean 'passed' field");
        const bool ok = j["passed"].get<bool>();
        const std::string rel = fs::relative(f, dir).generic_string();
        const std::string name = j.value("check", f.stem().string());
        checks.push_back({{"file", rel}, {"check", name}, {"passed", ok}});
        if (!ok) {
            rr.all_passed = false;
            failed.push_back(rel);
        }
        txt << (ok ? "PASS " : "FAIL ") << rel << "\n";
    }
    txt << (rr.all_passed ? "all checks passed" : "invariant failure") << " (" << files.size() << " checks)\n";
    rr.consolidated = {{"directory", dir.generic_string()}, {"checks", checks}, {"failed", failed},
                       {"all_passed", rr.all_passed}};
    rr.text = txt.str();
    return rr;
}

} // namespace nsir
