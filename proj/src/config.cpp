#include "nsir/config.hpp"
#include "nsir/errors.hpp"
#include "nsir/io.hpp"

#include <cctype>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <sstream>

namespace nsir {

const char* to_string(ModelKind m)
{
    switch (m) {
    case ModelKind::Neumann: return "neumann";
    case ModelKind::Dirichlet: return "dirichlet";
    case ModelKind::Stefan: return "stefan";
    case ModelKind::Eigen: return "eigen";
    case ModelKind::Thresholds: return "thresholds";
    }
    return "?";
}

const char* to_string(Reducer r)
{
    switch (r) {
    case Reducer::Classification: return "Classification";
    case Reducer::TerminalState: return "TerminalState";
    case Reducer::Lambda1: return "Lambda1";
    }
    return "?";
}

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& why)
{
    throw Error(ErrorCode::ConfigInvalid, key + ": " + why);
}

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v)
{
    const std::string t = trim(v);
    try {
        size_t used = 0;
        const double x = std::stod(t, &used);
        if (used != t.size() || !std::isfinite(x)) bad(key, "not a finite number: '" + v + "'");
        return x;
    } catch (const std::logic_error&) {
        bad(key, "not a number: '" + v + "'");
    }
}

long to_long(const std::string& key, const std::string& v)
{
    const double x = to_double(key, v);
    if (x != std::floor(x) || std::abs(x) > 1e15) bad(key, "not an integer: '" + v + "'");
    return long(x);
}

bool to_bool(const std::string& key, const std::string& v)
{
    const std::string t = lower(trim(v));
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    bad(key, "not a boolean: '" + v + "'");
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

struct KeyInfo {
    Setter set;
    bool numeric;
};

Setter num(double RunConfig::*m)
{
    return [m](RunConfig& c, const std::string& k, const std::string& v) { c.*m = to_double(k, v); };
}
Setter num_p(double ModelParams::*m)
{
    return [m](RunConfig& c, const std::string& k, const std::string& v) { c.params.*m = to_double(k, v); };
}
Setter num_s(double StefanNumerics::*m)
{
    return [m](RunConfig& c, const std::string& k, const std::string& v) { c.stefan.*m = to_double(k, v); };
}
Setter int_s(int StefanNumerics::*m)
{
    return [m](RunConfig& c, const std::string& k, const std::string& v) { c.stefan.*m = int(to_long(k, v)); };
}
Setter num_i(double StefanInit::*m)
{
    return [m](RunConfig& c, const std::string& k, const std::string& v) { c.stefan_init.*m = to_double(k, v); };
}
Setter num_c(double ClassifyOptions::*m)
{
    return [m](RunConfig& c, const std::string& k, const std::string& v) { c.classify.*m = to_double(k, v); };
}
Setter boolean(bool RunConfig::*m)
{
    return [m](RunConfig& c, const std::string& k, const std::string& v) { c.*m = to_bool(k, v); };
}
Setter integer(int RunConfig::*m)
{
    return [m](RunConfig& c, const std::string& k, const std::string& v) { c.*m = int(to_long(k, v)); };
}

const std::map<std::string, KeyInfo>& table()
{
    static const std::map<std::string, KeyInfo> t = {
        {"run.model", {[](RunConfig& c, const std::string& k, const std::string& v) {
                           const std::string m = lower(trim(v));
                           if (m == "neumann") c.model = ModelKind::Neumann;
                           else if (m == "dirichlet") c.model = ModelKind::Dirichlet;
                           else if (m == "stefan") c.model = ModelKind::Stefan;
                           else if (m == "eigen") c.model = ModelKind::Eigen;
                           else if (m == "thresholds") c.model = ModelKind::Thresholds;
                           else bad(k, "unknown model '" + v + "'");
                       }, false}},
        {"run.preset", {[](RunConfig&, const std::string&, const std::string&) {}, false}},
        {"run.output", {[](RunConfig& c, const std::string&, const std::string& v) { c.output = trim(v); }, false}},
        {"run.T", {num(&RunConfig::T), true}},
        {"run.existence", {boolean(&RunConfig::existence), false}},
        {"run.T_max", {num(&RunConfig::existence_T_max), true}},
        {"run.comparison", {[](RunConfig& c, const std::string& k, const std::string& v) {
                                const std::string m = lower(trim(v));
                                if (m != "auto" && m != "rk4" && m != "euler") bad(k, "expected auto, rk4 or euler");
                                c.comparison = m;
                            }, false}},
        {"params.a", {num_p(&ModelParams::a), true}},
        {"params.beta", {num_p(&ModelParams::beta), true}},
        {"params.b", {[](RunConfig& c, const std::string& k, const std::string& v) {
                          c.params.b = to_double(k, v);
                          c.M_cap.reset();
                      }, true}},
        {"params.M_cap", {[](RunConfig& c, const std::string& k, const std::string& v) { c.M_cap = to_double(k, v); },
                          true}},
        {"params.k", {num_p(&ModelParams::k), true}},
        {"params.gamma", {num_p(&ModelParams::gamma), true}},
        {"params.d", {num_p(&ModelParams::d), true}},
        {"params.mu", {num_p(&ModelParams::mu), true}},
        {"params.h0", {num_p(&ModelParams::h0), true}},
        {"kernel.family", {[](RunConfig& c, const std::string& k, const std::string& v) {
                               try {
                                   c.kernel.family = parse_family(lower(trim(v)));
                               } catch (const Error&) {
                                   bad(k, "unknown kernel family '" + v + "'");
                               }
                           }, false}},
        {"kernel.width", {[](RunConfig& c, const std::string& k, const std::string& v) {
                              c.kernel.width = to_double(k, v);
                          }, true}},
        {"kernel.normalization", {[](RunConfig& c, const std::string& k, const std::string& v) {
                                      try {
                                          c.kernel.normalization = parse_normalization(lower(trim(v)));
                                      } catch (const Error&) {
                                          bad(k, "unknown normalization '" + v + "'");
                                      }
                                  }, false}},
        {"grid.left", {num(&RunConfig::left), true}},
        {"grid.right", {num(&RunConfig::right), true}},
        {"grid.n", {integer(&RunConfig::n), true}},
        {"grid.dt", {num(&RunConfig::dt), true}},
        {"grid.record_every", {[](RunConfig& c, const std::string& k, const std::string& v) {
                                   c.record_every = to_long(k, v);
                               }, true}},
        {"stefan.M", {int_s(&StefanNumerics::M), true}},
        {"stefan.K", {int_s(&StefanNumerics::K), true}},
        {"stefan.L_dom", {num_s(&StefanNumerics::L_dom), true}},
        {"stefan.dt", {num_s(&StefanNumerics::dt), true}},
        {"stefan.max_span", {num_s(&StefanNumerics::max_span), true}},
        {"stefan.snapshots", {int_s(&StefanNumerics::snapshots), true}},
        {"init.profile", {[](RunConfig& c, const std::string& k, const std::string& v) {
                              const std::string m = lower(trim(v));
                              if (m != "perturbed" && m != "constant" && m != "equilibrium" && m != "dirichlet")
                                  bad(k, "expected perturbed, constant, equilibrium or dirichlet");
                              c.init_profile = m;
                          }, false}},
        {"init.S", {num(&RunConfig::init_S), true}},
        {"init.I", {num(&RunConfig::init_I), true}},
        {"init.R", {num(&RunConfig::init_R), true}},
        {"init.amp", {num(&RunConfig::init_amp), true}},
        {"init.index", {integer(&RunConfig::init_index), true}},
        {"init.S_amp", {num_i(&StefanInit::S_amp), true}},
        {"init.I_amp", {num_i(&StefanInit::I_amp), true}},
        {"init.S_skew", {num_i(&StefanInit::S_skew), true}},
        {"classify.eps_I", {num_c(&ClassifyOptions::eps_I), true}},
        {"classify.tol_rate", {num_c(&ClassifyOptions::tol_rate), true}},
        {"classify.tol_span", {num_c(&ClassifyOptions::tol_span), true}},
        {"classify.horizon_doublings", {integer(&RunConfig::horizon_doublings), true}},
        {"eigen.c1", {num(&RunConfig::c1), true}},
        {"eigen.c2", {num(&RunConfig::c2), true}},
        {"eigen.length", {num(&RunConfig::length), true}},
        {"eigen.n", {integer(&RunConfig::eig_n), true}},
        {"eigen.lstar", {boolean(&RunConfig::lstar), false}},
        {"eigen.tol", {num(&RunConfig::lstar_tol), true}},
        {"eigen.phi", {boolean(&RunConfig::write_phi), false}},
        {"thresholds.mu_lo", {num(&RunConfig::mu_lo), true}},
        {"thresholds.mu_hi", {num(&RunConfig::mu_hi), true}},
        {"thresholds.mu_tol", {num(&RunConfig::mu_tol), true}},
        {"thresholds.delta", {num(&RunConfig::delta), true}},
        {"thresholds.eps", {num(&RunConfig::eps), true}},
        {"thresholds.margin", {num(&RunConfig::margin), true}},
        {"thresholds.verify_mu0", {boolean(&RunConfig::verify_mu0), false}},
    };
    return t;
}

void require(bool ok, const std::string& key, const std::string& why)
{
    if (!ok) bad(key, why);
}

} // namespace

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value)
{
    const auto& t = table();
    const auto it = t.find(key);
    if (it == t.end()) bad(key, "unknown configuration key");
    it->second.set(cfg, key, value);
}

std::vector<std::string> config_keys()
{
    std::vector<std::string> out;
    for (const auto& kv : table()) out.push_back(kv.first);
    return out;
}

bool is_numeric_key(const std::string& key)
{
    const auto it = table().find(key);
    return it != table().end() && it->second.numeric;
}

void RunConfig::validate() const
{
    auto positive = [](double v, const char* key) { require(v > 0.0, key, "must be positive"); };
    positive(params.a, "params.a");
    positive(params.beta, "params.beta");
    positive(params.b, "params.b");
    positive(params.k, "params.k");
    positive(params.gamma, "params.gamma");
    positive(params.d, "params.d");
    positive(params.mu, "params.mu");
    positive(params.h0, "params.h0");
    if (M_cap) positive(*M_cap, "params.M_cap");
    require(params.a > params.beta, "params.a", "must exceed params.beta");
    positive(kernel.width, "kernel.width");
    positive(T, "run.T");

    if (model == ModelKind::Neumann || model == ModelKind::Dirichlet) {
        require(left < right, "grid.right", "must exceed grid.left");
        require(n >= 3, "grid.n", "must be at least 3");
        require(dt >= 0.0, "grid.dt", "must be nonnegative");
        require(record_every >= 0, "grid.record_every", "must be nonnegative");
        require(init_S >= 0.0, "init.S", "must be nonnegative");
        require(init_I >= 0.0, "init.I", "must be nonnegative");
        require(init_R >= 0.0, "init.R", "must be nonnegative");
        require(init_amp >= 0.0 && init_amp < 1.0, "init.amp", "must lie in [0, 1)");
        require(init_index >= 0 && init_index <= 2, "init.index", "must be 0, 1 or 2");
        positive(existence_T_max, "run.T_max");
        if (model == ModelKind::Neumann) {
            require(init_profile != "dirichlet", "init.profile", "dirichlet profile needs the Dirichlet model");
            if (init_profile == "constant")
                require(init_S > 0.0 && init_I > 0.0, "init.S", "Neumann data need S0, I0 > 0");
        }
        if (model == ModelKind::Dirichlet)
            require(init_profile == "dirichlet", "init.profile", "Dirichlet runs need the dirichlet profile");
        if (existence) {
            require(model == ModelKind::Dirichlet, "run.existence", "only applies to the Dirichlet model");
            require(kernel.normalization == Normalization::SinkhornSymmetric ||
                        kernel.family == KernelFamily::Uniform,
                    "kernel.normalization", "existence check needs a symmetric kernel");
        }
    }
    if (model == ModelKind::Stefan || model == ModelKind::Thresholds) {
        require(kernel.family != KernelFamily::Uniform, "kernel.family",
                "free-boundary runs need a convolution kernel");
        require(stefan.M >= 4, "stefan.M", "must be at least 4");
        require(stefan.K >= 4, "stefan.K", "must be at least 4");
        require(stefan.L_dom >= 0.0, "stefan.L_dom", "must be nonnegative");
        require(stefan.dt >= 0.0, "stefan.dt", "must be nonnegative");
        require(stefan.max_span >= 0.0, "stefan.max_span", "must be nonnegative");
        require(stefan.snapshots >= 1, "stefan.snapshots", "must be at least 1");
        positive(stefan_init.S_amp, "init.S_amp");
        positive(stefan_init.I_amp, "init.I_amp");
        require(std::abs(stefan_init.S_skew) < 1.0, "init.S_skew", "must lie in (-1, 1)");
        positive(classify.eps_I, "classify.eps_I");
        positive(classify.tol_rate, "classify.tol_rate");
        require(classify.tol_span >= 0.0, "classify.tol_span", "must be nonnegative");
        require(horizon_doublings >= 0, "classify.horizon_doublings", "must be nonnegative");
    }
    if (model == ModelKind::Thresholds) {
        positive(mu_lo, "thresholds.mu_lo");
        require(mu_hi > mu_lo, "thresholds.mu_hi", "must exceed thresholds.mu_lo");
        positive(mu_tol, "thresholds.mu_tol");
        require(delta > 0.0 && delta < 0.5, "thresholds.delta", "must lie in (0, 1/2)");
        require(eps >= 0.0, "thresholds.eps", "must be nonnegative");
        require(margin >= 0.0, "thresholds.margin", "must be nonnegative");
    }
    if (model == ModelKind::Eigen) {
        require(c1 >= 0.0, "eigen.c1", "must be nonnegative");
        positive(length, "eigen.length");
        require(eig_n == 0 || eig_n >= 4, "eigen.n", "must be 0 or at least 4");
        positive(lstar_tol, "eigen.tol");
        if (c1 > 0.0 && kernel.family == KernelFamily::Uniform && lstar)
            bad("eigen.lstar", "critical length needs a convolution kernel");
    }
}

void SweepConfig::validate() const
{
    base.validate();
    require(!axis.empty(), "sweep.axis", "missing");
    require(is_numeric_key(axis), "sweep.axis", "'" + axis + "' is not a numeric configuration key");
    require(values.size() >= 1, "sweep.values", "no values");
    if (values.size() >= 2) {
        const bool up = values[1] > values[0];
        for (size_t i = 1; i < values.size(); ++i)
            require(up ? values[i] > values[i - 1] : values[i] < values[i - 1], "sweep.values",
                    "must be strictly monotone");
    }
    require(workers >= 0, "sweep.workers", "must be nonnegative");
    if (reducer == Reducer::Classification)
        require(base.model == ModelKind::Stefan, "sweep.reducer", "Classification needs the stefan model");
    if (reducer == Reducer::Lambda1)
        require(base.model == ModelKind::Eigen, "sweep.reducer", "Lambda1 needs the eigen model");
    if (reducer == Reducer::TerminalState)
        require(base.model == ModelKind::Neumann || base.model == ModelKind::Dirichlet || base.model == ModelKind::Stefan,
                "sweep.reducer", "TerminalState needs a time-dependent model");
}

Settings read_ini(const std::filesystem::path& path)
{
    namespace pt = boost::property_tree;
    if (!std::filesystem::exists(path))
        throw Error(ErrorCode::ConfigInvalid, "config file " + path.string() + " does not exist");
    pt::ptree tree;
    try {
        pt::read_ini(path.string(), tree);
    } catch (const pt::ini_parser_error& e) {
        throw Error(ErrorCode::ConfigInvalid, std::string("cannot parse ") + path.string() + ": " + e.what());
    }
    // inline comments: whitespace followed by ';' or '#'
    auto strip = [](std::string v) {
        for (size_t i = 1; i < v.size(); ++i)
            if ((v[i] == ';' || v[i] == '#') && std::isspace(static_cast<unsigned char>(v[i - 1]))) {
                v.erase(i);
                break;
            }
        return trim(v);
    };
    Settings out;
    for (const auto& sec : tree) {
        if (sec.second.empty()) {
            out.emplace_back(sec.first, strip(sec.second.data()));
            continue;
        }
        for (const auto& kv : sec.second) out.emplace_back(sec.first + "." + kv.first, strip(kv.second.data()));
    }
    return out;
}

Settings parse_overrides(const std::vector<std::string>& assignments)
{
    Settings out;
    for (const auto& a : assignments) {
        const auto eq = a.find('=');
        if (eq == std::string::npos || eq == 0)
            throw Error(ErrorCode::ConfigInvalid, "override '" + a + "' is not of the form section.key=value");
        out.emplace_back(trim(a.substr(0, eq)), trim(a.substr(eq + 1)));
    }
    return out;
}

namespace {

RunConfig build_base(const Settings& s, bool sweep_keys_ok)
{
    RunConfig cfg;
    std::string preset_name;
    for (const auto& kv : s)
        if (kv.first == "run.preset") preset_name = trim(kv.second);
    if (!preset_name.empty()) {
        try {
            cfg = preset(preset_name);
        } catch (const Error&) {
            bad("run.preset", "unknown preset '" + preset_name + "'");
        }
    }
    for (const auto& kv : s) {
        if (kv.first.rfind("sweep.", 0) == 0) {
            if (!sweep_keys_ok) bad(kv.first, "sweep keys only apply to the sweep command");
            continue;
        }
        apply_setting(cfg, kv.first, kv.second);
    }
    if (cfg.M_cap) cfg.params.b = (cfg.params.a - cfg.params.beta) / *cfg.M_cap;
    return cfg;
}

std::vector<double> parse_list(const std::string& key, const std::string& v)
{
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (trim(item).empty()) continue;
        out.push_back(to_double(key, item));
    }
    return out;
}

} // namespace

RunConfig build_run_config(const Settings& s)
{
    RunConfig cfg = build_base(s, false);
    cfg.validate();
    return cfg;
}

SweepConfig build_sweep_config(const Settings& s)
{
    SweepConfig sc;
    sc.base = build_base(s, true);
    bool have_values = false;
    for (const auto& kv : s) {
        const std::string& k = kv.first;
        if (k == "sweep.axis") sc.axis = trim(kv.second);
        else if (k == "sweep.values") {
            sc.values = parse_list(k, kv.second);
            have_values = true;
        } else if (k == "sweep.range") {
            // lo, hi, count with linear spacing
            const auto r = parse_list(k, kv.second);
            if (r.size() != 3 || r[2] < 1 || r[2] != std::floor(r[2])) bad(k, "expected lo, hi, count");
            const int cnt = int(r[2]);
            sc.values.clear();
            for (int i = 0; i < cnt; ++i) sc.values.push_back(cnt == 1 ? r[0] : r[0] + (r[1] - r[0]) * i / (cnt - 1));
            have_values = true;
        } else if (k == "sweep.logrange") {
            const auto r = parse_list(k, kv.second);
            if (r.size() != 3 || r[0] <= 0 || r[1] <= 0 || r[2] < 1 || r[2] != std::floor(r[2]))
                bad(k, "expected positive lo, hi, count");
            const int cnt = int(r[2]);
            sc.values.clear();
            for (int i = 0; i < cnt; ++i)
                sc.values.push_back(cnt == 1 ? r[0] : r[0] * std::pow(r[1] / r[0], double(i) / (cnt - 1)));
            have_values = true;
        } else if (k == "sweep.reducer") {
            const std::string r = lower(trim(kv.second));
            if (r == "classification") sc.reducer = Reducer::Classification;
            else if (r == "terminalstate") sc.reducer = Reducer::TerminalState;
            else if (r == "lambda1") sc.reducer = Reducer::Lambda1;
            else bad(k, "expected Classification, TerminalState or Lambda1");
        } else if (k == "sweep.workers") {
            sc.workers = int(to_long(k, kv.second));
        } else if (k.rfind("sweep.", 0) == 0) {
            bad(k, "unknown configuration key");
        }
    }
    if (!have_values) bad("sweep.values", "missing (give sweep.values, sweep.range or sweep.logrange)");
    sc.validate();
    for (double v : sc.values) {
        RunConfig probe = sc.base;
        apply_setting(probe, sc.axis, format_double(v));
        if (probe.M_cap) probe.params.b = (probe.params.a - probe.params.beta) / *probe.M_cap;
        probe.validate();
    }
    return sc;
}

RunConfig load_run_config(const std::filesystem::path& path, const std::vector<std::string>& overrides)
{
    Settings s = read_ini(path);
    const Settings o = parse_overrides(overrides);
    s.insert(s.end(), o.begin(), o.end());
    return build_run_config(s);
}

SweepConfig load_sweep_config(const std::filesystem::path& path, const std::vector<std::string>& overrides)
{
    Settings s = read_ini(path);
    const Settings o = parse_overrides(overrides);
    s.insert(s.end(), o.begin(), o.end());
    return build_sweep_config(s);
}

std::filesystem::path resolve_output(const RunConfig& cfg)
{
    std::filesystem::path p = cfg.output.empty()
                                  ? std::filesystem::path("runs") / (cfg.preset.empty() ? to_string(cfg.model) : cfg.preset)
                                  : std::filesystem::path(cfg.output);
    if (p.is_relative()) {
        if (const char* root = std::getenv("NSIR_OUTPUT_ROOT"); root && *root) p = std::filesystem::path(root) / p;
    }
    return p;
}

} // namespace nsir
