#include "nsir/errors.hpp"
#include "nsir/harness.hpp"

#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace nsir;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& tag)
{
    const fs::path p = fs::temp_directory_path() / ("nsir_ut_" + std::to_string(::getpid()) + "_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

ErrorCode code_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error raised");
    return ErrorCode::InvalidArgument;
}

std::string message_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.what();
    }
    return "";
}

int cli(const std::string& args)
{
    const std::string cmd = std::string(NSIR_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

} // namespace

TEST_SUITE("harness") {

TEST_CASE("number and field formatting")
{
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(1.0) == "1");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", -2.5e-300);
    CHECK(format_double(-2.5e-300) == buf);
    CHECK(format_double(1.0 / 3.0) == "0.33333333333333331");
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_field("two\nlines") == "\"two\nlines\"");

    std::ostringstream os;
    CsvWriter w(os, {"x", "note"});
    w << 0.5 << "a,b";
    w.end_row();
    CHECK(os.str() == "x,note\r\n0.5,\"a,b\"\r\n");
}

TEST_CASE("configuration errors name the field")
{
    CHECK(code_of([] { build_run_config({{"run.preset", "thm22"}, {"params.k", "-1"}}); }) == ErrorCode::ConfigInvalid);
    CHECK(message_of([] { build_run_config({{"run.preset", "thm22"}, {"params.k", "-1"}}); }).find("params.k") !=
          std::string::npos);
    CHECK(message_of([] { build_run_config({{"run.model", "neumann"}, {"params.zeta", "1"}}); }).find("params.zeta") !=
          std::string::npos);
    CHECK(message_of([] { build_run_config({{"run.preset", "thm99"}}); }).find("run.preset") != std::string::npos);
    CHECK(message_of([] { build_run_config({{"run.model", "neumann"}, {"grid.n", "many"}}); }).find("grid.n") !=
          std::string::npos);
    CHECK(message_of([] { build_run_config({{"run.model", "stefan"}, {"kernel.family", "uniform"}}); })
              .find("kernel") != std::string::npos);
    CHECK(code_of([] { parse_overrides({"no_equals_sign"}); }) == ErrorCode::ConfigInvalid);
    CHECK(code_of([] {
              build_sweep_config({{"run.preset", "lstar"}, {"sweep.axis", "eigen.length"},
                                  {"sweep.values", "1, 3, 2"}, {"sweep.reducer", "Lambda1"}});
          }) == ErrorCode::ConfigInvalid);
    CHECK(code_of([] {
              build_sweep_config({{"run.preset", "lstar"}, {"sweep.axis", "kernel.family"},
                                  {"sweep.values", "1, 2"}, {"sweep.reducer", "Lambda1"}});
          }) == ErrorCode::ConfigInvalid);
}

TEST_CASE("every shipped preset validates")
{
    for (const auto& name : preset_names()) {
        const RunConfig c = preset(name);
        CHECK_NOTHROW(c.validate());
        CHECK(c.preset == name);
    }
}

TEST_CASE("ini files and overrides")
{
    const fs::path d = scratch("ini");
    std::ofstream(d / "a.ini") << "[run]\npreset = thm22\nT = 5\n\n[params]\nk = 3 ; comment\n";
    const RunConfig c = load_run_config(d / "a.ini", {"params.gamma=0.25"});
    CHECK(c.T == 5.0);
    CHECK(c.params.k == 3.0);
    CHECK(c.params.gamma == 0.25);
    CHECK(c.model == ModelKind::Neumann);
    CHECK(code_of([&] { load_run_config(d / "missing.ini"); }) == ErrorCode::ConfigInvalid);
    fs::remove_all(d);
}

TEST_CASE("capacity recomputes b")
{
    const RunConfig c = build_run_config({{"run.preset", "thm22"}, {"params.M_cap", "4"}});
    CHECK(c.params.b == doctest::Approx(0.25));
}

TEST_CASE("output root")
{
    RunConfig c = preset("thm22");
    ::setenv("NSIR_OUTPUT_ROOT", "/tmp/nsir_root_probe", 1);
    CHECK(resolve_output(c) == fs::path("/tmp/nsir_root_probe/runs/thm22"));
    c.output = "/abs/place";
    CHECK(resolve_output(c) == fs::path("/abs/place"));
    ::unsetenv("NSIR_OUTPUT_ROOT");
}

TEST_CASE("runs are byte-for-byte deterministic")
{
    const fs::path d = scratch("det");
    const RunConfig c = build_run_config({{"run.preset", "thm23"}, {"run.T", "5"}, {"grid.n", "51"}});
    write_artifacts(execute(c), d / "a");
    write_artifacts(execute(c), d / "b");
    for (const char* f : {"trajectory.csv", "comparison.csv"}) {
        REQUIRE(fs::exists(d / "a" / f));
        CHECK(slurp(d / "a" / f) == slurp(d / "b" / f));
    }
    const auto rows = parse_csv(slurp(d / "a" / "trajectory.csv"));
    REQUIRE(rows.size() > 2);
    for (const auto& r : rows) CHECK(r.size() == rows.front().size());
    fs::remove_all(d);
}

TEST_CASE("preset runs")
{
    const RunOutcome a = execute(preset("thm22"));
    CHECK(a.summary["dist_E1"].get<double>() < 1e-3);
    CHECK(a.checks_passed());
    const RunOutcome b = execute(preset("cor41"));
    CHECK(b.summary["verdict"] == "Spreading");
    CHECK(b.checks_passed());
}

TEST_CASE("kernel positivity is recorded")
{
    auto positive = [](const std::string& family, const std::string& width) {
        const RunConfig c = build_run_config({{"run.preset", "thm22"}, {"grid.n", "21"}, {"run.T", "1"},
                                              {"kernel.family", family}, {"kernel.width", width},
                                              {"kernel.normalization", "column"}});
        for (const Check& k : execute(c).checks)
            if (k.name == "normalization") return k.detail["strictly_positive"].get<bool>();
        return false;
    };
    CHECK(positive("uniform", "1"));
    CHECK_FALSE(positive("tophat", "0.3"));
}

TEST_CASE("sweep: lambda1 decreases along the interval length")
{
    const SweepConfig sc = build_sweep_config({{"run.preset", "lstar"},
                                               {"eigen.lstar", "false"},
                                               {"sweep.axis", "eigen.length"},
                                               {"sweep.range", "0.5, 4, 8"},
                                               {"sweep.reducer", "Lambda1"},
                                               {"sweep.workers", "2"}});
    const SweepTable t = sweep(sc);
    REQUIRE(t.rows.size() == 8);
    double prev = 1e300;
    for (const auto& r : t.rows) {
        REQUIRE(r.ok);
        const double l = r.cells[0].get<double>();
        CHECK(l < prev);
        prev = l;
    }
    const auto rows = parse_csv(t.csv());
    CHECK(rows[0][0] == "eigen.length");
    CHECK(rows[0][3] == "lambda1");
    CHECK(rows.size() == 9);
}

TEST_CASE("sweep: infection dies out along k while R01 <= 1")
{
    const SweepConfig sc = build_sweep_config({{"run.preset", "thm22"},
                                               {"grid.n", "51"},
                                               {"sweep.axis", "params.k"},
                                               {"sweep.values", "1, 2, 2.4, 3, 5"},
                                               {"sweep.reducer", "TerminalState"}});
    const SweepTable t = sweep(sc);
    const auto cols = reducer_columns(Reducer::TerminalState);
    const size_t iI = std::find(cols.begin(), cols.end(), "I_max") - cols.begin();
    for (const auto& r : t.rows) {
        REQUIRE(r.ok);
        const double Imax = r.cells[iI].get<double>();
        if (r.value * 1.0 / 2.5 <= 1.0)
            CHECK(Imax < 1e-6);
        else
            CHECK(Imax > 0.1);
    }
}

TEST_CASE("sweep: mu verdicts change once")
{
    const SweepConfig sc = build_sweep_config({{"run.preset", "thm42"},
                                               {"stefan.M", "100"},
                                               {"stefan.K", "200"},
                                               {"stefan.max_span", "10"},
                                               {"sweep.axis", "params.mu"},
                                               {"sweep.range", "0.01, 10, 12"},
                                               {"sweep.reducer", "Classification"}});
    const SweepTable t = sweep(sc);
    REQUIRE(t.rows.size() == 12);
    CHECK(t.rows.front().cells[0] == "Vanishing");
    CHECK(t.rows.back().cells[0] == "Spreading");
    bool undecided = false;
    for (const auto& r : t.rows) undecided = undecided || r.cells[0] == "Undecided";
    CHECK((t.verdict_changes == 1 || undecided));
    CHECK((t.monotone || undecided));
}

TEST_CASE("sweep: failed points are recorded and the sweep continues")
{
    const SweepConfig sc = build_sweep_config({{"run.preset", "thm22"},
                                               {"run.T", "1"},
                                               {"grid.n", "51"},
                                               {"sweep.axis", "grid.dt"},
                                               {"sweep.values", "0.001, 5"},
                                               {"sweep.reducer", "TerminalState"}});
    const SweepTable t = sweep(sc);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0].ok);
    CHECK_FALSE(t.rows[1].ok);
    CHECK(t.rows[1].error.find("CFLViolation") != std::string::npos);
}

TEST_CASE("report")
{
    const fs::path d = scratch("report");
    write_artifacts(execute(build_run_config({{"run.preset", "thm22"}, {"run.T", "5"}, {"grid.n", "51"}})), d / "ok");
    const ReportResult good = report(d / "ok");
    CHECK(good.all_passed);
    CHECK(good.consolidated["checks"].size() >= 3);

    fs::create_directories(d / "bad");
    write_json(d / "bad" / "check_bounds.json",
               {{"check", "bounds"}, {"passed", false}, {"positivity_ok", false}, {"min_component", -0.3}});
    const ReportResult bad = report(d / "bad");
    CHECK_FALSE(bad.all_passed);
    CHECK(bad.consolidated["failed"][0] == "check_bounds.json");
    CHECK(bad.text.find("FAIL check_bounds.json") != std::string::npos);

    fs::create_directories(d / "empty");
    CHECK(code_of([&] { report(d / "empty"); }) == ErrorCode::MissingArtifact);
    fs::remove_all(d);
}

}

TEST_SUITE("cli") {

TEST_CASE("exit codes")
{
    const fs::path d = scratch("cli");
    const std::string out = (d / "run").string();
    CHECK(cli("run --preset thm22 --set run.T=5 --set grid.n=51 -o " + out) == 0);
    CHECK(fs::exists(fs::path(out) / "summary.json"));
    CHECK(cli("report " + out) == 0);
    CHECK(fs::exists(fs::path(out) / "report.json"));

    CHECK(cli("run --preset thm22 --set params.k=-1 -o " + out) == 2);
    CHECK(cli("run --preset nonesuch") == 2);
    CHECK(cli("frobnicate") == 2);
    CHECK(cli("run") == 2);
    CHECK(cli("run --preset thm22 --set grid.dt=5 -o " + out) == 3);

    fs::create_directories(d / "bad");
    write_json(d / "bad" / "check_bounds.json", {{"check", "bounds"}, {"passed", false}});
    CHECK(cli("report " + (d / "bad").string()) == 4);
    fs::create_directories(d / "empty");
    CHECK(cli("report " + (d / "empty").string()) == 2);

    CHECK(cli("eigen --c1 5 --c2 2.5 --length 2 --phi-csv " + (d / "phi.csv").string()) == 0);
    CHECK(slurp(d / "phi.csv").rfind("x,phi\r\n", 0) == 0);
    CHECK(cli("eigen --family lorentz") == 2);

    std::ofstream(d / "sweep.ini") << "[run]\npreset = lstar\n[eigen]\nlstar = false\n"
                                      "[sweep]\naxis = eigen.length\nvalues = 1, 2, 3\nreducer = Lambda1\n";
    CHECK(cli("sweep " + (d / "sweep.ini").string() + " -o " + (d / "sw").string()) == 0);
    CHECK(slurp(d / "sw" / "sweep.csv").rfind("eigen.length,status,error,lambda1", 0) == 0);

    CHECK(cli("run-dirichlet --set grid.n=51 --set run.T=2 -o " + (d / "dir").string()) == 0);
    CHECK(cli("run-neumann --preset thm23 --set run.T=2 --set grid.n=51 -o " + (d / "neu").string()) == 0);
    CHECK(cli("run-stefan --preset thm42 --set run.T=2 -o " + (d / "ste").string()) == 0);
    CHECK(fs::exists(d / "ste" / "fronts.csv"));
    CHECK(fs::exists(d / "ste" / "classification.json"));
    fs::remove_all(d);
}

}
