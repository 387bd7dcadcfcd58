#pragma once

#include "nsir/config.hpp"
#include "nsir/ibvp.hpp"
#include "nsir/io.hpp"
#include "nsir/spectral.hpp"
#include "nsir/stefan.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace nsir {

struct Check {
    std::string name;
    bool passed = false;
    Json detail;  // written as check_<name>.json with "check" and "passed" added
};

struct RunOutcome {
    RunConfig config;
    Json summary;
    std::vector<Check> checks;
    std::optional<Trajectory> trajectory;
    std::optional<StefanTrajectory> fronts;
    std::optional<EigenResult> eigen;
    Grid1D eigen_grid;

    bool checks_passed() const;
};

// in-memory run, no files written
RunOutcome execute(const RunConfig& cfg);
// writes CSV/JSON artifacts into dir
void write_artifacts(const RunOutcome& out, const std::filesystem::path& dir);

FieldState initial_state(const RunConfig& cfg, const Grid1D& g);

std::vector<std::string> reducer_columns(Reducer r);
std::vector<Json> reduce(const RunOutcome& out, Reducer r);

struct SweepRow {
    double value = 0;
    bool ok = false;
    std::string error;
    std::vector<Json> cells;
};

struct SweepTable {
    std::string axis;
    Reducer reducer = Reducer::TerminalState;
    std::vector<std::string> columns;
    std::vector<SweepRow> rows;
    int verdict_changes = 0;  // Classification only
    bool monotone = true;

    std::string csv() const;
    Json json() const;
};

SweepTable sweep(const SweepConfig& sc);

struct ReportResult {
    Json consolidated;
    std::string text;
    bool all_passed = false;
};

// aggregates every check_*.json below dir; MissingArtifact when there are none
ReportResult report(const std::filesystem::path& dir);

// exit codes of the command line tool
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitInvariant = 4;

} // namespace nsir
