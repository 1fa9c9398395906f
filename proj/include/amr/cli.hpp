#pragma once

#include "amr/learner.hpp"
#include "amr/reducer.hpp"
#include "amr/timeseries.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace amr::cli {

namespace fs = std::filesystem;

/// Exit codes: 0 success, 2 user/input error, 1 internal error.
inline constexpr int exit_ok = 0;
inline constexpr int exit_internal = 1;
inline constexpr int exit_input = 2;

struct TrainOptions {
    fs::path data;
    Date split;
    fs::path config;
    fs::path out;
    std::optional<std::uint64_t> seed;  // defaults to the config's master seed
    AnnealingSchedule schedule;
    std::size_t workers = 1;
};

struct SimulateOptions {
    fs::path config;
    std::optional<fs::path> params;
    std::optional<double> p0;
    std::optional<std::size_t> horizon;
    std::optional<fs::path> dates;  // CSV whose dates (and first value, if no p0) are used
    Date start;                     // first date when only a horizon is given
    std::optional<std::uint64_t> seed;
    std::size_t replication = 0;
    std::vector<std::string> only;  // when non-empty, every other type is disabled
    fs::path out;
    std::size_t workers = 1;
};

struct ReduceOptions {
    fs::path data;
    Date split;
    fs::path config;
    fs::path params;
    fs::path out;  // directory
    std::optional<std::uint64_t> seed;  // defaults to the params file's seed
    double tolerance = 0.005;
    std::size_t replications = 10;
    bool exhaustive = false;
    bool p0_from_train = false;
    bool retrain_per_subset = false;
    AnnealingSchedule schedule;  // used only when retraining
    std::size_t workers = 1;
};

struct PlotDataOptions {
    fs::path actual;
    fs::path predicted;
    fs::path out;
};

/// Everything needed to run train -> reduce -> plotdata in one go.
struct ExperimentSpec {
    fs::path data;
    Date split;
    fs::path config;
    fs::path out;  // directory
    std::optional<std::uint64_t> seed;
    AnnealingSchedule schedule;
    double tolerance = 0.005;
    std::size_t replications = 10;
    bool exhaustive = false;
    bool p0_from_train = false;
    std::size_t workers = 1;
};

/// Loads an experiment spec file; relative paths resolve against its directory.
ExperimentSpec load_experiment_spec(const fs::path& path);

FitResult cmd_train(const TrainOptions& opt, std::ostream& log);
TimeSeries cmd_simulate(const SimulateOptions& opt, std::ostream& log);
ReductionReport cmd_reduce(const ReduceOptions& opt, std::ostream& log);
void cmd_plotdata(const PlotDataOptions& opt, std::ostream& log);
void cmd_experiment(const ExperimentSpec& spec, std::ostream& log);

/// Parses `args` (without the program name) and dispatches. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace amr::cli
