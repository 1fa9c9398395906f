#pragma once

#include "amr/learner.hpp"
#include "amr/market.hpp"
#include "amr/timeseries.hpp"
#include "amr/worker_pool.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace amr {

/// Subset of a configuration's investor types, kept in declaration order.
struct ModelSet {
    std::vector<std::string> members;

    bool empty() const noexcept { return members.empty(); }
    std::size_t size() const noexcept { return members.size(); }
    std::string label() const;  // "{A, B}"

    friend bool operator==(const ModelSet&, const ModelSet&) = default;
};

struct MapeStat {
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation over replications
};

/// Retraining hook: when set, each subset is annealed on `train` (with only
/// its types enabled) before being scored, instead of reusing one parameter set.
struct RetrainOptions {
    TimeSeries train;
    AnnealingSchedule schedule;
    std::uint64_t seed = 0;
};

struct EvalOptions {
    std::size_t replications = 10;
    /// Start price of every evaluation run; defaults to the target's first value.
    std::optional<double> p0;
    std::optional<RetrainOptions> retrain;
};

/// Enables exactly `subset`'s types, simulates the target window
/// `replications` times with replication seeds derived from the config's
/// master seed, and returns mean and sample std of the MAPE. The empty subset
/// is the all-disabled baseline.
MapeStat evaluate_subset(const ModelSet& subset, const ParameterVector& params,
                         const MarketConfig& config, const TimeSeries& target,
                         const EvalOptions& options, WorkerPool& pool = WorkerPool::serial());

struct RankedModel {
    std::string name;
    MapeStat mape;
};

/// Singleton MAPEs of every type in `orig`, best (lowest) first. Ties keep
/// declaration order.
std::vector<RankedModel> rank_models(const ModelSet& orig, const ParameterVector& params,
                                     const MarketConfig& config, const TimeSeries& target,
                                     const EvalOptions& options,
                                     WorkerPool& pool = WorkerPool::serial());

struct SelectionStep {
    std::string added;
    ModelSet set;  // cumulative set after the addition
    MapeStat mape;
};

struct ReductionReport {
    ModelSet orig;
    MapeStat benchmark;
    MapeStat baseline;  // all types disabled
    std::vector<RankedModel> ranking;
    std::vector<SelectionStep> selection_trace;
    ModelSet reduced;
    double tolerance = 0.0;
    std::size_t eval_replications = 0;
};

/// Greedy model reduction: benchmark the full set, rank singletons once, then
/// add models in rank order until the cumulative set's mean MAPE is within
/// `tolerance` of the benchmark (or every model is in).
ReductionReport greedy_reduce(const MarketConfig& config, const ParameterVector& params,
                              const TimeSeries& target, double tolerance,
                              const EvalOptions& options, WorkerPool& pool = WorkerPool::serial());

struct SubsetScore {
    ModelSet set;
    MapeStat mape;
};

struct ExhaustiveResult {
    std::vector<SubsetScore> table;                  // every non-empty subset, by bitmask order
    std::map<std::size_t, SubsetScore> best_by_size;  // first minimum in table order
};

/// Brute-force oracle over all 2^n - 1 non-empty subsets of the enabled types.
ExhaustiveResult exhaustive_reduce(const MarketConfig& config, const ParameterVector& params,
                                   const TimeSeries& target, const EvalOptions& options,
                                   WorkerPool& pool = WorkerPool::serial());

/// Types enabled in `config`, in declaration order.
ModelSet enabled_set(const MarketConfig& config);

std::string format_percent(double fraction);           // "3.21%"
std::string format_mape(const MapeStat& stat);         // "3.21 ± 0.04%"

/// Report as JSON (fractions) and as an aligned text table (percent).
std::string dump_report_json(const ReductionReport& report,
                             const std::optional<ExhaustiveResult>& exhaustive = std::nullopt);
std::string render_report_table(const ReductionReport& report,
                                const std::optional<ExhaustiveResult>& exhaustive = std::nullopt);

}  // namespace amr
