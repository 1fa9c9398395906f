#pragma once

#include "amr/timeseries.hpp"
#include "amr/worker_pool.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace amr {

/// Box bounds of the behavioural parameters. Lower bounds of the half-open
/// intervals (trade fraction, price impact) are floored at a small positive value.
namespace bounds {
inline constexpr double optimism_min = 0.0;
inline constexpr double optimism_max = 1.0;
inline constexpr double reactivity_min = -1.0;
inline constexpr double reactivity_max = 1.0;
inline constexpr double trade_fraction_min = 1e-3;
inline constexpr double trade_fraction_max = 1.0;
inline constexpr double price_impact_min = 1e-4;
inline constexpr double price_impact_max = 0.1;
inline constexpr double jitter_max = 0.2;
inline constexpr std::size_t max_types = 16;
}  // namespace bounds

/// Named behavioural template from which `count` similar investors are built.
struct InvestorType {
    std::string name;
    double assets_per_investor = 1.0;  // millions
    std::size_t count = 1;
    double optimism = 0.5;        // baseline buy probability
    double reactivity = 0.0;      // sensitivity of buy probability to the last return
    double trade_fraction = 1.0;  // share of assets committed per decision
    bool enabled = true;

    double total_assets() const noexcept { return assets_per_investor * static_cast<double>(count); }

    friend bool operator==(const InvestorType&, const InvestorType&) = default;
};

struct MarketConfig {
    std::vector<InvestorType> types;
    double price_impact = 0.01;
    double jitter = 0.05;
    std::uint64_t master_seed = 0;

    /// Throws InputError describing the first violated invariant.
    void validate() const;

    /// Index of the type called `name`; throws InputError if absent.
    std::size_t index_of(std::string_view name) const;

    double total_assets() const noexcept;
    double enabled_assets() const noexcept;
    double enabled_asset_share() const noexcept { return enabled_assets() / total_assets(); }
    std::size_t agent_count() const noexcept;

    friend bool operator==(const MarketConfig&, const MarketConfig&) = default;
};

/// Returns a copy with `enabled` set on every named type. Unknown label -> InputError.
MarketConfig set_enabled(const MarketConfig& config, std::span<const std::string> type_names,
                         bool enabled);
MarketConfig set_all_enabled(const MarketConfig& config, bool enabled);

/// One simulated investor: its type's parameters plus a fixed per-agent offset.
struct Agent {
    std::uint32_t type_index = 0;
    double optimism = 0.0;
    double reactivity = 0.0;
    double trade_fraction = 0.0;
    /// trade_fraction * assets_per_investor / normalization_assets
    double weight = 0.0;
    bool enabled = false;
};

struct AgentPopulation {
    std::vector<Agent> agents;
    /// Total assets of the whole configuration, disabled types included.
    double normalization_assets = 0.0;
    double price_impact = 0.0;
    double enabled_asset_share = 0.0;
};

/// Agents per decision chunk. Demand is summed in agent order within a chunk
/// and chunk partials are summed in chunk order, whatever the worker count.
inline constexpr std::size_t demand_chunk_size = 64;

AgentPopulation init_population(const MarketConfig& config);

struct StepResult {
    double next_price = 0.0;
    double demand = 0.0;
};

/// Advances the market by one step.
///
/// Every enabled agent buys (+1) with probability
/// clamp(optimism + reactivity * last_return, 0, 1) and sells (-1) otherwise;
/// the asset-weighted vote is the net demand D and the price moves to
/// price * (1 + price_impact * D).
StepResult step(double price, double last_return, const AgentPopulation& population,
                std::uint64_t step_index, std::uint64_t master_seed,
                WorkerPool& pool = WorkerPool::serial());

struct SimulationRun {
    TimeSeries predicted;
    std::vector<double> demands;  // one per step, size = horizon - 1
    std::uint64_t seed_used = 0;
    std::size_t chunk_size = demand_chunk_size;
};

/// Partial-knowledge run: only p0 is given; every later value is produced from
/// the simulator's own previous predictions. The first step sees a return of 0.
/// `dates` fixes the horizon (>= 1).
SimulationRun simulate_pk(const MarketConfig& config, double p0, std::span<const Date> dates,
                          WorkerPool& pool = WorkerPool::serial());

/// Values-only variant used on hot paths; `demands` is optional output.
std::vector<double> simulate_prices(const MarketConfig& config, double p0, std::size_t horizon,
                                    WorkerPool& pool = WorkerPool::serial(),
                                    std::vector<double>* demands = nullptr);

// JSON form: {"types":[{"name","assets_per_investor","count","optimism",
// "reactivity","trade_fraction","enabled"}...],"price_impact","jitter","master_seed"}
MarketConfig parse_config(std::string_view json_text);
MarketConfig load_config(const std::filesystem::path& path);
std::string dump_config(const MarketConfig& config);

}  // namespace amr
