#pragma once

#include "amr/market.hpp"
#include "amr/rng.hpp"
#include "amr/timeseries.hpp"
#include "amr/worker_pool.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace amr {

struct BehaviourParams {
    double optimism = 0.5;
    double reactivity = 0.0;
    double trade_fraction = 1.0;

    friend bool operator==(const BehaviourParams&, const BehaviourParams&) = default;
};

struct Interval {
    double lo;
    double hi;
    double width() const noexcept { return hi - lo; }
};

/// The learnable degrees of freedom of a market: three behavioural parameters
/// per investor type, in declaration order, followed by the global price impact.
///
/// Coordinate layout: 3k + 0 optimism, 3k + 1 reactivity, 3k + 2 trade
/// fraction of type k; the last coordinate is the price impact.
struct ParameterVector {
    std::vector<BehaviourParams> per_type;
    double price_impact = 0.01;

    std::size_t dimension() const noexcept { return 3 * per_type.size() + 1; }
    double get(std::size_t coord) const;
    void set(std::size_t coord, double value);
    Interval bounds(std::size_t coord) const;
    bool in_bounds() const;

    static ParameterVector from_config(const MarketConfig& config);

    /// Copy of `config` with these parameters written into it.
    MarketConfig apply_to(const MarketConfig& config) const;

    friend bool operator==(const ParameterVector&, const ParameterVector&) = default;
};

/// Coordinates that influence a simulation of `config`: those of enabled
/// types, plus the price impact.
std::vector<std::size_t> active_coordinates(const MarketConfig& config);

/// Label of a coordinate, `<type_name>.<param>` or `price_impact`.
std::string coordinate_name(const MarketConfig& config, std::size_t coord);

struct AnnealingSchedule {
    double initial_temperature = 0.05;
    double cooling_factor = 0.95;
    std::size_t proposals_per_epoch = 50;
    std::size_t total_evaluations = 5000;
    double proposal_sigma = 0.05;  // fraction of each coordinate's range
    std::size_t replications = 3;

    void validate() const;
};

struct FitResult {
    ParameterVector best_params;
    double best_energy = 0.0;
    std::vector<double> energy_trace;  // best-so-far after every evaluation
    std::uint64_t seed_used = 0;
    std::size_t evaluations = 0;
};

/// Replication-averaged training MAPE of `params`.
///
/// Replication r runs the partial-knowledge simulation with master seed
/// replication_seed(config.master_seed, r), starting from the first training
/// value, over the training horizon. Means are taken in replication order.
double energy(const ParameterVector& params, const TimeSeries& train, const MarketConfig& config,
              std::size_t replications, WorkerPool& pool = WorkerPool::serial());

/// Perturbs one uniformly chosen coordinate (from `coordinates`, or from all
/// when empty) by N(0, (sigma * range)^2) and clamps it to its bounds.
ParameterVector propose(const ParameterVector& params, double sigma, rng::CounterStream& stream,
                        std::span<const std::size_t> coordinates = {});

/// Metropolis criterion: always accept downhill moves, accept uphill ones with
/// probability exp(-delta / temperature).
bool accept(double delta_energy, double temperature, rng::CounterStream& stream);

/// Simulated annealing with geometric cooling, started from a uniformly random
/// point of the box. Deterministic in (train, config, schedule, seed).
FitResult anneal(const TimeSeries& train, const MarketConfig& config,
                 const AnnealingSchedule& schedule, std::uint64_t seed,
                 WorkerPool& pool = WorkerPool::serial());

// JSON form: flat object, `<type_name>.<param>` keys plus "price_impact",
// "best_mape", "seed", "evaluations".
std::string dump_fit_result(const FitResult& fit, const MarketConfig& config);
FitResult parse_fit_result(std::string_view json_text, const MarketConfig& config);
FitResult load_fit_result(const std::filesystem::path& path, const MarketConfig& config);

}  // namespace amr
