#include "amr/learner.hpp"

#include "amr/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace amr {

namespace {

constexpr const char* param_names[3] = {"optimism", "reactivity", "trade_fraction"};

constexpr Interval param_bounds[3] = {
    {bounds::optimism_min, bounds::optimism_max},
    {bounds::reactivity_min, bounds::reactivity_max},
    {bounds::trade_fraction_min, bounds::trade_fraction_max},
};

constexpr Interval impact_bounds{bounds::price_impact_min, bounds::price_impact_max};

template <class P>
auto& slot(P& p, std::size_t which) {
    switch (which) {
        case 0: return p.optimism;
        case 1: return p.reactivity;
        default: return p.trade_fraction;
    }
}

}  // namespace

double ParameterVector::get(std::size_t coord) const {
    if (coord + 1 == dimension()) return price_impact;
    if (coord >= dimension()) throw std::out_of_range("parameter coordinate out of range");
    return slot(per_type[coord / 3], coord % 3);
}

void ParameterVector::set(std::size_t coord, double value) {
    if (coord + 1 == dimension()) {
        price_impact = value;
        return;
    }
    if (coord >= dimension()) throw std::out_of_range("parameter coordinate out of range");
    slot(per_type[coord / 3], coord % 3) = value;
}

Interval ParameterVector::bounds(std::size_t coord) const {
    if (coord + 1 == dimension()) return impact_bounds;
    if (coord >= dimension()) throw std::out_of_range("parameter coordinate out of range");
    return param_bounds[coord % 3];
}

bool ParameterVector::in_bounds() const {
    for (std::size_t i = 0; i < dimension(); ++i) {
        const double v = get(i);
        const Interval b = bounds(i);
        if (!(v >= b.lo && v <= b.hi)) return false;
    }
    return true;
}

ParameterVector ParameterVector::from_config(const MarketConfig& config) {
    ParameterVector p;
    p.per_type.reserve(config.types.size());
    for (const auto& t : config.types) p.per_type.push_back({t.optimism, t.reactivity, t.trade_fraction});
    p.price_impact = config.price_impact;
    return p;
}

MarketConfig ParameterVector::apply_to(const MarketConfig& config) const {
    if (per_type.size() != config.types.size())
        throw InputError("parameter vector has " + std::to_string(per_type.size()) +
                         " types, market config has " + std::to_string(config.types.size()));
    MarketConfig out = config;
    for (std::size_t k = 0; k < per_type.size(); ++k) {
        out.types[k].optimism = per_type[k].optimism;
        out.types[k].reactivity = per_type[k].reactivity;
        out.types[k].trade_fraction = per_type[k].trade_fraction;
    }
    out.price_impact = price_impact;
    return out;
}

std::vector<std::size_t> active_coordinates(const MarketConfig& config) {
    std::vector<std::size_t> coords;
    for (std::size_t k = 0; k < config.types.size(); ++k)
        if (config.types[k].enabled)
            for (std::size_t j = 0; j < 3; ++j) coords.push_back(3 * k + j);
    coords.push_back(3 * config.types.size());
    return coords;
}

std::string coordinate_name(const MarketConfig& config, std::size_t coord) {
    if (coord == 3 * config.types.size()) return "price_impact";
    if (coord > 3 * config.types.size()) throw std::out_of_range("parameter coordinate out of range");
    return config.types[coord / 3].name + "." + param_names[coord % 3];
}

void AnnealingSchedule::validate() const {
    const auto fail = [](const std::string& m) { throw InputError("annealing schedule: " + m); };
    if (!(std::isfinite(initial_temperature) && initial_temperature > 0.0))
        fail("initial_temperature must be > 0");
    if (!(cooling_factor > 0.0 && cooling_factor < 1.0)) fail("cooling_factor must lie in (0, 1)");
    if (proposals_per_epoch == 0) fail("proposals_per_epoch must be >= 1");
    if (total_evaluations == 0) fail("total_evaluations must be >= 1");
    if (!(std::isfinite(proposal_sigma) && proposal_sigma > 0.0)) fail("proposal_sigma must be > 0");
    if (replications == 0) fail("replications must be >= 1");
}

double energy(const ParameterVector& params, const TimeSeries& train, const MarketConfig& config,
              std::size_t replications, WorkerPool& pool) {
    if (replications == 0) throw InputError("energy: replications must be >= 1");
    if (!params.in_bounds()) throw InputError("energy: parameter vector outside its bounds");
    const MarketConfig base = params.apply_to(config);
    const auto target = train.values();

    std::vector<double> scores(replications, 0.0);
    pool.parallel_for(replications, [&](std::size_t r) {
        MarketConfig cfg = base;
        cfg.master_seed = rng::replication_seed(base.master_seed, r);
        const auto predicted = simulate_prices(cfg, target.front(), target.size());
        scores[r] = mape(target, predicted);
    });
    double sum = 0.0;
    for (double s : scores) sum += s;
    return sum / static_cast<double>(replications);
}

ParameterVector propose(const ParameterVector& params, double sigma, rng::CounterStream& stream,
                        std::span<const std::size_t> coordinates) {
    ParameterVector out = params;
    const std::size_t n = coordinates.empty() ? params.dimension() : coordinates.size();
    const std::size_t pick = stream.below(n);
    const std::size_t coord = coordinates.empty() ? pick : coordinates[pick];
    const Interval b = params.bounds(coord);
    const double step = stream.normal() * sigma * b.width();
    out.set(coord, std::clamp(params.get(coord) + step, b.lo, b.hi));
    return out;
}

bool accept(double delta_energy, double temperature, rng::CounterStream& stream) {
    const double u = stream.uniform();
    if (delta_energy <= 0.0) return true;
    return u < std::exp(-delta_energy / temperature);
}

FitResult anneal(const TimeSeries& train, const MarketConfig& config,
                 const AnnealingSchedule& schedule, std::uint64_t seed, WorkerPool& pool) {
    schedule.validate();
    config.validate();
    if (train.size() < 2) throw InputError("anneal: training series needs at least 2 observations");

    rng::CounterStream stream(rng::hash(seed, rng::tag(rng::Tag::annealer)));
    const auto coords = active_coordinates(config);

    ParameterVector current = ParameterVector::from_config(config);
    for (std::size_t c : coords) {
        const Interval b = current.bounds(c);
        current.set(c, b.lo + stream.uniform() * b.width());
    }
    double current_energy = energy(current, train, config, schedule.replications, pool);

    FitResult fit;
    fit.seed_used = seed;
    fit.best_params = current;
    fit.best_energy = current_energy;
    fit.energy_trace.reserve(schedule.total_evaluations);
    fit.energy_trace.push_back(current_energy);

    double temperature = schedule.initial_temperature;
    std::size_t evaluations = 1;
    std::size_t proposals = 0;
    while (evaluations < schedule.total_evaluations) {
        ParameterVector candidate = propose(current, schedule.proposal_sigma, stream, coords);
        const double e = energy(candidate, train, config, schedule.replications, pool);
        ++evaluations;
        ++proposals;
        if (accept(e - current_energy, temperature, stream)) {
            current = std::move(candidate);
            current_energy = e;
            if (e < fit.best_energy) {
                fit.best_energy = e;
                fit.best_params = current;
            }
        }
        fit.energy_trace.push_back(fit.best_energy);
        if (proposals % schedule.proposals_per_epoch == 0) temperature *= schedule.cooling_factor;
    }
    fit.evaluations = evaluations;
    return fit;
}

// ---------------------------------------------------------------------------
// JSON

std::string dump_fit_result(const FitResult& fit, const MarketConfig& config) {
    nlohmann::ordered_json doc;
    for (std::size_t c = 0; c < fit.best_params.dimension(); ++c)
        doc[coordinate_name(config, c)] = fit.best_params.get(c);
    doc["best_mape"] = fit.best_energy;
    doc["seed"] = fit.seed_used;
    doc["evaluations"] = fit.evaluations;
    return doc.dump(2) + "\n";
}

FitResult parse_fit_result(std::string_view json_text, const MarketConfig& config) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(std::string("fit result is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw InputError("fit result must be a JSON object");

    const auto number = [&](const std::string& key) {
        if (!doc.contains(key) || !doc[key].is_number())
            throw InputError("fit result: missing or non-numeric '" + key + "'");
        return doc[key].get<double>();
    };

    FitResult fit;
    fit.best_params = ParameterVector::from_config(config);
    for (std::size_t c = 0; c < fit.best_params.dimension(); ++c)
        fit.best_params.set(c, number(coordinate_name(config, c)));
    if (!fit.best_params.in_bounds()) throw InputError("fit result: parameters outside their bounds");
    fit.best_energy = number("best_mape");
    if (!doc.contains("seed") || !doc["seed"].is_number_unsigned())
        throw InputError("fit result: 'seed' must be a non-negative integer");
    fit.seed_used = doc["seed"].get<std::uint64_t>();
    if (doc.contains("evaluations") && doc["evaluations"].is_number_unsigned())
        fit.evaluations = doc["evaluations"].get<std::size_t>();

    // Every parameter key must belong to this config.
    for (const auto& [key, value] : doc.items()) {
        if (key.find('.') == std::string::npos) continue;
        const auto dot = key.rfind('.');
        config.index_of(key.substr(0, dot));
    }
    return fit;
}

FitResult load_fit_result(const std::filesystem::path& path, const MarketConfig& config) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open params file '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return parse_fit_result(buf.str(), config);
    } catch (const InputError& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

}  // namespace amr
