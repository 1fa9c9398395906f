#include "amr/market.hpp"

#include "amr/error.hpp"
#include "amr/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace amr {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw InputError(what);
}

bool in_range(double v, double lo, double hi) { return std::isfinite(v) && v >= lo && v <= hi; }

}  // namespace

void MarketConfig::validate() const {
    require(!types.empty(), "market config needs at least one investor type");
    require(types.size() <= bounds::max_types,
            "market config has " + std::to_string(types.size()) + " types (max " +
                std::to_string(bounds::max_types) + ")");
    std::set<std::string> names;
    for (const auto& t : types) {
        const auto who = "investor type '" + t.name + "': ";
        require(!t.name.empty(), "investor type name must not be empty");
        require(names.insert(t.name).second, "duplicate investor type name '" + t.name + "'");
        require(std::isfinite(t.assets_per_investor) && t.assets_per_investor > 0.0,
                who + "assets_per_investor must be > 0");
        require(t.count >= 1, who + "count must be >= 1");
        require(in_range(t.optimism, bounds::optimism_min, bounds::optimism_max),
                who + "optimism must lie in [0, 1]");
        require(in_range(t.reactivity, bounds::reactivity_min, bounds::reactivity_max),
                who + "reactivity must lie in [-1, 1]");
        require(std::isfinite(t.trade_fraction) && t.trade_fraction > 0.0 && t.trade_fraction <= 1.0,
                who + "trade_fraction must lie in (0, 1]");
    }
    require(std::isfinite(price_impact) && price_impact > 0.0 &&
                price_impact <= bounds::price_impact_max,
            "price_impact must lie in (0, 0.1]");
    require(in_range(jitter, 0.0, bounds::jitter_max), "jitter must lie in [0, 0.2]");
}

std::size_t MarketConfig::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < types.size(); ++i)
        if (types[i].name == name) return i;
    throw InputError("unknown investor type '" + std::string(name) + "'");
}

double MarketConfig::total_assets() const noexcept {
    double sum = 0.0;
    for (const auto& t : types) sum += t.total_assets();
    return sum;
}

double MarketConfig::enabled_assets() const noexcept {
    double sum = 0.0;
    for (const auto& t : types)
        if (t.enabled) sum += t.total_assets();
    return sum;
}

std::size_t MarketConfig::agent_count() const noexcept {
    std::size_t n = 0;
    for (const auto& t : types) n += t.count;
    return n;
}

MarketConfig set_enabled(const MarketConfig& config, std::span<const std::string> type_names,
                         bool enabled) {
    MarketConfig out = config;
    for (const auto& name : type_names) out.types[out.index_of(name)].enabled = enabled;
    return out;
}

MarketConfig set_all_enabled(const MarketConfig& config, bool enabled) {
    MarketConfig out = config;
    for (auto& t : out.types) t.enabled = enabled;
    return out;
}

AgentPopulation init_population(const MarketConfig& config) {
    config.validate();
    AgentPopulation pop;
    pop.normalization_assets = config.total_assets();
    pop.price_impact = config.price_impact;
    pop.enabled_asset_share = config.enabled_asset_share();
    pop.agents.reserve(config.agent_count());

    const auto jitter = [&](std::uint64_t agent, std::uint64_t draw) {
        if (config.jitter == 0.0) return 0.0;
        const double u = rng::to_unit(
            rng::hash(config.master_seed, rng::tag(rng::Tag::population), agent, draw));
        return (2.0 * u - 1.0) * config.jitter;
    };

    std::uint64_t index = 0;
    for (std::uint32_t k = 0; k < config.types.size(); ++k) {
        const auto& t = config.types[k];
        for (std::size_t j = 0; j < t.count; ++j, ++index) {
            Agent a;
            a.type_index = k;
            a.enabled = t.enabled;
            a.optimism = std::clamp(t.optimism + jitter(index, 0), bounds::optimism_min,
                                    bounds::optimism_max);
            a.reactivity = std::clamp(t.reactivity + jitter(index, 1), bounds::reactivity_min,
                                      bounds::reactivity_max);
            // Keep a jittered fraction inside (0, 1] even when the type sits at its floor.
            a.trade_fraction = std::clamp(t.trade_fraction + jitter(index, 2),
                                          std::min(t.trade_fraction, bounds::trade_fraction_min),
                                          bounds::trade_fraction_max);
            a.weight = a.trade_fraction * t.assets_per_investor / pop.normalization_assets;
            pop.agents.push_back(a);
        }
    }
    return pop;
}

StepResult step(double price, double last_return, const AgentPopulation& population,
                std::uint64_t step_index, std::uint64_t master_seed, WorkerPool& pool) {
    const auto& agents = population.agents;
    const std::size_t n_chunks = (agents.size() + demand_chunk_size - 1) / demand_chunk_size;
    const std::uint64_t step_key = rng::hash(master_seed, rng::tag(rng::Tag::decision), step_index);

    const auto chunk_demand = [&](std::size_t c) {
        const std::size_t begin = c * demand_chunk_size;
        const std::size_t end = std::min(agents.size(), begin + demand_chunk_size);
        double sum = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            const Agent& a = agents[i];
            if (!a.enabled) continue;
            const double buy = std::clamp(a.optimism + a.reactivity * last_return, 0.0, 1.0);
            const double u = rng::to_unit(rng::combine(step_key, i));
            sum += u < buy ? a.weight : -a.weight;
        }
        return sum;
    };

    double demand = 0.0;
    if (pool.workers() <= 1 || n_chunks <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) demand += chunk_demand(c);
    } else {
        std::vector<double> partial(n_chunks, 0.0);
        pool.parallel_for(n_chunks, [&](std::size_t c) { partial[c] = chunk_demand(c); });
        for (double p : partial) demand += p;
    }
    return {price * (1.0 + population.price_impact * demand), demand};
}

std::vector<double> simulate_prices(const MarketConfig& config, double p0, std::size_t horizon,
                                    WorkerPool& pool, std::vector<double>* demands) {
    if (horizon == 0) throw InputError("simulation horizon must be >= 1");
    if (!std::isfinite(p0) || p0 <= 0.0) throw InputError("initial price must be > 0");
    const AgentPopulation pop = init_population(config);

    std::vector<double> prices;
    prices.reserve(horizon);
    prices.push_back(p0);
    if (demands) {
        demands->clear();
        demands->reserve(horizon - 1);
    }
    double last_return = 0.0;
    for (std::size_t t = 0; t + 1 < horizon; ++t) {
        const StepResult r = step(prices.back(), last_return, pop, t, config.master_seed, pool);
        last_return = (r.next_price - prices.back()) / prices.back();
        prices.push_back(r.next_price);
        if (demands) demands->push_back(r.demand);
    }
    return prices;
}

SimulationRun simulate_pk(const MarketConfig& config, double p0, std::span<const Date> dates,
                          WorkerPool& pool) {
    if (dates.empty()) throw InputError("simulation horizon must be >= 1");
    std::vector<double> demands;
    const auto prices = simulate_prices(config, p0, dates.size(), pool, &demands);
    return SimulationRun{TimeSeries::from_columns(dates, prices), std::move(demands),
                         config.master_seed, demand_chunk_size};
}

// ---------------------------------------------------------------------------
// JSON

namespace {

using nlohmann::json;

template <class T>
T field(const json& j, const char* key, const std::string& ctx) {
    if (!j.contains(key)) throw InputError(ctx + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw InputError(ctx + ": field '" + key + "' has the wrong type");
    }
}

template <class T>
T field_or(const json& j, const char* key, T fallback, const std::string& ctx) {
    return j.contains(key) ? field<T>(j, key, ctx) : fallback;
}

}  // namespace

MarketConfig parse_config(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("market config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw InputError("market config must be a JSON object");
    if (!doc.contains("types") || !doc["types"].is_array())
        throw InputError("market config: 'types' must be an array");

    MarketConfig cfg;
    for (std::size_t i = 0; i < doc["types"].size(); ++i) {
        const json& t = doc["types"][i];
        const std::string ctx = "market config: types[" + std::to_string(i) + "]";
        if (!t.is_object()) throw InputError(ctx + " must be an object");
        InvestorType it;
        it.name = field<std::string>(t, "name", ctx);
        it.assets_per_investor = field<double>(t, "assets_per_investor", ctx);
        const auto count = field<std::int64_t>(t, "count", ctx);
        if (count < 1) throw InputError(ctx + ": count must be >= 1");
        it.count = static_cast<std::size_t>(count);
        it.optimism = field_or<double>(t, "optimism", 0.5, ctx);
        it.reactivity = field_or<double>(t, "reactivity", 0.0, ctx);
        it.trade_fraction = field_or<double>(t, "trade_fraction", 1.0, ctx);
        it.enabled = field_or<bool>(t, "enabled", true, ctx);
        cfg.types.push_back(std::move(it));
    }
    cfg.price_impact = field<double>(doc, "price_impact", "market config");
    cfg.jitter = field_or<double>(doc, "jitter", 0.05, "market config");
    if (doc.contains("master_seed") && !doc["master_seed"].is_number_unsigned())
        throw InputError("market config: master_seed must be a non-negative integer");
    cfg.master_seed = field_or<std::uint64_t>(doc, "master_seed", 0, "market config");
    cfg.validate();
    return cfg;
}

MarketConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open market config '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return parse_config(buf.str());
    } catch (const InputError& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

std::string dump_config(const MarketConfig& config) {
    json types = json::array();
    for (const auto& t : config.types) {
        types.push_back({{"name", t.name},
                         {"assets_per_investor", t.assets_per_investor},
                         {"count", t.count},
                         {"optimism", t.optimism},
                         {"reactivity", t.reactivity},
                         {"trade_fraction", t.trade_fraction},
                         {"enabled", t.enabled}});
    }
    const json doc = {{"types", types},
                      {"price_impact", config.price_impact},
                      {"jitter", config.jitter},
                      {"master_seed", config.master_seed}};
    return doc.dump(2) + "\n";
}

}  // namespace amr
