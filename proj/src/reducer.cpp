#include "amr/reducer.hpp"

#include "amr/error.hpp"
#include "amr/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace amr {

namespace {

// Welford's update; identical inputs give exactly that value and std 0.
MapeStat summarize(const std::vector<double>& xs) {
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double delta = xs[i] - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (xs[i] - mean);
    }
    const double var = xs.size() > 1 ? m2 / static_cast<double>(xs.size() - 1) : 0.0;
    return {mean, std::sqrt(std::max(var, 0.0))};
}

ModelSet in_declaration_order(const MarketConfig& config, std::vector<std::string> names) {
    std::vector<std::size_t> idx;
    idx.reserve(names.size());
    for (const auto& n : names) idx.push_back(config.index_of(n));
    std::sort(idx.begin(), idx.end());
    if (std::adjacent_find(idx.begin(), idx.end()) != idx.end())
        throw InputError("model set lists a type twice");
    ModelSet out;
    for (auto i : idx) out.members.push_back(config.types[i].name);
    return out;
}

}  // namespace

std::string ModelSet::label() const {
    std::string s = "{";
    for (std::size_t i = 0; i < members.size(); ++i) {
        if (i) s += ", ";
        s += members[i];
    }
    return s + "}";
}

ModelSet enabled_set(const MarketConfig& config) {
    ModelSet s;
    for (const auto& t : config.types)
        if (t.enabled) s.members.push_back(t.name);
    return s;
}

MapeStat evaluate_subset(const ModelSet& subset, const ParameterVector& params,
                         const MarketConfig& config, const TimeSeries& target,
                         const EvalOptions& options, WorkerPool& pool) {
    if (options.replications == 0) throw InputError("evaluation replications must be >= 1");
    MarketConfig cfg = set_enabled(set_all_enabled(params.apply_to(config), false), subset.members, true);

    if (options.retrain && !subset.empty()) {
        const auto& rt = *options.retrain;
        cfg = anneal(rt.train, cfg, rt.schedule, rt.seed, pool).best_params.apply_to(cfg);
    }

    const auto actual = target.values();
    const double p0 = options.p0.value_or(actual.front());
    std::vector<double> scores(options.replications, 0.0);
    pool.parallel_for(options.replications, [&](std::size_t r) {
        MarketConfig run = cfg;
        run.master_seed = rng::replication_seed(cfg.master_seed, r);
        scores[r] = mape(actual, simulate_prices(run, p0, actual.size()));
    });
    return summarize(scores);
}

std::vector<RankedModel> rank_models(const ModelSet& orig, const ParameterVector& params,
                                     const MarketConfig& config, const TimeSeries& target,
                                     const EvalOptions& options, WorkerPool& pool) {
    const ModelSet ordered = in_declaration_order(config, orig.members);
    std::vector<RankedModel> ranked(ordered.size());
    pool.parallel_for(ordered.size(), [&](std::size_t i) {
        ranked[i].name = ordered.members[i];
        ranked[i].mape = evaluate_subset(ModelSet{{ordered.members[i]}}, params, config, target,
                                         options, pool);
    });
    std::stable_sort(ranked.begin(), ranked.end(), [](const RankedModel& a, const RankedModel& b) {
        return a.mape.mean < b.mape.mean;
    });
    return ranked;
}

ReductionReport greedy_reduce(const MarketConfig& config, const ParameterVector& params,
                              const TimeSeries& target, double tolerance,
                              const EvalOptions& options, WorkerPool& pool) {
    if (!(tolerance >= 0.0)) throw InputError("tolerance must be >= 0");
    ReductionReport report;
    report.orig = enabled_set(config);
    if (report.orig.empty()) throw InputError("model reduction needs at least one enabled investor type");
    report.tolerance = tolerance;
    report.eval_replications = options.replications;

    report.benchmark = evaluate_subset(report.orig, params, config, target, options, pool);
    report.baseline = evaluate_subset(ModelSet{}, params, config, target, options, pool);
    report.ranking = rank_models(report.orig, params, config, target, options, pool);

    std::vector<std::string> chosen;
    for (const auto& candidate : report.ranking) {
        chosen.push_back(candidate.name);
        SelectionStep step{candidate.name, in_declaration_order(config, chosen), {}};
        step.mape = evaluate_subset(step.set, params, config, target, options, pool);
        report.selection_trace.push_back(step);
        if (step.mape.mean <= report.benchmark.mean + tolerance) break;
    }
    report.reduced = report.selection_trace.back().set;
    return report;
}

ExhaustiveResult exhaustive_reduce(const MarketConfig& config, const ParameterVector& params,
                                   const TimeSeries& target, const EvalOptions& options,
                                   WorkerPool& pool) {
    const ModelSet orig = enabled_set(config);
    if (orig.empty()) throw InputError("exhaustive search needs at least one enabled investor type");
    if (orig.size() > bounds::max_types)
        throw InputError("exhaustive search limited to " + std::to_string(bounds::max_types) + " types");

    const std::size_t n_subsets = (std::size_t{1} << orig.size()) - 1;
    ExhaustiveResult result;
    result.table.resize(n_subsets);
    pool.parallel_for(n_subsets, [&](std::size_t i) {
        const std::size_t mask = i + 1;
        ModelSet set;
        for (std::size_t k = 0; k < orig.size(); ++k)
            if (mask & (std::size_t{1} << k)) set.members.push_back(orig.members[k]);
        result.table[i].mape = evaluate_subset(set, params, config, target, options, pool);
        result.table[i].set = std::move(set);
    });
    for (const auto& row : result.table) {
        auto it = result.best_by_size.find(row.set.size());
        if (it == result.best_by_size.end() || row.mape.mean < it->second.mape.mean)
            result.best_by_size[row.set.size()] = row;
    }
    return result;
}

// ---------------------------------------------------------------------------
// Reporting

std::string format_percent(double fraction) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * fraction);
    return buf;
}

std::string format_mape(const MapeStat& stat) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.2f ± %.2f%%", 100.0 * stat.mean, 100.0 * stat.std);
    return buf;
}

namespace {

nlohmann::ordered_json stat_json(const MapeStat& s) {
    return {{"mean", s.mean}, {"std", s.std}};
}

}  // namespace

std::string dump_report_json(const ReductionReport& report,
                             const std::optional<ExhaustiveResult>& exhaustive) {
    using nlohmann::ordered_json;
    ordered_json doc;
    doc["orig"] = report.orig.members;
    doc["benchmark"] = stat_json(report.benchmark);
    doc["baseline"] = stat_json(report.baseline);
    ordered_json singles = ordered_json::array();
    for (const auto& r : report.ranking) {
        auto row = stat_json(r.mape);
        row["name"] = r.name;
        singles.push_back(std::move(row));
    }
    doc["singleton_ranking"] = std::move(singles);
    ordered_json trace = ordered_json::array();
    for (const auto& s : report.selection_trace) {
        ordered_json row;
        row["added"] = s.added;
        row["set"] = s.set.members;
        row["mean"] = s.mape.mean;
        row["std"] = s.mape.std;
        trace.push_back(std::move(row));
    }
    doc["selection_trace"] = std::move(trace);
    doc["reduced_set"] = report.reduced.members;
    doc["tolerance"] = std::isfinite(report.tolerance) ? ordered_json(report.tolerance)
                                                       : ordered_json("inf");
    doc["eval_replications"] = report.eval_replications;
    if (exhaustive) {
        ordered_json table = ordered_json::array();
        for (const auto& row : exhaustive->table) {
            ordered_json r;
            r["set"] = row.set.members;
            r["mean"] = row.mape.mean;
            r["std"] = row.mape.std;
            table.push_back(std::move(r));
        }
        ordered_json best = ordered_json::array();
        for (const auto& [size, row] : exhaustive->best_by_size) {
            ordered_json r;
            r["size"] = size;
            r["set"] = row.set.members;
            r["mean"] = row.mape.mean;
            r["std"] = row.mape.std;
            best.push_back(std::move(r));
        }
        doc["exhaustive"] = {{"subsets", std::move(table)}, {"best_by_size", std::move(best)}};
    }
    return doc.dump(2) + "\n";
}

std::string render_report_table(const ReductionReport& report,
                                const std::optional<ExhaustiveResult>& exhaustive) {
    struct Row {
        std::string models;
        std::string mape;
    };
    std::vector<Row> rows;
    rows.push_back({"all " + report.orig.label(), format_mape(report.benchmark)});
    rows.push_back({"none (all disabled)", format_mape(report.baseline)});
    // Singletons in declaration order, the way the cases are usually tabulated.
    for (const auto& name : report.orig.members) {
        const auto it = std::find_if(report.ranking.begin(), report.ranking.end(),
                                     [&](const RankedModel& r) { return r.name == name; });
        rows.push_back({"only {" + name + "}", format_mape(it->mape)});
    }
    for (const auto& s : report.selection_trace)
        if (s.set.size() > 1) rows.push_back({"reduced " + s.set.label(), format_mape(s.mape)});

    std::size_t width = 6;
    for (const auto& r : rows) width = std::max(width, r.models.size());

    std::ostringstream out;
    const auto line = [&](const std::string& c, const std::string& m, const std::string& v) {
        out << c << std::string(6 - std::min<std::size_t>(c.size(), 5), ' ') << m
            << std::string(width + 2 - m.size(), ' ') << v << '\n';
    };
    line("case", "models", "MAPE");
    for (std::size_t i = 0; i < rows.size(); ++i)
        line(std::string(1, static_cast<char>('a' + i)), rows[i].models, rows[i].mape);

    out << "\nranking (lowest singleton MAPE first):";
    for (std::size_t i = 0; i < report.ranking.size(); ++i)
        out << (i ? ", " : " ") << report.ranking[i].name;
    out << "\nselection:";
    for (const auto& s : report.selection_trace)
        out << "\n  + " << s.added << " -> " << s.set.label() << "  " << format_mape(s.mape);
    out << "\nreduced set: " << report.reduced.label() << '\n';
    out << "tolerance: " << (std::isfinite(report.tolerance) ? format_percent(report.tolerance) : "inf")
        << " over benchmark, " << report.eval_replications << " replications\n";

    if (exhaustive) {
        out << "\nexhaustive subsets (" << exhaustive->table.size() << "):\n";
        std::size_t w = 6;
        for (const auto& row : exhaustive->table) w = std::max(w, row.set.label().size());
        for (const auto& row : exhaustive->table) {
            const auto l = row.set.label();
            out << "  " << l << std::string(w + 2 - l.size(), ' ') << format_mape(row.mape) << '\n';
        }
        out << "best per size:\n";
        for (const auto& [size, row] : exhaustive->best_by_size) {
            out << "  " << size << ": " << row.set.label() << "  " << format_mape(row.mape);
            if (size <= report.selection_trace.size()) {
                const auto& g = report.selection_trace[size - 1];
                out << "  (greedy " << g.set.label() << " " << format_percent(g.mape.mean) << ")";
            }
            out << '\n';
        }
    }
    return out.str();
}

}  // namespace amr
