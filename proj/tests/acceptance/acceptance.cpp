// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Set AMR_SP500_CSV to a date,close file covering 2009-01-02 ..
// 2010-08-20 to run the baseline check against real index data.

#include "amr/cli.hpp"
#include "amr/learner.hpp"
#include "amr/market.hpp"
#include "amr/reducer.hpp"
#include "amr/timeseries.hpp"

#include "../support/fixtures.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace amr;
using namespace amr::testing;

namespace {

struct Verdict {
    bool pass;
    std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& title, const std::function<Verdict()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
        v = body();
    } catch (const std::exception& e) {
        v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!v.pass) ++failures;
    std::printf("%s [%d] %s (%.2fs): %s\n", v.pass ? "PASS" : "FAIL", id, title.c_str(), secs,
                v.detail.c_str());
    std::fflush(stdout);
}

std::string pct(double x) { return format_percent(x); }

// Shared reduction fixtures: generating parameters of each layout scored on a
// 250-step series drawn from them.
struct ReductionCase {
    MarketConfig config;
    ReductionReport greedy;
    ExhaustiveResult exhaustive;
};

constexpr double reduction_tolerance = 0.005;

const ReductionCase& reduction_case(char which) {
    static std::map<char, ReductionCase> cache;
    auto it = cache.find(which);
    if (it != cache.end()) return it->second;
    const MarketConfig cfg = which == 'A' ? truth_config_a() : truth_config_b();
    const auto target = synthetic_target(cfg, 250);
    const auto params = ParameterVector::from_config(cfg);
    const EvalOptions opts;  // 10 replications, p0 = first target value
    WorkerPool pool(resolve_worker_count());
    ReductionCase rc{cfg, greedy_reduce(cfg, params, target, reduction_tolerance, opts, pool),
                     exhaustive_reduce(cfg, params, target, opts, pool)};
    return cache.emplace(which, std::move(rc)).first->second;
}

Verdict mape_exactness() {
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> scale(1e-3, 1e3);
    double worst_identity = 0.0, worst_scale = 0.0;
    for (int i = 0; i < 100; ++i) {
        const auto x = random_series(gen, 1 + gen() % 500);
        worst_identity = std::max(worst_identity, mape(x, x));
    }
    for (int i = 0; i < 100; ++i) {
        const std::size_t n = 1 + gen() % 500;
        const auto x = random_series(gen, n);
        const auto y = random_series(gen, n);
        const double c = scale(gen);
        worst_scale = std::max(worst_scale, std::abs(mape(x.scaled(c), y.scaled(c)) - mape(x, y)));
    }
    const auto dates = daily_dates(2);
    const double hand = mape(TimeSeries::from_columns(dates, std::vector{100.0, 200.0}),
                             TimeSeries::from_columns(dates, std::vector{110.0, 180.0}));
    const double hand_err = std::abs(hand - 0.10);
    std::ostringstream d;
    d << "identity max " << worst_identity << ", hand case |err| " << hand_err << ", scale max |diff| "
      << worst_scale;
    return {worst_identity == 0.0 && hand_err <= 1e-12 && worst_scale <= 1e-12, d.str()};
}

Verdict constant_baseline() {
    const MarketConfig cfg = load_config(config_dir() / "config_a.json");
    const auto params = ParameterVector::from_config(cfg);
    const EvalOptions opts;  // 10 seeds, p0 = first test value

    if (const char* path = std::getenv("AMR_SP500_CSV"); path != nullptr && *path != '\0') {
        const auto all = load_csv(path);
        std::vector<Observation> window;
        for (const auto& o : all.observations())
            if (parse_date("2009-01-02") <= o.date && o.date <= parse_date("2010-08-20")) window.push_back(o);
        const TimeSeries test(window);
        const auto s = evaluate_subset({}, params, cfg, test, opts);
        const double paper = 0.1314;
        std::ostringstream d;
        d << "real data " << test.size() << " closes: " << format_mape(s) << " vs 13.14 +- 1.5 pp";
        return {std::abs(s.mean - paper) <= 0.015 && s.std == 0.0, d.str()};
    }

    const auto [train, test] = split(load_csv(data_dir() / "synthetic_a.csv"), {parse_date("2008-12-31")});
    const auto s = evaluate_subset({}, params, cfg, test, opts);
    return {s.std == 0.0 && s.mean > 0.0,
            "synthetic fallback (AMR_SP500_CSV unset): " + format_mape(s) + ", std exactly 0"};
}

Verdict annealing_recovery() {
    const auto target = synthetic_target(truth_config_a(), 250);
    const AnnealingSchedule defaults;
    const auto fit = anneal(target, layout(10000.0), defaults, 11);
    bool monotone = true;
    for (std::size_t i = 1; i < fit.energy_trace.size(); ++i)
        monotone = monotone && fit.energy_trace[i] <= fit.energy_trace[i - 1];
    std::ostringstream d;
    d << fit.evaluations << " evaluations, best train MAPE " << pct(fit.best_energy)
      << " (limit 2.00%), trace " << (monotone ? "non-increasing" : "INCREASES");
    return {fit.evaluations == 5000 && fit.best_energy <= 0.02 && monotone, d.str()};
}

Verdict greedy_vs_exhaustive() {
    bool ok = true;
    std::ostringstream d;
    for (char which : {'A', 'B'}) {
        const auto& rc = reduction_case(which);
        if (rc.exhaustive.table.size() != 15) ok = false;
        const auto& final_step = rc.greedy.selection_trace.back();
        const auto& best = rc.exhaustive.best_by_size.at(final_step.set.size());
        const double gap = final_step.mape.mean - best.mape.mean;
        const bool top_matches = rc.exhaustive.best_by_size.at(1).set == ModelSet{{rc.greedy.ranking.front().name}};
        ok = ok && gap <= reduction_tolerance && top_matches;
        d << which << ": greedy " << final_step.set.label() << " " << pct(final_step.mape.mean)
          << " vs exhaustive " << best.set.label() << " " << pct(best.mape.mean) << ", best size-1 "
          << rc.exhaustive.best_by_size.at(1).set.label() << (top_matches ? " = " : " != ") << "top singleton; ";
    }
    return {ok, d.str()};
}

Verdict configuration_outcomes() {
    const auto& a = reduction_case('A');
    const auto& b = reduction_case('B');

    // Two largest-asset types of B, computed from the layout.
    std::vector<std::size_t> order(b.config.types.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return b.config.types[x].total_assets() > b.config.types[y].total_assets();
    });
    std::vector<std::size_t> top2{order[0], order[1]};
    std::sort(top2.begin(), top2.end());
    const ModelSet largest{{b.config.types[top2[0]].name, b.config.types[top2[1]].name}};

    bool no_singleton_meets = true;
    for (const auto& r : b.greedy.ranking)
        no_singleton_meets = no_singleton_meets && r.mape.mean > b.greedy.benchmark.mean + reduction_tolerance;

    const bool a_ok = a.greedy.ranking.front().name == "Banks" && a.greedy.reduced.size() == 1;
    const bool b_ok = no_singleton_meets && b.greedy.reduced == largest;
    std::ostringstream d;
    d << "A: top singleton " << a.greedy.ranking.front().name << " " << pct(a.greedy.ranking.front().mape.mean)
      << ", benchmark " << pct(a.greedy.benchmark.mean) << ", reduced " << a.greedy.reduced.label()
      << "; B: best singleton " << pct(b.greedy.ranking.front().mape.mean) << " vs benchmark "
      << pct(b.greedy.benchmark.mean) << ", reduced " << b.greedy.reduced.label() << " (expected "
      << largest.label() << ")";
    return {a_ok && b_ok, d.str()};
}

std::string serialize_run(const SimulationRun& run) {
    std::ostringstream s;
    write_csv(run.predicted, s);
    for (double dmd : run.demands) s << format_double(dmd) << '\n';
    return s.str();
}

Verdict parallel_determinism() {
    std::ostringstream d;
    bool ok = true;

    MarketConfig cfg = truth_config_b();
    cfg.master_seed = 99;
    const auto dates = load_csv(data_dir() / "synthetic_b.csv").dates();
    std::map<std::size_t, std::string> sims;
    for (std::size_t w : {1u, 2u, 8u}) {
        WorkerPool pool(w);
        sims[w] = serialize_run(simulate_pk(cfg, 1447.16, dates, pool));
    }
    const bool sim_same = sims[1] == sims[2] && sims[1] == sims[8];
    d << "simulate_pk " << dates.size() << " steps " << (sim_same ? "identical" : "DIFFER");
    ok = ok && sim_same;

    TempDir dir("acceptance_det");
    std::map<std::size_t, std::map<std::string, std::string>> outputs;
    for (std::size_t w : {1u, 2u, 8u}) {
        const auto out = dir / ("w" + std::to_string(w));
        std::ostringstream log, err;
        const int code = cli::run({"experiment", "--data", (data_dir() / "synthetic_b.csv").string(), "--split",
                                   "2008-12-31", "--config", (config_dir() / "config_b.json").string(), "--out",
                                   out.string(), "--seed", "5", "--evaluations", "200", "--train-replications",
                                   "2", "--replications", "4", "--exhaustive", "--workers", std::to_string(w)},
                                  log, err);
        if (code != 0) return {false, "experiment failed with " + std::to_string(w) + " workers: " + err.str()};
        for (const auto& entry : std::filesystem::directory_iterator(out))
            outputs[w][entry.path().filename().string()] = read_file(entry.path());
    }
    const bool exp_same = !outputs[1].empty() && outputs[1] == outputs[2] && outputs[1] == outputs[8];
    d << "; experiment " << outputs[1].size() << " files " << (exp_same ? "identical" : "DIFFER")
      << " for 1/2/8 workers";
    return {ok && exp_same, d.str()};
}

Verdict structural_invariants() {
    // Products of the per-investor assets and counts of the two layouts.
    const std::vector<double> expected_a{15.0, 10000.0, 245000.0, 50000.0};
    const auto a = load_config(config_dir() / "config_a.json");
    const auto b = load_config(config_dir() / "config_b.json");
    bool totals = a.types.size() == 4 && b.types.size() == 4;
    for (std::size_t k = 0; totals && k < 4; ++k) {
        totals = std::abs(a.types[k].total_assets() - expected_a[k]) <= 1e-9 * expected_a[k];
        const double eb = k == 3 ? 500000.0 : expected_a[k];
        totals = totals && std::abs(b.types[k].total_assets() - eb) <= 1e-9 * eb;
    }

    std::mt19937_64 gen(777);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::size_t bad_price = 0, bad_demand = 0;
    double worst_ratio = 0.0;
    const auto dates = daily_dates(60);
    for (int trial = 0; trial < 10000; ++trial) {
        MarketConfig cfg;
        const std::size_t n_types = 1 + gen() % 5;
        for (std::size_t k = 0; k < n_types; ++k) {
            InvestorType t;
            t.name = "T" + std::to_string(k);
            t.assets_per_investor = std::pow(10.0, -1.0 + 6.0 * unit(gen));
            t.count = 1 + gen() % 40;
            t.optimism = unit(gen);
            t.reactivity = -1.0 + 2.0 * unit(gen);
            t.trade_fraction = 1e-3 + (1.0 - 1e-3) * unit(gen);
            t.enabled = unit(gen) < 0.7;
            cfg.types.push_back(t);
        }
        cfg.price_impact = 1e-4 + (0.1 - 1e-4) * unit(gen);
        cfg.jitter = 0.2 * unit(gen);
        cfg.master_seed = gen();
        const double p0 = std::pow(10.0, -2.0 + 6.0 * unit(gen));
        const auto run = simulate_pk(cfg, p0, dates);
        for (const auto& o : run.predicted.observations())
            if (!(o.value > 0.0) || !std::isfinite(o.value)) ++bad_price;
        const double share = cfg.enabled_asset_share();
        for (double dmd : run.demands) {
            if (std::abs(dmd) > share * (1.0 + 1e-12)) ++bad_demand;
            if (share > 0.0) worst_ratio = std::max(worst_ratio, std::abs(dmd) / share);
        }
    }
    std::ostringstream d;
    d << "asset totals " << (totals ? "match" : "MISMATCH") << ", 10000 random configs: " << bad_price
      << " non-positive prices, " << bad_demand << " demand-bound violations (max |D|/share " << worst_ratio
      << ")";
    return {totals && bad_price == 0 && bad_demand == 0, d.str()};
}

}  // namespace

int main() {
    criterion(1, "MAPE exactness", mape_exactness);
    criterion(2, "constant baseline", constant_baseline);
    criterion(3, "annealing recovers a known market", annealing_recovery);
    criterion(4, "greedy vs exhaustive subsets", greedy_vs_exhaustive);
    criterion(5, "configuration A/B reduction outcomes", configuration_outcomes);
    criterion(6, "determinism across worker counts", parallel_determinism);
    criterion(7, "structural invariants", structural_invariants);
    std::printf("%s: %d failure(s)\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
    return failures == 0 ? 0 : 1;
}
