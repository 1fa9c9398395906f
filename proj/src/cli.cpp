#include "amr/cli.hpp"

#include "amr/error.hpp"
#include "amr/market.hpp"
#include "amr/rng.hpp"
#include "amr/worker_pool.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <ostream>
#include <sstream>

namespace amr::cli {

namespace {

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out << text;
}

std::string csv_text(const TimeSeries& ts) {
    std::ostringstream s;
    write_csv(ts, s);
    return s.str();
}

void check_file(const fs::path& path, const char* what) {
    if (!fs::exists(path)) throw InputError(std::string(what) + " not found: '" + path.string() + "'");
}

/// Weekdays starting at `start` (or the next weekday if it falls on a weekend).
std::vector<Date> weekdays_from(Date start, std::size_t n) {
    using namespace std::chrono;
    std::vector<Date> out;
    out.reserve(n);
    sys_days d{start};
    while (out.size() < n) {
        const weekday wd{d};
        if (wd != Saturday && wd != Sunday) out.push_back(year_month_day{d});
        d += days{1};
    }
    return out;
}

MarketConfig seeded(MarketConfig cfg, std::optional<std::uint64_t> seed) {
    if (seed) cfg.master_seed = *seed;
    return cfg;
}

}  // namespace

FitResult cmd_train(const TrainOptions& opt, std::ostream& log) {
    check_file(opt.data, "data file");
    check_file(opt.config, "market config");
    opt.schedule.validate();
    const auto series = load_csv(opt.data);
    const auto parts = split(series, {opt.split});
    if (parts.train.size() < 2) throw InputError("training window needs at least 2 observations");
    const MarketConfig cfg = seeded(load_config(opt.config), opt.seed);

    WorkerPool pool(opt.workers);
    const FitResult fit = anneal(parts.train, cfg, opt.schedule, cfg.master_seed, pool);
    write_text(opt.out, dump_fit_result(fit, cfg));
    log << "train MAPE: " << format_percent(fit.best_energy) << " (" << fit.evaluations
        << " evaluations, " << parts.train.size() << " training observations) -> "
        << opt.out.string() << '\n';
    return fit;
}

TimeSeries cmd_simulate(const SimulateOptions& opt, std::ostream& log) {
    check_file(opt.config, "market config");
    MarketConfig cfg = load_config(opt.config);
    std::optional<std::uint64_t> seed = opt.seed;
    if (opt.params) {
        check_file(*opt.params, "params file");
        const FitResult fit = load_fit_result(*opt.params, cfg);
        cfg = fit.best_params.apply_to(cfg);
        if (!seed) seed = fit.seed_used;
    }
    if (seed) cfg.master_seed = *seed;
    if (!opt.only.empty()) cfg = set_enabled(set_all_enabled(cfg, false), opt.only, true);

    std::vector<Date> dates;
    std::optional<double> p0 = opt.p0;
    if (opt.dates) {
        check_file(*opt.dates, "dates file");
        const auto ref = load_csv(*opt.dates);
        dates = ref.dates();
        if (!p0) p0 = ref.front().value;
        if (opt.horizon && *opt.horizon != dates.size())
            throw InputError("--horizon disagrees with the number of dates in '" +
                             opt.dates->string() + "'");
    } else {
        if (!opt.horizon || *opt.horizon == 0) throw InputError("simulate needs --horizon >= 1 or --dates");
        dates = weekdays_from(opt.start, *opt.horizon);
    }
    if (!p0) throw InputError("simulate needs --p0 when no --dates file is given");

    MarketConfig run_cfg = cfg;
    run_cfg.master_seed = rng::replication_seed(cfg.master_seed, opt.replication);
    WorkerPool pool(opt.workers);
    const SimulationRun run = simulate_pk(run_cfg, *p0, dates, pool);
    write_text(opt.out, csv_text(run.predicted));
    log << "simulated " << run.predicted.size() << " steps from " << format_double(*p0)
        << " (enabled asset share " << format_percent(cfg.enabled_asset_share()) << ", final "
        << format_double(run.predicted.back().value) << ") -> " << opt.out.string() << '\n';
    return run.predicted;
}

ReductionReport cmd_reduce(const ReduceOptions& opt, std::ostream& log) {
    check_file(opt.data, "data file");
    check_file(opt.config, "market config");
    check_file(opt.params, "params file");
    if (opt.replications == 0) throw InputError("--replications must be >= 1");
    if (!(opt.tolerance >= 0.0)) throw InputError("--tolerance must be >= 0");

    const auto series = load_csv(opt.data);
    const auto parts = split(series, {opt.split});
    MarketConfig cfg = load_config(opt.config);
    const FitResult fit = load_fit_result(opt.params, cfg);
    cfg.master_seed = opt.seed.value_or(fit.seed_used);

    EvalOptions eval;
    eval.replications = opt.replications;
    if (opt.p0_from_train) eval.p0 = parts.train.back().value;
    if (opt.retrain_per_subset) {
        opt.schedule.validate();
        eval.retrain = RetrainOptions{parts.train, opt.schedule, cfg.master_seed};
    }

    WorkerPool pool(opt.workers);
    const ReductionReport report =
        greedy_reduce(cfg, fit.best_params, parts.test, opt.tolerance, eval, pool);
    std::optional<ExhaustiveResult> exhaustive;
    if (opt.exhaustive) exhaustive = exhaustive_reduce(cfg, fit.best_params, parts.test, eval, pool);

    // Benchmark on the training window too, for reference.
    EvalOptions train_eval = eval;
    train_eval.p0.reset();
    const MapeStat train_benchmark =
        evaluate_subset(enabled_set(cfg), fit.best_params, cfg, parts.train, train_eval, pool);

    auto doc = nlohmann::ordered_json::parse(dump_report_json(report, exhaustive));
    doc["window"] = {{"name", "test"},
                     {"first", format_date(parts.test.front().date)},
                     {"last", format_date(parts.test.back().date)},
                     {"p0", eval.p0.value_or(parts.test.front().value)}};
    doc["train_window_benchmark"] = {{"mean", train_benchmark.mean}, {"std", train_benchmark.std}};
    doc["seed"] = cfg.master_seed;

    std::string table = "window: test " + format_date(parts.test.front().date) + ".." +
                        format_date(parts.test.back().date) + " (" +
                        std::to_string(parts.test.size()) + " observations)\n\n" +
                        render_report_table(report, exhaustive) +
                        "\nbenchmark on training window: " + format_mape(train_benchmark) + '\n';

    write_text(opt.out / "reduction_report.json", doc.dump(2) + "\n");
    write_text(opt.out / "reduction_report.txt", table);
    log << table;
    return report;
}

void cmd_plotdata(const PlotDataOptions& opt, std::ostream& log) {
    check_file(opt.actual, "actual series");
    check_file(opt.predicted, "predicted series");
    const auto actual = load_csv(opt.actual);
    const auto predicted = load_csv(opt.predicted);
    const std::size_t n = std::min(actual.size(), predicted.size());
    for (std::size_t i = 0; i < n; ++i)
        if (actual[i].date != predicted[i].date)
            throw InputError("series misaligned at row " + std::to_string(i + 1) + ": actual " +
                             format_date(actual[i].date) + " vs predicted " +
                             format_date(predicted[i].date));
    if (actual.size() != predicted.size()) {
        const auto& longer = actual.size() > predicted.size() ? actual : predicted;
        throw InputError("series misaligned at " + format_date(longer[n].date) + ": present only in the " +
                         (actual.size() > predicted.size() ? "actual" : "predicted") + " series");
    }
    std::ostringstream out;
    out << "date,actual,predicted\n";
    for (std::size_t i = 0; i < n; ++i)
        out << format_date(actual[i].date) << ',' << format_double(actual[i].value) << ','
            << format_double(predicted[i].value) << '\n';
    write_text(opt.out, out.str());
    log << "wrote " << n << " rows (MAPE " << format_percent(mape(actual, predicted)) << ") -> "
        << opt.out.string() << '\n';
}

void cmd_experiment(const ExperimentSpec& spec, std::ostream& log) {
    check_file(spec.data, "data file");
    fs::create_directories(spec.out);
    const fs::path fit_path = spec.out / "fit.json";

    log << "== train\n";
    const FitResult fit = cmd_train(
        {spec.data, spec.split, spec.config, fit_path, spec.seed, spec.schedule, spec.workers}, log);

    log << "== reduce\n";
    ReduceOptions ro;
    ro.data = spec.data;
    ro.split = spec.split;
    ro.config = spec.config;
    ro.params = fit_path;
    ro.out = spec.out;
    ro.seed = fit.seed_used;
    ro.tolerance = spec.tolerance;
    ro.replications = spec.replications;
    ro.exhaustive = spec.exhaustive;
    ro.p0_from_train = spec.p0_from_train;
    ro.workers = spec.workers;
    const ReductionReport report = cmd_reduce(ro, log);

    log << "== plotdata\n";
    const auto parts = split(load_csv(spec.data), {spec.split});
    const fs::path window_path = spec.out / "test_window.csv";
    save_csv(parts.test, window_path);

    const auto predict = [&](const std::string& tag, const std::vector<std::string>& only) {
        MarketConfig cfg = fit.best_params.apply_to(load_config(spec.config));
        if (!only.empty()) cfg = set_enabled(set_all_enabled(cfg, false), only, true);
        cfg.master_seed = rng::replication_seed(fit.seed_used, 0);
        const double p0 = spec.p0_from_train ? parts.train.back().value : parts.test.front().value;
        const auto dates = parts.test.dates();
        WorkerPool pool(spec.workers);
        const auto run = simulate_pk(cfg, p0, dates, pool);
        const fs::path pred_path = spec.out / ("prediction_" + tag + ".csv");
        save_csv(run.predicted, pred_path);
        cmd_plotdata({window_path, pred_path, spec.out / ("plot_" + tag + ".csv")}, log);
    };
    predict("full", {});
    predict("reduced", report.reduced.members);
}

ExperimentSpec load_experiment_spec(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open experiment spec '" + path.string() + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    }
    const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
    const auto resolve = [&](const std::string& p) {
        const fs::path q(p);
        return q.is_absolute() ? q : base / q;
    };
    const auto str = [&](const char* key) {
        if (!doc.contains(key) || !doc[key].is_string())
            throw InputError(path.string() + ": missing string field '" + key + "'");
        return doc[key].get<std::string>();
    };
    try {
        ExperimentSpec spec;
        spec.data = resolve(str("data"));
        spec.split = parse_date(str("split"));
        spec.config = resolve(str("config"));
        spec.out = resolve(str("out"));
        if (doc.contains("seed")) spec.seed = doc["seed"].get<std::uint64_t>();
        spec.tolerance = doc.value("tolerance", spec.tolerance);
        spec.replications = doc.value("replications", spec.replications);
        spec.exhaustive = doc.value("exhaustive", spec.exhaustive);
        spec.p0_from_train = doc.value("p0_from_train", spec.p0_from_train);
        spec.workers = doc.value("workers", spec.workers);
        if (doc.contains("schedule")) {
            const auto& s = doc["schedule"];
            auto& sch = spec.schedule;
            sch.initial_temperature = s.value("initial_temperature", sch.initial_temperature);
            sch.cooling_factor = s.value("cooling_factor", sch.cooling_factor);
            sch.proposals_per_epoch = s.value("proposals_per_epoch", sch.proposals_per_epoch);
            sch.total_evaluations = s.value("total_evaluations", sch.total_evaluations);
            sch.proposal_sigma = s.value("proposal_sigma", sch.proposal_sigma);
            sch.replications = s.value("replications", sch.replications);
        }
        spec.schedule.validate();
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Argument parsing

namespace {

struct ScheduleFlags {
    std::size_t evaluations = 0;
    double temperature = 0.0;
    double cooling = 0.0;
    std::size_t epoch = 0;
    double sigma = 0.0;
    std::size_t replications = 0;

    void add_to(CLI::App* app) {
        app->add_option("--evaluations", evaluations, "Annealing: total energy evaluations (5000)");
        app->add_option("--temperature", temperature, "Annealing: initial temperature (0.05)");
        app->add_option("--cooling", cooling, "Annealing: geometric cooling factor (0.95)");
        app->add_option("--epoch", epoch, "Annealing: proposals per temperature level (50)");
        app->add_option("--sigma", sigma, "Annealing: proposal std as fraction of range (0.05)");
        app->add_option("--train-replications", replications,
                        "Annealing: simulations averaged per energy (3)");
    }

    void apply(CLI::App* app, AnnealingSchedule& s) const {
        if (app->count("--evaluations")) s.total_evaluations = evaluations;
        if (app->count("--temperature")) s.initial_temperature = temperature;
        if (app->count("--cooling")) s.cooling_factor = cooling;
        if (app->count("--epoch")) s.proposals_per_epoch = epoch;
        if (app->count("--sigma")) s.proposal_sigma = sigma;
        if (app->count("--train-replications")) s.replications = replications;
        s.validate();
    }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Agent-based market simulator with annealing fit and greedy model reduction", "amr"};
    app.require_subcommand(1);

    std::string data, split_date, config, params, out_path, predicted, dates_file, start = "2000-01-03",
                                                                     spec_path, only;
    std::uint64_t seed = 0;
    std::size_t workers = 0, horizon = 0, replications = 10, replication = 0;
    double tolerance = 0.005, p0 = 0.0;
    bool exhaustive = false, p0_from_train = false, retrain = false;
    ScheduleFlags train_flags, reduce_flags, exp_flags;

    const auto common = [&](CLI::App* sub) {
        sub->add_option("--workers", workers, "Worker threads (default: AMR_WORKERS or 1)");
        sub->add_option("--seed", seed, "Master seed");
    };

    auto* train = app.add_subcommand("train", "Fit behavioural parameters on the training window");
    train->add_option("--data", data, "Target series CSV (date,value)")->required();
    train->add_option("--split", split_date, "Last training date (YYYY-MM-DD)")->required();
    train->add_option("--config", config, "Market config JSON")->required();
    train->add_option("--out", out_path, "Fit result JSON to write")->required();
    common(train);
    train_flags.add_to(train);

    auto* simulate = app.add_subcommand("simulate", "Run the partial-knowledge simulation");
    simulate->add_option("--config", config, "Market config JSON")->required();
    simulate->add_option("--params", params, "Fit result JSON overriding the config's parameters");
    simulate->add_option("--p0", p0, "Initial price");
    simulate->add_option("--horizon", horizon, "Number of observations to produce");
    simulate->add_option("--dates", dates_file, "CSV providing the output dates (and p0)");
    simulate->add_option("--start", start, "First date when only --horizon is given");
    simulate->add_option("--replication", replication, "Replication index of the run seed");
    simulate->add_option("--only", only, "Comma-separated types to keep enabled");
    simulate->add_option("--out", out_path, "Prediction CSV to write")->required();
    common(simulate);

    auto* reduce = app.add_subcommand("reduce", "Greedy model reduction on the test window");
    reduce->add_option("--data", data, "Target series CSV")->required();
    reduce->add_option("--split", split_date, "Last training date")->required();
    reduce->add_option("--config", config, "Market config JSON")->required();
    reduce->add_option("--params", params, "Fit result JSON")->required();
    reduce->add_option("--out", out_path, "Output directory")->required();
    reduce->add_option("--tolerance", tolerance, "Stop when within this MAPE fraction of the benchmark");
    reduce->add_option("--replications", replications, "Evaluation replications (10)");
    reduce->add_flag("--exhaustive", exhaustive, "Also evaluate every non-empty subset");
    reduce->add_flag("--p0-from-train", p0_from_train, "Start test runs from the last training value");
    reduce->add_flag("--retrain-per-subset", retrain, "Re-anneal each subset on the training window");
    common(reduce);
    reduce_flags.add_to(reduce);

    auto* plot = app.add_subcommand("plotdata", "Merge actual and predicted series for plotting");
    plot->add_option("--data", data, "Actual series CSV")->required();
    plot->add_option("--predicted", predicted, "Predicted series CSV")->required();
    plot->add_option("--out", out_path, "Merged CSV to write")->required();

    auto* experiment = app.add_subcommand("experiment", "train -> reduce -> plotdata");
    experiment->add_option("--spec", spec_path, "Experiment spec JSON");
    experiment->add_option("--data", data, "Target series CSV");
    experiment->add_option("--split", split_date, "Last training date");
    experiment->add_option("--config", config, "Market config JSON");
    experiment->add_option("--out", out_path, "Output directory");
    experiment->add_option("--tolerance", tolerance, "Reduction tolerance");
    experiment->add_option("--replications", replications, "Evaluation replications");
    experiment->add_flag("--exhaustive", exhaustive, "Append the exhaustive subset table");
    experiment->add_flag("--p0-from-train", p0_from_train, "Start test runs from the last training value");
    common(experiment);
    exp_flags.add_to(experiment);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_input;
    }

    try {
        const auto sub = app.get_subcommands().front();
        const auto maybe_seed = [&]() -> std::optional<std::uint64_t> {
            if (sub->count("--seed")) return seed;
            return std::nullopt;
        };
        const std::size_t n_workers = resolve_worker_count(workers);

        if (sub == train) {
            TrainOptions o{data, parse_date(split_date), config, out_path, maybe_seed(), {}, n_workers};
            train_flags.apply(train, o.schedule);
            cmd_train(o, out);
        } else if (sub == simulate) {
            SimulateOptions o;
            o.config = config;
            if (simulate->count("--params")) o.params = params;
            if (simulate->count("--p0")) o.p0 = p0;
            if (simulate->count("--horizon")) o.horizon = horizon;
            if (simulate->count("--dates")) o.dates = dates_file;
            o.start = parse_date(start);
            o.seed = maybe_seed();
            o.replication = replication;
            o.out = out_path;
            o.workers = n_workers;
            if (simulate->count("--only")) {
                std::stringstream ss(only);
                for (std::string name; std::getline(ss, name, ',');)
                    if (!name.empty()) o.only.push_back(name);
                if (o.only.empty()) throw InputError("--only needs at least one type name");
            }
            cmd_simulate(o, out);
        } else if (sub == reduce) {
            ReduceOptions o;
            o.data = data;
            o.split = parse_date(split_date);
            o.config = config;
            o.params = params;
            o.out = out_path;
            o.seed = maybe_seed();
            o.tolerance = tolerance;
            o.replications = replications;
            o.exhaustive = exhaustive;
            o.p0_from_train = p0_from_train;
            o.retrain_per_subset = retrain;
            o.workers = n_workers;
            reduce_flags.apply(reduce, o.schedule);
            cmd_reduce(o, out);
        } else if (sub == plot) {
            cmd_plotdata({data, predicted, out_path}, out);
        } else if (sub == experiment) {
            ExperimentSpec spec;
            if (!spec_path.empty()) spec = load_experiment_spec(spec_path);
            if (experiment->count("--data")) spec.data = data;
            if (experiment->count("--split")) spec.split = parse_date(split_date);
            if (experiment->count("--config")) spec.config = config;
            if (experiment->count("--out")) spec.out = out_path;
            if (experiment->count("--tolerance")) spec.tolerance = tolerance;
            if (experiment->count("--replications")) spec.replications = replications;
            if (exhaustive) spec.exhaustive = true;
            if (p0_from_train) spec.p0_from_train = true;
            if (sub->count("--seed")) spec.seed = seed;
            if (sub->count("--workers") || spec_path.empty()) spec.workers = n_workers;
            exp_flags.apply(experiment, spec.schedule);
            if (spec.data.empty() || spec.config.empty() || spec.out.empty() || !spec.split.ok())
                throw InputError("experiment needs --spec or all of --data, --split, --config, --out");
            cmd_experiment(spec, out);
        }
        return exit_ok;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return exit_input;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return exit_internal;
    }
}

}  // namespace amr::cli
