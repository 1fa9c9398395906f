#pragma once

// Shared fixtures for unit and acceptance tests.

#include "amr/market.hpp"
#include "amr/rng.hpp"
#include "amr/timeseries.hpp"

#include <unistd.h>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#ifndef AMR_TEST_DATA_DIR
#define AMR_TEST_DATA_DIR "tests/data"
#endif
#ifndef AMR_CONFIG_DIR
#define AMR_CONFIG_DIR "configs"
#endif

namespace amr::testing {

inline std::filesystem::path data_dir() { return AMR_TEST_DATA_DIR; }
inline std::filesystem::path config_dir() { return AMR_CONFIG_DIR; }

/// Seed of the "true" market that generated a synthetic target. Distinct from
/// the master seeds used for fitting and evaluation.
inline constexpr std::uint64_t truth_seed = 20240101;

// Investor-type asset layouts of the two reference configurations:
// Individual 0.1 x 150, Funds 100 x 100, Banks 1000 x 245, Govt 10000 x 5 (A)
// or 100000 x 5 (B).
inline MarketConfig layout(double govt_assets_per_investor) {
    MarketConfig c;
    c.types = {{"Individual", 0.1, 150, 0.5, 0.0, 1.0, true},
               {"Funds", 100.0, 100, 0.5, 0.0, 1.0, true},
               {"Banks", 1000.0, 245, 0.5, 0.0, 1.0, true},
               {"Govt", govt_assets_per_investor, 5, 0.5, 0.0, 1.0, true}};
    c.price_impact = 0.01;
    c.jitter = 0.05;
    c.master_seed = 7;
    return c;
}

/// Configuration A with the generating parameters of the synthetic target:
/// only Banks lean bullish, every other type is neutral.
inline MarketConfig truth_config_a() {
    MarketConfig c = layout(10000.0);
    c.types[2].optimism = 0.57;
    return c;
}

/// Configuration B: Banks and Govt both lean bullish; Govt trades a smaller
/// fraction of its (now much larger) assets.
inline MarketConfig truth_config_b() {
    MarketConfig c = layout(100000.0);
    c.types[2].optimism = 0.6;
    c.types[3].optimism = 0.6;
    c.types[3].trade_fraction = 0.3;
    return c;
}

/// Consecutive calendar days from 2009-01-01.
inline std::vector<Date> daily_dates(std::size_t n, Date start = Date{std::chrono::year{2009}, std::chrono::January, std::chrono::day{1}}) {
    using namespace std::chrono;
    std::vector<Date> out;
    sys_days d{start};
    for (std::size_t i = 0; i < n; ++i, d += days{1}) out.push_back(year_month_day{d});
    return out;
}

/// Partial-knowledge series produced by `truth` under the truth seed.
inline TimeSeries synthetic_target(const MarketConfig& truth, std::size_t horizon, double p0 = 100.0) {
    MarketConfig cfg = truth;
    cfg.master_seed = rng::replication_seed(truth_seed, 0);
    return simulate_pk(cfg, p0, daily_dates(horizon)).predicted;
}

/// Random strictly positive series of length n on daily dates.
inline TimeSeries random_series(std::mt19937_64& gen, std::size_t n) {
    std::uniform_real_distribution<double> value(1.0, 1000.0);
    std::vector<double> v(n);
    for (auto& x : v) x = value(gen);
    const auto dates = daily_dates(n);
    return TimeSeries::from_columns(dates, v);
}

/// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("amr_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

}  // namespace amr::testing
