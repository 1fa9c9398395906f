#pragma once

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace amr {

using Date = std::chrono::year_month_day;

/// Parses a strict ISO-8601 calendar date (YYYY-MM-DD). Throws InputError.
Date parse_date(std::string_view text);
std::string format_date(Date d);

struct Observation {
    Date date;
    double value;

    friend bool operator==(const Observation&, const Observation&) = default;
};

/// Ordered, dated, strictly positive price observations.
///
/// Construction validates: at least one observation, strictly ascending
/// dates, every value finite and > 0. A TimeSeries that exists is valid.
class TimeSeries {
public:
    explicit TimeSeries(std::vector<Observation> observations);

    /// Builds a series from parallel date/value lists.
    static TimeSeries from_columns(std::span<const Date> dates, std::span<const double> values);

    std::size_t size() const noexcept { return obs_.size(); }
    const std::vector<Observation>& observations() const noexcept { return obs_; }
    const Observation& operator[](std::size_t i) const { return obs_[i]; }
    const Observation& front() const { return obs_.front(); }
    const Observation& back() const { return obs_.back(); }

    std::vector<Date> dates() const;
    std::vector<double> values() const;

    /// Same dates, every value multiplied by `factor` (> 0).
    TimeSeries scaled(double factor) const;

    friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

private:
    std::vector<Observation> obs_;
};

/// Last calendar day included in the training part.
struct SplitSpec {
    Date boundary;
};

struct SplitResult {
    TimeSeries train;
    TimeSeries test;
};

/// Partitions by `date <= boundary`. The boundary must lie strictly inside
/// the series' date range (first <= boundary < last) so neither part is empty.
SplitResult split(const TimeSeries& ts, SplitSpec spec);

/// Inverse of split: appends `tail` to `head`. Throws if dates overlap.
TimeSeries concat(const TimeSeries& head, const TimeSeries& tail);

/// Mean absolute percentage error as a fraction, with `actual` (the target)
/// in the denominator: (1/N) sum |x_i - y_i| / x_i.
/// Throws InputError on length or date mismatch.
double mape(const TimeSeries& actual, const TimeSeries& predicted);

/// Same formula over raw aligned values. Throws InputError on length mismatch.
double mape(std::span<const double> actual, std::span<const double> predicted);

/// Reads `date,value` rows; an optional single header line is recognised by a
/// non-numeric second field. Rows may appear in any order and are sorted.
/// Errors carry the offending line number.
TimeSeries load_csv(const std::filesystem::path& path);
TimeSeries parse_csv(std::istream& in, std::string_view source_name = "<stream>");

/// Writes `date,value` rows (no header) with round-trip precision.
void write_csv(const TimeSeries& ts, std::ostream& out);
void save_csv(const TimeSeries& ts, const std::filesystem::path& path);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace amr
