#include "amr/timeseries.hpp"

#include "amr/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace amr {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

bool parse_number(std::string_view text, double& out) {
    text = trim(text);
    if (text.empty()) return false;
    if (text.front() == '+') text.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

bool parse_fixed_int(std::string_view s, int& out) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

Date parse_date(std::string_view text) {
    const auto s = trim(text);
    int y = 0, m = 0, d = 0;
    if (s.size() != 10 || s[4] != '-' || s[7] != '-' || !parse_fixed_int(s.substr(0, 4), y) ||
        !parse_fixed_int(s.substr(5, 2), m) || !parse_fixed_int(s.substr(8, 2), d)) {
        throw InputError("invalid date '" + std::string(s) + "' (expected YYYY-MM-DD)");
    }
    const Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                    std::chrono::day{static_cast<unsigned>(d)}};
    if (!date.ok()) throw InputError("invalid calendar date '" + std::string(s) + "'");
    return date;
}

std::string format_date(Date d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
    return buf;
}

std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

TimeSeries::TimeSeries(std::vector<Observation> observations) : obs_(std::move(observations)) {
    if (obs_.empty()) throw InputError("time series must contain at least one observation");
    for (std::size_t i = 0; i < obs_.size(); ++i) {
        const auto& o = obs_[i];
        if (!std::isfinite(o.value) || o.value <= 0.0)
            throw InputError("non-positive value " + format_double(o.value) + " at " +
                             format_date(o.date));
        if (i > 0 && !(obs_[i - 1].date < o.date))
            throw InputError("dates not strictly ascending at " + format_date(o.date));
    }
}

TimeSeries TimeSeries::from_columns(std::span<const Date> dates, std::span<const double> values) {
    if (dates.size() != values.size())
        throw InputError("date and value columns differ in length");
    std::vector<Observation> obs;
    obs.reserve(dates.size());
    for (std::size_t i = 0; i < dates.size(); ++i) obs.push_back({dates[i], values[i]});
    return TimeSeries(std::move(obs));
}

std::vector<Date> TimeSeries::dates() const {
    std::vector<Date> out;
    out.reserve(obs_.size());
    for (const auto& o : obs_) out.push_back(o.date);
    return out;
}

std::vector<double> TimeSeries::values() const {
    std::vector<double> out;
    out.reserve(obs_.size());
    for (const auto& o : obs_) out.push_back(o.value);
    return out;
}

TimeSeries TimeSeries::scaled(double factor) const {
    auto obs = obs_;
    for (auto& o : obs) o.value *= factor;
    return TimeSeries(std::move(obs));
}

SplitResult split(const TimeSeries& ts, SplitSpec spec) {
    if (spec.boundary < ts.front().date || !(spec.boundary < ts.back().date))
        throw InputError("split boundary " + format_date(spec.boundary) + " outside series range " +
                         format_date(ts.front().date) + ".." + format_date(ts.back().date));
    const auto& obs = ts.observations();
    const auto mid = std::upper_bound(obs.begin(), obs.end(), spec.boundary,
                                      [](Date b, const Observation& o) { return b < o.date; });
    return {TimeSeries({obs.begin(), mid}), TimeSeries({mid, obs.end()})};
}

TimeSeries concat(const TimeSeries& head, const TimeSeries& tail) {
    auto obs = head.observations();
    obs.insert(obs.end(), tail.observations().begin(), tail.observations().end());
    return TimeSeries(std::move(obs));
}

double mape(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size())
        throw InputError("mape: length mismatch (" + std::to_string(actual.size()) + " vs " +
                         std::to_string(predicted.size()) + ")");
    if (actual.empty()) throw InputError("mape: empty series");
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i)
        sum += std::abs(actual[i] - predicted[i]) / actual[i];
    return sum / static_cast<double>(actual.size());
}

double mape(const TimeSeries& actual, const TimeSeries& predicted) {
    if (actual.size() != predicted.size())
        throw InputError("mape: length mismatch (" + std::to_string(actual.size()) + " vs " +
                         std::to_string(predicted.size()) + ")");
    for (std::size_t i = 0; i < actual.size(); ++i)
        if (actual[i].date != predicted[i].date)
            throw InputError("mape: date mismatch at index " + std::to_string(i) + " (" +
                             format_date(actual[i].date) + " vs " + format_date(predicted[i].date) +
                             ")");
    const auto x = actual.values();
    const auto y = predicted.values();
    return mape(x, y);
}

TimeSeries parse_csv(std::istream& in, std::string_view source_name) {
    std::vector<Observation> obs;
    std::string line;
    std::size_t line_no = 0;
    const auto where = [&] { return std::string(source_name) + ":" + std::to_string(line_no) + ": "; };
    while (std::getline(in, line)) {
        ++line_no;
        const auto row = trim(line);
        if (row.empty()) continue;
        const auto comma = row.find(',');
        if (comma == std::string_view::npos || row.find(',', comma + 1) != std::string_view::npos)
            throw InputError(where() + "expected exactly two fields 'date,value'");
        const auto date_field = row.substr(0, comma);
        const auto value_field = row.substr(comma + 1);
        double value = 0.0;
        if (!parse_number(value_field, value)) {
            if (obs.empty() && line_no == 1) continue;  // header
            throw InputError(where() + "unparseable value '" + std::string(trim(value_field)) + "'");
        }
        Date date;
        try {
            date = parse_date(date_field);
        } catch (const InputError& e) {
            throw InputError(where() + e.what());
        }
        if (!std::isfinite(value) || value <= 0.0)
            throw InputError(where() + "non-positive value " + std::string(trim(value_field)));
        obs.push_back({date, value});
    }
    if (obs.empty()) throw InputError(std::string(source_name) + ": no observations");
    std::stable_sort(obs.begin(), obs.end(),
                     [](const Observation& a, const Observation& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < obs.size(); ++i)
        if (obs[i].date == obs[i - 1].date)
            throw InputError(std::string(source_name) + ": duplicate date " + format_date(obs[i].date));
    return TimeSeries(std::move(obs));
}

TimeSeries load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open data file '" + path.string() + "'");
    return parse_csv(in, path.string());
}

void write_csv(const TimeSeries& ts, std::ostream& out) {
    for (const auto& o : ts.observations()) out << format_date(o.date) << ',' << format_double(o.value) << '\n';
}

void save_csv(const TimeSeries& ts, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    write_csv(ts, out);
}

}  // namespace amr
