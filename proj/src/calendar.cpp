#include "mfhier/calendar.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <vector>

#include "mfhier/errors.hpp"

namespace mfhier {

namespace {

int months_per(Frequency f) {
    switch (f) {
        case Frequency::Year: return 12;
        case Frequency::Quarter: return 3;
        case Frequency::Month: return 1;
        case Frequency::Week: return 0;
    }
    return 0;
}

bool to_int(std::string_view s, int& out) {
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    size_t start = 0;
    for (size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            parts.push_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return parts;
}

bool valid(const Date& d) {
    return d.month >= 1 && d.month <= 12 && d.day >= 1 && d.day <= 31;
}

}  // namespace

Date parse_date(std::string_view text) {
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);

    Date d;
    bool ok = false;
    auto q = text.find_first_of("Qq");
    if (q != std::string_view::npos) {
        auto year_part = text.substr(0, q);
        if (!year_part.empty() && year_part.back() == ':') year_part.remove_suffix(1);
        int quarter = 0;
        ok = to_int(year_part, d.year) && to_int(text.substr(q + 1), quarter) && quarter >= 1 &&
             quarter <= 4;
        d.month = 3 * (quarter - 1) + 1;
        d.day = 1;
    } else if (text.find('/') != std::string_view::npos) {
        auto parts = split(text, '/');
        ok = parts.size() == 3 && to_int(parts[0], d.month) && to_int(parts[1], d.day) &&
             to_int(parts[2], d.year);
    } else {
        auto parts = split(text, '-');
        if (parts.size() == 3) {
            ok = to_int(parts[0], d.year) && to_int(parts[1], d.month) && to_int(parts[2], d.day);
        } else if (parts.size() == 2) {
            ok = to_int(parts[0], d.year) && to_int(parts[1], d.month);
            d.day = 1;
        }
    }
    if (!ok || !valid(d)) throw ValidationError("unparseable date '" + std::string(text) + "'");
    return d;
}

std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

Frequency parse_frequency(std::string_view text) {
    std::string t(text);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "year" || t == "yearly" || t == "annual" || t == "a" || t == "y") return Frequency::Year;
    if (t == "quarter" || t == "quarterly" || t == "q") return Frequency::Quarter;
    if (t == "month" || t == "monthly" || t == "m") return Frequency::Month;
    if (t == "week" || t == "weekly" || t == "w") return Frequency::Week;
    throw ValidationError("unknown frequency '" + std::string(text) + "'");
}

std::string_view frequency_name(Frequency f) {
    switch (f) {
        case Frequency::Year: return "year";
        case Frequency::Quarter: return "quarter";
        case Frequency::Month: return "month";
        case Frequency::Week: return "week";
    }
    return "?";
}

int frequency_ratio(Frequency low, Frequency high) {
    if (low == Frequency::Week) throw ValidationError("weekly data cannot be the low frequency");
    if (high == low) return 1;
    if (high == Frequency::Week) return 4 * months_per(low);
    if (months_per(high) >= months_per(low))
        throw ValidationError(std::string("frequency '") + std::string(frequency_name(high)) +
                              "' is not higher than '" + std::string(frequency_name(low)) + "'");
    return months_per(low) / months_per(high);
}

PeriodKey period_of(const Date& d, Frequency low) {
    int per = months_per(low);
    if (per == 0) throw ValidationError("weekly data cannot be the low frequency");
    return {d.year, (d.month - 1) / per};
}

PeriodKey next_period(const PeriodKey& p, Frequency low) {
    int per_year = 12 / months_per(low);
    PeriodKey n{p.year, p.index + 1};
    if (n.index >= per_year) {
        n.index = 0;
        ++n.year;
    }
    return n;
}

std::string format_period(const PeriodKey& p, Frequency low) {
    char buf[24];
    switch (low) {
        case Frequency::Year: std::snprintf(buf, sizeof buf, "%04d", p.year); break;
        case Frequency::Quarter: std::snprintf(buf, sizeof buf, "%04dQ%d", p.year, p.index + 1); break;
        default: std::snprintf(buf, sizeof buf, "%04d-%02d", p.year, p.index + 1); break;
    }
    return buf;
}

int month_in_period(const Date& d, Frequency low) {
    return (d.month - 1) % months_per(low) + 1;
}

int within_period_index(const Date& d, Frequency low, Frequency high) {
    if (high == Frequency::Week)
        throw ValidationError("weekly within-period index depends on trimming");
    if (high == low) return 1;
    return (month_in_period(d, low) - 1) / months_per(high) + 1;
}

}  // namespace mfhier
