#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace mfhier {

enum class Frequency { Year, Quarter, Month, Week };

struct Date {
    int year = 0;
    int month = 1;
    int day = 1;

    auto operator<=>(const Date&) const = default;
};

/// Accepts ISO-8601 (2019-03-01, 2019-03), FRED style (3/1/2019) and
/// quarter labels (2019Q1, 2019:Q1). Throws ValidationError otherwise.
Date parse_date(std::string_view text);
std::string format_date(const Date& d);

Frequency parse_frequency(std::string_view text);
std::string_view frequency_name(Frequency f);

/// Number of high-frequency observations per low-frequency period, with
/// weeks counted as four per month (after trimming).
int frequency_ratio(Frequency low, Frequency high);

/// Low-frequency period a stamp belongs to: (year, index within year).
struct PeriodKey {
    int year = 0;
    int index = 0;

    auto operator<=>(const PeriodKey&) const = default;
};

PeriodKey period_of(const Date& d, Frequency low);
PeriodKey next_period(const PeriodKey& p, Frequency low);
std::string format_period(const PeriodKey& p, Frequency low);

/// 1-based position of a month within its low-frequency period.
int month_in_period(const Date& d, Frequency low);

/// Within-period index j in {1..m} for a monthly or quarterly stamp.
/// Weekly stamps need the per-month trimming pass and are handled in stacking.
int within_period_index(const Date& d, Frequency low, Frequency high);

struct Calendar {
    Frequency low = Frequency::Quarter;
    // Drop the earliest weeks of months holding more than four weekly stamps.
    bool trim_weeks = true;
};

}  // namespace mfhier
