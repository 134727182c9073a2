#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace windcast {

using TimePoint = std::chrono::sys_seconds;
using Hours = std::chrono::hours;

/// Parses an ISO-8601 UTC stamp such as "2007-03-16T06:00:00Z".
/// Accepts a space instead of 'T', optional seconds, and a trailing "Z" or
/// "+00:00". Throws DataError on anything else.
TimePoint parse_utc(std::string_view text);

/// Formats as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_utc(TimePoint t);

int hour_of_day(TimePoint t);

inline long hours_between(TimePoint from, TimePoint to) {
  return std::chrono::duration_cast<Hours>(to - from).count();
}

}  // namespace windcast
