#pragma once

#include <compare>
#include <cstdio>
#include <string>

#include "riskstream/errors.hpp"

namespace riskstream {

// Calendar timestamp. Serialized as "YYYY-MM-DD" when at midnight and
// "YYYY-MM-DD HH:MM:SS" otherwise, so date-only corpora round-trip in the
// compact form while posting-hour features stay representable.
struct Timestamp {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31
  int hour = 0;
  int minute = 0;
  int second = 0;

  auto operator<=>(const Timestamp&) const = default;

  int month_key() const { return year * 12 + (month - 1); }

  static Timestamp parse(const std::string& s) {
    Timestamp t;
    int n = 0;
    if (std::sscanf(s.c_str(), "%d-%d-%d %d:%d:%d%n", &t.year, &t.month, &t.day, &t.hour,
                    &t.minute, &t.second, &n) == 6 &&
        static_cast<std::size_t>(n) == s.size()) {
      // fall through to validation
    } else {
      t = Timestamp{};
      if (std::sscanf(s.c_str(), "%d-%d-%d%n", &t.year, &t.month, &t.day, &n) != 3 ||
          static_cast<std::size_t>(n) != s.size())
        throw ValidationError("bad timestamp '" + s + "' (expected YYYY-MM-DD or YYYY-MM-DD HH:MM:SS)");
    }
    if (t.month < 1 || t.month > 12 || t.day < 1 || t.day > 31 || t.hour < 0 || t.hour > 23 ||
        t.minute < 0 || t.minute > 59 || t.second < 0 || t.second > 59)
      throw ValidationError("timestamp out of range: '" + s + "'");
    return t;
  }

  std::string to_string() const {
    char buf[32];
    if (hour == 0 && minute == 0 && second == 0) {
      std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    } else {
      std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d %02d:%02d:%02d", year, month, day, hour,
                    minute, second);
    }
    return buf;
  }
};

}  // namespace riskstream
