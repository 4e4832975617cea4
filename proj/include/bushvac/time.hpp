#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

#include "bushvac/errors.hpp"

namespace bushvac {

/// Instant with the zone offset it was recorded in. Arithmetic happens on the
/// UTC epoch; the offset is kept so formatting round-trips and so local
/// calendar fields (month tags, hour-aligned segmentation) are available.
struct Timestamp {
  std::int64_t epoch_s = 0;     // seconds since 1970-01-01T00:00:00Z
  int tz_offset_min = 0;        // local = UTC + offset

  friend bool operator==(const Timestamp&, const Timestamp&) = default;
  bool operator<(const Timestamp& o) const { return epoch_s < o.epoch_s; }

  Timestamp plus_seconds(std::int64_t s) const { return {epoch_s + s, tz_offset_min}; }
};

struct CivilDate {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31
};

struct CivilTime {
  CivilDate date;
  int hour = 0;
  int minute = 0;
  int second = 0;
};

// Howard Hinnant's civil <-> day-count algorithms.
inline std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                       static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline CivilDate civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return {static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

inline bool is_leap_year(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

inline int days_in_month(int year, int month) {
  static constexpr int lengths[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month == 2 && is_leap_year(year)) return 29;
  return lengths[month - 1];
}

inline std::int64_t epoch_from_civil(const CivilTime& ct, int tz_offset_min) {
  return days_from_civil(ct.date.year, ct.date.month, ct.date.day) * 86400 +
         ct.hour * 3600 + ct.minute * 60 + ct.second -
         static_cast<std::int64_t>(tz_offset_min) * 60;
}

inline CivilTime civil_from_epoch(std::int64_t epoch_s, int tz_offset_min) {
  std::int64_t local = epoch_s + static_cast<std::int64_t>(tz_offset_min) * 60;
  std::int64_t days = local / 86400;
  std::int64_t sod = local % 86400;
  if (sod < 0) {
    sod += 86400;
    days -= 1;
  }
  CivilTime ct;
  ct.date = civil_from_days(days);
  ct.hour = static_cast<int>(sod / 3600);
  ct.minute = static_cast<int>((sod % 3600) / 60);
  ct.second = static_cast<int>(sod % 60);
  return ct;
}

/// Local calendar time in the timestamp's own zone.
inline CivilTime local_civil(const Timestamp& t) { return civil_from_epoch(t.epoch_s, t.tz_offset_min); }

/// Local calendar month (1..12).
inline int local_month(const Timestamp& t) { return local_civil(t).date.month; }

inline Timestamp make_timestamp(int year, int month, int day, int hour, int minute, int second,
                                int tz_offset_min) {
  CivilTime ct{{year, month, day}, hour, minute, second};
  return {epoch_from_civil(ct, tz_offset_min), tz_offset_min};
}

namespace detail {
inline int parse_fixed_int(const std::string& s, size_t pos, size_t n, const char* what) {
  if (pos + n > s.size()) throw IoError(std::string("timestamp too short while reading ") + what);
  int v = 0;
  for (size_t i = 0; i < n; ++i) {
    char c = s[pos + i];
    if (c < '0' || c > '9')
      throw IoError(std::string("bad digit in timestamp field ") + what + ": '" + s + "'");
    v = v * 10 + (c - '0');
  }
  return v;
}
}  // namespace detail

/// Strict ISO 8601: YYYY-MM-DDTHH:MM:SS(Z|+HH:MM|-HH:MM). A zone designator is
/// required; naive timestamps are rejected.
inline Timestamp parse_timestamp(const std::string& s) {
  using detail::parse_fixed_int;
  if (s.size() < 20) throw IoError("timestamp '" + s + "' is not ISO 8601 with zone offset");
  int year = parse_fixed_int(s, 0, 4, "year");
  int month = parse_fixed_int(s, 5, 2, "month");
  int day = parse_fixed_int(s, 8, 2, "day");
  int hour = parse_fixed_int(s, 11, 2, "hour");
  int minute = parse_fixed_int(s, 14, 2, "minute");
  int second = parse_fixed_int(s, 17, 2, "second");
  if (s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') || s[13] != ':' || s[16] != ':')
    throw IoError("timestamp '" + s + "' has bad separators");
  if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month) || hour > 23 ||
      minute > 59 || second > 60)
    throw IoError("timestamp '" + s + "' has out-of-range fields");
  int off = 0;
  char zc = s[19];
  if (zc == 'Z') {
    if (s.size() != 20) throw IoError("trailing characters after 'Z' in '" + s + "'");
  } else if (zc == '+' || zc == '-') {
    if (s.size() != 25 || s[22] != ':') throw IoError("bad zone offset in '" + s + "'");
    int oh = parse_fixed_int(s, 20, 2, "offset hour");
    int om = parse_fixed_int(s, 23, 2, "offset minute");
    off = oh * 60 + om;
    if (off > 18 * 60) throw IoError("zone offset out of range in '" + s + "'");
    if (zc == '-') off = -off;
  } else {
    throw IoError("timestamp '" + s + "' lacks a zone designator");
  }
  return make_timestamp(year, month, day, hour, minute, second, off);
}

inline std::string format_timestamp(const Timestamp& t) {
  CivilTime ct = local_civil(t);
  char buf[32];
  if (t.tz_offset_min == 0) {
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", ct.date.year, ct.date.month,
                  ct.date.day, ct.hour, ct.minute, ct.second);
  } else {
    int off = t.tz_offset_min;
    char sign = off < 0 ? '-' : '+';
    if (off < 0) off = -off;
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d%c%02d:%02d", ct.date.year,
                  ct.date.month, ct.date.day, ct.hour, ct.minute, ct.second, sign, off / 60,
                  off % 60);
  }
  return buf;
}

}  // namespace bushvac
