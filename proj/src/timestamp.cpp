#include "pelp/timestamp.hpp"

#include <cctype>
#include <charconv>
#include <chrono>
#include <ctime>
#include <iomanip>
#include <sstream>

#include "pelp/error.hpp"

namespace pelp {
namespace {

constexpr Ticks kMicrosPerSecond = 1'000'000;

[[noreturn]] void fail(std::string_view text, std::string_view why) {
  throw ParseError("cannot parse timestamp '" + std::string(text) + "': " + std::string(why));
}

Ticks civil_to_ticks(int year, unsigned month, unsigned day, int hour, int minute, int second,
                     std::string_view text) {
  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
  if (!ymd.ok()) fail(text, "invalid calendar date");
  if (hour < 0 || hour > 23 || minute < 0 || minute > 59 || second < 0 || second > 60) {
    fail(text, "invalid time of day");
  }
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return ((static_cast<Ticks>(days) * 24 + hour) * 60 + minute) * 60 * kMicrosPerSecond +
         static_cast<Ticks>(second) * kMicrosPerSecond;
}

class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}

  bool done() const { return pos_ == text_.size(); }
  char peek() const { return done() ? '\0' : text_[pos_]; }
  bool accept(char c) {
    if (peek() != c) return false;
    ++pos_;
    return true;
  }

  int digits(std::size_t count) {
    int value = 0;
    for (std::size_t i = 0; i < count; ++i) {
      if (done() || !std::isdigit(static_cast<unsigned char>(peek()))) fail(text_, "expected digit");
      value = value * 10 + (text_[pos_++] - '0');
    }
    return value;
  }

  /// Fraction digits after a '.', converted to microseconds (extra digits truncated).
  Ticks fraction() {
    Ticks micros = 0;
    std::size_t count = 0;
    while (!done() && std::isdigit(static_cast<unsigned char>(peek()))) {
      if (count < 6) micros = micros * 10 + (text_[pos_] - '0');
      ++count;
      ++pos_;
    }
    if (count == 0) fail(text_, "empty fractional seconds");
    for (; count < 6; ++count) micros *= 10;
    return micros;
  }

  std::string_view rest() const { return text_.substr(pos_); }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

Ticks parse_iso(std::string_view text) {
  Cursor in(text);
  const int year = in.digits(4);
  if (!in.accept('-')) fail(text, "expected '-'");
  const int month = in.digits(2);
  if (!in.accept('-')) fail(text, "expected '-'");
  const int day = in.digits(2);
  int hour = 0, minute = 0, second = 0;
  Ticks micros = 0;
  if (in.accept('T') || in.accept(' ')) {
    hour = in.digits(2);
    if (!in.accept(':')) fail(text, "expected ':'");
    minute = in.digits(2);
    if (in.accept(':')) {
      second = in.digits(2);
      if (in.accept('.') || in.accept(',')) micros = in.fraction();
    }
  }
  Ticks offset_minutes = 0;
  if (in.accept('Z')) {
  } else if (in.peek() == '+' || in.peek() == '-') {
    const bool negative = in.peek() == '-';
    in.accept(in.peek());
    const int oh = in.digits(2);
    in.accept(':');
    const int om = in.digits(2);
    offset_minutes = (negative ? -1 : 1) * (oh * 60 + om);
  }
  if (!in.done()) fail(text, "trailing characters");
  const Ticks local = civil_to_ticks(year, static_cast<unsigned>(month), static_cast<unsigned>(day),
                                     hour, minute, second, text);
  return local + micros - offset_minutes * 60 * kMicrosPerSecond;
}

Ticks parse_integer(std::string_view text) {
  Ticks value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) fail(text, "not an integer");
  return value;
}

Ticks parse_pattern(std::string_view text, std::string_view format) {
  std::tm tm{};
  std::istringstream in{std::string(text)};
  in >> std::get_time(&tm, std::string(format).c_str());
  if (in.fail()) fail(text, "does not match format '" + std::string(format) + "'");
  Ticks micros = 0;
  std::string rest;
  std::getline(in, rest);
  if (!rest.empty()) {
    Cursor tail(rest);
    if (!tail.accept('.')) fail(text, "trailing characters");
    micros = tail.fraction();
    if (!tail.done()) fail(text, "trailing characters");
  }
  return civil_to_ticks(tm.tm_year + 1900, static_cast<unsigned>(tm.tm_mon + 1),
                        static_cast<unsigned>(tm.tm_mday), tm.tm_hour, tm.tm_min, tm.tm_sec, text) +
         micros;
}

}  // namespace

Ticks parse_timestamp(std::string_view text, std::string_view format) {
  if (format == kIsoFormat) return parse_iso(text);
  if (format == kIntegerFormat) return parse_integer(text);
  return parse_pattern(text, format);
}

}  // namespace pelp
