#include <array>
#include <cctype>

#include "tqprep/executor.hpp"
#include "tqprep/text.hpp"

namespace tqprep::exec {

namespace {

constexpr std::array<std::string_view, 12> kMonths = {"January", "February", "March",     "April",
                                                      "May",     "June",     "July",      "August",
                                                      "September", "October", "November", "December"};

struct Parts {
  std::optional<int> year, month, day, hour, minute;
};

bool leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in(int month, std::optional<int> year) {
  static constexpr int d[] = {31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month == 2 && year && !leap(*year)) return 28;
  return d[month - 1];
}

bool read_digits(std::string_view s, std::size_t& i, std::size_t min, std::size_t max, int& out) {
  std::size_t b = i;
  out = 0;
  while (i < s.size() && i - b < max && std::isdigit(static_cast<unsigned char>(s[i]))) out = out * 10 + (s[i++] - '0');
  return i - b >= min;
}

std::optional<Parts> parse_with(std::string_view fmt, std::string_view s) {
  Parts p;
  std::size_t i = 0;
  for (std::size_t f = 0; f < fmt.size(); ++f) {
    char c = fmt[f];
    if (c == '%' && f + 1 < fmt.size()) {
      char d = fmt[++f];
      int v = 0;
      switch (d) {
        case 'Y':
          if (!read_digits(s, i, 4, 4, v)) return std::nullopt;
          p.year = v;
          break;
        case 'y':
          if (!read_digits(s, i, 2, 2, v)) return std::nullopt;
          p.year = v < 69 ? 2000 + v : 1900 + v;
          break;
        case 'm':
          if (!read_digits(s, i, 1, 2, v)) return std::nullopt;
          p.month = v;
          break;
        case 'd':
          if (!read_digits(s, i, 1, 2, v)) return std::nullopt;
          p.day = v;
          break;
        case 'H':
          if (!read_digits(s, i, 1, 2, v)) return std::nullopt;
          p.hour = v;
          break;
        case 'M':
          if (!read_digits(s, i, 1, 2, v)) return std::nullopt;
          p.minute = v;
          break;
        case 'b':
        case 'B': {
          std::size_t b = i;
          while (i < s.size() && std::isalpha(static_cast<unsigned char>(s[i]))) ++i;
          std::string word(s.substr(b, i - b));
          bool found = false;
          for (std::size_t m = 0; m < kMonths.size(); ++m) {
            std::string_view full = kMonths[m];
            bool ok = d == 'b' ? text::iequals(word, full.substr(0, 3)) : text::iequals(word, full);
            if (ok) {
              p.month = static_cast<int>(m) + 1;
              found = true;
              break;
            }
          }
          if (!found) return std::nullopt;
          break;
        }
        case '%':
          if (i >= s.size() || s[i] != '%') return std::nullopt;
          ++i;
          break;
        default: return std::nullopt;
      }
      continue;
    }
    if (c == ' ') {
      if (i >= s.size() || s[i] != ' ') return std::nullopt;
      while (i < s.size() && s[i] == ' ') ++i;
      continue;
    }
    if (i >= s.size() || s[i] != c) return std::nullopt;
    ++i;
  }
  if (i != s.size()) return std::nullopt;
  if (p.month && (*p.month < 1 || *p.month > 12)) return std::nullopt;
  if (p.day && (*p.day < 1 || *p.day > (p.month ? days_in(*p.month, p.year) : 31))) return std::nullopt;
  if (p.hour && *p.hour > 23) return std::nullopt;
  if (p.minute && *p.minute > 59) return std::nullopt;
  return p;
}

std::string two(int v) {
  std::string s = std::to_string(v);
  return s.size() < 2 ? "0" + s : s;
}

}  // namespace

std::optional<std::string> reformat_datetime(std::string_view input, std::string_view format, std::string& error) {
  std::string s = text::collapse_whitespace(input);
  if (s.empty()) {
    error = "empty date";
    return std::nullopt;
  }
  std::optional<Parts> p = parse_with(format, s);
  if (!p) {
    static constexpr std::array<std::string_view, 17> fallbacks = {
        "%Y-%m-%d", "%Y/%m/%d",  "%m/%d/%Y",  "%d.%m.%Y", "%d %B %Y", "%d %b %Y", "%B %d, %Y", "%b %d, %Y",
        "%B %d %Y", "%b %d %Y",  "%d-%b",     "%b-%d",    "%d %b",    "%b %d",    "%m/%d",     "%d/%m",   "%m-%d"};
    for (auto f : fallbacks) {
      p = parse_with(f, s);
      // Day-first only when the leading number cannot be a month.
      if (p && f == "%d/%m" && !(p->day && *p->day > 12)) p.reset();
      if (p) break;
    }
  }
  if (!p) {
    error = "unrecognised date layout";
    return std::nullopt;
  }
  std::string out;
  for (std::size_t f = 0; f < format.size(); ++f) {
    if (format[f] != '%' || f + 1 >= format.size()) {
      out.push_back(format[f]);
      continue;
    }
    char d = format[++f];
    auto need = [&](const std::optional<int>& v, const char* what) {
      if (!v) error = std::string("date has no ") + what;
      return v.has_value();
    };
    switch (d) {
      case 'Y':
        if (!need(p->year, "year")) return std::nullopt;
        out += std::to_string(*p->year);
        break;
      case 'y':
        if (!need(p->year, "year")) return std::nullopt;
        out += two(*p->year % 100);
        break;
      case 'm':
        if (!need(p->month, "month")) return std::nullopt;
        out += two(*p->month);
        break;
      case 'd':
        if (!need(p->day, "day")) return std::nullopt;
        out += two(*p->day);
        break;
      case 'b':
        if (!need(p->month, "month")) return std::nullopt;
        out += kMonths[*p->month - 1].substr(0, 3);
        break;
      case 'B':
        if (!need(p->month, "month")) return std::nullopt;
        out += kMonths[*p->month - 1];
        break;
      case 'H': out += two(p->hour.value_or(0)); break;
      case 'M': out += two(p->minute.value_or(0)); break;
      case '%': out.push_back('%'); break;
      default: error = std::string("unsupported directive %") + d; return std::nullopt;
    }
  }
  return out;
}

std::string clean_string(std::string_view s, const std::map<std::string, std::string>& dict) {
  std::vector<const std::pair<const std::string, std::string>*> keys;
  for (const auto& kv : dict) {
    if (!kv.first.empty()) keys.push_back(&kv);
  }
  std::stable_sort(keys.begin(), keys.end(), [](auto* a, auto* b) { return a->first.size() > b->first.size(); });
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    bool hit = false;
    for (auto* kv : keys) {
      if (s.compare(i, kv->first.size(), kv->first) == 0) {
        out += kv->second;
        i += kv->first.size();
        hit = true;
        break;
      }
    }
    if (!hit) out.push_back(s[i++]);
  }
  return out;
}

}  // namespace tqprep::exec
