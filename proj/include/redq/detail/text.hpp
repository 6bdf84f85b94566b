#pragma once

// Small helpers for the "name(arg,arg,...)" syntax shared by distribution and
// arrival-process specs, and for locale-independent number formatting.

#include <charconv>
#include <string>
#include <string_view>
#include <vector>

#include "redq/error.hpp"

namespace redq::detail {

inline std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

struct CallSyntax {
  std::string name;
  std::vector<std::string> args;
};

inline CallSyntax parse_call(std::string_view text) {
  text = trim(text);
  const auto open = text.find('(');
  if (open == std::string_view::npos || text.back() != ')') {
    throw ParseError("expected name(args...), got '" + std::string(text) + "'");
  }
  CallSyntax call;
  call.name = std::string(trim(text.substr(0, open)));
  std::string_view body = text.substr(open + 1, text.size() - open - 2);
  if (trim(body).empty()) return call;
  while (true) {
    const auto comma = body.find(',');
    call.args.emplace_back(trim(body.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    body.remove_prefix(comma + 1);
  }
  return call;
}

inline double parse_number(std::string_view text, std::string_view what) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw ParseError(std::string(what) + ": not a number: '" + std::string(text) + "'");
  }
  return value;
}

/// Shortest representation that round-trips.
inline std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

}  // namespace redq::detail
