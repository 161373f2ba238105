#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace prase {

inline std::string_view trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Canonical form of a literal: trimmed, with a surrounding quote pair and any
// trailing datatype (^^...) or language (@xx) tag removed. Case is preserved;
// byte-exact comparison thereafter.
inline std::string normalize_literal(std::string_view raw) {
  std::string_view s = trim(raw);
  if (s.size() >= 2 && s.front() == '"') {
    std::size_t close = s.rfind('"');
    if (close > 0) {
      std::string_view rest = s.substr(close + 1);
      if (rest.empty() || rest.starts_with("^^") || rest.starts_with('@')) {
        return std::string(trim(s.substr(1, close - 1)));
      }
    }
  }
  return std::string(s);
}

inline std::string ascii_fold(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Local part of an IRI (after the last '/' or '#'), underscores as spaces.
inline std::string local_name(std::string_view iri) {
  std::size_t pos = iri.find_last_of("/#");
  std::string_view tail = (pos == std::string_view::npos) ? iri : iri.substr(pos + 1);
  std::string out(tail);
  for (char& c : out)
    if (c == '_') c = ' ';
  return out;
}

// Splits on single tab characters; no quoting or escaping.
inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

}  // namespace prase
