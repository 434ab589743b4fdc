#pragma once

// Deterministic serialization: every numeric value is emitted as a decimal
// string with an explicit digit count (never a binary float), so equal
// configurations produce byte-identical files on any worker count.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "thetalab/bigcomplex.hpp"

namespace thetalab {

using Json = nlohmann::ordered_json;

inline std::string dec(const BigFloat& x, int digits) { return x.str(digits); }

inline std::string dec_log10(const BigFloat& x, int places = 4) {
  if (x.is_zero() || x.sgn() < 0) return "-inf";
  BigFloat l = log10(x);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", places, l.to_double());
  return buf;
}

// Accepts "a", "bi", "a+bi", "a-bi", "(a,b)", "a,b".
inline BigComplex parse_complex(std::string s, int digits) {
  auto strip = [](std::string& t) {
    while (!t.empty() && (t.front() == ' ' || t.front() == '(')) t.erase(t.begin());
    while (!t.empty() && (t.back() == ' ' || t.back() == ')')) t.pop_back();
  };
  strip(s);
  if (s.empty()) throw Error(ErrorKind::Usage, "empty complex literal");
  auto comma = s.find(',');
  if (comma != std::string::npos) {
    return BigComplex(BigFloat(s.substr(0, comma), digits),
                      BigFloat(s.substr(comma + 1), digits));
  }
  if (s.back() == 'i' || s.back() == 'I') {
    s.pop_back();
    // find the split sign (not at position 0, not after an exponent marker)
    size_t split = std::string::npos;
    for (size_t k = s.size(); k-- > 1;) {
      if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
        split = k;
        break;
      }
    }
    std::string re = "0", im = s;
    if (split != std::string::npos) {
      re = s.substr(0, split);
      im = s.substr(split);
    }
    if (im.empty() || im == "+") im = "1";
    if (im == "-") im = "-1";
    return BigComplex(BigFloat(re, digits), BigFloat(im, digits));
  }
  return BigComplex(BigFloat(s, digits), BigFloat(0, digits));
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::Usage, "cannot open output file " + path);
  f << content;
}

inline std::string csv_join(const std::vector<std::string>& cells) {
  std::string line;
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  return line;
}

}  // namespace thetalab
