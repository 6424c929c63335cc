#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "noncelab/curve.hpp"
#include "noncelab/errors.hpp"

namespace noncelab {

namespace {

std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

CurveParams build(const std::map<std::string, std::string>& kv) {
  static const std::set<std::string> required = {"name", "p", "a", "b", "gx", "gy", "n"};
  for (const auto& k : required)
    if (!kv.count(k)) throw FormatError("curve definition missing key '" + k + "'");
  size_t words = 0;
  if (auto it = kv.find("word_count"); it != kv.end()) words = parse_hex(it->second).get_ui();
  bool flag = false;
  if (auto it = kv.find("flag_word"); it != kv.end()) flag = parse_hex(it->second) != 0;
  CurveParams c(kv.at("name"), parse_hex(kv.at("p")), parse_hex(kv.at("a")), parse_hex(kv.at("b")),
                parse_hex(kv.at("gx")), parse_hex(kv.at("gy")), parse_hex(kv.at("n")), words, flag);
  validate_curve(c);
  return c;
}

}  // namespace

std::vector<CurveParams> parse_curves(std::string_view text) {
  static const std::set<std::string> known = {"name", "p",  "a", "b",          "gx",
                                              "gy",   "n",  "word_count", "flag_word"};
  std::vector<CurveParams> out;
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  size_t lineno = 0;
  auto flush = [&] {
    if (!kv.empty()) out.push_back(build(kv));
    kv.clear();
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string t = trim(line);
    if (t.empty()) {
      flush();
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw FormatError("line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(t.substr(0, eq));
    if (!known.count(key))
      throw FormatError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (kv.count(key))
      throw FormatError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    kv[key] = trim(t.substr(eq + 1));
  }
  flush();
  if (out.empty()) throw FormatError("no curve definitions found");
  return out;
}

std::vector<CurveParams> load_curves(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open curve file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_curves(ss.str());
}

CurveParams resolve_curve(const std::string& spec) {
  for (const auto& n : builtin_curve_names())
    if (spec == n) return builtin_curve(spec);
  if (spec == "edwards-width") return builtin_curve(spec);
  std::string path = spec, name;
  if (auto colon = spec.rfind(':'); colon != std::string::npos && colon > 0) {
    path = spec.substr(0, colon);
    name = spec.substr(colon + 1);
  }
  auto curves = load_curves(path);
  if (name.empty()) return curves.front();
  for (auto& c : curves)
    if (c.name() == name) return c;
  throw ConfigError("curve '" + name + "' not found in " + path);
}

}  // namespace noncelab
