#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include "noncelab/analysis.hpp"
#include "noncelab/errors.hpp"

namespace noncelab {

namespace {

constexpr char kMagic[4] = {'S', 'C', 'T', 'M'};
constexpr uint32_t kVersion = 1;
constexpr uint32_t kFullCov = 1;

template <class T>
void put(std::ostream& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  unsigned char b[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(b), sizeof(T))) throw FormatError("truncated model file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace

void write_model(std::ostream& out, const TemplateModel& m) {
  const size_t k = m.dim();
  const size_t cov = m.full_covariance ? k * k : k;
  if (m.mean0.size() != k || m.mean1.size() != k || m.pooled_cov.size() != cov)
    throw FormatError("inconsistent template model");
  std::string text;
  for (const auto& [key, v] : m.trained_on) text += key + "=" + v + "\n";
  out.write(kMagic, 4);
  put<uint32_t>(out, kVersion);
  put<uint32_t>(out, m.full_covariance ? kFullCov : 0);
  put<uint32_t>(out, static_cast<uint32_t>(k));
  for (uint32_t p : m.poi) put<uint32_t>(out, p);
  for (double v : m.mean0) put<double>(out, v);
  for (double v : m.mean1) put<double>(out, v);
  for (double v : m.pooled_cov) put<double>(out, v);
  put<uint32_t>(out, static_cast<uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

TemplateModel read_model(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw FormatError("not an SCTM model");
  if (get<uint32_t>(in) != kVersion) throw FormatError("unsupported SCTM version");
  TemplateModel m;
  const uint32_t flags = get<uint32_t>(in);
  m.full_covariance = (flags & kFullCov) != 0;
  const uint32_t k = get<uint32_t>(in);
  if (k == 0 || k > (1u << 20)) throw FormatError("implausible point-of-interest count");
  m.poi.resize(k);
  for (auto& p : m.poi) p = get<uint32_t>(in);
  if (!std::is_sorted(m.poi.begin(), m.poi.end())) throw FormatError("points of interest not sorted");
  m.mean0.resize(k);
  m.mean1.resize(k);
  m.pooled_cov.resize(m.full_covariance ? size_t{k} * k : k);
  for (auto& v : m.mean0) v = get<double>(in);
  for (auto& v : m.mean1) v = get<double>(in);
  for (auto& v : m.pooled_cov) v = get<double>(in);
  const uint32_t len = get<uint32_t>(in);
  std::string text(len, '\0');
  if (!in.read(text.data(), len)) throw FormatError("truncated model metadata");
  size_t pos = 0;
  while (pos < text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    const std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("bad model metadata line: " + line);
    m.trained_on[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return m;
}

void write_model(const std::string& path, const TemplateModel& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write model file: " + path);
  write_model(out, m);
  if (!out) throw ConfigError("write failed: " + path);
}

TemplateModel read_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open model file: " + path);
  return read_model(in);
}

}  // namespace noncelab
