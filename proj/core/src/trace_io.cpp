#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "noncelab/errors.hpp"
#include "noncelab/tracesim.hpp"

namespace noncelab {

namespace {

constexpr char kMagic[4] = {'S', 'C', 'T', 'R'};
constexpr uint32_t kVersion = 1;

template <class T>
void put(std::ostream& out, T v) {
  static_assert(std::is_arithmetic_v<T>);
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  unsigned char b[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(b), sizeof(T))) throw FormatError("truncated trace file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

}  // namespace

void write_traces(const std::string& path, const std::vector<LeakageTrace>& traces,
                  const std::map<std::string, std::string>& meta) {
  if (traces.empty()) throw DomainError("no traces to write");
  size_t width = 0;
  for (const auto& t : traces) width = std::max(width, t.samples.size());
  std::map<std::string, std::string> m = traces.front().meta;
  m.erase("interruption");
  m.erase("interference");
  for (const auto& [k, v] : meta) m[k] = v;
  std::string lengths;
  for (const auto& t : traces) {
    if (!lengths.empty()) lengths += ',';
    lengths += std::to_string(t.samples.size());
  }
  m["trace_lengths"] = lengths;
  std::string text;
  for (const auto& [k, v] : m) text += k + "=" + v + "\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write trace file: " + path);
  out.write(kMagic, 4);
  put<uint32_t>(out, kVersion);
  put<double>(out, traces.front().sample_rate);
  put<uint32_t>(out, static_cast<uint32_t>(traces.size()));
  put<uint32_t>(out, static_cast<uint32_t>(width));
  put<uint32_t>(out, static_cast<uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& t : traces) {
    for (float s : t.samples) put<float>(out, s);
    for (size_t i = t.samples.size(); i < width; ++i) put<float>(out, 0.0f);
  }
  if (!out) throw ConfigError("write failed: " + path);
}

std::vector<LeakageTrace> read_traces(const std::string& path, std::map<std::string, std::string>* meta) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open trace file: " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw FormatError("not an SCTR file: " + path);
  const uint32_t version = get<uint32_t>(in);
  if (version != kVersion) throw FormatError("unsupported SCTR version " + std::to_string(version));
  const double fs = get<double>(in);
  const uint32_t count = get<uint32_t>(in);
  const uint32_t width = get<uint32_t>(in);
  const uint32_t meta_len = get<uint32_t>(in);
  std::string text(meta_len, '\0');
  if (!in.read(text.data(), meta_len)) throw FormatError("truncated trace metadata");
  std::map<std::string, std::string> m;
  for (const auto& line : split(text, '\n')) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("bad metadata line: " + line);
    m[line.substr(0, eq)] = line.substr(eq + 1);
  }
  std::vector<size_t> lengths(count, width);
  if (auto it = m.find("trace_lengths"); it != m.end()) {
    const auto parts = split(it->second, ',');
    if (parts.size() != count) throw FormatError("trace_lengths does not match trace count");
    for (size_t i = 0; i < count; ++i) lengths[i] = std::stoul(parts[i]);
  }
  std::vector<LeakageTrace> out(count);
  for (uint32_t i = 0; i < count; ++i) {
    out[i].sample_rate = fs;
    out[i].meta = m;
    out[i].meta.erase("trace_lengths");
    out[i].samples.resize(width);
    for (auto& s : out[i].samples) s = get<float>(in);
    out[i].samples.resize(std::min<size_t>(lengths[i], width));
  }
  if (meta) *meta = std::move(m);
  return out;
}

void write_labels_csv(const std::string& path, const std::vector<LeakageTrace>& traces) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write labels file: " + path);
  out << "trace_index,swap_index,cond,interfered\n";
  for (size_t t = 0; t < traces.size(); ++t)
    for (const auto& m : traces[t].markers)
      if (m.kind == MarkerKind::Swap)
        out << t << ',' << m.index << ',' << static_cast<int>(m.cond) << ',' << (m.interfered ? 1 : 0) << '\n';
}

void write_markers_csv(const std::string& path, const std::vector<LeakageTrace>& traces) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write markers file: " + path);
  out << "trace_index,swap_index,start,end\n";
  for (size_t t = 0; t < traces.size(); ++t)
    for (const auto& m : traces[t].markers)
      if (m.kind == MarkerKind::Swap) out << t << ',' << m.index << ',' << m.start << ',' << m.end << '\n';
}

void read_swap_markers(const std::string& markers_path, const std::string& labels_path,
                       std::vector<LeakageTrace>& traces) {
  auto rows = [](const std::string& path, const char* header) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != header) throw FormatError("unexpected header in " + path);
    std::vector<std::vector<long long>> out;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<long long> r;
      for (const auto& f : split(line, ',')) r.push_back(std::stoll(f));
      if (r.size() != 4) throw FormatError("expected 4 columns in " + path);
      out.push_back(std::move(r));
    }
    return out;
  };
  for (auto& t : traces) std::erase_if(t.markers, [](const TraceMarker& m) { return m.kind == MarkerKind::Swap; });
  std::map<std::pair<long long, long long>, std::pair<int, bool>> labels;
  if (!labels_path.empty())
    for (const auto& r : rows(labels_path, "trace_index,swap_index,cond,interfered"))
      labels[{r[0], r[1]}] = {static_cast<int>(r[2]), r[3] != 0};
  for (const auto& r : rows(markers_path, "trace_index,swap_index,start,end")) {
    if (r[0] < 0 || static_cast<size_t>(r[0]) >= traces.size()) throw FormatError("marker trace index out of range");
    TraceMarker m{MarkerKind::Swap, static_cast<size_t>(r[2]), static_cast<size_t>(r[3]), OpKind::MaskCompute,
                  kCondUnknown, static_cast<uint32_t>(r[1])};
    if (auto it = labels.find({r[0], r[1]}); it != labels.end()) {
      m.cond = static_cast<int8_t>(it->second.first);
      m.interfered = it->second.second;
    }
    traces[static_cast<size_t>(r[0])].markers.push_back(m);
  }
  for (auto& t : traces)
    std::stable_sort(t.markers.begin(), t.markers.end(),
                     [](const TraceMarker& a, const TraceMarker& b) { return a.start < b.start; });
}

}  // namespace noncelab
