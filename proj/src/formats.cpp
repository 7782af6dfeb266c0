#include <fmt/format.h>
#include <zlib.h>

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "esav/cli_io.hpp"
#include "esav/errors.hpp"

namespace esav {

namespace {

std::string fmt_real(double v) { return fmt::format("{:.17g}", v); }

void put_u32(std::ostream& os, std::uint32_t v) {
  std::array<char, 4> b;
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  os.write(b.data(), 4);
}

void put_f64(std::ostream& os, double x) {
  const auto v = std::bit_cast<std::uint64_t>(x);
  std::array<char, 8> b;
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  os.write(b.data(), 8);
}

template <class T>
T get_le(std::istream& is, const std::filesystem::path& path) {
  std::array<unsigned char, sizeof(T)> b;
  if (!is.read(reinterpret_cast<char*>(b.data()), sizeof(T))) {
    throw FormatError("truncated snapshot file " + path.string());
  }
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  if constexpr (std::is_same_v<T, double>) {
    return std::bit_cast<double>(v);
  } else {
    return static_cast<T>(v);
  }
}

double parse_csv_real(std::string_view s, int line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw FormatError(fmt::format("trace line {}: bad number '{}'", line, s));
  }
  return v;
}

}  // namespace

std::string format_trace(const std::vector<StepReport>& trace) {
  std::string out(kTraceHeader);
  out += '\n';
  for (const StepReport& r : trace) {
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", r.step, fmt_real(r.time),
                       fmt_real(r.energy_original), fmt_real(r.ln_r_scaled), fmt_real(r.xi),
                       fmt_real(r.u_of_xi), r.lambda0 ? fmt_real(*r.lambda0) : "",
                       fmt_real(r.dissipation), fmt_real(r.mass));
  }
  return out;
}

void emit_trace(const std::vector<StepReport>& trace, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open " + path.string() + " for writing");
  os << format_trace(trace);
  if (!os) throw FormatError("write failed for " + path.string());
}

std::vector<StepReport> read_trace(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line) || line != kTraceHeader) {
    throw FormatError("trace " + path.string() + ": unexpected header");
  }
  std::vector<StepReport> out;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> cols;
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      cols.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    if (cols.size() != 9) {
      throw FormatError(fmt::format("trace line {}: expected 9 columns", line_no));
    }
    StepReport r;
    r.step = static_cast<long>(parse_csv_real(cols[0], line_no));
    r.time = parse_csv_real(cols[1], line_no);
    r.energy_original = parse_csv_real(cols[2], line_no);
    r.ln_r_scaled = parse_csv_real(cols[3], line_no);
    r.xi = parse_csv_real(cols[4], line_no);
    r.u_of_xi = parse_csv_real(cols[5], line_no);
    if (!cols[6].empty()) r.lambda0 = parse_csv_real(cols[6], line_no);
    r.dissipation = parse_csv_real(cols[7], line_no);
    r.mass = parse_csv_real(cols[8], line_no);
    out.push_back(r);
  }
  return out;
}

void emit_snapshot(const Field& field, const std::filesystem::path& path,
                   const SnapshotMeta* meta) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open " + path.string() + " for writing");
  const Grid& g = field.grid();
  os.write(kSnapshotMagic, sizeof kSnapshotMagic);
  put_u32(os, static_cast<std::uint32_t>(g.nx()));
  put_u32(os, static_cast<std::uint32_t>(g.ny()));
  put_f64(os, g.lx());
  put_f64(os, g.ly());
  for (double v : field.values()) put_f64(os, v);
  if (!os) throw FormatError("write failed for " + path.string());

  if (meta != nullptr) {
    std::ofstream ms(path.string() + ".meta");
    ms << "time = " << fmt_real(meta->time) << "\n"
       << "model = " << meta->model << "\n"
       << "scheme = " << meta->scheme << "\n"
       << "config_checksum = " << fmt::format("{:08x}", meta->config_checksum) << "\n";
    if (!ms) throw FormatError("write failed for " + path.string() + ".meta");
  }
}

Field read_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path.string());
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kSnapshotMagic, 8) != 0) {
    throw FormatError("snapshot " + path.string() + ": bad magic");
  }
  const auto nx = get_le<std::uint32_t>(is, path);
  const auto ny = get_le<std::uint32_t>(is, path);
  const double lx = get_le<double>(is, path);
  const double ly = get_le<double>(is, path);
  Grid grid(lx, ly, static_cast<int>(nx), static_cast<int>(ny));
  std::vector<double> values(grid.size());
  for (double& v : values) v = get_le<double>(is, path);
  return Field(grid, std::move(values));
}

std::string format_convergence(const std::vector<std::string>& labels,
                               const std::vector<ConvergenceReport>& reports) {
  if (labels.size() != reports.size() || reports.empty()) {
    throw InvalidArgument("format_convergence: need one label per report");
  }
  std::string out = "dt";
  for (const auto& l : labels) out += fmt::format(",{}_error,{}_rate", l, l);
  out += '\n';
  const auto& dts = reports.front().dt_list;
  for (std::size_t i = 0; i < dts.size(); ++i) {
    out += fmt_real(dts[i]);
    for (const auto& r : reports) {
      out += ',' + fmt_real(r.errors.at(i)) + ',';
      if (r.rates.at(i)) out += fmt_real(*r.rates[i]);
    }
    out += '\n';
  }
  return out;
}

std::uint32_t crc32_of(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()),
              static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

std::uint32_t crc32_of_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path.string());
  std::ostringstream buf;
  buf << is.rdbuf();
  return crc32_of(buf.str());
}

}  // namespace esav
