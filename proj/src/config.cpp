#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "esav/cli_io.hpp"
#include "esav/errors.hpp"

namespace esav {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_plain(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

std::string fmt_real(double v) { return fmt::format("{:.17g}", v); }

struct Entry {
  std::string value;
  int line = 0;
};

const std::set<std::string, std::less<>> kTopKeys = {
    "model",  "epsilon", "beta",           "g",           "lx",         "ly",
    "nx",     "ny",      "scheme",         "order",       "dt",         "t_end",
    "s_scale", "kappa",  "seed",           "snapshot_times", "output_dir", "dealias",
    "startup_substeps", "verify_solve"};

const std::map<std::string, std::set<std::string, std::less<>>, std::less<>> kIcKeys = {
    {"coscos", {"type", "amplitude"}},
    {"circle_array", {"type", "n_rows", "n_cols", "spacing", "r0", "eps", "background"}},
    {"random_uniform", {"type", "mean", "amplitude"}},
    {"crystallites", {"type", "phibar", "c", "q", "patch"}},
};

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(int line, const std::string& msg) const {
    if (line > 0) throw ConfigError(fmt::format("{}:{}: {}", source_, line, msg));
    throw ConfigError(fmt::format("{}: {}", source_, msg));
  }

  double real(const Entry& e, const std::string& key) const {
    try {
      return parse_real(e.value);
    } catch (const InvalidArgument&) {
      fail(e.line, fmt::format("expected a real number for '{}', got '{}'", key, e.value));
    }
  }

  long integer(const Entry& e, const std::string& key) const {
    long v = 0;
    const std::string_view s = trim(e.value);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
      fail(e.line, fmt::format("expected an integer for '{}', got '{}'", key, e.value));
    }
    return v;
  }

  std::uint64_t unsigned64(const Entry& e, const std::string& key) const {
    std::uint64_t v = 0;
    const std::string_view s = trim(e.value);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
      fail(e.line, fmt::format("expected a non-negative integer for '{}', got '{}'", key, e.value));
    }
    return v;
  }

  bool boolean(const Entry& e, const std::string& key) const {
    if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
    if (e.value == "false" || e.value == "0" || e.value == "no") return false;
    fail(e.line, fmt::format("expected true or false for '{}', got '{}'", key, e.value));
  }

  std::vector<double> real_list(const Entry& e, const std::string& key) const {
    std::vector<double> out;
    std::string_view rest = trim(e.value);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string item(trim(rest.substr(0, comma)));
      out.push_back(real({item, e.line}, key));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    return out;
  }

 private:
  std::string source_;
};

}  // namespace

double parse_real(std::string_view text) {
  std::string_view s = trim(text);
  double v = 0.0;
  if (parse_plain(s, v)) return v;

  // [coefficient][*]pi[/divisor]
  if (const auto p = s.find("pi"); p != std::string_view::npos) {
    std::string_view head = trim(s.substr(0, p));
    std::string_view tail = trim(s.substr(p + 2));
    if (!head.empty() && head.back() == '*') head = trim(head.substr(0, head.size() - 1));
    double coeff = 1.0;
    if (head == "-") coeff = -1.0;
    else if (!head.empty() && !parse_plain(head, coeff)) throw InvalidArgument("bad real");
    double divisor = 1.0;
    if (!tail.empty()) {
      if (tail.front() != '/' || !parse_plain(tail.substr(1), divisor)) {
        throw InvalidArgument("bad real");
      }
    }
    return coeff * std::numbers::pi / divisor;
  }
  // a/b
  if (const auto slash = s.find('/'); slash != std::string_view::npos) {
    double num = 0.0, den = 0.0;
    if (parse_plain(s.substr(0, slash), num) && parse_plain(s.substr(slash + 1), den)) {
      return num / den;
    }
  }
  throw InvalidArgument("cannot parse '" + std::string(text) + "' as a real number");
}

ExperimentConfig parse_config_text(std::string_view text, const std::string& source) {
  const Reader rd(source);
  std::map<std::string, Entry, std::less<>> top;
  std::map<std::string, Entry, std::less<>> ic;
  std::vector<Entry> patches;
  bool in_ic = false;
  bool saw_ic = false;

  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line != "[ic]") rd.fail(line_no, fmt::format("unknown section '{}'", line));
      if (saw_ic) rd.fail(line_no, "duplicate [ic] section");
      in_ic = saw_ic = true;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) rd.fail(line_no, "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (in_ic) {
      if (key == "patch") {
        patches.push_back({value, line_no});
        continue;
      }
      if (!ic.emplace(key, Entry{value, line_no}).second) {
        rd.fail(line_no, fmt::format("duplicate key '{}'", key));
      }
    } else {
      if (!kTopKeys.contains(key)) rd.fail(line_no, fmt::format("unknown key '{}'", key));
      if (!top.emplace(key, Entry{value, line_no}).second) {
        rd.fail(line_no, fmt::format("duplicate key '{}'", key));
      }
    }
  }

  for (const char* req : {"model", "epsilon", "lx", "ly", "nx", "ny", "dt", "t_end"}) {
    if (!top.contains(req)) rd.fail(0, fmt::format("missing required key '{}'", req));
  }
  if (!saw_ic) rd.fail(0, "missing required key 'ic' (an [ic] section)");
  if (!ic.contains("type")) rd.fail(0, "missing required key 'type' in [ic]");

  ExperimentConfig c;
  auto get = [&](const char* key) -> const Entry* {
    const auto it = top.find(key);
    return it == top.end() ? nullptr : &it->second;
  };

  try {
    c.model.kind = parse_model_kind(get("model")->value);
  } catch (const InvalidArgument& e) {
    rd.fail(get("model")->line, e.what());
  }
  c.model.epsilon = rd.real(*get("epsilon"), "epsilon");
  if (auto* e = get("beta")) c.model.beta = rd.real(*e, "beta");
  if (auto* e = get("g")) c.model.g = rd.real(*e, "g");
  c.grid.lx = rd.real(*get("lx"), "lx");
  c.grid.ly = rd.real(*get("ly"), "ly");
  c.grid.nx = static_cast<int>(rd.integer(*get("nx"), "nx"));
  c.grid.ny = static_cast<int>(rd.integer(*get("ny"), "ny"));
  if (auto* e = get("scheme")) {
    try {
      c.scheme = parse_scheme_kind(e->value);
    } catch (const InvalidArgument& ex) {
      rd.fail(e->line, ex.what());
    }
  }
  if (auto* e = get("order")) c.order = static_cast<int>(rd.integer(*e, "order"));
  c.dt = rd.real(*get("dt"), "dt");
  c.t_end = rd.real(*get("t_end"), "t_end");
  if (auto* e = get("s_scale")) c.s_scale = rd.real(*e, "s_scale");
  if (auto* e = get("kappa")) {
    c.kappa = rd.real(*e, "kappa");
    if (!(c.kappa >= 0.0 && c.kappa <= 1.0)) rd.fail(e->line, "kappa must lie in [0, 1]");
  }
  if (auto* e = get("seed")) c.seed = rd.unsigned64(*e, "seed");
  if (auto* e = get("snapshot_times")) c.snapshot_times = rd.real_list(*e, "snapshot_times");
  if (auto* e = get("output_dir")) c.output_dir = e->value;
  if (auto* e = get("dealias")) c.dealias = rd.boolean(*e, "dealias");
  if (auto* e = get("startup_substeps")) {
    c.startup_substeps = static_cast<int>(rd.integer(*e, "startup_substeps"));
  }
  if (auto* e = get("verify_solve")) c.verify_solve = rd.boolean(*e, "verify_solve");

  const Entry& type = ic.at("type");
  const auto allowed = kIcKeys.find(type.value);
  if (allowed == kIcKeys.end()) {
    rd.fail(type.line, fmt::format("unknown initial condition type '{}'", type.value));
  }
  for (const auto& [key, entry] : ic) {
    if (!allowed->second.contains(key)) {
      rd.fail(entry.line, fmt::format("unknown key '{}' for ic type '{}'", key, type.value));
    }
  }
  if (!patches.empty() && type.value != "crystallites") {
    rd.fail(patches.front().line, "'patch' is only valid for crystallites");
  }
  auto ic_real = [&](const char* key, double fallback) {
    const auto it = ic.find(key);
    return it == ic.end() ? fallback : rd.real(it->second, key);
  };
  auto ic_int = [&](const char* key, int fallback) {
    const auto it = ic.find(key);
    return it == ic.end() ? fallback : static_cast<int>(rd.integer(it->second, key));
  };

  if (type.value == "coscos") {
    c.ic = CosCos{ic_real("amplitude", 0.5)};
  } else if (type.value == "circle_array") {
    const CircleArray d;
    c.ic = CircleArray{ic_int("n_rows", d.n_rows),   ic_int("n_cols", d.n_cols),
                       ic_real("spacing", d.spacing), ic_real("r0", d.r0),
                       ic_real("eps", d.eps),         ic_real("background", d.background)};
  } else if (type.value == "random_uniform") {
    const RandomUniform d;
    c.ic = RandomUniform{ic_real("mean", d.mean), ic_real("amplitude", d.amplitude)};
  } else {
    Crystallites cr;
    cr.phibar = ic_real("phibar", cr.phibar);
    cr.c = ic_real("c", cr.c);
    cr.q = ic_real("q", cr.q);
    for (const Entry& p : patches) {
      const auto v = rd.real_list(p, "patch");
      if (v.size() != 4) rd.fail(p.line, "patch expects 'cx, cy, half_width, theta'");
      cr.patches.push_back({v[0], v[1], v[2], v[3]});
    }
    c.ic = cr;
  }

  try {
    validate(c);
  } catch (const ConfigError& e) {
    rd.fail(0, e.what());
  }
  return c;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path.string());
}

std::string emit_config(const ExperimentConfig& c) {
  std::string out;
  auto kv = [&](std::string_view key, const std::string& value) {
    out += fmt::format("{} = {}\n", key, value);
  };
  kv("model", model_name(c.model.kind));
  kv("epsilon", fmt_real(c.model.epsilon));
  kv("beta", fmt_real(c.model.beta));
  kv("g", fmt_real(c.model.g));
  kv("lx", fmt_real(c.grid.lx));
  kv("ly", fmt_real(c.grid.ly));
  kv("nx", std::to_string(c.grid.nx));
  kv("ny", std::to_string(c.grid.ny));
  kv("scheme", scheme_name(c.scheme));
  kv("order", std::to_string(c.order));
  kv("dt", fmt_real(c.dt));
  kv("t_end", fmt_real(c.t_end));
  kv("s_scale", fmt_real(c.s_scale));
  kv("kappa", fmt_real(c.kappa));
  kv("seed", std::to_string(c.seed));
  if (!c.snapshot_times.empty()) {
    std::string list;
    for (double t : c.snapshot_times) list += (list.empty() ? "" : ", ") + fmt_real(t);
    kv("snapshot_times", list);
  }
  kv("output_dir", c.output_dir);
  kv("dealias", c.dealias ? "true" : "false");
  kv("startup_substeps", std::to_string(c.startup_substeps));
  kv("verify_solve", c.verify_solve ? "true" : "false");

  out += "\n[ic]\n";
  std::visit(
      [&](const auto& ic) {
        using T = std::decay_t<decltype(ic)>;
        if constexpr (std::is_same_v<T, CosCos>) {
          kv("type", "coscos");
          kv("amplitude", fmt_real(ic.amplitude));
        } else if constexpr (std::is_same_v<T, CircleArray>) {
          kv("type", "circle_array");
          kv("n_rows", std::to_string(ic.n_rows));
          kv("n_cols", std::to_string(ic.n_cols));
          kv("spacing", fmt_real(ic.spacing));
          kv("r0", fmt_real(ic.r0));
          kv("eps", fmt_real(ic.eps));
          kv("background", fmt_real(ic.background));
        } else if constexpr (std::is_same_v<T, RandomUniform>) {
          kv("type", "random_uniform");
          kv("mean", fmt_real(ic.mean));
          kv("amplitude", fmt_real(ic.amplitude));
        } else {
          kv("type", "crystallites");
          kv("phibar", fmt_real(ic.phibar));
          kv("c", fmt_real(ic.c));
          kv("q", fmt_real(ic.q));
          for (const auto& p : ic.patches) {
            kv("patch", fmt::format("{}, {}, {}, {}", fmt_real(p.cx), fmt_real(p.cy),
                                    fmt_real(p.half_width), fmt_real(p.theta)));
          }
        }
      },
      c.ic);
  return out;
}

}  // namespace esav
