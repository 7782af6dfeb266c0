#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "esav/cli_io.hpp"
#include "esav/errors.hpp"

namespace esav {

namespace fs = std::filesystem;

namespace {

fs::path resolve_output_root(const std::string& cli_out, const std::string& fallback) {
  if (!cli_out.empty()) return cli_out;
  if (const char* env = std::getenv(std::string(kOutputDirEnv).c_str()); env && *env) {
    return env;
  }
  return fallback;
}

// Collects emitted files and writes manifest.json next to them.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)), start_(Clock::now()) {
    fs::create_directories(dir_);
  }

  const fs::path& dir() const { return dir_; }
  fs::path path(const std::string& name) const { return dir_ / name; }

  void add(const fs::path& p) {
    files_.push_back({{"path", fs::relative(p, dir_).string()},
                      {"crc32", fmt::format("{:08x}", crc32_of_file(p))},
                      {"bytes", fs::file_size(p)}});
  }

  void write_text(const std::string& name, const std::string& text) {
    const fs::path p = path(name);
    std::ofstream os(p, std::ios::binary);
    if (!os) throw FormatError("cannot open " + p.string() + " for writing");
    os << text;
    os.close();
    add(p);
  }

  void note_config(const std::string& label, const ExperimentConfig& c) {
    nlohmann::json echo;
    std::istringstream in(emit_config(c));
    std::string line, section;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (line.front() == '[') {
        section = line.substr(1, line.size() - 2) + ".";
        continue;
      }
      const auto eq = line.find(" = ");
      const std::string key = section + line.substr(0, eq);
      const std::string value = line.substr(eq + 3);
      if (key == "ic.patch") echo[key].push_back(value);
      else echo[key] = value;
    }
    configs_[label] = echo;
  }

  void finish() {
    const double wall = std::chrono::duration<double>(Clock::now() - start_).count();
    nlohmann::json m;
    m["version"] = std::string(kVersion);
    m["configs"] = configs_;
    m["timings"] = {{"wall_seconds", wall}};
    m["files"] = files_;
    std::ofstream os(path("manifest.json"));
    os << m.dump(2) << "\n";
  }

 private:
  using Clock = std::chrono::steady_clock;
  fs::path dir_;
  Clock::time_point start_;
  nlohmann::json files_ = nlohmann::json::array();
  nlohmann::json configs_ = nlohmann::json::object();
};

struct SchemeChoice {
  SchemeKind kind;
  std::optional<double> s_scale;
  std::string label;
};

// "resav", "esav:10" (S = 10), "traditional_esav".
SchemeChoice parse_scheme_token(const std::string& token) {
  const auto colon = token.find(':');
  SchemeChoice c{parse_scheme_kind(token.substr(0, colon)), std::nullopt, token.substr(0, colon)};
  if (colon != std::string::npos) {
    const std::string s = token.substr(colon + 1);
    c.s_scale = parse_real(s);
    c.label += "_s" + s;
  }
  return c;
}

std::vector<double> parse_real_list(const std::vector<std::string>& items) {
  std::vector<double> out;
  for (const auto& item : items) {
    std::string_view rest(item);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto piece = rest.substr(0, comma);
      if (!piece.empty()) out.push_back(parse_real(piece));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
  }
  return out;
}

std::vector<std::string> split_tokens(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& item : items) {
    std::string_view rest(item);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto piece = rest.substr(0, comma);
      if (!piece.empty()) out.emplace_back(piece);
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
  }
  return out;
}

void write_run(OutputSet& out, const std::string& prefix, const ExperimentConfig& c,
               const RunResult& r) {
  out.note_config(prefix, c);
  out.write_text(prefix + "config.cfg", emit_config(c));
  const fs::path trace = out.path(prefix + "trace.csv");
  emit_trace(r.trace, trace);
  out.add(trace);
  const std::uint32_t checksum = crc32_of(emit_config(c));
  for (const Snapshot& s : r.snapshots) {
    const fs::path p = out.path(fmt::format("{}snapshot_{:07d}.bin", prefix, s.step));
    const SnapshotMeta meta{s.time, model_name(c.model.kind), scheme_name(c.scheme), checksum};
    emit_snapshot(s.field, p, &meta);
    out.add(p);
    out.add(p.string() + ".meta");
  }
}

void do_run(const ExperimentConfig& c, OutputSet& out, const std::string& prefix = "") {
  std::cerr << fmt::format("running {} ({} BDF{}, dt = {}, T = {}, {}x{})\n",
                           model_name(c.model.kind), scheme_name(c.scheme), c.order, c.dt,
                           c.t_end, c.grid.nx, c.grid.ny);
  write_run(out, prefix, c, run(c));
}

void do_converge(const ExperimentConfig& base, const std::vector<SchemeChoice>& schemes,
                 const std::vector<int>& orders, const std::vector<double>& dts, double dt_ref,
                 OutputSet& out, const std::string& name) {
  std::vector<std::string> labels;
  std::vector<ConvergenceReport> reports;
  for (const SchemeChoice& s : schemes) {
    for (int k : orders) {
      if (s.kind == SchemeKind::TraditionalEsav && k != 1) continue;
      ExperimentConfig c = base;
      c.scheme = s.kind;
      c.order = k;
      if (s.s_scale) c.s_scale = *s.s_scale;
      std::cerr << fmt::format("converge {} BDF{} over {} step sizes (reference dt = {})\n",
                               s.label, k, dts.size(), dt_ref);
      reports.push_back(convergence_study(c, dts, dt_ref));
      labels.push_back(fmt::format("{}_bdf{}", s.label, k));
      out.note_config(labels.back(), c);
    }
  }
  const std::string text = format_convergence(labels, reports);
  out.write_text(name, text);
  std::cout << text;
}

void do_compare(const ExperimentConfig& base, const std::vector<SchemeChoice>& schemes,
                OutputSet& out, const std::string& name) {
  std::vector<RunResult> results;
  std::vector<double> scales;
  std::string header = "step,time";
  for (const SchemeChoice& s : schemes) {
    ExperimentConfig c = base;
    c.scheme = s.kind;
    if (s.kind == SchemeKind::TraditionalEsav) c.order = 1;
    if (s.s_scale) c.s_scale = *s.s_scale;
    c.snapshot_times.clear();
    results.push_back(run(c));
    scales.push_back(c.s_scale);
    write_run(out, s.label + "_", c, results.back());
    header += fmt::format(",{0}_energy_original,{0}_ln_r_scaled,{0}_gap,{0}_xi,{0}_lambda0",
                          s.label);
  }
  std::string text = header + "\n";
  const std::size_t n = results.front().trace.size();
  for (std::size_t i = 0; i < n; ++i) {
    const StepReport& first = results.front().trace[i];
    text += fmt::format("{},{:.17g}", first.step, first.time);
    for (const RunResult& r : results) {
      const StepReport& s = r.trace.at(i);
      text += fmt::format(",{:.17g},{:.17g},{:.17g},{:.17g},", s.energy_original, s.ln_r_scaled,
                          s.ln_r_scaled - s.energy_original, s.xi);
      if (s.lambda0) text += fmt::format("{:.17g}", *s.lambda0);
    }
    text += '\n';
  }
  out.write_text(name, text);
}

ExperimentConfig desk(ExperimentConfig c, double t_end) {
  c.grid.nx = c.grid.ny = 128;
  c.t_end = t_end;
  std::erase_if(c.snapshot_times, [&](double t) { return t > t_end; });
  return c;
}

void run_example(int n, bool desk_scale, const fs::path& root) {
  const std::vector<double> table1 = {1.0 / 10, 1.0 / 20, 1.0 / 40, 1.0 / 80, 1.0 / 160};
  const std::vector<double> table2 = {1.0 / 4, 1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};
  const std::vector<double> table3 = {1.0 / 8,  1.0 / 16,  1.0 / 32,
                                      1.0 / 64, 1.0 / 128, 1.0 / 256};
  const std::vector<SchemeChoice> first_order = {parse_scheme_token("esav:1"),
                                                 parse_scheme_token("esav:10"),
                                                 parse_scheme_token("resav")};
  const std::vector<SchemeChoice> resav = {parse_scheme_token("resav")};

  switch (n) {
    case 1: {
      ExperimentConfig ac = example1_allen_cahn();
      ExperimentConfig ch = example1_cahn_hilliard();
      if (desk_scale) {
        ac = desk(ac, ac.t_end);
        ch = desk(ch, ch.t_end);
      }
      OutputSet out(root / ac.output_dir);
      do_run(ac, out);
      ExperimentConfig fig = ac;
      fig.dt = 0.1;
      do_compare(fig, {parse_scheme_token("esav:1"), parse_scheme_token("resav")}, out,
                 "compare_dt0.1.csv");
      do_compare(ac, {parse_scheme_token("esav:10"), parse_scheme_token("resav")}, out,
                 "compare_dt0.01.csv");
      do_converge(ac, first_order, {1}, table1, table1.back() / 16, out, "table1.csv");
      do_converge(ac, resav, {1, 2, 3, 4}, table2, table2.back() / 16, out, "table2.csv");
      do_converge(ch, resav, {1, 2, 3, 4}, table3, desk_scale ? 1.0 / 4096 : 1e-4, out,
                  "table3.csv");
      out.finish();
      break;
    }
    case 2: {
      ExperimentConfig c = example2_circles();
      if (desk_scale) c = desk(c, 10.0);
      OutputSet out(root / c.output_dir);
      do_run(c, out);
      for (double dt : {0.1, 1.0}) {
        ExperimentConfig e = c;
        e.dt = dt;
        e.snapshot_times.clear();
        do_run(e, out, fmt::format("dt{}_", dt));
      }
      ExperimentConfig cmp = c;
      cmp.dt = 0.1;
      do_compare(cmp, {parse_scheme_token("traditional_esav"), parse_scheme_token("resav")}, out,
                 "compare_dt0.1.csv");
      out.finish();
      break;
    }
    case 3: {
      for (double g : {0.0, 1.0}) {
        ExperimentConfig c = example3_random(g);
        if (desk_scale) c = desk(c, 100.0);
        OutputSet out(root / c.output_dir);
        do_run(c, out);
        out.finish();
      }
      break;
    }
    case 4: {
      ExperimentConfig c = example4_crystallites();
      if (desk_scale) c = desk(c, 100.0);
      OutputSet out(root / c.output_dir);
      do_run(c, out, "dt0.1_");
      ExperimentConfig coarse = c;
      coarse.dt = 1.0;
      do_run(coarse, out, "dt1_");
      out.finish();
      break;
    }
    default:
      throw ConfigError(fmt::format("unknown example {} (expected 1..4)", n));
  }
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Energy-stable exponential SAV solvers for gradient flows"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  std::string cfg_path, out_dir;
  std::vector<std::string> dts_raw, schemes_raw, orders_raw;
  std::string dt_ref_raw;
  int example = 0;
  bool desk_scale = false;

  auto* run_cmd = app.add_subcommand("run", "Run one simulation from a config file");
  run_cmd->add_option("config", cfg_path, "Config file")->required();
  run_cmd->add_option("--out", out_dir, "Output directory");

  auto* conv = app.add_subcommand("converge", "Temporal convergence study against a reference");
  conv->add_option("config", cfg_path, "Config file")->required();
  conv->add_option("--dts", dts_raw, "Step sizes (comma separated, fractions allowed)")
      ->required();
  conv->add_option("--dt-ref", dt_ref_raw, "Reference step size")->required();
  conv->add_option("--schemes", schemes_raw, "Schemes, e.g. resav,esav:10");
  conv->add_option("--orders", orders_raw, "BDF orders (default: config order)");
  conv->add_option("--out", out_dir, "Output directory");

  auto* cmp = app.add_subcommand("compare", "Run several schemes on one problem");
  cmp->add_option("config", cfg_path, "Config file")->required();
  cmp->add_option("--schemes", schemes_raw, "Schemes, e.g. esav:1,resav")->required();
  cmp->add_option("--out", out_dir, "Output directory");

  auto* ex = app.add_subcommand("examples", "Run the built-in preset for example 1-4");
  ex->add_option("n", example, "Example number")->required()->check(CLI::Range(1, 4));
  ex->add_flag("--desk", desk_scale, "128^2 grids and shortened horizons");
  ex->add_option("--out", out_dir, "Output root directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*ex) {
      run_example(example, desk_scale, resolve_output_root(out_dir, "."));
      return 0;
    }
    const ExperimentConfig cfg = parse_config(cfg_path);
    OutputSet out(resolve_output_root(out_dir, cfg.output_dir));
    if (*run_cmd) {
      do_run(cfg, out);
    } else if (*conv) {
      std::vector<SchemeChoice> schemes;
      for (const auto& t : split_tokens(schemes_raw)) schemes.push_back(parse_scheme_token(t));
      if (schemes.empty()) schemes.push_back({cfg.scheme, std::nullopt, scheme_name(cfg.scheme)});
      std::vector<int> orders;
      for (double k : parse_real_list(orders_raw)) orders.push_back(static_cast<int>(k));
      if (orders.empty()) orders.push_back(cfg.order);
      do_converge(cfg, schemes, orders, parse_real_list(dts_raw), parse_real(dt_ref_raw), out,
                  "convergence.csv");
    } else if (*cmp) {
      std::vector<SchemeChoice> schemes;
      for (const auto& t : split_tokens(schemes_raw)) schemes.push_back(parse_scheme_token(t));
      do_compare(cfg, schemes, out, "compare.csv");
    }
    out.finish();
    return 0;
  } catch (const RunAborted& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.blow_up() ? 3 : 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace esav
