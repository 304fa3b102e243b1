// bq: configuration-driven experiment runner.
//
//   bq run <command> [config_file] [--config PATH] [--out DIR] [--level N] [--truncation N]
//          [--ladder A,B,C] [--seed N] [--cache DIR] [--emit-svg] [--emit-csv]
//   bq render <report.json> [--svg DIR]
//   bq commands
//
// Exit codes: 0 all checks pass, 1 a check failed, 2 config error, 3 numeric capacity error.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "bq/modforms.hpp"
#include "bq/report.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitFail = 1, kExitConfig = 2, kExitCapacity = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw bq::ConfigError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!out) throw bq::Error("cannot write '" + path.string() + "'");
}

// |Delta|^2 y^12 on a grid over the truncated fundamental domain; NaN below the unit arc.
struct Field {
  int nx = 41, ny = 64;
  double x0 = -0.5, x1 = 0.5, y0 = std::sqrt(3.0) / 2, y1 = 2.5;
  std::vector<double> values;
};

Field delta_field(int q_depth) {
  Field f;
  const auto delta = bq::delta_qexp(q_depth);
  for (int j = 0; j < f.ny; ++j)
    for (int i = 0; i < f.nx; ++i) {
      const double x = f.x0 + (f.x1 - f.x0) * i / (f.nx - 1), y = f.y0 + (f.y1 - f.y0) * j / (f.ny - 1);
      if (x * x + y * y < 1) {
        f.values.push_back(NAN);
        continue;
      }
      f.values.push_back(std::norm(bq::eval_form(delta, bq::HPoint{x, y})) * std::pow(y, 12));
    }
  return f;
}

std::string field_csv(const Field& f) {
  std::string out = "x,y,value\n";
  for (int j = 0; j < f.ny; ++j)
    for (int i = 0; i < f.nx; ++i) {
      const double v = f.values[static_cast<std::size_t>(j) * f.nx + i];
      if (!std::isfinite(v)) continue;
      char buf[96];
      std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.17g\n", f.x0 + (f.x1 - f.x0) * i / (f.nx - 1),
                    f.y0 + (f.y1 - f.y0) * j / (f.ny - 1), v);
      out += buf;
    }
  return out;
}

void emit_ladder_svgs(const bq::Report& r, const fs::path& dir) {
  const auto hash = bq::config_hash(r.params);
  for (const auto& c : r.criteria)
    for (const auto& k : c.checks)
      if (k.ladder.size() >= 2)
        write_file(dir / ("ladder_" + std::to_string(c.id) + "_" + k.name + ".svg"),
                   bq::ladder_svg(k.name, k.ladder, hash));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Berezin quantization experiment runner"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run a command and write report.json");
  std::string command, config_pos, config_flag, out_dir = ".", cache;
  int level = 0, truncation = 0;
  long long seed = -1;
  std::vector<int> ladder;
  bool emit_svg = false, emit_csv = false;
  run->add_option("command", command, "kernel-check, trace, cusp-action, toeplitz-identities, poincare, density, full-suite")
      ->required();
  run->add_option("config_file", config_pos, "config file (JSON), same as --config");
  run->add_option("--config", config_flag, "config file (JSON)");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--level", level, "fundamental-domain rule level");
  run->add_option("--truncation", truncation, "truncation N");
  run->add_option("--ladder", ladder, "truncation ladder")->delimiter(',');
  run->add_option("--seed", seed, "seed for randomized checks");
  run->add_option("--cache", cache, "rule cache directory");
  run->add_flag("--emit-svg", emit_svg, "write ladder plots and the |Delta|^2 y^12 heat map");
  run->add_flag("--emit-csv", emit_csv, "write ladder and field CSV files");

  auto* render = app.add_subcommand("render", "print a report as a table");
  std::string report_path, svg_dir;
  render->add_option("report", report_path, "report.json")->required();
  render->add_option("--svg", svg_dir, "also write ladder plots here");

  app.add_subcommand("commands", "list commands");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  if (app.got_subcommand("commands")) {
    for (const auto& name : bq::command_names()) std::cout << name << "\n";
    return 0;
  }

  if (app.got_subcommand("render")) {
    try {
      const std::string text = read_file(report_path);
      std::cout << bq::render_table(text);
      if (!svg_dir.empty()) {
        const auto j = nlohmann::json::parse(text);
        fs::create_directories(svg_dir);
        for (const auto& c : j.at("criteria"))
          for (const auto& k : c.at("checks")) {
            if (!k.contains("ladder") || k.at("ladder").size() < 2) continue;
            std::vector<double> l;
            for (const auto& v : k.at("ladder")) l.push_back(v.is_number() ? v.get<double>() : NAN);
            const auto name = k.at("name").get<std::string>();
            write_file(fs::path(svg_dir) / ("ladder_" + std::to_string(c.at("id").get<int>()) + "_" + name + ".svg"),
                       bq::ladder_svg(name, l, j.at("config_hash").get<std::string>()));
          }
      }
    } catch (const std::exception& e) {
      std::cerr << "bq render: " << e.what() << "\n";
      return kExitFail;
    }
    return 0;
  }

  // Everything is validated before any output is written.
  bq::SuiteParams p;
  try {
    if (!config_pos.empty() && !config_flag.empty()) throw bq::ConfigError("config given twice");
    const std::string config = config_flag.empty() ? config_pos : config_flag;
    if (!config.empty()) p = bq::params_from_json(read_file(config));
    if (level) p.level = level;
    if (truncation) p.truncation = truncation;
    if (!ladder.empty()) p.ladder = ladder;
    if (seed >= 0) p.seed = static_cast<std::uint64_t>(seed);
    if (!cache.empty()) p.cache_dir = cache;
    p.validate();
    bq::command_criteria(command);
  } catch (const bq::ConfigError& e) {
    std::cerr << "bq: config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    const auto report = bq::run_command(command, p, [](const bq::Criterion& c) {
      std::fprintf(stderr, "%s %2d %s (%.1fs)\n", c.pass() ? "PASS" : "FAIL", c.id, c.title.c_str(), c.seconds);
    });
    const fs::path out(out_dir);
    fs::create_directories(out);
    const std::string text = bq::report_json(report);
    write_file(out / "report.json", text);
    std::cout << bq::render_table(text);
    if (emit_svg || emit_csv) {
      const Field f = delta_field(p.q_depth);
      if (emit_svg) {
        emit_ladder_svgs(report, out);
        write_file(out / "delta_field.svg", bq::heatmap_svg("|Delta(z)|^2 y^12 over F", f.values, f.nx, f.ny, f.x0,
                                                            f.x1, f.y0, f.y1, bq::config_hash(p)));
      }
      if (emit_csv) {
        write_file(out / "ladders.csv", bq::ladders_csv(text));
        write_file(out / "delta_field.csv", field_csv(f));
      }
    }
    if (report.pass()) return 0;
    return report.capacity_error() ? kExitCapacity : kExitFail;
  } catch (const bq::CapacityError& e) {
    std::cerr << "bq: capacity error: " << e.what() << "\n";
    return kExitCapacity;
  } catch (const std::exception& e) {
    std::cerr << "bq: " << e.what() << "\n";
    return kExitFail;
  }
}
