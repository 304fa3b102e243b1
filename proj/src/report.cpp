#include "bq/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <functional>

#include "json.hpp"

namespace bq {
namespace {

using nlohmann::json;

const char* relation_name(Relation r) {
  switch (r) {
    case Relation::Less: return "<";
    case Relation::LessEqual: return "<=";
    case Relation::Equal: return "==";
    case Relation::LadderHalves: return "ladder<=";
  }
  return "?";
}

json criterion_json(const Criterion& c) {
  json checks = json::array();
  for (const auto& k : c.checks) {
    json e{{"name", k.name}, {"value", k.value},   {"tolerance", k.tolerance},
           {"relation", relation_name(k.relation)}, {"pass", k.pass}};
    if (!k.ladder.empty()) e["ladder"] = k.ladder;
    if (k.floor > 0) e["floor"] = k.floor;
    checks.push_back(std::move(e));
  }
  json reported = json::object();
  for (const auto& [name, v] : c.reported) reported[name] = v;
  json out{{"id", c.id}, {"title", c.title}, {"pass", c.pass()}, {"checks", checks}, {"reported", reported}};
  if (!c.error.empty()) out["error"] = {{"message", c.error}, {"capacity", c.capacity}};
  return out;
}

std::string now_iso() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::string svg_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace

SuiteParams params_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  SuiteParams p;
  auto get_int = [&](const std::string& key, auto& dst) {
    if (!j.contains(key)) return;
    if (!j[key].is_number_integer()) throw ConfigError("config key '" + key + "' must be an integer");
    dst = j[key].get<std::remove_reference_t<decltype(dst)>>();
  };
  auto get_ints = [&](const std::string& key, std::vector<int>& dst) {
    if (!j.contains(key)) return;
    if (!j[key].is_array()) throw ConfigError("config key '" + key + "' must be an array of integers");
    dst.clear();
    for (const auto& v : j[key]) {
      if (!v.is_number_integer()) throw ConfigError("config key '" + key + "' must be an array of integers");
      dst.push_back(v.get<int>());
    }
  };
  static const std::vector<std::string> known = {"seed",   "m",       "level",      "disk_level", "truncation",
                                                 "ladder", "height",  "poincare_height", "q_depth", "dictionary",
                                                 "tolerances", "cache_dir"};
  for (const auto& [key, v] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError("unknown config key '" + key + "'");
  if (j.contains("seed") && !j["seed"].is_number_unsigned()) throw ConfigError("config key 'seed' must be >= 0");
  get_int("seed", p.seed);
  get_int("m", p.m);
  get_int("level", p.level);
  get_int("disk_level", p.disk_level);
  get_int("truncation", p.truncation);
  get_int("height", p.height);
  get_int("poincare_height", p.poincare_height);
  get_int("q_depth", p.q_depth);
  get_ints("ladder", p.ladder);
  get_ints("dictionary", p.dictionary);
  if (j.contains("tolerances")) {
    if (!j["tolerances"].is_object()) throw ConfigError("config key 'tolerances' must be an object");
    for (const auto& [k, v] : j["tolerances"].items()) {
      if (!v.is_number()) throw ConfigError("tolerance '" + k + "' must be a number");
      p.tolerances[k] = v.get<double>();
    }
  }
  if (j.contains("cache_dir")) {
    if (!j["cache_dir"].is_string()) throw ConfigError("config key 'cache_dir' must be a string");
    p.cache_dir = j["cache_dir"].get<std::string>();
  }
  p.validate();
  return p;
}

std::string params_to_json(const SuiteParams& p) {
  json j{{"seed", p.seed},
         {"m", p.m},
         {"level", p.level},
         {"disk_level", p.disk_level},
         {"truncation", p.truncation},
         {"ladder", p.ladder},
         {"height", p.height},
         {"poincare_height", p.poincare_height},
         {"q_depth", p.q_depth},
         {"dictionary", p.dictionary},
         {"tolerances", p.tolerances}};
  // The cache location does not change results, so it stays out of the echo.
  return j.dump();
}

std::string config_hash(const SuiteParams& p) {
  return fmt::format("{:016x}", std::hash<std::string>{}(params_to_json(p)));
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"kernel-check", "trace",   "toeplitz-identities", "cusp-action",
                                                 "poincare",     "density", "full-suite"};
  return names;
}

std::vector<int> command_criteria(const std::string& command) {
  if (command == "kernel-check") return {1, 2, 3};
  if (command == "trace") return {5, 6};
  if (command == "cusp-action") return {4, 7};
  if (command == "toeplitz-identities") return {8, 9};
  if (command == "poincare") return {10};
  if (command == "density") return {11};
  if (command == "full-suite") return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  throw ConfigError("unknown command '" + command + "'");
}

bool Report::pass() const {
  return std::all_of(criteria.begin(), criteria.end(), [](const Criterion& c) { return c.pass(); });
}

namespace {

Criterion run_guarded(int id, const SuiteParams& p, const RuleCache& cache) {
  const auto t0 = std::chrono::steady_clock::now();
  Criterion c;
  try {
    return run_criterion(id, p, cache);
  } catch (const CapacityError& e) {
    c.error = e.what();
    c.capacity = true;
  } catch (const std::exception& e) {
    c.error = e.what();
  }
  c.id = id;
  c.title = criterion_title(id);
  c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return c;
}

}  // namespace

bool Report::capacity_error() const {
  return std::any_of(criteria.begin(), criteria.end(), [](const Criterion& c) { return c.capacity; });
}

Report run_command(const std::string& command, const SuiteParams& p, const Progress& progress) {
  p.validate();
  const auto ids = command_criteria(command);
  const auto t0 = std::chrono::steady_clock::now();
  Report r;
  r.command = command;
  r.params = p;
  r.timestamp = now_iso();
  auto run_all = [&](Report& out, bool report_progress) {
    const RuleCache cache(p.cache_dir);
    for (int id : ids) {
      if (id == 12) continue;
      out.criteria.push_back(run_guarded(id, p, cache));
      if (report_progress && progress) progress(out.criteria.back());
    }
    auto keys = cache.keys_used();
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    out.cache_keys = std::move(keys);
  };
  run_all(r, true);
  if (std::find(ids.begin(), ids.end(), 12) != ids.end()) {
    // Second pass with the cache now warm; the stable sections must agree byte for byte.
    const auto t1 = std::chrono::steady_clock::now();
    Report again = r;
    again.criteria.clear();
    run_all(again, false);
    const std::string a = report_json(r, false), b = report_json(again, false);
    std::size_t first = 0;
    while (first < std::min(a.size(), b.size()) && a[first] == b[first]) ++first;
    Criterion c;
    c.id = 12;
    c.title = criterion_title(12);
    c.checks.push_back(make_check(p, "report_byte_differences", a == b ? 0.0 : 1.0, 0, Relation::Equal));
    c.reported.emplace_back("report_bytes", static_cast<double>(a.size()));
    if (a != b) c.reported.emplace_back("first_difference_offset", static_cast<double>(first));
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
    r.criteria.push_back(c);
    if (progress) progress(r.criteria.back());
  }
  r.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::string report_json(const Report& r, bool with_volatile) {
  json crit = json::array();
  for (const auto& c : r.criteria) crit.push_back(criterion_json(c));
  json j{{"schema", kReportSchema},
         {"library_version", kLibraryVersion},
         {"command", r.command},
         {"config", json::parse(params_to_json(r.params))},
         {"config_hash", config_hash(r.params)},
         {"criteria", crit},
         {"cache_keys", r.cache_keys},
         {"pass", r.pass()}};
  if (with_volatile) {
    json timings = json::object();
    for (const auto& c : r.criteria) timings[std::to_string(c.id)] = c.seconds;
    j["volatile"] = {{"timestamp", r.timestamp}, {"timings_seconds", timings}, {"total_seconds", r.total_seconds}};
  }
  return j.dump(2) + "\n";
}

std::string render_table(const std::string& report_text) {
  const json j = json::parse(report_text);
  if (!j.is_object() || j.value("schema", "") != kReportSchema) throw Error("not a report_v1 document");
  std::string out = fmt::format("{:<4} {:<20} {:<36} {:>12} {:>10} {:>12}  {}\n", "id", "criterion", "check", "value",
                                "relation", "tolerance", "status");
  out += std::string(110, '-') + "\n";
  for (const auto& c : j.at("criteria")) {
    if (c.contains("error"))
      out += fmt::format("{:<4} {:<20} error: {}  FAIL\n", c.at("id").get<int>(), c.at("title").get<std::string>(),
                         c.at("error").at("message").get<std::string>());
    for (const auto& k : c.at("checks")) {
      out += fmt::format("{:<4} {:<20} {:<36} {:>12.4e} {:>10} {:>12.4e}  {}\n", c.at("id").get<int>(),
                         c.at("title").get<std::string>(), k.at("name").get<std::string>(),
                         k.at("value").is_number() ? k.at("value").get<double>() : NAN,
                         k.at("relation").get<std::string>(), k.at("tolerance").get<double>(),
                         k.at("pass").get<bool>() ? "PASS" : "FAIL");
      if (k.contains("ladder") && k.at("ladder").size() >= 2) {
        std::vector<double> l;
        for (const auto& v : k.at("ladder")) l.push_back(v.is_number() ? v.get<double>() : NAN);
        bool dec = true, inc = true;
        for (std::size_t i = 1; i < l.size(); ++i) {
          dec = dec && l[i] < l[i - 1];
          inc = inc && l[i] > l[i - 1];
        }
        std::string rungs;
        for (double v : l) rungs += fmt::format(" {:.3e}", v);
        out += fmt::format("{:<4} {:<20}   ladder:{} ({})\n", "", "", rungs,
                           dec ? "decreasing" : inc ? "increasing" : "not monotone");
      }
    }
  }
  return out;
}

std::string ladders_csv(const std::string& report_text) {
  const json j = json::parse(report_text);
  std::string out = "criterion,check,rung,value\n";
  for (const auto& c : j.at("criteria"))
    for (const auto& k : c.at("checks"))
      if (k.contains("ladder"))
        for (std::size_t i = 0; i < k.at("ladder").size(); ++i)
          out += fmt::format("{},{},{},{:.17g}\n", c.at("id").get<int>(), k.at("name").get<std::string>(), i,
                             k.at("ladder")[i].is_number() ? k.at("ladder")[i].get<double>() : NAN);
  return out;
}

std::string ladder_svg(const std::string& title, const std::vector<double>& ladder, const std::string& hash) {
  const double W = 480, H = 300, L = 60, R = 20, T = 40, B = 40;
  std::vector<double> lg;
  for (double v : ladder) lg.push_back(std::log10(std::max(v, 1e-300)));
  double lo = lg.empty() ? 0 : *std::min_element(lg.begin(), lg.end());
  double hi = lg.empty() ? 1 : *std::max_element(lg.begin(), lg.end());
  if (hi - lo < 1) {
    lo -= 0.5;
    hi += 0.5;
  }
  std::string s = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\">\n"
      "<!-- config_hash {} -->\n<metadata>{{\"config_hash\":\"{}\"}}</metadata>\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n"
      "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n"
      "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
      W, H, hash, hash, L, svg_escape(title), L, H - B, W - R, H - B, L, T, L, H - B);
  s += fmt::format("<text x=\"4\" y=\"{}\" font-size=\"10\">1e{:.1f}</text>\n", T + 4, hi);
  s += fmt::format("<text x=\"4\" y=\"{}\" font-size=\"10\">1e{:.1f}</text>\n", H - B, lo);
  std::string pts;
  const std::size_t n = lg.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double x = L + (n > 1 ? (W - L - R) * static_cast<double>(i) / (n - 1) : 0.0);
    const double y = T + (H - T - B) * (hi - lg[i]) / (hi - lo);
    pts += fmt::format("{:.1f},{:.1f} ", x, y);
    s += fmt::format("<circle cx=\"{:.1f}\" cy=\"{:.1f}\" r=\"3\" fill=\"steelblue\"/>\n", x, y);
  }
  s += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"steelblue\"/>\n</svg>\n", pts);
  return s;
}

std::string heatmap_svg(const std::string& title, const std::vector<double>& values, int nx, int ny, double x0,
                        double x1, double y0, double y1, const std::string& hash) {
  if (values.size() != static_cast<std::size_t>(nx) * ny) throw Error("heatmap_svg: value count mismatch");
  const double cell = 8, L = 50, T = 40;
  double vmax = 1e-300;
  for (double v : values)
    if (std::isfinite(v)) vmax = std::max(vmax, v);
  std::string s = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\">\n"
      "<!-- config_hash {} -->\n<metadata>{{\"config_hash\":\"{}\",\"x\":[{},{}],\"y\":[{},{}],\"max\":{:.17g}}}"
      "</metadata>\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n",
      L + nx * cell + 20, T + ny * cell + 30, hash, hash, x0, x1, y0, y1, vmax, L, svg_escape(title));
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const double v = values[static_cast<std::size_t>(j) * nx + i];
      // Non-finite cells (outside the plotted region) are drawn grey.
      std::string fill = "rgb(235,235,235)";
      if (std::isfinite(v)) {
        const double t = std::clamp(v / vmax, 0.0, 1.0);
        fill = fmt::format("rgb({},40,{})", static_cast<int>(255 * t), static_cast<int>(255 * (1 - t)));
      }
      // Row 0 is the lowest y, drawn at the bottom.
      s += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n", L + i * cell,
                       T + (ny - 1 - j) * cell, cell, cell, fill);
    }
  s += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"10\">x in [{}, {}], y in [{}, {}]</text>\n</svg>\n", L,
                   T + ny * cell + 20, x0, x1, y0, y1);
  return s;
}

}  // namespace bq
