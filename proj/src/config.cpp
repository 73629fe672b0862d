#include "stratlearn/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "stratlearn/rng.hpp"

namespace stratlearn {

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Cone: return "cone";
    case ModelKind::Hyperboloid: return "hyperboloid";
    case ModelKind::Cusp: return "cusp";
  }
  return "unknown";
}

std::string format_real(double v) { return fmt::format("{:.17g}", v); }

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

class LineParser {
 public:
  explicit LineParser(int line) : line_(line) {}

  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(fmt::format("line {}: {}", line_, msg)); }

  double real(const std::string& s) const {
    if (s == "pi") return std::numbers::pi;
    if (s == "-pi") return -std::numbers::pi;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      fail(fmt::format("malformed number '{}'", s));
    }
    if (used != s.size() || !std::isfinite(v)) fail(fmt::format("malformed number '{}'", s));
    return v;
  }

  long long integer(const std::string& s) const {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(s, &used);
    } catch (const std::exception&) {
      fail(fmt::format("malformed integer '{}'", s));
    }
    if (used != s.size()) fail(fmt::format("malformed integer '{}'", s));
    return v;
  }

  std::uint64_t unsigned_integer(const std::string& s) const {
    std::size_t used = 0;
    std::uint64_t v = 0;
    if (s.empty() || s.front() == '-') fail(fmt::format("malformed seed '{}'", s));
    try {
      v = std::stoull(s, &used);
    } catch (const std::exception&) {
      fail(fmt::format("malformed seed '{}'", s));
    }
    if (used != s.size()) fail(fmt::format("malformed seed '{}'", s));
    return v;
  }

  std::vector<double> reals(const std::string& s, std::size_t expected = 0) const {
    std::vector<double> out;
    for (const auto& tok : split(s, ',')) out.push_back(real(tok));
    if (expected && out.size() != expected) fail(fmt::format("expected {} comma-separated numbers", expected));
    return out;
  }

  ChartPoint point(const std::string& s) const {
    auto v = reals(s, 2);
    return {v[0], v[1]};
  }

 private:
  int line_;
};

void apply_key(ExperimentSpec& spec, const std::string& key, const std::string& value, const LineParser& lp) {
  auto& o = spec.optimizer;
  if (key == "name") {
    spec.name = value;
  } else if (key == "model") {
    if (value == "cone") spec.model = ModelKind::Cone;
    else if (value == "hyperboloid") spec.model = ModelKind::Hyperboloid;
    else if (value == "cusp") spec.model = ModelKind::Cusp;
    else lp.fail(fmt::format("unknown model '{}'", value));
  } else if (key == "eps") {
    spec.eps = lp.real(value);
  } else if (key == "method") {
    if (value == "gd") o.method = Method::GD;
    else if (value == "ngd") o.method = Method::NGD;
    else lp.fail(fmt::format("unknown method '{}'", value));
  } else if (key == "step_size") {
    o.step_size = lp.real(value);
  } else if (key == "max_steps") {
    o.max_steps = lp.integer(value);
  } else if (key == "grad_tol") {
    o.grad_tol = lp.real(value);
  } else if (key == "loss_tol") {
    o.loss_tol = lp.real(value);
  } else if (key == "damping") {
    o.damping = lp.real(value);
  } else if (key == "step_cap") {
    o.step_cap = lp.real(value);
  } else if (key == "mode") {
    if (value == "population") o.mode = SampleMode::Population;
    else if (value == "stochastic") o.mode = SampleMode::Stochastic;
    else lp.fail(fmt::format("unknown mode '{}'", value));
  } else if (key == "batch") {
    o.batch = lp.integer(value);
  } else if (key == "seed") {
    o.seed = lp.unsigned_integer(value);
  } else if (key == "thin") {
    o.thin = lp.integer(value);
  } else if (key == "init") {
    spec.inits.clear();
    for (const auto& p : split(value, ';')) spec.inits.push_back(lp.point(p));
  } else if (key == "init_xi" || key == "init_theta" || key == "init_count" || key == "init_seed") {
    if (!spec.init_distribution) spec.init_distribution = InitDistribution{};
    auto& d = *spec.init_distribution;
    if (key == "init_xi") {
      auto v = lp.reals(value, 2);
      d.xi_lo = v[0];
      d.xi_hi = v[1];
    } else if (key == "init_theta") {
      auto v = lp.reals(value, 2);
      d.theta_lo = v[0];
      d.theta_hi = v[1];
    } else if (key == "init_count") {
      d.count = static_cast<int>(lp.integer(value));
    } else {
      d.seed = lp.unsigned_integer(value);
    }
  } else if (key == "target") {
    spec.target = lp.point(value);
  } else if (key == "output_dir") {
    spec.output_dir = value;
  } else if (key == "plateau_window") {
    spec.plateau_window = static_cast<int>(lp.integer(value));
  } else if (key == "plateau_tol") {
    spec.plateau_tol = lp.real(value);
  } else if (key == "levels") {
    spec.levels = lp.reals(value);
  } else if (key == "quiver_points") {
    spec.quiver_points = static_cast<int>(lp.integer(value));
  } else if (key == "cusp_target") {
    auto v = lp.reals(value, 2);
    spec.cusp_target = Vector2(v[0], v[1]);
  } else {
    lp.fail(fmt::format("unknown key '{}'", key));
  }
}

}  // namespace

void ExperimentSpec::validate() const {
  if (name.empty()) throw ConfigError("experiment name is required");
  if (model == ModelKind::Hyperboloid && (!eps || !(*eps > 0)))
    throw ConfigError(fmt::format("experiment '{}': model = hyperboloid requires eps > 0", name));
  if (model == ModelKind::Cusp) {
    if (levels.empty()) throw ConfigError(fmt::format("experiment '{}': cusp needs at least one level", name));
    if (quiver_points < 2) throw ConfigError(fmt::format("experiment '{}': quiver_points must be >= 2", name));
    return;
  }
  try {
    optimizer.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("experiment '{}': {}", name, e.what()));
  }
  if (inits.empty() && !init_distribution)
    throw ConfigError(fmt::format("experiment '{}': no initialization given (init or init_*)", name));
  if (init_distribution) {
    const auto& d = *init_distribution;
    if (d.count < 1) throw ConfigError(fmt::format("experiment '{}': init_count must be >= 1", name));
    if (!(d.xi_lo <= d.xi_hi) || !(d.theta_lo <= d.theta_hi))
      throw ConfigError(fmt::format("experiment '{}': init ranges need lo <= hi", name));
  }
  if (plateau_window < 2) throw ConfigError(fmt::format("experiment '{}': plateau_window must be >= 2", name));
}

Chart ExperimentSpec::chart() const {
  switch (model) {
    case ModelKind::Cone: return Chart::cone();
    case ModelKind::Hyperboloid: return Chart::hyperboloid(eps.value_or(0.0));
    case ModelKind::Cusp: break;
  }
  throw ConfigError("the cusp model has no chart");
}

Vector3 ExperimentSpec::target_mean() const { return embed(Chart::cone(), target); }

std::vector<ChartPoint> ExperimentSpec::initializations() const {
  std::vector<ChartPoint> out = inits;
  if (init_distribution) {
    const auto& d = *init_distribution;
    StableRng rng(d.seed);
    for (int k = 0; k < d.count; ++k) {
      double xi = rng.uniform(d.xi_lo, d.xi_hi);
      double th = rng.uniform(d.theta_lo, d.theta_hi);
      out.push_back({xi, th});
    }
  }
  return out;
}

std::vector<ExperimentSpec> parse_config(std::string_view text) {
  std::vector<ExperimentSpec> specs;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    LineParser lp(line);
    std::string s = trim(raw.substr(0, raw.find('#')));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s != "[experiment]") lp.fail(fmt::format("unknown section '{}'", s));
      specs.emplace_back();
      continue;
    }
    auto eq = s.find('=');
    if (eq == std::string::npos) lp.fail("expected 'key = value'");
    if (specs.empty()) lp.fail("key outside of an [experiment] section");
    std::string key = trim(s.substr(0, eq)), value = trim(s.substr(eq + 1));
    if (value.empty()) lp.fail(fmt::format("empty value for '{}'", key));
    apply_key(specs.back(), key, value, lp);
  }
  if (specs.empty()) throw ConfigError("config contains no [experiment] section");
  for (const auto& sp : specs) sp.validate();
  return specs;
}

std::vector<ExperimentSpec> load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string to_config_text(const ExperimentSpec& spec) {
  const auto& o = spec.optimizer;
  std::string out = "[experiment]\n";
  auto kv = [&](std::string_view k, const std::string& v) { out += fmt::format("{} = {}\n", k, v); };
  auto pt = [](const ChartPoint& q) { return format_real(q.xi) + ", " + format_real(q.theta); };
  kv("name", spec.name);
  kv("model", to_string(spec.model));
  if (spec.eps) kv("eps", format_real(*spec.eps));
  kv("output_dir", spec.output_dir.string());
  if (spec.model == ModelKind::Cusp) {
    std::string lv;
    for (std::size_t i = 0; i < spec.levels.size(); ++i) lv += (i ? ", " : "") + format_real(spec.levels[i]);
    kv("levels", lv);
    kv("quiver_points", std::to_string(spec.quiver_points));
    kv("cusp_target", format_real(spec.cusp_target[0]) + ", " + format_real(spec.cusp_target[1]));
    return out;
  }
  kv("method", to_string(o.method));
  kv("step_size", format_real(o.step_size));
  kv("max_steps", std::to_string(o.max_steps));
  kv("grad_tol", format_real(o.grad_tol));
  kv("loss_tol", format_real(o.loss_tol));
  kv("damping", format_real(o.damping));
  kv("step_cap", format_real(o.step_cap));
  kv("mode", o.mode == SampleMode::Population ? "population" : "stochastic");
  kv("batch", std::to_string(o.batch));
  kv("seed", std::to_string(o.seed));
  kv("thin", std::to_string(o.thin));
  if (!spec.inits.empty()) {
    std::string s;
    for (std::size_t i = 0; i < spec.inits.size(); ++i) s += (i ? "; " : "") + pt(spec.inits[i]);
    kv("init", s);
  }
  if (spec.init_distribution) {
    const auto& d = *spec.init_distribution;
    kv("init_xi", format_real(d.xi_lo) + ", " + format_real(d.xi_hi));
    kv("init_theta", format_real(d.theta_lo) + ", " + format_real(d.theta_hi));
    kv("init_count", std::to_string(d.count));
    kv("init_seed", std::to_string(d.seed));
  }
  kv("target", pt(spec.target));
  kv("plateau_window", std::to_string(spec.plateau_window));
  kv("plateau_tol", format_real(spec.plateau_tol));
  return out;
}

}  // namespace stratlearn
