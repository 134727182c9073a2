#include "windcast/app/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "windcast/core/csv.hpp"
#include "windcast/core/error.hpp"

namespace windcast::app {

namespace {

namespace pt = boost::property_tree;

std::string join(const std::vector<double>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) s += (i ? ", " : "") + csv::fmt_double(values[i]);
  return s;
}

std::string join(const std::vector<int>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) s += (i ? ", " : "") + std::to_string(values[i]);
  return s;
}

std::string join(const std::vector<std::string>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) s += (i ? ", " : "") + values[i];
  return s;
}

std::vector<std::string> split_list(std::string_view text, char sep = ',') {
  std::vector<std::string> out;
  if (csv::trim(text).empty()) return out;
  for (auto& field : csv::split_line(text, sep)) out.emplace_back(csv::trim(field));
  return out;
}

// Typed access to one section; every key read is marked so leftovers can be
// reported as unknown.
class Section {
 public:
  Section(std::string name, const pt::ptree* tree) : name_(std::move(name)), tree_(tree) {}

  std::optional<std::string> raw(const std::string& key) {
    seen_.insert(key);
    if (!tree_) return std::nullopt;
    auto child = tree_->get_child_optional(pt::ptree::path_type(key, '\0'));
    if (!child) return std::nullopt;
    return std::string(csv::trim(child->data()));
  }

  void get(const std::string& key, double& out) {
    if (auto v = raw(key)) out = number(key, *v);
  }
  void get(const std::string& key, int& out) {
    if (auto v = raw(key)) out = static_cast<int>(integer(key, *v));
  }
  void get(const std::string& key, std::uint64_t& out) {
    if (auto v = raw(key)) {
      long x = integer(key, *v);
      if (x < 0) fail(key, "must be >= 0");
      out = static_cast<std::uint64_t>(x);
    }
  }
  void get(const std::string& key, std::string& out) {
    if (auto v = raw(key)) out = *v;
  }
  void get(const std::string& key, std::vector<double>& out) {
    if (auto v = raw(key)) {
      out.clear();
      for (auto& f : split_list(*v)) out.push_back(number(key, f));
    }
  }
  void get(const std::string& key, std::vector<int>& out) {
    if (auto v = raw(key)) {
      out.clear();
      for (auto& f : split_list(*v)) out.push_back(static_cast<int>(integer(key, f)));
    }
  }

  void reject_unknown() const {
    if (!tree_) return;
    for (const auto& [key, _] : *tree_)
      if (!seen_.count(key)) throw ConfigError(fmt::format("unknown key [{}] {}", name_, key));
  }

  [[noreturn]] void fail(const std::string& key, std::string_view why) const {
    throw ConfigError(fmt::format("[{}] {}: {}", name_, key, why));
  }

 private:
  double number(const std::string& key, std::string_view text) const {
    try {
      return csv::parse_double(text, key);
    } catch (const DataError&) {
      fail(key, fmt::format("not a number: '{}'", text));
    }
  }
  long integer(const std::string& key, std::string_view text) const {
    try {
      return csv::parse_long(text, key);
    } catch (const DataError&) {
      fail(key, fmt::format("not an integer: '{}'", text));
    }
  }

  std::string name_;
  const pt::ptree* tree_;
  std::set<std::string> seen_;
};

void require(bool ok, std::string_view section, std::string_view key, std::string_view why) {
  if (!ok) throw ConfigError(fmt::format("[{}] {}: {}", section, key, why));
}

bool in_open_unit(double x) { return x > 0.0 && x < 1.0; }

// Rethrows library precondition failures as configuration errors.
template <class F>
void check(std::string_view section, F&& f) {
  try {
    f();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("[{}] {}", section, e.what()));
  }
}

std::string offsite_text(const std::vector<point::OffsiteTerm>& terms) {
  std::vector<std::string> parts;
  for (const auto& t : terms) {
    std::string s = t.site;
    for (int l : t.lags) s += ":" + std::to_string(l);
    parts.push_back(s);
  }
  return join(parts);
}

std::vector<point::OffsiteTerm> parse_offsite(std::string_view text) {
  std::vector<point::OffsiteTerm> terms;
  for (auto& item : split_list(text)) {
    auto fields = split_list(item, ':');
    if (fields.size() < 2 || fields[0].empty())
      throw ConfigError(fmt::format("[model] offsite: expected site:lag[:lag...], got '{}'", item));
    point::OffsiteTerm term{fields[0], {}};
    for (std::size_t i = 1; i < fields.size(); ++i) {
      try {
        term.lags.push_back(static_cast<int>(csv::parse_long(fields[i], "offsite lag")));
      } catch (const DataError&) {
        throw ConfigError(fmt::format("[model] offsite: bad lag '{}'", fields[i]));
      }
    }
    terms.push_back(std::move(term));
  }
  return terms;
}

template <class E, class Parse>
void get_enum(Section& s, const std::string& key, E& out, Parse parse) {
  if (auto v = s.raw(key)) {
    try {
      out = parse(*v);
    } catch (const std::exception&) {
      s.fail(key, fmt::format("unknown value '{}'", *v));
    }
  }
}

}  // namespace

std::string_view method_name(ProbMethod m) {
  switch (m) {
    case ProbMethod::QuantileRegression: return "quantile-regression";
    case ProbMethod::Dressing: return "dressing";
    case ProbMethod::Parametric: return "parametric";
  }
  return "";
}

ProbMethod parse_method(std::string_view name) {
  for (auto m : {ProbMethod::QuantileRegression, ProbMethod::Dressing, ProbMethod::Parametric})
    if (method_name(m) == name) return m;
  throw std::invalid_argument(fmt::format("unknown probabilistic method '{}'", name));
}

RunConfig default_config() {
  RunConfig c;
  c.sites = SiteSet({"z1", "z2", "z3", "z4", "z5"}, {775.0, 450.0, 425.0, 575.0, 250.0});
  c.simulator.start = parse_utc("2007-01-01T00:00:00Z");
  c.model.spec.family = point::ModelFamily::CPARX;
  c.model.spec.mode = point::HorizonMode::Direct;
  c.model.spec.lags = {1};
  c.model.spec.max_lead = 43;
  return c;
}

void RunConfig::validate() const {
  require(run.hours >= 1000 && run.hours <= 1000000, "run", "hours", "must lie in [1000, 1000000]");
  require(run.train_fraction >= 0.1 && run.train_fraction <= 0.95, "run", "train_fraction",
          "must lie in [0.1, 0.95]");
  require(run.issue_hour >= 0 && run.issue_hour < 24, "run", "issue_hour", "must lie in [0, 23]");
  require(!run.out.empty(), "run", "out", "must not be empty");

  const std::size_t m = sites.size();
  require(m >= 1, "sites", "ids", "need at least one site");
  {
    std::set<std::string> unique(sites.ids().begin(), sites.ids().end());
    require(unique.size() == m, "sites", "ids", "duplicate site id");
    for (const auto& id : sites.ids())
      require(!id.empty() && id.find_first_of(",:\" ") == std::string::npos, "sites", "ids",
              "ids must be nonempty without commas, colons, quotes or spaces");
  }

  const auto& s = simulator;
  require(s.ar_coefficient.size() == 1 || s.ar_coefficient.size() == m, "simulator",
          "ar_coefficient", "give one value or one per site");
  for (double phi : s.ar_coefficient)
    require(in_open_unit(phi), "simulator", "ar_coefficient", "must lie in (0,1)");
  require(s.mean_speed.size() == 1 || s.mean_speed.size() == m, "simulator", "mean_speed",
          "give one value or one per site");
  for (double v : s.mean_speed)
    require(v > 0.0 && v < 40.0, "simulator", "mean_speed", "must lie in (0, 40)");
  require(s.speed_sd >= 0.0, "simulator", "speed_sd", "must be >= 0");
  require(s.spatial_rho > -1.0 && s.spatial_rho < 1.0, "simulator", "spatial_rho",
          "must lie in (-1,1)");
  require(s.diurnal_amplitude >= 0.0, "simulator", "diurnal_amplitude", "must be >= 0");
  require(s.diurnal_phase >= 0.0 && s.diurnal_phase < 24.0, "simulator", "diurnal_phase",
          "must lie in [0, 24)");
  if (s.regime) {
    require(s.regime->threshold > 0.0, "simulator", "regime_threshold", "must be > 0");
    require(s.regime->sd_low >= 0.0 && s.regime->sd_high >= 0.0, "simulator", "regime_sd",
            "must be >= 0");
  }
  check("simulator", [&] { s.curve.validate(); });
  require(s.power_noise_sd >= 0.0 && s.power_noise_sd <= 0.5, "simulator", "power_noise_sd",
          "must lie in [0, 0.5]");
  require(s.direction_step_sd >= 0.0, "simulator", "direction_step_sd", "must be >= 0");
  require(s.nwp_error_sd >= 0.0, "simulator", "nwp_error_sd", "must be >= 0");
  require(s.nwp_every >= 1 && s.nwp_every <= 24, "simulator", "nwp_every", "must lie in [1, 24]");
  require((run.issue_hour - hour_of_day(s.start) + 24) % s.nwp_every == 0, "simulator",
          "nwp_every", "daily issue hour must coincide with an NWP run");

  check("model", [&] { model.spec.validate(); });
  require(model.forgetting > 0.9 && model.forgetting <= 1.0, "model", "forgetting",
          "must lie in (0.9, 1]");
  for (const auto& term : model.spec.offsite)
    require(sites.index_of(term.site).has_value(), "model", "offsite",
            fmt::format("unknown site '{}'", term.site));
  require(model.spec.max_lead <= 168, "model", "max_lead", "must be <= 168");

  const auto& p = probabilistic;
  require(p.levels.size() >= 2, "probabilistic", "levels", "need at least two levels");
  for (std::size_t i = 0; i < p.levels.size(); ++i) {
    require(in_open_unit(p.levels[i]), "probabilistic", "levels", "must lie in (0,1)");
    require(i == 0 || p.levels[i] > p.levels[i - 1], "probabilistic", "levels",
            "must be strictly increasing");
  }
  require(p.forgetting > 0.9 && p.forgetting <= 1.0, "probabilistic", "forgetting",
          "must lie in (0.9, 1]");
  require(p.variance_smoothing > 0.0 && p.variance_smoothing <= 1.0, "probabilistic",
          "variance_smoothing", "must lie in (0, 1]");
  require(p.training_every >= 1 && p.training_every <= 168, "probabilistic", "training_every",
          "must lie in [1, 168]");

  require(in_open_unit(copula.smoothing), "copula", "smoothing", "must lie in (0,1)");
  require(copula.warmup_days >= 0 && copula.warmup_days <= 3650, "copula", "warmup_days",
          "must lie in [0, 3650]");
  require(copula.trajectories >= 2 && copula.trajectories <= 10000, "copula", "trajectories",
          "must lie in [2, 10000]");

  check("market", [&] { market.spec.validate(); });
  require(market.spec.last_lead <= model.spec.max_lead, "market", "last_lead",
          "must not exceed [model] max_lead");
  require(market.site.empty() || sites.index_of(market.site).has_value(), "market", "site",
          fmt::format("unknown site '{}'", market.site));

  check("reserve", [&] {
    reserve.up.validate();
    reserve.down.validate();
  });
  require(reserve.load_error_sd > 0.0 && reserve.load_error_sd <= 0.5, "reserve", "load_error_sd",
          "must lie in (0, 0.5]");
  require(reserve.outage_probability >= 0.0 && reserve.outage_probability < 1.0, "reserve",
          "outage_probability", "must lie in [0, 1)");
  require(reserve.outage_size >= 0.0 && reserve.outage_size <= 1.0, "reserve", "outage_size",
          "must lie in [0, 1]");
  require(reserve.step >= 1e-4 && reserve.step <= 0.05, "reserve", "step",
          "must lie in [0.0001, 0.05]");
  require(reserve.scenarios >= 10 && reserve.scenarios <= 100000, "reserve", "scenarios",
          "must lie in [10, 100000]");

  require(verify.bootstrap_block >= 1, "verify", "bootstrap_block", "must be >= 1");
  require(verify.replicates >= 10, "verify", "replicates", "must be >= 10");
}

void RunConfig::check_paths() const {
  if (market.prices && !std::filesystem::exists(*market.prices))
    throw ConfigError(fmt::format("[market] prices: file not found: {}", market.prices->string()));
}

sim::SimConfig RunConfig::simulator_config() const {
  const std::size_t m = sites.size();
  auto per_site = [m](const std::vector<double>& v) {
    return v.size() == 1 ? std::vector<double>(m, v[0]) : v;
  };
  sim::SimConfig c;
  c.sites = sites;
  c.ar_coefficient = per_site(simulator.ar_coefficient);
  c.mean_speed = per_site(simulator.mean_speed);
  c.spatial_correlation = sim::exponential_correlation(m, simulator.spatial_rho);
  c.speed_sd = simulator.speed_sd;
  c.diurnal_amplitude = simulator.diurnal_amplitude;
  c.diurnal_phase = simulator.diurnal_phase;
  c.regime = simulator.regime;
  c.curve = simulator.curve;
  c.power_noise_sd = simulator.power_noise_sd;
  c.direction_step_sd = simulator.direction_step_sd;
  c.start = simulator.start;
  c.seed = run.seed;
  return c;
}

std::size_t RunConfig::market_site() const {
  return market.site.empty() ? 0 : *sites.index_of(market.site);
}

RunConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("config line {}: {}", e.line(), e.message()));
  }
  static const std::vector<std::string> known = {"run",     "sites",  "simulator",
                                                 "model",   "probabilistic", "copula",
                                                 "market",  "reserve", "verify"};
  for (const auto& [name, child] : tree) {
    if (std::find(known.begin(), known.end(), name) == known.end())
      throw ConfigError(fmt::format("unknown section [{}]", name));
    if (child.empty() && !child.data().empty())
      throw ConfigError(fmt::format("key '{}' outside a section", name));
  }
  auto section = [&](const std::string& name) {
    return Section(name, tree.get_child_optional(name).get_ptr());
  };

  RunConfig c = default_config();

  auto run = section("run");
  run.get("seed", c.run.seed);
  if (auto v = run.raw("out")) c.run.out = *v;
  run.get("hours", c.run.hours);
  run.get("train_fraction", c.run.train_fraction);
  run.get("issue_hour", c.run.issue_hour);
  run.reject_unknown();

  auto sites = section("sites");
  std::vector<std::string> ids = c.sites.ids();
  std::vector<double> caps = c.sites.capacities();
  if (auto v = sites.raw("ids")) ids = split_list(*v);
  sites.get("capacities", caps);
  sites.reject_unknown();
  if (ids.size() != caps.size())
    throw ConfigError("[sites] ids and capacities differ in length");
  check("sites", [&] { c.sites = SiteSet(ids, caps); });

  auto sim = section("simulator");
  auto& s = c.simulator;
  sim.get("ar_coefficient", s.ar_coefficient);
  sim.get("mean_speed", s.mean_speed);
  sim.get("speed_sd", s.speed_sd);
  sim.get("spatial_rho", s.spatial_rho);
  sim.get("diurnal_amplitude", s.diurnal_amplitude);
  sim.get("diurnal_phase", s.diurnal_phase);
  {
    std::string regime = s.regime ? "on" : "off";
    sim.get("regime", regime);
    if (regime != "on" && regime != "off") sim.fail("regime", "expected on or off");
    sim::RegimeSwitch rs = s.regime.value_or(sim::RegimeSwitch{});
    sim.get("regime_threshold", rs.threshold);
    sim.get("regime_sd_low", rs.sd_low);
    sim.get("regime_sd_high", rs.sd_high);
    s.regime = regime == "on" ? std::optional(rs) : std::nullopt;
  }
  sim.get("cut_in", s.curve.cut_in);
  sim.get("rated", s.curve.rated);
  sim.get("cut_off", s.curve.cut_off);
  sim.get("ramp_shape", s.curve.ramp_shape);
  sim.get("power_noise_sd", s.power_noise_sd);
  sim.get("direction_step_sd", s.direction_step_sd);
  if (auto v = sim.raw("start")) {
    try {
      s.start = parse_utc(*v);
    } catch (const DataError&) {
      sim.fail("start", fmt::format("not a UTC time stamp: '{}'", *v));
    }
  }
  sim.get("nwp_error_sd", s.nwp_error_sd);
  sim.get("nwp_every", s.nwp_every);
  sim.reject_unknown();

  auto model = section("model");
  auto& spec = c.model.spec;
  get_enum(model, "family", spec.family, point::parse_model_family);
  model.get("lags", spec.lags);
  get_enum(model, "mode", spec.mode, point::parse_horizon_mode);
  model.get("max_lead", spec.max_lead);
  get_enum(model, "regime_covariate", spec.regime.covariate, point::parse_covariate);
  model.get("thresholds", spec.regime.thresholds);
  if (auto v = model.raw("offsite")) spec.offsite = parse_offsite(*v);
  get_enum(model, "grid_covariate", spec.grid.covariate, point::parse_covariate);
  model.get("grid_nodes", spec.grid.nodes);
  model.get("grid_lo", spec.grid.lo);
  model.get("grid_hi", spec.grid.hi);
  model.get("bandwidth", spec.grid.bandwidth);
  model.get("lead_bucket_hours", spec.lead_bucket_hours);
  model.get("forgetting", c.model.forgetting);
  model.reject_unknown();

  auto probabilistic = section("probabilistic");
  auto& p = c.probabilistic;
  get_enum(probabilistic, "method", p.method, parse_method);
  probabilistic.get("levels", p.levels);
  probabilistic.get("forgetting", p.forgetting);
  get_enum(probabilistic, "family", p.family, prob::parse_family);
  probabilistic.get("variance_smoothing", p.variance_smoothing);
  probabilistic.get("training_every", p.training_every);
  probabilistic.reject_unknown();

  auto copula = section("copula");
  copula.get("smoothing", c.copula.smoothing);
  copula.get("trajectories", c.copula.trajectories);
  copula.get("warmup_days", c.copula.warmup_days);
  copula.reject_unknown();

  auto market = section("market");
  market.get("gate_closure_offset", c.market.spec.gate_closure_offset);
  market.get("first_lead", c.market.spec.first_lead);
  market.get("last_lead", c.market.spec.last_lead);
  market.get("site", c.market.site);
  if (auto v = market.raw("prices")) {
    if (v->empty())
      c.market.prices.reset();
    else
      c.market.prices = *v;
  }
  market.reject_unknown();

  auto reserve = section("reserve");
  reserve.get("up_holding", c.reserve.up.holding);
  reserve.get("up_shortage", c.reserve.up.shortage);
  reserve.get("down_holding", c.reserve.down.holding);
  reserve.get("down_shortage", c.reserve.down.shortage);
  reserve.get("load_error_sd", c.reserve.load_error_sd);
  reserve.get("outage_probability", c.reserve.outage_probability);
  reserve.get("outage_size", c.reserve.outage_size);
  reserve.get("step", c.reserve.step);
  reserve.get("scenarios", c.reserve.scenarios);
  reserve.reject_unknown();

  auto verify = section("verify");
  verify.get("bootstrap_block", c.verify.bootstrap_block);
  verify.get("replicates", c.verify.replicates);
  verify.reject_unknown();

  c.validate();
  return c;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config {}", path.string()));
  return parse_config(in);
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream o;
  auto kv = [&](std::string_view key, const std::string& value) {
    o << key << " = " << value << '\n';
  };
  auto num = [](double v) { return csv::fmt_double(v); };

  o << "[run]\n";
  kv("seed", std::to_string(c.run.seed));
  kv("out", c.run.out.string());
  kv("hours", std::to_string(c.run.hours));
  kv("train_fraction", num(c.run.train_fraction));
  kv("issue_hour", std::to_string(c.run.issue_hour));

  o << "\n[sites]\n";
  kv("ids", join(c.sites.ids()));
  kv("capacities", join(c.sites.capacities()));

  const auto& s = c.simulator;
  o << "\n[simulator]\n";
  kv("ar_coefficient", join(s.ar_coefficient));
  kv("mean_speed", join(s.mean_speed));
  kv("speed_sd", num(s.speed_sd));
  kv("spatial_rho", num(s.spatial_rho));
  kv("diurnal_amplitude", num(s.diurnal_amplitude));
  kv("diurnal_phase", num(s.diurnal_phase));
  kv("regime", s.regime ? "on" : "off");
  if (s.regime) {
    kv("regime_threshold", num(s.regime->threshold));
    kv("regime_sd_low", num(s.regime->sd_low));
    kv("regime_sd_high", num(s.regime->sd_high));
  }
  kv("cut_in", num(s.curve.cut_in));
  kv("rated", num(s.curve.rated));
  kv("cut_off", num(s.curve.cut_off));
  kv("ramp_shape", num(s.curve.ramp_shape));
  kv("power_noise_sd", num(s.power_noise_sd));
  kv("direction_step_sd", num(s.direction_step_sd));
  kv("start", format_utc(s.start));
  kv("nwp_error_sd", num(s.nwp_error_sd));
  kv("nwp_every", std::to_string(s.nwp_every));

  const auto& spec = c.model.spec;
  o << "\n[model]\n";
  kv("family", std::string(point::family_name(spec.family)));
  kv("lags", join(spec.lags));
  kv("mode", std::string(point::mode_name(spec.mode)));
  kv("max_lead", std::to_string(spec.max_lead));
  kv("regime_covariate", std::string(point::covariate_name(spec.regime.covariate)));
  kv("thresholds", join(spec.regime.thresholds));
  kv("offsite", offsite_text(spec.offsite));
  kv("grid_covariate", std::string(point::covariate_name(spec.grid.covariate)));
  kv("grid_nodes", std::to_string(spec.grid.nodes));
  kv("grid_lo", num(spec.grid.lo));
  kv("grid_hi", num(spec.grid.hi));
  kv("bandwidth", num(spec.grid.bandwidth));
  kv("lead_bucket_hours", std::to_string(spec.lead_bucket_hours));
  kv("forgetting", num(c.model.forgetting));

  const auto& p = c.probabilistic;
  o << "\n[probabilistic]\n";
  kv("method", std::string(method_name(p.method)));
  kv("levels", join(p.levels));
  kv("forgetting", num(p.forgetting));
  kv("family", std::string(prob::family_name(p.family)));
  kv("variance_smoothing", num(p.variance_smoothing));
  kv("training_every", std::to_string(p.training_every));

  o << "\n[copula]\n";
  kv("smoothing", num(c.copula.smoothing));
  kv("trajectories", std::to_string(c.copula.trajectories));
  kv("warmup_days", std::to_string(c.copula.warmup_days));

  o << "\n[market]\n";
  kv("gate_closure_offset", std::to_string(c.market.spec.gate_closure_offset));
  kv("first_lead", std::to_string(c.market.spec.first_lead));
  kv("last_lead", std::to_string(c.market.spec.last_lead));
  kv("site", c.market.site);
  kv("prices", c.market.prices ? c.market.prices->string() : "");

  o << "\n[reserve]\n";
  kv("up_holding", num(c.reserve.up.holding));
  kv("up_shortage", num(c.reserve.up.shortage));
  kv("down_holding", num(c.reserve.down.holding));
  kv("down_shortage", num(c.reserve.down.shortage));
  kv("load_error_sd", num(c.reserve.load_error_sd));
  kv("outage_probability", num(c.reserve.outage_probability));
  kv("outage_size", num(c.reserve.outage_size));
  kv("step", num(c.reserve.step));
  kv("scenarios", std::to_string(c.reserve.scenarios));

  o << "\n[verify]\n";
  kv("bootstrap_block", std::to_string(c.verify.bootstrap_block));
  kv("replicates", std::to_string(c.verify.replicates));
  return o.str();
}

}  // namespace windcast::app
