#include "common.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "windcast/core/csv.hpp"
#include "windcast/core/error.hpp"
#include "windcast/core/random.hpp"

namespace windcast::app::detail {

void require_input(const fs::path& path) {
  if (!fs::exists(path)) throw DataError(fmt::format("missing stage input: {}", path.string()));
}

std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t purpose, TimePoint origin) {
  const auto hours = static_cast<std::uint64_t>(
      std::chrono::duration_cast<Hours>(origin.time_since_epoch()).count());
  return make_stream({seed, purpose, hours})();
}

const point::NwpForecast* Inputs::nwp_at(std::size_t site, std::size_t row) const {
  if (nwp.empty()) return nullptr;
  return nwp[site].find(series.times()[row]);
}

Inputs load_inputs(const RunConfig& config, const Layout& layout) {
  require_input(layout.series());
  Inputs in;
  in.series = load_series(layout.series(), config.sites);
  if (config.model.spec.needs_nwp()) {
    for (const auto& id : config.sites.ids()) {
      require_input(layout.nwp(id));
      in.nwp.push_back(point::read_nwp(layout.nwp(id)));
    }
  }
  return in;
}

std::size_t first_usable_row(const point::ModelSpec& spec) {
  int lag = *std::max_element(spec.lags.begin(), spec.lags.end());
  for (const auto& term : spec.offsite)
    lag = std::max(lag, *std::max_element(term.lags.begin(), term.lags.end()));
  return static_cast<std::size_t>(lag - 1);
}

std::vector<std::size_t> daily_origins(const RunConfig& config, const Inputs& inputs,
                                       std::size_t first, std::size_t last) {
  const auto& times = inputs.series.times();
  const auto lead = static_cast<std::size_t>(config.model.spec.max_lead);
  std::vector<std::size_t> out;
  for (std::size_t t = std::max(first, first_usable_row(config.model.spec)); t + lead < last; ++t) {
    if (hour_of_day(times[t]) != config.run.issue_hour) continue;
    bool ok = true;
    for (std::size_t s = 0; s < inputs.nwp.size() && ok; ++s) {
      const auto* run = inputs.nwp_at(s, t);
      ok = run && run->horizon() >= config.model.spec.max_lead;
    }
    if (ok) out.push_back(t);
  }
  return out;
}

std::vector<TrainingCase> training_cases(const point::FittedModel& model, const Inputs& inputs,
                                         std::size_t site, std::size_t train_end, int every) {
  const auto lead = static_cast<std::size_t>(model.spec.max_lead);
  const auto step = static_cast<std::size_t>(every);
  std::vector<TrainingCase> out;
  const std::size_t first = first_usable_row(model.spec);
  for (std::size_t t = (first + step - 1) / step * step; t + lead < train_end; t += step) {
    const auto* run = inputs.nwp_at(site, t);
    if (model.spec.needs_nwp() && (!run || run->horizon() < model.spec.max_lead)) continue;
    try {
      out.push_back({t, point::predict_point(model, inputs.series, t, run)});
    } catch (const DataError&) {
      // Gaps in the training history only drop that origin.
    }
  }
  return out;
}

void save_prob_model(const fs::path& path, const ProbModel& m) {
  auto out = csv::open_out(path);
  out << "windcast-prob 1\n";
  out << "method " << method_name(m.method) << '\n';
  out << "site " << m.site << '\n';
  out << "levels";
  for (double a : m.levels) out << ' ' << csv::fmt_double(a);
  out << '\n';
  if (m.method == ProbMethod::QuantileRegression) {
    for (std::size_t k = 0; k < m.qr.size(); ++k) {
      const auto& coefs = m.qr[k].coefficients();
      for (std::size_t l = 0; l < coefs.size(); ++l) {
        out << "coef " << k + 1 << ' ' << l;
        for (Eigen::Index i = 0; i < coefs[l].size(); ++i) out << ' ' << csv::fmt_double(coefs[l](i));
        out << '\n';
      }
    }
  } else if (m.method == ProbMethod::Parametric) {
    out << "family " << prob::family_name(m.family) << '\n';
    out << "nu " << csv::fmt_double(m.nu) << '\n';
    for (std::size_t k = 0; k < m.variance.size(); ++k)
      out << "variance " << k + 1 << ' ' << csv::fmt_double(m.variance[k]) << '\n';
  }
  out << "end\n";
}

ProbModel load_prob_model(const fs::path& path) {
  require_input(path);
  std::ifstream in(path);
  auto bad = [&](std::string_view why) {
    return DataError(fmt::format("{}: {}", path.string(), why));
  };
  std::string line;
  if (!std::getline(in, line) || line != "windcast-prob 1") throw bad("not a probabilistic model");
  ProbModel m;
  std::map<std::size_t, std::map<std::size_t, Eigen::VectorXd>> coefs;
  bool ended = false;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string key;
    fields >> key;
    auto number = [&] {
      std::string token;
      if (!(fields >> token)) throw bad(fmt::format("truncated '{}' line", key));
      return csv::parse_double(token, key);
    };
    if (key == "method") {
      std::string v;
      fields >> v;
      m.method = parse_method(v);
    } else if (key == "site") {
      fields >> m.site;
    } else if (key == "levels") {
      std::string token;
      while (fields >> token) m.levels.push_back(csv::parse_double(token, "level"));
    } else if (key == "coef") {
      const auto k = static_cast<std::size_t>(number());
      const auto l = static_cast<std::size_t>(number());
      std::vector<double> c;
      std::string token;
      while (fields >> token) c.push_back(csv::parse_double(token, "coefficient"));
      coefs[k][l] = Eigen::Map<Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
    } else if (key == "family") {
      std::string v;
      fields >> v;
      m.family = prob::parse_family(v);
    } else if (key == "nu") {
      m.nu = number();
    } else if (key == "variance") {
      const auto k = static_cast<std::size_t>(number());
      if (k != m.variance.size() + 1) throw bad("variance leads out of order");
      m.variance.push_back(number());
    } else if (key == "end") {
      ended = true;
      break;
    } else {
      throw bad(fmt::format("unknown key '{}'", key));
    }
  }
  if (!ended) throw bad("truncated file");
  for (std::size_t k = 1; k <= coefs.size(); ++k) {
    auto it = coefs.find(k);
    if (it == coefs.end() || it->second.size() != m.levels.size()) throw bad("incomplete coefficients");
    std::vector<Eigen::VectorXd> per_level;
    for (auto& [_, c] : it->second) per_level.push_back(c);
    m.qr.emplace_back(m.levels, std::move(per_level), std::vector<bool>(m.levels.size(), true));
  }
  return m;
}

std::vector<OriginForecasts> group_by_origin(const std::vector<prob::MarginalForecast>& rows,
                                             const SiteSet& sites, int leads) {
  const std::size_t dim = sites.size() * static_cast<std::size_t>(leads);
  std::vector<OriginForecasts> out;
  for (std::size_t i = 0; i < rows.size(); i += dim) {
    OriginForecasts group{rows[i].origin, {}};
    if (i + dim > rows.size())
      throw DataError(fmt::format("incomplete forecast block at origin {}", format_utc(rows[i].origin)));
    for (std::size_t j = 0; j < dim; ++j) {
      const auto& r = rows[i + j];
      const std::size_t s = j / static_cast<std::size_t>(leads);
      const int k = static_cast<int>(j % static_cast<std::size_t>(leads)) + 1;
      if (r.origin != group.origin || r.site != sites.id(s) || r.lead != k)
        throw DataError(fmt::format("forecast rows out of order at origin {}, site {}, lead {}",
                                    format_utc(r.origin), r.site, r.lead));
      group.marginals.push_back(r.cdf);
    }
    out.push_back(std::move(group));
  }
  return out;
}

MultivariateTarget target_at(const RunConfig& config, TimePoint origin) {
  return MultivariateTarget(config.sites, LeadTimeSet(origin, config.model.spec.max_lead));
}

std::vector<double> observed_window(const MultivariateTarget& target, const SpaceTimeSeries& series) {
  try {
    return flatten(target, series);
  } catch (const DataError&) {
    return {};
  }
}

std::map<TimePoint, std::vector<double>> read_point_forecasts(const fs::path& path,
                                                              const SiteSet& sites, int leads) {
  require_input(path);
  auto rows = csv::read_rows(path);
  if (rows.empty()) throw DataError(fmt::format("{}: empty file", path.string()));
  const auto& h = rows[0];
  const auto c_origin = csv::column(h, "origin"), c_site = csv::column(h, "site"),
             c_lead = csv::column(h, "lead_h"), c_value = csv::column(h, "forecast");
  const std::size_t dim = sites.size() * static_cast<std::size_t>(leads);
  std::map<TimePoint, std::vector<double>> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const auto site = sites.index_of(r.at(c_site));
    const long k = csv::parse_long(r.at(c_lead), "lead_h");
    if (!site || k < 1 || k > leads)
      throw DataError(fmt::format("{}: bad site or lead on row {}", path.string(), i + 1));
    auto& v = out[parse_utc(r.at(c_origin))];
    if (v.empty()) v.assign(dim, std::numeric_limits<double>::quiet_NaN());
    v[*site * static_cast<std::size_t>(leads) + static_cast<std::size_t>(k - 1)] =
        csv::parse_double(r.at(c_value), "forecast");
  }
  for (const auto& [origin, v] : out)
    for (double x : v)
      if (std::isnan(x))
        throw DataError(fmt::format("{}: incomplete point forecasts at {}", path.string(),
                                    format_utc(origin)));
  return out;
}

}  // namespace windcast::app::detail
