#include "windcast/point/serialize.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "windcast/core/csv.hpp"
#include "windcast/core/error.hpp"

namespace windcast::point {

namespace {

constexpr int kFormatVersion = 1;

template <class Seq>
std::string join(const Seq& values) {
  std::string s;
  for (const auto& v : values) {
    if (!s.empty()) s += ' ';
    if constexpr (std::is_floating_point_v<std::decay_t<decltype(v)>>)
      s += csv::fmt_double(v);
    else
      s += fmt::format("{}", v);
  }
  return s;
}

std::vector<std::string> words(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::vector<double> doubles(const std::vector<std::string>& w, std::size_t from) {
  std::vector<double> out;
  for (std::size_t i = from; i < w.size(); ++i) out.push_back(csv::parse_double(w[i], "model value"));
  return out;
}

std::vector<int> ints(const std::vector<std::string>& w, std::size_t from) {
  std::vector<int> out;
  for (std::size_t i = from; i < w.size(); ++i)
    out.push_back(static_cast<int>(csv::parse_long(w[i], "model integer")));
  return out;
}

}  // namespace

void save_model(std::ostream& out, const FittedModel& model) {
  const auto& s = model.spec;
  out << fmt::format("windcast-model {}\n", kFormatVersion);
  out << fmt::format("family {}\n", family_name(s.family));
  out << fmt::format("site {}\n", model.site);
  out << fmt::format("mode {}\n", mode_name(s.mode));
  out << fmt::format("max_lead {}\n", s.max_lead);
  out << fmt::format("lags {}\n", join(s.lags));
  out << fmt::format("regime_covariate {}\n", covariate_name(s.regime.covariate));
  out << fmt::format("thresholds {}\n", join(s.regime.thresholds));
  for (const auto& term : s.offsite) out << fmt::format("offsite {} {}\n", term.site, join(term.lags));
  out << fmt::format("grid_covariate {}\n", covariate_name(s.grid.covariate));
  out << fmt::format("grid {} {} {} {}\n", s.grid.nodes, csv::fmt_double(s.grid.lo),
                     csv::fmt_double(s.grid.hi), csv::fmt_double(s.grid.bandwidth));
  out << fmt::format("lead_bucket_hours {}\n", s.lead_bucket_hours);
  for (const auto& c : model.power_curves)
    out << fmt::format("power_curve {} {}\n", csv::fmt_double(c.midpoint), csv::fmt_double(c.width));
  out << fmt::format("in_sample_rmse {}\n", csv::fmt_double(model.in_sample_rmse));
  for (std::size_t l = 0; l < model.leads.size(); ++l) {
    const auto& lm = model.leads[l];
    out << fmt::format("lead {} {} {} {}\n", l + 1, lm.rows, csv::fmt_double(lm.rmse), join(lm.sigma));
    for (const auto& c : lm.coefficients) {
      std::vector<double> v(c.data(), c.data() + c.size());
      out << fmt::format("coef {}\n", join(v));
    }
  }
  out << "end\n";
}

void save_model(const std::filesystem::path& path, const FittedModel& model) {
  auto out = csv::open_out(path);
  save_model(out, model);
}

FittedModel load_model(std::istream& in) {
  FittedModel m;
  auto& s = m.spec;
  std::string line;
  int line_no = 0;
  bool header = false, ended = false;
  auto fail = [&](std::string_view what) {
    return DataError(fmt::format("model file line {}: {}", line_no, what));
  };
  while (std::getline(in, line)) {
    ++line_no;
    auto w = words(line);
    if (w.empty()) continue;
    const auto& key = w[0];
    try {
      if (!header) {
        if (key != "windcast-model" || w.size() != 2) throw fail("missing 'windcast-model' header");
        if (csv::parse_long(w[1], "version") != kFormatVersion) throw fail("unsupported version");
        header = true;
      } else if (key == "family") {
        s.family = parse_model_family(w.at(1));
      } else if (key == "site") {
        m.site = w.at(1);
      } else if (key == "mode") {
        s.mode = parse_horizon_mode(w.at(1));
      } else if (key == "max_lead") {
        s.max_lead = static_cast<int>(csv::parse_long(w.at(1), "max_lead"));
      } else if (key == "lags") {
        s.lags = ints(w, 1);
      } else if (key == "regime_covariate") {
        s.regime.covariate = parse_covariate(w.at(1));
      } else if (key == "thresholds") {
        s.regime.thresholds = doubles(w, 1);
      } else if (key == "offsite") {
        s.offsite.push_back({w.at(1), ints(w, 2)});
      } else if (key == "grid_covariate") {
        s.grid.covariate = parse_covariate(w.at(1));
      } else if (key == "grid") {
        if (w.size() != 5) throw fail("grid needs nodes lo hi bandwidth");
        s.grid.nodes = static_cast<int>(csv::parse_long(w[1], "nodes"));
        s.grid.lo = csv::parse_double(w[2], "lo");
        s.grid.hi = csv::parse_double(w[3], "hi");
        s.grid.bandwidth = csv::parse_double(w[4], "bandwidth");
      } else if (key == "lead_bucket_hours") {
        s.lead_bucket_hours = static_cast<int>(csv::parse_long(w.at(1), "lead_bucket_hours"));
      } else if (key == "power_curve") {
        if (w.size() != 3) throw fail("power_curve needs midpoint and width");
        m.power_curves.push_back({csv::parse_double(w[1], "midpoint"), csv::parse_double(w[2], "width")});
      } else if (key == "in_sample_rmse") {
        m.in_sample_rmse = csv::parse_double(w.at(1), "in_sample_rmse");
      } else if (key == "lead") {
        if (w.size() < 4) throw fail("lead needs index rows rmse sigma...");
        if (csv::parse_long(w[1], "lead") != static_cast<long>(m.leads.size()) + 1)
          throw fail("lead blocks out of order");
        LeadModel lm;
        lm.rows = static_cast<std::size_t>(csv::parse_long(w[2], "rows"));
        lm.rmse = csv::parse_double(w[3], "rmse");
        lm.sigma = doubles(w, 4);
        m.leads.push_back(std::move(lm));
      } else if (key == "coef") {
        if (m.leads.empty()) throw fail("coef before any lead block");
        auto v = doubles(w, 1);
        m.leads.back().coefficients.emplace_back(
            Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
      } else if (key == "end") {
        ended = true;
        break;
      } else {
        throw fail(fmt::format("unknown key '{}'", key));
      }
    } catch (const std::invalid_argument& e) {
      throw fail(e.what());
    } catch (const std::out_of_range&) {
      throw fail("missing value");
    }
  }
  if (!header || !ended) throw DataError("truncated model file");
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(fmt::format("model file: {}", e.what()));
  }
  const std::size_t expect_leads = s.mode == HorizonMode::Iterated ? 1 : static_cast<std::size_t>(s.max_lead);
  if (m.leads.size() != expect_leads) throw DataError("model file: wrong number of lead blocks");
  for (const auto& lm : m.leads)
    for (const auto& c : lm.coefficients)
      if (static_cast<std::size_t>(c.size()) != s.parameter_count())
        throw DataError("model file: coefficient length mismatch");
  return m;
}

FittedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  return load_model(in);
}

}  // namespace windcast::point
