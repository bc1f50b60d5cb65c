#include <cmath>
#include <sstream>

#include "gridsur/experiments.hpp"
#include "gridsur/util.hpp"

namespace gridsur {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json num(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double num(const json& j) {
  if (j.is_null()) return kNaN;
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return kNaN;
  }
  return j.get<double>();
}

json nums(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

std::vector<double> nums(const json& a) {
  std::vector<double> v;
  for (const auto& x : a) v.push_back(num(x));
  return v;
}

std::string fmt(double v, int digits = 6) {
  if (std::isnan(v)) return "-";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_double(v, digits);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

json test_json(const TestResult& t) {
  return {{"kind", to_string(t.kind)}, {"statistic", num(t.statistic)}, {"df1", num(t.df1)},
          {"df2", num(t.df2)}, {"p_value", num(t.p_value)}};
}

TestResult test_from_json(const json& j) {
  TestResult t;
  const auto k = j.at("kind").get<std::string>();
  for (TestKind kind : {TestKind::Levene, TestKind::ShapiroWilk, TestKind::AnovaF, TestKind::WelchT})
    if (k == to_string(kind)) t.kind = kind;
  t.statistic = num(j.at("statistic"));
  t.df1 = num(j.at("df1"));
  t.df2 = num(j.at("df2"));
  t.p_value = num(j.at("p_value"));
  return t;
}

std::string describe_test(const TestResult& t) {
  std::ostringstream os;
  switch (t.kind) {
    case TestKind::Levene:
    case TestKind::AnovaF:
      os << "F(" << fmt(t.df1) << ", " << fmt(t.df2) << ") = " << fmt(t.statistic);
      break;
    case TestKind::WelchT: os << "t(" << fmt(t.df1) << ") = " << fmt(t.statistic); break;
    case TestKind::ShapiroWilk: os << "W = " << fmt(t.statistic); break;
  }
  os << ", p = " << fmt(t.p_value);
  return os.str();
}

json accuracy_json(const AccuracyReport& r) {
  json models = json::array();
  for (const auto& m : r.models) {
    json sub = json::object();
    for (const auto& [k, v] : m.subgrid_rmse) sub[k] = num(v);
    models.push_back({{"name", m.name},
                      {"family", to_string(m.family)},
                      {"hyperparameters", to_json(m.params)},
                      {"tuning_score", num(m.tuning_score)},
                      {"fold_rmse", nums(m.fold_rmse)},
                      {"fold_error", m.fold_error},
                      {"yearly_rmse", num(m.yearly_rmse)},
                      {"pass", m.pass},
                      {"threshold", kRmseThreshold},
                      {"bus_rmse", nums(m.bus_rmse)},
                      {"subgrid_rmse", sub}});
  }
  return {{"bus_labels", r.bus_labels}, {"models", models}};
}

json timing_json(const TimingReport& r) {
  json cs = json::array();
  for (const auto& c : r.contenders)
    cs.push_back({{"name", c.name}, {"simulation", c.simulation}, {"seconds", nums(c.seconds)},
                  {"mean", num(c.mean)}, {"stddev", num(c.stddev)}, {"suf", num(c.suf)},
                  {"rmse", num(c.rmse)}});
  json j = {{"n_reps", r.n_reps}, {"steps", r.steps}, {"contenders", cs}};
  if (r.stats) {
    const auto& s = *r.stats;
    json sw = json::array();
    for (const auto& n : s.shapiro) {
      json e = {{"group", n.group}};
      if (n.test) e["test"] = test_json(*n.test);
      else e["error"] = n.error;
      sw.push_back(e);
    }
    json pairs = json::array();
    for (const auto& p : s.pairs)
      pairs.push_back({{"a", p.a}, {"b", p.b}, {"test", test_json(p.test)},
                       {"p_adjusted", num(p.p_adjusted)}, {"significant", p.significant}});
    j["tests"] = {{"alpha", s.alpha},          {"comparisons", s.comparisons},
                  {"alpha_adjusted", s.alpha_adjusted}, {"levene", test_json(s.levene)},
                  {"anova", test_json(s.anova)}, {"shapiro_wilk", sw},
                  {"pairwise_welch", pairs}};
  }
  return j;
}

}  // namespace

ReportFormat parse_report_format(std::string_view s) {
  if (s == "csv") return ReportFormat::Csv;
  if (s == "json") return ReportFormat::Json;
  if (s == "markdown" || s == "md") return ReportFormat::Markdown;
  throw std::invalid_argument("unknown report format '" + std::string(s) + "'");
}

std::string emit_report(const AccuracyReport& r, ReportFormat format) {
  if (format == ReportFormat::Json) return accuracy_json(r).dump(2) + "\n";
  std::ostringstream os;
  if (format == ReportFormat::Csv) {
    os << "model,family,month,rmse,error\n";
    for (const auto& m : r.models)
      for (std::size_t k = 0; k < m.fold_rmse.size(); ++k)
        os << csv_field(m.name) << ',' << to_string(m.family) << ',' << k + 1 << ','
           << (std::isnan(m.fold_rmse[k]) ? std::string("nan") : format_double(m.fold_rmse[k], 10))
           << ',' << csv_field(k < m.fold_error.size() ? m.fold_error[k] : "") << '\n';
    return os.str();
  }
  os << "| Model | RMSE | Verdict | Hyperparameters |\n|---|---|---|---|\n";
  for (const auto& m : r.models)
    os << "| " << m.name << " | " << fmt(m.yearly_rmse) << " | " << (m.pass ? "pass" : "fail")
       << " | " << describe(m.params) << " |\n";
  if (!r.models.empty() && !r.models.front().subgrid_rmse.empty()) {
    os << "\n| Model";
    for (const auto& [k, v] : r.models.front().subgrid_rmse) os << " | " << k;
    os << " |\n|---";
    for (std::size_t i = 0; i < r.models.front().subgrid_rmse.size(); ++i) os << "|---";
    os << "|\n";
    for (const auto& m : r.models) {
      os << "| " << m.name;
      for (const auto& [k, v] : m.subgrid_rmse) os << " | " << fmt(v);
      os << " |\n";
    }
  }
  os << "\n| Model";
  for (int k = 1; k <= 12; ++k) os << " | " << k;
  os << " |\n|---";
  for (int k = 1; k <= 12; ++k) os << "|---";
  os << "|\n";
  for (const auto& m : r.models) {
    os << "| " << m.name;
    for (double v : m.fold_rmse) os << " | " << fmt(v, 3);
    os << " |\n";
  }
  return os.str();
}

std::string emit_report(const TimingReport& r, ReportFormat format) {
  if (format == ReportFormat::Json) return timing_json(r).dump(2) + "\n";
  std::ostringstream os;
  if (format == ReportFormat::Csv) {
    os << "model,rep,seconds\n";
    for (const auto& c : r.contenders)
      for (std::size_t i = 0; i < c.seconds.size(); ++i)
        os << csv_field(c.name) << ',' << i + 1 << ',' << format_double(c.seconds[i], 10) << '\n';
    return os.str();
  }
  os << emit_summary(nullptr, &r);
  if (r.stats) {
    const auto& s = *r.stats;
    os << "\nLevene: " << describe_test(s.levene) << "\n";
    os << "ANOVA: " << describe_test(s.anova) << "\n";
    for (const auto& n : s.shapiro)
      os << "Shapiro-Wilk " << n.group << ": " << (n.test ? describe_test(*n.test) : n.error) << "\n";
    os << "\nPairwise Welch tests (" << s.comparisons << " comparisons, adjusted alpha "
       << fmt(s.alpha_adjusted) << ")\n\n| A | B | t | df | p | p (adj.) | significant |\n"
       << "|---|---|---|---|---|---|---|\n";
    for (const auto& p : s.pairs)
      os << "| " << p.a << " | " << p.b << " | " << fmt(p.test.statistic) << " | "
         << fmt(p.test.df1) << " | " << fmt(p.test.p_value) << " | " << fmt(p.p_adjusted)
         << " | " << (p.significant ? "yes" : "no") << " |\n";
  }
  return os.str();
}

std::string emit_summary(const AccuracyReport* accuracy, const TimingReport* timing) {
  std::ostringstream os;
  os << "| Model | RMSE | Calc. [s] | StD. | SUF |\n|---|---|---|---|---|\n";
  auto rmse_of = [&](const std::string& name, double fallback) {
    if (accuracy)
      for (const auto& m : accuracy->models)
        if (m.name == name) return m.yearly_rmse;
    return fallback;
  };
  if (timing) {
    for (const auto& c : timing->contenders)
      os << "| " << c.name << " | " << (c.simulation ? std::string("-") : fmt(rmse_of(c.name, c.rmse)))
         << " | " << fmt(c.mean) << " | " << fmt(c.stddev) << " | " << fmt(c.suf, 4) << " |\n";
  } else if (accuracy) {
    for (const auto& m : accuracy->models)
      os << "| " << m.name << " | " << fmt(m.yearly_rmse) << " | - | - | - |\n";
  }
  return os.str();
}

AccuracyReport accuracy_report_from_json(const json& j) {
  AccuracyReport r;
  r.bus_labels = j.at("bus_labels").get<std::vector<std::string>>();
  for (const auto& mj : j.at("models")) {
    ModelAccuracy m;
    m.name = mj.at("name").get<std::string>();
    m.family = parse_family(mj.at("family").get<std::string>());
    m.params = hyper_params_from_json(m.family, mj.at("hyperparameters"));
    m.tuning_score = num(mj.at("tuning_score"));
    m.fold_rmse = nums(mj.at("fold_rmse"));
    m.fold_error = mj.at("fold_error").get<std::vector<std::string>>();
    m.yearly_rmse = num(mj.at("yearly_rmse"));
    m.pass = mj.at("pass").get<bool>();
    m.bus_rmse = nums(mj.at("bus_rmse"));
    for (auto it = mj.at("subgrid_rmse").begin(); it != mj.at("subgrid_rmse").end(); ++it)
      m.subgrid_rmse[it.key()] = num(*it);
    r.models.push_back(std::move(m));
  }
  return r;
}

TimingReport timing_report_from_json(const json& j) {
  TimingReport r;
  r.n_reps = j.at("n_reps").get<int>();
  r.steps = j.at("steps").get<std::size_t>();
  for (const auto& cj : j.at("contenders")) {
    ContenderTiming c;
    c.name = cj.at("name").get<std::string>();
    c.simulation = cj.at("simulation").get<bool>();
    c.seconds = nums(cj.at("seconds"));
    c.mean = num(cj.at("mean"));
    c.stddev = num(cj.at("stddev"));
    c.suf = num(cj.at("suf"));
    c.rmse = num(cj.at("rmse"));
    r.contenders.push_back(std::move(c));
  }
  if (j.contains("tests")) {
    const auto& t = j.at("tests");
    StatsBattery s;
    s.alpha = t.at("alpha").get<double>();
    s.comparisons = t.at("comparisons").get<int>();
    s.alpha_adjusted = t.at("alpha_adjusted").get<double>();
    s.levene = test_from_json(t.at("levene"));
    s.anova = test_from_json(t.at("anova"));
    for (const auto& n : t.at("shapiro_wilk")) {
      NormalityResult nr;
      nr.group = n.at("group").get<std::string>();
      if (n.contains("test")) nr.test = test_from_json(n.at("test"));
      else nr.error = n.value("error", "");
      s.shapiro.push_back(std::move(nr));
    }
    for (const auto& p : t.at("pairwise_welch")) {
      PairwiseResult pr;
      pr.a = p.at("a").get<std::string>();
      pr.b = p.at("b").get<std::string>();
      pr.test = test_from_json(p.at("test"));
      pr.p_adjusted = num(p.at("p_adjusted"));
      pr.significant = p.at("significant").get<bool>();
      s.pairs.push_back(std::move(pr));
    }
    r.stats = std::move(s);
  }
  return r;
}

}  // namespace gridsur
