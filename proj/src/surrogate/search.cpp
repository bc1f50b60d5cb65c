#include "gridsur/surrogate/search.hpp"

#include <cmath>
#include <limits>

#include "gridsur/experiments.hpp"
#include "gridsur/parallel.hpp"
#include "gridsur/util.hpp"

namespace gridsur {

using nlohmann::json;

namespace {

struct Bounds {
  const char* name;
  double lo;
  bool lo_open;
  double hi;
  bool hi_open;
};

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr Bounds kBounds[] = {
    {"ridge", 0, false, kInf, true},        {"mtry", 1, false, kInf, true},
    {"sample_size", 0, true, 1, false},     {"nodesize", 1, false, kInf, true},
    {"n_trees", 1, false, kInf, true},      {"k", 1, false, kInf, true},
    {"epochs", 1, false, kInf, true},       {"hidden_layers", 0, false, kInf, true},
    {"batch_size", 1, false, kInf, true},   {"dropout", 0, false, 1, true},
    {"task_specific_layers", 0, false, kInf, true}, {"head_width", 1, false, kInf, true},
    {"learning_rate", 0, true, kInf, true},
};

void check_bounds(const std::string& name, double v) {
  for (const auto& b : kBounds) {
    if (name != b.name) continue;
    const bool ok = (b.lo_open ? v > b.lo : v >= b.lo) && (b.hi_open ? v < b.hi : v <= b.hi);
    if (!ok)
      throw std::invalid_argument("value " + format_double(v) + " out of range for '" + name + "'");
  }
}

}  // namespace

void HyperSpace::validate() const {
  check_family(family, base);
  const json keys = to_json(base);
  for (const auto& d : domains) {
    if (!keys.contains(d.name))
      throw std::invalid_argument("unknown hyperparameter '" + d.name + "' for " +
                                  std::string(to_string(family)));
    if (d.is_range) {
      if (!(d.lo <= d.hi) || !std::isfinite(d.lo) || !std::isfinite(d.hi))
        throw std::invalid_argument("invalid range for '" + d.name + "'");
      if (d.log && d.lo <= 0.0) throw std::invalid_argument("log range for '" + d.name + "' must be positive");
      if (d.integer && std::ceil(d.lo) > std::floor(d.hi))
        throw std::invalid_argument("integer range for '" + d.name + "' is empty");
      check_bounds(d.name, d.lo);
      check_bounds(d.name, d.hi);
    } else {
      if (d.values.empty()) throw std::invalid_argument("empty domain for '" + d.name + "'");
      const json& ref = keys.at(d.name);
      for (const auto& v : d.values) {
        if (ref.is_number_integer() && !v.is_number_integer())
          throw std::invalid_argument("domain of '" + d.name + "' must hold integers");
        if (ref.is_number() && !v.is_number())
          throw std::invalid_argument("domain of '" + d.name + "' must hold numbers");
        if (v.is_number()) check_bounds(d.name, v.get<double>());
      }
    }
  }
  // Every grid point must also be constructible.
  if (grid_size() > 0) (void)grid_point(0);
}

HyperParams HyperSpace::sample(std::mt19937_64& rng) const {
  json j = to_json(base);
  for (const auto& d : domains) {
    if (!d.is_range) {
      std::uniform_int_distribution<std::size_t> pick(0, d.values.size() - 1);
      j[d.name] = d.values[pick(rng)];
    } else if (d.integer) {
      const auto lo = static_cast<long long>(std::ceil(d.lo));
      const auto hi = static_cast<long long>(std::floor(d.hi));
      if (d.log) {
        std::uniform_real_distribution<double> u(std::log(static_cast<double>(lo)),
                                                 std::log(static_cast<double>(hi) + 1.0));
        j[d.name] = std::min(hi, static_cast<long long>(std::floor(std::exp(u(rng)))));
      } else {
        std::uniform_int_distribution<long long> u(lo, hi);
        j[d.name] = u(rng);
      }
    } else if (d.log) {
      std::uniform_real_distribution<double> u(std::log(d.lo), std::log(d.hi));
      j[d.name] = std::exp(u(rng));
    } else {
      std::uniform_real_distribution<double> u(d.lo, d.hi);
      j[d.name] = u(rng);
    }
  }
  return hyper_params_from_json(family, j);
}

std::size_t HyperSpace::grid_size() const {
  std::size_t n = 1;
  for (const auto& d : domains) {
    if (d.is_range) return 0;
    n *= d.values.size();
  }
  return n;
}

HyperParams HyperSpace::grid_point(std::size_t index) const {
  json j = to_json(base);
  // Last domain varies fastest.
  for (auto it = domains.rbegin(); it != domains.rend(); ++it) {
    if (it->is_range) throw std::invalid_argument("grid search needs list domains only");
    j[it->name] = it->values[index % it->values.size()];
    index /= it->values.size();
  }
  return hyper_params_from_json(family, j);
}

HyperSpace hyper_space_from_json(Family family, const json& j, const HyperParams& base) {
  if (!j.is_object()) throw std::invalid_argument("hyperparameter space must be a JSON object");
  HyperSpace s;
  s.family = family;
  s.base = base;
  for (auto it = j.begin(); it != j.end(); ++it) {
    Domain d;
    d.name = it.key();
    if (it->is_array()) {
      d.values.assign(it->begin(), it->end());
    } else if (it->is_object()) {
      d.is_range = true;
      d.lo = it->at("min").get<double>();
      d.hi = it->at("max").get<double>();
      d.log = it->value("log", false);
      d.integer = it->value("integer", false);
    } else {
      d.values.push_back(*it);
    }
    s.domains.push_back(std::move(d));
  }
  s.validate();
  return s;
}

HyperSpace hyper_space_from_json(Family family, const json& j) {
  HyperParams base;
  switch (family) {
    case Family::ReLr:
    case Family::RcLr: base = LinearParams{}; break;
    case Family::ReRf: base = ForestParams{}; break;
    case Family::Knn: base = KnnParams{}; break;
    case Family::Mlp: base = MlpParams{}; break;
  }
  return hyper_space_from_json(family, j, base);
}

json to_json(const HyperSpace& space) {
  json j = json::object();
  for (const auto& d : space.domains) {
    if (d.is_range)
      j[d.name] = {{"min", d.lo}, {"max", d.hi}, {"log", d.log}, {"integer", d.integer}};
    else
      j[d.name] = d.values;
  }
  return j;
}

Trial cross_validate(Family family, const HyperParams& hp, const ScenarioDataset& data,
                     const std::vector<Fold>& folds, std::uint64_t seed) {
  Trial trial;
  trial.params = hp;
  if (folds.empty()) throw std::invalid_argument("cross validation needs at least one fold");
  try {
    double sum = 0.0;
    for (const auto& fold : folds) {
      const auto model = fit_surrogate(family, hp, select_rows(data.inputs, fold.train),
                                       select_rows(data.targets, fold.train),
                                       derive_seed(seed, {static_cast<std::uint64_t>(fold.month)}));
      const double e = rmse(select_rows(data.targets, fold.test),
                            model->predict(select_rows(data.inputs, fold.test)));
      trial.fold_rmse.push_back(e);
      sum += e;
    }
    trial.score = sum / static_cast<double>(folds.size());
    if (!std::isfinite(trial.score)) trial.score = std::numeric_limits<double>::infinity();
  } catch (const std::exception& e) {
    trial.score = std::numeric_limits<double>::infinity();
    trial.error = e.what();
  }
  return trial;
}

namespace {

SearchResult pick_best(std::vector<Trial> trials) {
  SearchResult r;
  std::size_t best = 0;
  for (std::size_t i = 1; i < trials.size(); ++i)
    if (trials[i].score < trials[best].score) best = i;
  if (!std::isfinite(trials[best].score))
    throw FitError("every configuration failed: " + trials[best].error);
  r.best = trials[best].params;
  r.best_score = trials[best].score;
  r.trials = std::move(trials);
  return r;
}

SearchResult evaluate_all(Family family, const std::vector<HyperParams>& configs,
                          const ScenarioDataset& data, const std::vector<Fold>& folds,
                          std::uint64_t seed) {
  std::vector<Trial> trials(configs.size());
  parallel_for(static_cast<int>(configs.size()), [&](int i) {
    trials[static_cast<std::size_t>(i)] =
        cross_validate(family, configs[static_cast<std::size_t>(i)], data, folds,
                       derive_seed(seed, {static_cast<std::uint64_t>(i)}));
  });
  return pick_best(std::move(trials));
}

}  // namespace

SearchResult random_search_cv(const HyperSpace& space, const ScenarioDataset& data,
                              const std::vector<Fold>& folds, int budget, std::uint64_t seed) {
  if (budget < 1) throw std::invalid_argument("search budget must be >= 1");
  space.validate();
  std::mt19937_64 rng(derive_seed(seed, "sample"));
  std::vector<HyperParams> configs;
  for (int i = 0; i < budget; ++i) configs.push_back(space.sample(rng));
  return evaluate_all(space.family, configs, data, folds, seed);
}

SearchResult grid_search_cv(const HyperSpace& space, const ScenarioDataset& data,
                            const std::vector<Fold>& folds, std::uint64_t seed) {
  space.validate();
  const std::size_t n = space.grid_size();
  if (n == 0) throw std::invalid_argument("grid search needs list domains only");
  std::vector<HyperParams> configs;
  for (std::size_t i = 0; i < n; ++i) configs.push_back(space.grid_point(i));
  return evaluate_all(space.family, configs, data, folds, seed);
}

}  // namespace gridsur
