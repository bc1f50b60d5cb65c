#include "gridsur/cli.hpp"

#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "gridsur/dataset.hpp"
#include "gridsur/parallel.hpp"
#include "gridsur/util.hpp"

namespace gridsur {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Tuner parse_tuner(const std::string& s) {
  if (s == "none") return Tuner::None;
  if (s == "random") return Tuner::Random;
  if (s == "grid") return Tuner::Grid;
  throw std::invalid_argument("unknown tuner '" + s + "' (expected none, random or grid)");
}

ReactiveMode parse_reactive(const std::string& s) {
  if (s == "constant") return ReactiveMode::ConstantPowerFactor;
  if (s == "independent") return ReactiveMode::Independent;
  throw std::invalid_argument("unknown reactive mode '" + s + "' (expected constant or independent)");
}

std::string slug(const std::string& name) {
  std::string s;
  for (char c : name) s += std::isalnum(static_cast<unsigned char>(c)) ? static_cast<char>(std::tolower(c)) : '_';
  return s;
}

std::string resolve_path(const std::string& p, const std::string& base) {
  if (p.empty() || base.empty() || fs::path(p).is_absolute()) return p;
  return (fs::path(base) / p).lexically_normal().string();
}

bool is_fixture_name(const std::string& s) {
  try {
    (void)parse_fixture_kind(s);
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

ModelSpec model_spec_from_json(const json& j) {
  ModelSpec s;
  s.family = parse_family(j.at("family").get<std::string>());
  s.name = j.value("name", std::string(display_name(s.family)));
  s.params = hyper_params_from_json(s.family, j.value("params", json::object()));
  s.tuner = parse_tuner(j.value("tuner", std::string("none")));
  s.budget = j.value("budget", 20);
  if (j.contains("space")) s.space = hyper_space_from_json(s.family, j.at("space"), s.params);
  if (s.tuner != Tuner::None && !s.space)
    throw std::invalid_argument("model '" + s.name + "' has a tuner but no space");
  return s;
}

std::vector<ModelSpec> default_models() {
  const json specs = json::parse(R"([
    {"name": "RE LR", "family": "re_lr", "params": {"drop_dependent": true}},
    {"name": "RC LR", "family": "rc_lr", "params": {"drop_dependent": true}},
    {"name": "RE RF", "family": "re_rf", "tuner": "random", "budget": 20,
     "params": {"n_trees": 20},
     "space": {"mtry": [2, 4, 8], "sample_size": {"min": 0.1, "max": 0.5},
               "nodesize": [2, 5, 10, 20]}},
    {"name": "k-NN", "family": "knn", "tuner": "grid",
     "space": {"k": [1, 2, 3, 5, 8, 13, 21], "weighting": ["uniform", "inverse_distance"]}},
    {"name": "ANN", "family": "mlp", "tuner": "random", "budget": 20,
     "params": {"epochs": 40, "head_width": 4},
     "space": {"hidden_layers": [1, 2], "batch_size": [32, 64, 128],
               "activation": ["relu", "tanh", "sigmoid"], "dropout": [0.0, 0.01, 0.05],
               "task_specific_layers": [1, 2],
               "learning_rate": {"min": 0.0003, "max": 0.003, "log": true}}},
    {"name": "ANN dense", "family": "mlp",
     "params": {"epochs": 40, "hidden_layers": 2, "batch_size": 64, "activation": "tanh",
                "dropout": 0.0, "task_specific_layers": 0, "learning_rate": 0.001}}
  ])");
  std::vector<ModelSpec> out;
  for (const auto& s : specs) out.push_back(model_spec_from_json(s));
  return out;
}

RunConfig run_config_from_json(const json& j, const std::string& base_dir) {
  RunConfig c;
  if (!j.is_object()) throw std::invalid_argument("run config must be a JSON object");
  static const std::vector<std::string> known = {"grid", "seed", "profiles", "solver", "dataset",
                                                 "models", "tuning_months", "n_reps", "out_dir",
                                                 "jobs", "notes"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      throw std::invalid_argument("unknown config key '" + it.key() + "'");
  c.grid = j.value("grid", c.grid);
  if (!is_fixture_name(c.grid)) c.grid = resolve_path(c.grid, base_dir);
  c.seed = j.value("seed", c.seed);
  if (j.contains("profiles")) {
    const auto& p = j.at("profiles");
    c.reactive = parse_reactive(p.value("reactive", std::string("constant")));
    c.cos_phi = p.value("cos_phi", c.cos_phi);
  }
  if (j.contains("solver")) {
    c.tol_pu = j.at("solver").value("tol_pu", c.tol_pu);
    c.max_iter = j.at("solver").value("max_iter", c.max_iter);
  }
  c.dataset = resolve_path(j.value("dataset", std::string()), base_dir);
  if (j.contains("models")) {
    for (const auto& m : j.at("models")) c.models.push_back(model_spec_from_json(m));
  } else {
    c.models = default_models();
  }
  c.tuning_months = j.value("tuning_months", c.tuning_months);
  c.n_reps = j.value("n_reps", c.n_reps);
  c.out_dir = resolve_path(j.value("out_dir", c.out_dir), base_dir);
  c.jobs = j.value("jobs", c.jobs);
  return c;
}

Grid resolve_grid(const std::string& grid) {
  if (is_fixture_name(grid)) return build_fixture(parse_fixture_kind(grid));
  if (!fs::exists(grid)) throw std::runtime_error("grid file '" + grid + "' does not exist");
  try {
    return load_grid(grid);
  } catch (const std::exception& e) {
    throw std::runtime_error(grid + ": " + e.what());
  }
}

ProfileConfig profile_config(const RunConfig& cfg) {
  ProfileConfig pc;
  pc.seed = derive_seed(cfg.seed, "profiles");
  pc.reactive = cfg.reactive;
  pc.cos_phi = cfg.cos_phi;
  return pc;
}

ScenarioDataset obtain_dataset(const Grid& grid, const RunConfig& cfg, std::ostream& log) {
  if (!cfg.dataset.empty()) {
    if (!fs::exists(cfg.dataset)) throw std::runtime_error("dataset '" + cfg.dataset + "' does not exist");
    log << "reading dataset " << cfg.dataset << "\n";
    ScenarioDataset ds = read_dataset(cfg.dataset);
    if (static_cast<std::size_t>(ds.targets.cols()) != grid.buses.size() ||
        static_cast<std::size_t>(ds.inputs.cols()) != 2 * grid.attachments.size())
      throw std::runtime_error("dataset '" + cfg.dataset + "' does not match the grid");
    return ds;
  }
  log << "synthesizing profiles and running " << kStepsPerYear << " power flows\n";
  DatasetOptions opts;
  opts.profile_config = profile_config(cfg);
  opts.solver.tol_pu = cfg.tol_pu;
  opts.solver.max_iter = cfg.max_iter;
  opts.jobs = cfg.jobs;
  return generate_dataset(grid, build_profiles(grid, opts.profile_config), opts);
}

namespace {

struct Flags {
  std::string config, out_dir, output, grid, dataset, profiles, reactive, kind, format = "markdown";
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs, n_reps;
  std::optional<double> cos_phi;
};

RunConfig effective_config(const Flags& f) {
  RunConfig c;
  if (!f.config.empty()) {
    if (!fs::exists(f.config)) throw std::runtime_error("config '" + f.config + "' does not exist");
    json j;
    try {
      j = json::parse(read_file(f.config));
    } catch (const json::exception& e) {
      throw std::runtime_error(f.config + ": " + e.what());
    }
    c = run_config_from_json(j, fs::path(f.config).parent_path().string());
  } else {
    c.models = default_models();
  }
  if (f.seed) c.seed = *f.seed;
  if (f.jobs) c.jobs = *f.jobs;
  if (f.n_reps) c.n_reps = *f.n_reps;
  if (!f.out_dir.empty()) c.out_dir = f.out_dir;
  if (!f.grid.empty()) c.grid = f.grid;
  if (!f.dataset.empty()) c.dataset = f.dataset;
  if (!f.reactive.empty()) c.reactive = parse_reactive(f.reactive);
  if (f.cos_phi) c.cos_phi = *f.cos_phi;
  if (c.jobs < 1) throw UsageError("--jobs must be >= 1");
  return c;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
    write_file(path, text);
  }
}

std::string out_file(const RunConfig& c, const std::string& name) {
  fs::create_directories(c.out_dir);
  return (fs::path(c.out_dir) / name).string();
}

/// Hyperparameters from an earlier exp1 run in the same output directory.
std::optional<AccuracyReport> previous_accuracy(const RunConfig& c) {
  const fs::path p = fs::path(c.out_dir) / "accuracy.json";
  if (!fs::exists(p)) return std::nullopt;
  return accuracy_report_from_json(json::parse(read_file(p.string())));
}

struct FittedModel {
  std::string name;
  SurrogatePtr model;
  double rmse = std::numeric_limits<double>::quiet_NaN();
};

std::vector<FittedModel> fit_all(const RunConfig& c, const ScenarioDataset& data, std::ostream& log) {
  const auto previous = previous_accuracy(c);
  const auto folds = monthly_folds(data);
  std::vector<Fold> tuning;
  for (int m : c.tuning_months) tuning.push_back(folds.at(static_cast<std::size_t>(m - 1)));
  std::vector<FittedModel> out;
  for (const auto& spec : c.models) {
    HyperParams hp = spec.params;
    double rmse_value = std::numeric_limits<double>::quiet_NaN();
    bool found = false;
    if (previous)
      for (const auto& m : previous->models)
        if (m.name == spec.name && m.family == spec.family) {
          hp = m.params;
          rmse_value = m.yearly_rmse;
          found = true;
        }
    const std::uint64_t model_seed = derive_seed(c.seed, spec.name);
    if (!found && spec.tuner != Tuner::None && spec.space) {
      log << "tuning " << spec.name << "\n";
      hp = spec.tuner == Tuner::Grid
               ? grid_search_cv(*spec.space, data, tuning, derive_seed(model_seed, "tune")).best
               : random_search_cv(*spec.space, data, tuning, spec.budget, derive_seed(model_seed, "tune")).best;
    }
    log << "fitting " << spec.name << " (" << describe(hp) << ")\n";
    auto model = fit_surrogate(spec.family, hp, data.inputs, data.targets, derive_seed(model_seed, "full"));
    out.push_back({spec.name, std::move(model), rmse_value});
  }
  return out;
}

int run(const std::string& cmd, const Flags& f, std::ostream& out, std::ostream& err) {
  if (cmd == "fixture") {
    const FixtureKind kind = parse_fixture_kind(f.kind);
    emit(serialize_grid(build_fixture(kind), fixture_notes(kind)), f.output, out);
    return 0;
  }
  const RunConfig c = effective_config(f);
  set_worker_count(c.jobs);
  if (cmd == "report") {
    const fs::path acc = fs::path(c.out_dir) / "accuracy.json";
    const fs::path tim = fs::path(c.out_dir) / "timing.json";
    std::optional<AccuracyReport> a;
    std::optional<TimingReport> t;
    if (fs::exists(acc)) a = accuracy_report_from_json(json::parse(read_file(acc.string())));
    if (fs::exists(tim)) t = timing_report_from_json(json::parse(read_file(tim.string())));
    if (!a && !t) throw std::runtime_error("no accuracy.json or timing.json in '" + c.out_dir + "'");
    const ReportFormat format = parse_report_format(f.format);
    std::string text;
    if (format == ReportFormat::Markdown) {
      text = "# Surrogate benchmark\n\n" + emit_summary(a ? &*a : nullptr, t ? &*t : nullptr);
      if (a) text += "\n## Accuracy\n\n" + emit_report(*a, format);
      if (t) text += "\n## Timing\n\n" + emit_report(*t, format);
    } else {
      if (a) text += emit_report(*a, format);
      if (t) text += emit_report(*t, format);
    }
    emit(text, f.output, out);
    return 0;
  }

  const Grid grid = resolve_grid(c.grid);
  if (cmd == "synth") {
    emit(profiles_to_csv(build_profiles(grid, profile_config(c))), f.output, out);
    return 0;
  }
  if (cmd == "dataset") {
    ScenarioDataset ds;
    if (!f.profiles.empty()) {
      DatasetOptions opts;
      opts.profile_config = profile_config(c);
      opts.solver.tol_pu = c.tol_pu;
      opts.solver.max_iter = c.max_iter;
      opts.jobs = c.jobs;
      ds = generate_dataset(grid, profiles_from_csv(read_file(f.profiles)), opts);
    } else {
      RunConfig fresh = c;
      fresh.dataset.clear();
      ds = obtain_dataset(grid, fresh, err);
    }
    const std::string path = f.output.empty() ? out_file(c, "dataset.csv") : f.output;
    if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
    write_dataset(ds, path);
    if (ds.meta.out_of_envelope > 0)
      err << "warning: " << ds.meta.out_of_envelope << " voltages outside (0.5, 1.5) pu\n";
    err << "wrote " << path << "\n";
    return 0;
  }

  const ScenarioDataset data = obtain_dataset(grid, c, err);
  if (cmd == "train") {
    for (const auto& m : fit_all(c, data, err)) {
      const std::string path = out_file(c, "models/" + slug(m.name) + ".json");
      fs::create_directories(fs::path(path).parent_path());
      write_file(path, serialize_model(*m.model).dump() + "\n");
      err << "wrote " << path << "\n";
    }
    return 0;
  }
  if (cmd == "exp1") {
    AccuracyOptions opts;
    opts.seed = c.seed;
    opts.tuning_months = c.tuning_months;
    err << "running accuracy experiment for " << c.models.size() << " models\n";
    const AccuracyReport r = run_accuracy_experiment(grid, data, c.models, opts);
    write_file(out_file(c, "accuracy.csv"), emit_report(r, ReportFormat::Csv));
    write_file(out_file(c, "accuracy.json"), emit_report(r, ReportFormat::Json));
    write_file(out_file(c, "report.md"), "# Surrogate benchmark\n\n" + emit_summary(&r, nullptr) +
                                             "\n## Accuracy\n\n" + emit_report(r, ReportFormat::Markdown));
    out << emit_summary(&r, nullptr);
    return 0;
  }
  if (cmd == "exp2") {
    const auto fitted = fit_all(c, data, err);
    std::vector<TimedModel> timed;
    for (const auto& m : fitted) timed.push_back({m.name, m.model.get(), m.rmse});
    TimingOptions opts;
    opts.n_reps = c.n_reps;
    opts.solver.tol_pu = c.tol_pu;
    opts.solver.max_iter = c.max_iter;
    err << "timing " << timed.size() + 1 << " contenders, " << c.n_reps << " repetitions\n";
    const TimingReport t = run_timing_experiment(grid, data, timed, opts);
    write_file(out_file(c, "timing.json"), emit_report(t, ReportFormat::Json));
    write_file(out_file(c, "timing.csv"), emit_report(t, ReportFormat::Csv));
    const auto a = previous_accuracy(c);
    std::string md = "# Surrogate benchmark\n\n" + emit_summary(a ? &*a : nullptr, &t);
    if (a) md += "\n## Accuracy\n\n" + emit_report(*a, ReportFormat::Markdown);
    md += "\n## Timing\n\n" + emit_report(t, ReportFormat::Markdown);
    write_file(out_file(c, "report.md"), md);
    out << emit_summary(a ? &*a : nullptr, &t);
    return 0;
  }
  throw UsageError("unknown subcommand '" + cmd + "'");
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Power-flow surrogate benchmark", "gridsur"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  Flags f;
  app.add_option("--config", f.config, "Run configuration (JSON)");
  app.add_option("--seed", f.seed, "Master seed (overrides the config)");
  app.add_option("--jobs", f.jobs, "Worker threads for dataset generation and fitting");
  app.add_option("--out-dir", f.out_dir, "Output directory");
  app.add_option("-o,--output", f.output, "Output file (default: standard output)");

  auto* fixture = app.add_subcommand("fixture", "Write a built-in grid as JSON");
  fixture->add_option("--kind", f.kind, "cigre-lv-like or rural-lv-like")->required();
  auto* synth = app.add_subcommand("synth", "Write synthetic yearly profiles as CSV");
  auto* dataset = app.add_subcommand("dataset", "Run the yearly power flow and write the dataset");
  auto* train = app.add_subcommand("train", "Tune and fit every configured model, write model files");
  auto* exp1 = app.add_subcommand("exp1", "Accuracy experiment (12 monthly folds)");
  auto* exp2 = app.add_subcommand("exp2", "Timing experiment and statistical tests");
  auto* report = app.add_subcommand("report", "Render reports found in the output directory");
  for (auto* sc : {synth, dataset, train, exp1, exp2}) {
    sc->add_option("--grid", f.grid, "Fixture name or grid JSON path");
    sc->add_option("--reactive", f.reactive, "constant or independent");
    sc->add_option("--cos-phi", f.cos_phi, "Power factor for constant mode");
  }
  for (auto* sc : {train, exp1, exp2}) sc->add_option("--dataset", f.dataset, "Pre-generated dataset CSV");
  dataset->add_option("--profiles", f.profiles, "Profiles CSV (default: synthesize)");
  exp2->add_option("--n-reps", f.n_reps, "Timed repetitions per contender");
  report->add_option("--format", f.format, "markdown, csv or json");

  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    return run(cmd, f, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace gridsur
