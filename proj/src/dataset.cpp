#include "gridsur/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <mutex>
#include <thread>

#include "gridsur/csv.hpp"
#include "gridsur/util.hpp"
#include "json.hpp"

namespace gridsur {

using nlohmann::json;

Vector attachment_powers(const Grid& grid, const ProfileSet& profiles, int step) {
  Vector row(2 * static_cast<Index>(grid.attachments.size()));
  for (std::size_t i = 0; i < grid.attachments.size(); ++i) {
    const auto& a = grid.attachments[i];
    const auto it = profiles.find(a.profile_id);
    if (it == profiles.end())
      throw std::invalid_argument("no profile '" + a.profile_id + "'");
    row[2 * i] = a.scaling * it->second.p.values.at(step);
    row[2 * i + 1] = a.scaling * it->second.q.values.at(step);
  }
  return row;
}

Vector simulate_step(const Grid& grid, const AdmittanceMatrix& y,
                     const Eigen::Ref<const Vector>& input_row,
                     const SolverOptions& opts) {
  const auto n = static_cast<Index>(grid.attachments.size());
  Vector p(n), q(n);
  for (Index i = 0; i < n; ++i) {
    p[i] = input_row[2 * i];
    q[i] = input_row[2 * i + 1];
  }
  const auto inj = build_injections(grid, {p.data(), static_cast<std::size_t>(n)},
                                    {q.data(), static_cast<std::size_t>(n)});
  return nr_solve(y, inj, opts).vm_pu;
}

ScenarioDataset generate_dataset(const Grid& grid, const ProfileSet& profiles,
                                 const DatasetOptions& opts) {
  for (const auto& a : grid.attachments) {
    const auto it = profiles.find(a.profile_id);
    if (it == profiles.end())
      throw std::invalid_argument("attachment profile '" + a.profile_id +
                                  "' is not available");
    if (it->second.p.size() != kStepsPerYear || it->second.q.size() != kStepsPerYear)
      throw std::invalid_argument("profile '" + a.profile_id + "' must have " +
                                  std::to_string(kStepsPerYear) + " steps");
  }

  ScenarioDataset ds;
  for (std::size_t i = 0; i < grid.attachments.size(); ++i) {
    const auto label = grid.attachment_label(i);
    ds.input_columns.push_back(label + ".p");
    ds.input_columns.push_back(label + ".q");
  }
  for (std::size_t b = 0; b < grid.buses.size(); ++b)
    ds.target_columns.push_back("bus" + std::to_string(b) + ".vm_pu");

  const auto d = static_cast<Index>(ds.input_columns.size());
  const auto m = static_cast<Index>(ds.target_columns.size());
  ds.inputs.resize(kStepsPerYear, d);
  ds.targets.resize(kStepsPerYear, m);
  ds.month.resize(kStepsPerYear);
  const AdmittanceMatrix y = build_ybus(grid);

  const int jobs = std::clamp(opts.jobs, 1, 64);
  int first_failure = kStepsPerYear;
  std::string failure_what;
  std::mutex failure_mutex;

  auto worker = [&](int begin, int end) {
    for (int t = begin; t < end; ++t) {
      try {
        const Vector row = attachment_powers(grid, profiles, t);
        ds.inputs.row(t) = row.transpose();
        ds.targets.row(t) = simulate_step(grid, y, row, opts.solver).transpose();
        ds.month[t] = month_of_step(t);
      } catch (const std::exception& e) {
        std::lock_guard lock(failure_mutex);
        if (t < first_failure) {
          first_failure = t;
          failure_what = e.what();
        }
        return;
      }
    }
  };

  if (jobs == 1) {
    worker(0, kStepsPerYear);
  } else {
    std::vector<std::jthread> threads;
    const int chunk = (kStepsPerYear + jobs - 1) / jobs;
    for (int j = 0; j < jobs; ++j)
      threads.emplace_back(worker, j * chunk, std::min(kStepsPerYear, (j + 1) * chunk));
  }
  if (first_failure < kStepsPerYear) throw DatasetError(first_failure, failure_what);

  ds.meta.profile_seed = opts.profile_config.seed;
  ds.meta.reactive_mode =
      opts.profile_config.reactive == ReactiveMode::ConstantPowerFactor ? "constant"
                                                                        : "independent";
  ds.meta.cos_phi = opts.profile_config.cos_phi;
  ds.meta.grid_hash = grid_hash(grid);
  ds.meta.tol_pu = opts.solver.tol_pu;
  ds.meta.max_iter = opts.solver.max_iter;
  ds.meta.out_of_envelope = static_cast<std::size_t>(
      (ds.targets.array() <= 0.5 || ds.targets.array() >= 1.5).count());
  return ds;
}

std::vector<Fold> monthly_folds(const ScenarioDataset& dataset) {
  if (static_cast<Index>(dataset.month.size()) != dataset.rows())
    throw std::invalid_argument("dataset has no month index");
  std::vector<Fold> folds(12);
  for (int k = 0; k < 12; ++k) folds[k].month = k + 1;
  for (Index r = 0; r < dataset.rows(); ++r) {
    const int month = dataset.month[r];
    if (month < 1 || month > 12) throw std::invalid_argument("month out of range");
    for (int k = 0; k < 12; ++k)
      (folds[k].month == month ? folds[k].test : folds[k].train).push_back(r);
  }
  return folds;
}

Matrix select_rows(const Matrix& m, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Index>(i)) = m.row(rows[i]);
  return out;
}

std::string sidecar_path(const std::string& csv_path) {
  std::filesystem::path p(csv_path);
  p.replace_extension(".meta.json");
  return p.string();
}

std::string dataset_to_csv(const ScenarioDataset& ds) {
  std::string out = "t";
  for (const auto& c : ds.input_columns) out += "," + c;
  for (const auto& c : ds.target_columns) out += "," + c;
  out += '\n';
  for (Index r = 0; r < ds.rows(); ++r) {
    out += std::to_string(r);
    for (Index c = 0; c < ds.inputs.cols(); ++c) {
      out += ',';
      out += format_double(ds.inputs(r, c), 17);
    }
    for (Index c = 0; c < ds.targets.cols(); ++c) {
      out += ',';
      out += format_double(ds.targets(r, c), 17);
    }
    out += '\n';
  }
  return out;
}

void write_dataset(const ScenarioDataset& ds, const std::string& csv_path) {
  write_file(csv_path, dataset_to_csv(ds));
  json meta = {
      {"rows", ds.rows()},
      {"step_minutes", kStepMinutes},
      {"input_columns", ds.input_columns},
      {"input_units", "MW for .p columns, Mvar for .q columns"},
      {"target_columns", ds.target_columns},
      {"target_units", "pu"},
      {"profile_seed", ds.meta.profile_seed},
      {"reactive_mode", ds.meta.reactive_mode},
      {"cos_phi", ds.meta.cos_phi},
      {"grid_hash", ds.meta.grid_hash},
      {"solver", {{"method", "newton-raphson"},
                  {"tol_pu", ds.meta.tol_pu},
                  {"max_iter", ds.meta.max_iter},
                  {"flat_start", true}}},
      {"out_of_envelope", ds.meta.out_of_envelope},
  };
  write_file(sidecar_path(csv_path), meta.dump(2) + "\n");
}

ScenarioDataset read_dataset(const std::string& csv_path) {
  const CsvTable table = parse_csv(read_file(csv_path));
  if (table.header.empty() || table.header[0] != "t")
    throw std::runtime_error(csv_path + ": first column must be 't'");
  ScenarioDataset ds;
  std::vector<std::size_t> in_cols, out_cols;
  for (std::size_t c = 1; c < table.header.size(); ++c) {
    const auto& name = table.header[c];
    if (name.ends_with(".vm_pu")) {
      ds.target_columns.push_back(name);
      out_cols.push_back(c);
    } else {
      if (!out_cols.empty())
        throw std::runtime_error(csv_path + ": input column after targets");
      ds.input_columns.push_back(name);
      in_cols.push_back(c);
    }
  }
  const auto rows = static_cast<Index>(table.rows);
  ds.inputs.resize(rows, static_cast<Index>(in_cols.size()));
  ds.targets.resize(rows, static_cast<Index>(out_cols.size()));
  ds.month.resize(table.rows);
  for (Index r = 0; r < rows; ++r) {
    const auto step = static_cast<int>(table.at(static_cast<std::size_t>(r), 0));
    ds.month[r] = month_of_step(step);
    for (std::size_t k = 0; k < in_cols.size(); ++k)
      ds.inputs(r, static_cast<Index>(k)) = table.at(static_cast<std::size_t>(r), in_cols[k]);
    for (std::size_t k = 0; k < out_cols.size(); ++k)
      ds.targets(r, static_cast<Index>(k)) = table.at(static_cast<std::size_t>(r), out_cols[k]);
  }
  if (std::filesystem::exists(sidecar_path(csv_path))) {
    const json meta = json::parse(read_file(sidecar_path(csv_path)));
    ds.meta.profile_seed = meta.value("profile_seed", std::uint64_t{0});
    ds.meta.reactive_mode = meta.value("reactive_mode", std::string("constant"));
    ds.meta.cos_phi = meta.value("cos_phi", 0.9);
    ds.meta.grid_hash = meta.value("grid_hash", std::uint64_t{0});
    ds.meta.out_of_envelope = meta.value("out_of_envelope", std::size_t{0});
    if (meta.contains("solver")) {
      ds.meta.tol_pu = meta["solver"].value("tol_pu", 1e-8);
      ds.meta.max_iter = meta["solver"].value("max_iter", 30);
    }
  }
  return ds;
}

}  // namespace gridsur
