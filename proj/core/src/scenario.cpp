#include "pfolio/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "pfolio/errors.hpp"
#include "pfolio/random.hpp"
#include "pfolio/text.hpp"

namespace pfolio {

namespace {

constexpr const char* kDescriptionFile = "description.txt";
constexpr const char* kRuntimesFile = "runtimes.csv";
constexpr const char* kFeaturesFile = "features.csv";
constexpr const char* kFeatureCostsFile = "feature_costs.csv";
constexpr const char* kCvFile = "cv.csv";

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("missing file: " + path.string());
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

std::string_view run_status_name(RunStatus status) {
  switch (status) {
    case RunStatus::solved:
      return "solved";
    case RunStatus::timeout:
      return "timeout";
    case RunStatus::crashed:
      return "crashed";
  }
  return "unknown";
}

int Scenario::n_folds() const {
  int k = 0;
  for (int f : folds) k = std::max(k, f);
  return k;
}

std::size_t Scenario::instance_index(std::string_view id) const {
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (instances[i] == id) return i;
  }
  throw ValidationError("unknown instance id: " + std::string(id));
}

std::size_t Scenario::algorithm_index(std::string_view id) const {
  for (std::size_t i = 0; i < algorithms.size(); ++i) {
    if (algorithms[i] == id) return i;
  }
  throw ValidationError("unknown algorithm id: " + std::string(id));
}

void Scenario::validate() const {
  if (cutoff <= 0.0) {
    throw ValidationError("cutoff must be positive");
  }
  std::set<std::string> seen_instances(instances.begin(), instances.end());
  if (seen_instances.size() != instances.size()) {
    throw ValidationError("duplicate instance id");
  }
  std::set<std::string> seen_algorithms(algorithms.begin(), algorithms.end());
  if (seen_algorithms.size() != algorithms.size()) {
    throw ValidationError("duplicate algorithm id");
  }
  const std::size_t n = instances.size();
  const std::size_t m = algorithms.size();
  if (performance.n_instances != n || performance.n_algorithms != m ||
      performance.runtimes.size() != n * m ||
      performance.statuses.size() != n * m) {
    throw ValidationError("performance matrix is not dense");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < m; ++a) {
      double rt = performance.runtime(i, a);
      if (!(rt > 0.0) || rt > cutoff) {
        throw ValidationError("runtime outside (0, cutoff] for instance " +
                              instances[i] + ", algorithm " + algorithms[a]);
      }
      if (performance.status(i, a) != RunStatus::solved && rt != cutoff) {
        throw ValidationError("unsolved run not recorded at cutoff");
      }
    }
  }
  if (features.values.rows != n) {
    throw ValidationError("feature matrix row count mismatch");
  }
  if (features.values.cols != features.names.size()) {
    throw ValidationError("ragged feature matrix");
  }
  if (feature_costs.size() != n || solved_by_features.size() != n) {
    throw ValidationError("feature costs do not cover all instances");
  }
  for (double c : feature_costs) {
    if (c < 0.0) throw ValidationError("negative feature cost");
  }
  if (!folds.empty()) {
    if (folds.size() != n) {
      throw ValidationError("fold assignment does not cover all instances");
    }
    int k = n_folds();
    std::vector<int> counts(static_cast<std::size_t>(k) + 1, 0);
    for (int f : folds) {
      if (f < 1 || f > k) throw ValidationError("fold index out of range");
      ++counts[static_cast<std::size_t>(f)];
    }
    for (int f = 1; f <= k; ++f) {
      if (counts[static_cast<std::size_t>(f)] == 0) {
        throw ValidationError("empty fold " + std::to_string(f));
      }
    }
  }
}

namespace {

struct Description {
  std::string name;
  double cutoff = 0.0;
};

Description load_description(const std::filesystem::path& path) {
  Description desc;
  bool have_cutoff = false, have_name = false;
  auto lines = read_lines(path);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    std::string_view line = trim(lines[ln]);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw input_error(path.string(), ln + 1, "expected key=value");
    }
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key == "name") {
      desc.name = value;
      have_name = true;
    } else if (key == "cutoff") {
      auto v = parse_double(value);
      if (!v || !(*v > 0.0)) {
        throw input_error(path.string(), ln + 1, "cutoff must be positive");
      }
      desc.cutoff = *v;
      have_cutoff = true;
    }
    // Unknown keys are ignored.
  }
  if (!have_name) throw ValidationError(path.string() + ": missing key name");
  if (!have_cutoff) {
    throw ValidationError(path.string() + ": missing key cutoff");
  }
  return desc;
}

}  // namespace

Scenario load_scenario(const std::filesystem::path& directory) {
  Scenario scenario;
  auto desc = load_description(directory / kDescriptionFile);
  scenario.name = desc.name;
  scenario.cutoff = desc.cutoff;

  // runtimes.csv defines the instance and algorithm order (first appearance).
  const auto runtimes_path = directory / kRuntimesFile;
  auto lines = read_lines(runtimes_path);
  if (lines.empty()) {
    throw ValidationError(runtimes_path.string() + ": empty file");
  }
  {
    auto header = split(lines[0], ',');
    if (header.size() != 4 || header[0] != "instance" ||
        header[1] != "algorithm" || header[2] != "runtime" ||
        header[3] != "status") {
      throw input_error(runtimes_path.string(), 1,
                        "expected header instance,algorithm,runtime,status");
    }
  }
  std::map<std::string, std::size_t> instance_ids;
  std::map<std::string, std::size_t> algorithm_ids;
  struct Run {
    std::size_t line;
    double runtime;
    RunStatus status;
  };
  std::map<std::pair<std::size_t, std::size_t>, Run> runs;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (trim(lines[ln]).empty()) continue;
    auto fields = split(lines[ln], ',');
    if (fields.size() != 4) {
      throw input_error(runtimes_path.string(), ln + 1,
                        "expected 4 fields, got " +
                            std::to_string(fields.size()));
    }
    std::string instance(trim(fields[0]));
    std::string algorithm(trim(fields[1]));
    auto runtime = parse_double(fields[2]);
    if (!runtime) {
      throw input_error(runtimes_path.string(), ln + 1, "bad runtime value");
    }
    std::string status_token(trim(fields[3]));
    RunStatus status;
    if (status_token == "solved") {
      status = RunStatus::solved;
    } else if (status_token == "timeout") {
      status = RunStatus::timeout;
    } else if (status_token == "crashed") {
      status = RunStatus::crashed;
    } else {
      throw input_error(runtimes_path.string(), ln + 1,
                        "unknown status: " + status_token);
    }
    if (*runtime > scenario.cutoff) {
      throw input_error(runtimes_path.string(), ln + 1,
                        "runtime exceeds cutoff");
    }
    if (!(*runtime > 0.0)) {
      throw input_error(runtimes_path.string(), ln + 1,
                        "runtime must be positive");
    }
    auto [inst_it, inst_new] = instance_ids.try_emplace(
        instance, scenario.instances.size());
    if (inst_new) scenario.instances.push_back(instance);
    auto [alg_it, alg_new] = algorithm_ids.try_emplace(
        algorithm, scenario.algorithms.size());
    if (alg_new) scenario.algorithms.push_back(algorithm);
    // Unsolved runs are recorded at the cutoff regardless of the raw value.
    double stored = status == RunStatus::solved ? *runtime : scenario.cutoff;
    auto key = std::make_pair(inst_it->second, alg_it->second);
    if (!runs.try_emplace(key, Run{ln + 1, stored, status}).second) {
      throw input_error(runtimes_path.string(), ln + 1,
                        "duplicate run for instance " + instance +
                            ", algorithm " + algorithm);
    }
  }
  const std::size_t n = scenario.instances.size();
  const std::size_t m = scenario.algorithms.size();
  if (n == 0 || m == 0) {
    throw ValidationError(runtimes_path.string() + ": no runs");
  }
  if (runs.size() != n * m) {
    throw ValidationError(runtimes_path.string() +
                          ": runtime matrix is not dense (" +
                          std::to_string(runs.size()) + " of " +
                          std::to_string(n * m) + " pairs present)");
  }
  scenario.performance = PerformanceMatrix(n, m);
  for (const auto& [key, run] : runs) {
    scenario.performance.set(key.first, key.second, run.runtime, run.status);
  }

  // features.csv: one row per instance, '?' marks a missing value.
  const auto features_path = directory / kFeaturesFile;
  lines = read_lines(features_path);
  if (lines.empty()) {
    throw ValidationError(features_path.string() + ": empty file");
  }
  {
    auto header = split(lines[0], ',');
    if (header.empty() || header[0] != "instance") {
      throw input_error(features_path.string(), 1,
                        "expected header starting with instance");
    }
    for (std::size_t i = 1; i < header.size(); ++i) {
      scenario.features.names.emplace_back(trim(header[i]));
    }
  }
  const std::size_t d = scenario.features.names.size();
  scenario.features.values = Matrix(n, d, Matrix::missing());
  std::vector<std::uint8_t> feature_row_seen(n, 0);
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (trim(lines[ln]).empty()) continue;
    auto fields = split(lines[ln], ',');
    if (fields.size() != d + 1) {
      throw input_error(features_path.string(), ln + 1, "ragged feature row");
    }
    std::string instance(trim(fields[0]));
    auto it = instance_ids.find(instance);
    if (it == instance_ids.end()) {
      throw input_error(features_path.string(), ln + 1,
                        "unknown instance: " + instance);
    }
    if (feature_row_seen[it->second]) {
      throw input_error(features_path.string(), ln + 1,
                        "duplicate instance id: " + instance);
    }
    feature_row_seen[it->second] = 1;
    for (std::size_t j = 0; j < d; ++j) {
      std::string_view token = trim(fields[j + 1]);
      if (token == "?") {
        scenario.features.values.at(it->second, j) = Matrix::missing();
      } else {
        auto v = parse_double(token);
        if (!v) {
          throw input_error(features_path.string(), ln + 1,
                            "bad feature value: " + std::string(token));
        }
        scenario.features.values.at(it->second, j) = *v;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!feature_row_seen[i]) {
      throw ValidationError(features_path.string() +
                            ": missing feature row for instance " +
                            scenario.instances[i]);
    }
  }

  // feature_costs.csv: instance,cost,solved.
  const auto costs_path = directory / kFeatureCostsFile;
  lines = read_lines(costs_path);
  if (lines.empty()) {
    throw ValidationError(costs_path.string() + ": empty file");
  }
  {
    auto header = split(lines[0], ',');
    if (header.size() != 3 || header[0] != "instance" || header[1] != "cost" ||
        header[2] != "solved") {
      throw input_error(costs_path.string(), 1,
                        "expected header instance,cost,solved");
    }
  }
  scenario.feature_costs.assign(n, 0.0);
  scenario.solved_by_features.assign(n, 0);
  std::vector<std::uint8_t> cost_seen(n, 0);
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (trim(lines[ln]).empty()) continue;
    auto fields = split(lines[ln], ',');
    if (fields.size() != 3) {
      throw input_error(costs_path.string(), ln + 1, "expected 3 fields");
    }
    std::string instance(trim(fields[0]));
    auto it = instance_ids.find(instance);
    if (it == instance_ids.end()) {
      throw input_error(costs_path.string(), ln + 1,
                        "unknown instance: " + instance);
    }
    if (cost_seen[it->second]) {
      throw input_error(costs_path.string(), ln + 1,
                        "duplicate instance id: " + instance);
    }
    cost_seen[it->second] = 1;
    auto cost = parse_double(fields[1]);
    if (!cost || *cost < 0.0) {
      throw input_error(costs_path.string(), ln + 1, "bad cost value");
    }
    std::string_view solved_token = trim(fields[2]);
    if (solved_token != "0" && solved_token != "1") {
      throw input_error(costs_path.string(), ln + 1,
                        "solved flag must be 0 or 1");
    }
    scenario.feature_costs[it->second] = *cost;
    scenario.solved_by_features[it->second] = solved_token == "1" ? 1 : 0;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!cost_seen[i]) {
      throw ValidationError(costs_path.string() +
                            ": missing cost row for instance " +
                            scenario.instances[i]);
    }
  }

  // cv.csv is optional.
  const auto cv_path = directory / kCvFile;
  if (std::filesystem::exists(cv_path)) {
    lines = read_lines(cv_path);
    if (lines.empty()) {
      throw ValidationError(cv_path.string() + ": empty file");
    }
    {
      auto header = split(lines[0], ',');
      if (header.size() != 2 || header[0] != "instance" ||
          header[1] != "fold") {
        throw input_error(cv_path.string(), 1,
                          "expected header instance,fold");
      }
    }
    scenario.folds.assign(n, 0);
    std::vector<std::uint8_t> fold_seen(n, 0);
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
      if (trim(lines[ln]).empty()) continue;
      auto fields = split(lines[ln], ',');
      if (fields.size() != 2) {
        throw input_error(cv_path.string(), ln + 1, "expected 2 fields");
      }
      std::string instance(trim(fields[0]));
      auto it = instance_ids.find(instance);
      if (it == instance_ids.end()) {
        throw input_error(cv_path.string(), ln + 1,
                          "unknown instance: " + instance);
      }
      if (fold_seen[it->second]) {
        throw input_error(cv_path.string(), ln + 1,
                          "duplicate instance id: " + instance);
      }
      fold_seen[it->second] = 1;
      auto fold = parse_int(fields[1]);
      if (!fold || *fold < 1) {
        throw input_error(cv_path.string(), ln + 1, "bad fold index");
      }
      scenario.folds[it->second] = static_cast<int>(*fold);
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!fold_seen[i]) {
        throw ValidationError(cv_path.string() +
                              ": missing fold for instance " +
                              scenario.instances[i]);
      }
    }
  }

  scenario.validate();
  return scenario;
}

void save_scenario(const Scenario& scenario,
                   const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  {
    std::ofstream out(directory / kDescriptionFile);
    out << "name=" << scenario.name << "\n";
    out << "cutoff=" << format_double(scenario.cutoff) << "\n";
  }
  {
    std::ofstream out(directory / kRuntimesFile);
    out << "instance,algorithm,runtime,status\n";
    for (std::size_t i = 0; i < scenario.n_instances(); ++i) {
      for (std::size_t a = 0; a < scenario.n_algorithms(); ++a) {
        out << scenario.instances[i] << ',' << scenario.algorithms[a] << ','
            << format_double(scenario.performance.runtime(i, a)) << ','
            << run_status_name(scenario.performance.status(i, a)) << "\n";
      }
    }
  }
  {
    std::ofstream out(directory / kFeaturesFile);
    out << "instance";
    for (const auto& name : scenario.features.names) out << ',' << name;
    out << "\n";
    for (std::size_t i = 0; i < scenario.n_instances(); ++i) {
      out << scenario.instances[i];
      for (double v : scenario.features.row(i)) {
        out << ',' << (Matrix::is_missing(v) ? "?" : format_double(v));
      }
      out << "\n";
    }
  }
  {
    std::ofstream out(directory / kFeatureCostsFile);
    out << "instance,cost,solved\n";
    for (std::size_t i = 0; i < scenario.n_instances(); ++i) {
      out << scenario.instances[i] << ','
          << format_double(scenario.feature_costs[i]) << ','
          << (scenario.solved_by_features[i] ? '1' : '0') << "\n";
    }
  }
  if (scenario.has_folds()) {
    std::ofstream out(directory / kCvFile);
    out << "instance,fold\n";
    for (std::size_t i = 0; i < scenario.n_instances(); ++i) {
      out << scenario.instances[i] << ',' << scenario.folds[i] << "\n";
    }
  }
}

Scenario split_folds(Scenario scenario, int k, std::uint64_t seed) {
  if (k < 1 || static_cast<std::size_t>(k) > scenario.n_instances()) {
    throw ValidationError("fold count must be in 1..n_instances");
  }
  std::vector<std::size_t> order(scenario.n_instances());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  shuffle(order, rng);
  scenario.folds.assign(scenario.n_instances(), 0);
  for (std::size_t p = 0; p < order.size(); ++p) {
    scenario.folds[order[p]] = static_cast<int>(p % static_cast<std::size_t>(k)) + 1;
  }
  return scenario;
}

std::vector<std::size_t> fold_instances(const Scenario& scenario, int fold) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < scenario.folds.size(); ++i) {
    if (scenario.folds[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> complement_instances(const Scenario& scenario,
                                              int fold) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < scenario.folds.size(); ++i) {
    if (scenario.folds[i] != fold) out.push_back(i);
  }
  return out;
}

Scenario restrict_algorithms(const Scenario& scenario,
                             std::span<const std::size_t> keep) {
  Scenario out = scenario;
  out.algorithms.clear();
  for (std::size_t a : keep) out.algorithms.push_back(scenario.algorithms[a]);
  out.performance = PerformanceMatrix(scenario.n_instances(), keep.size());
  for (std::size_t i = 0; i < scenario.n_instances(); ++i) {
    for (std::size_t j = 0; j < keep.size(); ++j) {
      out.performance.set(i, j, scenario.performance.runtime(i, keep[j]),
                          scenario.performance.status(i, keep[j]));
    }
  }
  return out;
}

}  // namespace pfolio
