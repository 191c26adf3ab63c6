#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "swelm/dataset.hpp"
#include "swelm/detail/parallel.hpp"
#include "swelm/errors.hpp"
#include "swelm/mc_sobol.hpp"
#include "swelm/models.hpp"
#include "swelm/serialize.hpp"
#include "swelm/sweep.hpp"
#include "swelm/version.hpp"

namespace swelm {

namespace fs = std::filesystem;

// ---- model spec <-> JSON ----

inline json model_spec_to_json(const ModelSpec& spec) {
  json doc;
  doc["name"] = spec.name();
  if (const auto* p = std::get_if<InteractionSpec>(&spec.params)) {
    doc["d"] = p->d;
    doc["delta"] = p->delta;
  } else if (const auto* p = std::get_if<GFunctionSpec>(&spec.params)) {
    doc["a"] = detail::plain_array(p->a);
  } else if (const auto* p = std::get_if<LinearOdeSpec>(&spec.params)) {
    doc["d"] = p->d;
    doc["t_final"] = p->t_final;
    doc["output_component"] = p->output_component;
    doc["q_seed"] = p->q_seed;
    doc["q_label"] = p->q_label;
    doc["perturbation"] = p->perturbation;
  } else {
    const auto& osc = std::get<OscillatorSpec>(spec.params);
    doc["t_horizon"] = osc.t_horizon;
    doc["qoi_grid_points"] = osc.qoi_grid_points;
    doc["rtol"] = osc.rtol;
    doc["atol"] = osc.atol;
    doc["rate_perturbation"] = osc.rate_perturbation;
  }
  return doc;
}

inline ModelSpec model_spec_from_json(const json& doc) {
  const std::string name = doc.at("name").get<std::string>();
  if (name == "interaction") {
    return ModelSpec::interaction(doc.at("d").get<int>(), doc.at("delta").get<double>());
  }
  if (name == "gfunction") {
    const auto& arr = doc.at("a");
    Eigen::VectorXd a(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) {
      a(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
    }
    return ModelSpec::gfunction(std::move(a));
  }
  if (name == "linear_ode") {
    LinearOdeSpec spec;
    spec.d = doc.value("d", spec.d);
    spec.t_final = doc.value("t_final", spec.t_final);
    spec.output_component = doc.value("output_component", spec.output_component);
    spec.q_seed = doc.value("q_seed", spec.q_seed);
    spec.q_label = doc.value("q_label", spec.q_label);
    spec.perturbation = doc.value("perturbation", spec.perturbation);
    return ModelSpec::linear_ode(std::move(spec));
  }
  if (name == "genetic_oscillator") {
    OscillatorSpec spec;
    spec.t_horizon = doc.value("t_horizon", spec.t_horizon);
    spec.qoi_grid_points = doc.value("qoi_grid_points", spec.qoi_grid_points);
    spec.rtol = doc.value("rtol", spec.rtol);
    spec.atol = doc.value("atol", spec.atol);
    spec.rate_perturbation = doc.value("rate_perturbation", spec.rate_perturbation);
    return ModelSpec::genetic_oscillator(std::move(spec));
  }
  throw ConfigError("unknown model name '" + name + "'");
}

// ---- run configuration ----

struct RunConfig {
  std::optional<ModelSpec> model;
  Eigen::Index m = 0;  // training points
  Eigen::Index s = 0;  // validation points
  int n = 0;           // neurons
  std::vector<double> p_grid = default_p_grid();
  AlphaPolicy alpha_policy = AlphaPolicy::LCurve;
  double fixed_alpha = 1e-3;
  double improvement_threshold = 0.0;
  std::optional<Eigen::Index> mc_samples;  // pick-freeze base N
  std::string output_dir;
  std::uint64_t master_seed = 0;

  void validate() const {
    if (m < 1 || s < 1 || n < 1) throw ConfigError("RunConfig: m, s, n must all be >= 1");
    if (output_dir.empty()) throw ConfigError("RunConfig: output_dir is required");
  }

  SweepConfig sweep_config() const {
    SweepConfig cfg;
    cfg.p_grid = p_grid;
    cfg.n = n;
    cfg.alpha_policy = alpha_policy;
    cfg.fixed_alpha = fixed_alpha;
    cfg.improvement_threshold = improvement_threshold;
    cfg.seed = SeedSpec{master_seed, ""};
    return cfg;
  }
};

inline json run_config_to_json(const RunConfig& config) {
  json doc;
  doc["master_seed"] = config.master_seed;
  doc["m"] = config.m;
  doc["s"] = config.s;
  doc["n"] = config.n;
  doc["output_dir"] = config.output_dir;
  doc["model"] = config.model ? model_spec_to_json(*config.model) : json(nullptr);
  doc["sweep"] = {{"p_grid", config.p_grid},
                  {"alpha_policy", alpha_policy_name(config.alpha_policy)},
                  {"fixed_alpha", config.fixed_alpha},
                  {"improvement_threshold", config.improvement_threshold}};
  doc["mc"] = config.mc_samples ? json{{"n_samples", *config.mc_samples}} : json(nullptr);
  return doc;
}

inline RunConfig run_config_from_json(const json& doc) {
  RunConfig config;
  try {
    config.master_seed = doc.at("master_seed").get<std::uint64_t>();
    config.m = doc.at("m").get<Eigen::Index>();
    config.s = doc.at("s").get<Eigen::Index>();
    config.n = doc.at("n").get<int>();
    config.output_dir = doc.value("output_dir", std::string{});
    if (doc.contains("model") && !doc["model"].is_null()) {
      config.model = model_spec_from_json(doc["model"]);
    }
    if (doc.contains("sweep") && !doc["sweep"].is_null()) {
      const json& sweep = doc["sweep"];
      if (sweep.contains("p_grid")) {
        config.p_grid = sweep["p_grid"].get<std::vector<double>>();
      }
      config.alpha_policy =
          alpha_policy_from_name(sweep.value("alpha_policy", std::string("lcurve")));
      config.fixed_alpha = sweep.value("fixed_alpha", config.fixed_alpha);
      config.improvement_threshold =
          sweep.value("improvement_threshold", config.improvement_threshold);
    }
    if (doc.contains("mc") && !doc["mc"].is_null()) {
      config.mc_samples = doc["mc"].at("n_samples").get<Eigen::Index>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return config;
}

inline RunConfig load_run_config(const fs::path& path) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("config file is not valid JSON: " + std::string(e.what()));
  }
  return run_config_from_json(doc);
}

// ---- manifest + output-directory lock ----

class RunArtifacts {
 public:
  explicit RunArtifacts(const fs::path& dir, std::string command, const RunConfig& config)
      : dir_(dir), command_(std::move(command)), config_echo_(run_config_to_json(config)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory: " + dir_.string());
    lock_path_ = dir_ / ".swelm.lock";
    std::FILE* lock = std::fopen(lock_path_.c_str(), "wx");
    if (!lock) {
      throw IoError("output directory is locked by another run (delete " + lock_path_.string() +
                    " if stale)");
    }
    std::fclose(lock);
    start_ = clock::now();
    stage_start_ = start_;
  }

  ~RunArtifacts() {
    std::error_code ec;
    fs::remove(lock_path_, ec);
  }

  RunArtifacts(const RunArtifacts&) = delete;
  RunArtifacts& operator=(const RunArtifacts&) = delete;

  void write(const std::string& name, const std::string& content) {
    write_text_file(dir_ / name, content);
    files_.push_back(name);
  }

  void finish_stage(const std::string& name) {
    const auto now = clock::now();
    timings_[name] = std::chrono::duration<double>(now - stage_start_).count();
    stage_start_ = now;
  }

  // manifest.json lists every emitted file with its content hash
  void write_manifest() {
    json doc;
    doc["command"] = command_;
    doc["version"] = version_string;
    doc["config"] = config_echo_;
    doc["timings_seconds"] = timings_;
    doc["total_seconds"] =
        std::chrono::duration<double>(clock::now() - start_).count();
    json files = json::array();
    for (const std::string& name : files_) {
      const fs::path path = dir_ / name;
      files.push_back({{"name", name},
                       {"sha256", sha256_file(path)},
                       {"bytes", fs::file_size(path)}});
    }
    doc["files"] = std::move(files);
    write_text_file(dir_ / "manifest.json", doc.dump(2) + "\n");
  }

  const fs::path& dir() const { return dir_; }

 private:
  using clock = std::chrono::steady_clock;
  fs::path dir_;
  fs::path lock_path_;
  std::string command_;
  json config_echo_;
  std::vector<std::string> files_;
  std::map<std::string, double> timings_;
  clock::time_point start_;
  clock::time_point stage_start_;
};

// ---- dataset generation ----

inline Dataset evaluate_design(const ModelFunction& fn, const Eigen::MatrixXd& points) {
  Eigen::VectorXd outputs(points.rows());
  detail::parallel_for(points.rows(), [&](std::int64_t begin, std::int64_t end) {
    Eigen::VectorXd x(points.cols());
    for (std::int64_t i = begin; i < end; ++i) {
      x = points.row(i).transpose();
      outputs(i) = fn.eval(x);
    }
  });
  if (!outputs.allFinite()) throw NumericError("model evaluation produced non-finite values");
  return Dataset(points, std::move(outputs));
}

inline std::pair<Dataset, Dataset> generate_datasets(const RunConfig& config) {
  if (!config.model) throw ConfigError("dataset generation requires a model in the config");
  ModelFunction fn = model_as_function(*config.model);
  SeedSpec seed{config.master_seed, ""};
  Design train_design = sample_lhs(config.m, fn.dimension, seed.with_label("lhs-train"));
  Design valid_design = sample_lhs(config.s, fn.dimension, seed.with_label("lhs-valid"));
  return {evaluate_design(fn, train_design.points), evaluate_design(fn, valid_design.points)};
}

// ---- subcommands ----

inline void run_generate(const RunConfig& config) {
  config.validate();
  RunArtifacts artifacts(config.output_dir, "generate", config);
  auto [train, validation] = generate_datasets(config);
  artifacts.finish_stage("evaluate_model");
  artifacts.write("train.csv", dataset_csv(train));
  artifacts.write("validation.csv", dataset_csv(validation));
  artifacts.finish_stage("write_datasets");
  artifacts.write_manifest();
}

inline std::pair<Dataset, Dataset> load_or_generate_datasets(const RunConfig& config,
                                                             RunArtifacts& artifacts) {
  const fs::path train_path = artifacts.dir() / "train.csv";
  const fs::path valid_path = artifacts.dir() / "validation.csv";
  if (fs::exists(train_path) && fs::exists(valid_path)) {
    Dataset train = dataset_from_csv(read_text_file(train_path));
    Dataset validation = dataset_from_csv(read_text_file(valid_path));
    if (config.model && train.dimension() != config.model->dimension()) {
      throw ConfigError("existing train.csv dimension does not match the configured model");
    }
    artifacts.finish_stage("load_datasets");
    return {std::move(train), std::move(validation)};
  }
  if (!config.model) {
    throw ConfigError("no train.csv/validation.csv in " + artifacts.dir().string() +
                      " and no model configured; run 'generate' first or add a model");
  }
  auto datasets = generate_datasets(config);
  artifacts.finish_stage("evaluate_model");
  return datasets;
}

inline SweepResult run_gsa_impl(const RunConfig& config, RunArtifacts& artifacts) {
  auto [train, validation] = load_or_generate_datasets(config, artifacts);
  SweepResult result = run_sweep(train, validation, config.sweep_config());
  artifacts.finish_stage("sweep");
  artifacts.write("sweep.csv", sweep_csv(result));
  artifacts.write("indices.csv", report_csv(result.selected_report));
  json report = sweep_to_json(result);
  report["surrogate"] = surrogate_to_json(*result.selected().surrogate);
  artifacts.write("report.json", report.dump(2) + "\n");
  artifacts.finish_stage("write_reports");
  return result;
}

inline void run_gsa(const RunConfig& config) {
  config.validate();
  RunArtifacts artifacts(config.output_dir, "gsa", config);
  run_gsa_impl(config, artifacts);
  artifacts.write_manifest();
}

inline void run_compare(const RunConfig& config) {
  config.validate();
  if (!config.mc_samples) throw ConfigError("compare requires mc.n_samples in the config");
  if (*config.mc_samples < 100) throw ConfigError("compare: mc.n_samples must be at least 100");
  if (!config.model) {
    throw ConfigError("compare requires an evaluable model (pure-dataset runs cannot MC)");
  }
  RunArtifacts artifacts(config.output_dir, "compare", config);
  SweepResult result = run_gsa_impl(config, artifacts);
  ModelFunction fn = model_as_function(*config.model);
  SeedSpec seed{config.master_seed, "mc"};
  PickFreezeEstimate mc = estimate_sobol_mc(fn.eval, fn.dimension, *config.mc_samples, seed);
  artifacts.finish_stage("mc_oracle");
  ComparisonRecord rec = compare_reports(result.selected_report, mc);
  artifacts.write("compare.csv", compare_csv(result.selected_report, mc, rec));
  artifacts.finish_stage("write_compare");
  artifacts.write_manifest();
}

inline void run_truth(const RunConfig& config) {
  if (!config.model) throw ConfigError("truth requires a model in the config");
  if (!config.model->has_closed_form()) {
    throw ConfigError(std::string("no closed form for model '") + config.model->name() + "'");
  }
  if (config.output_dir.empty()) throw ConfigError("RunConfig: output_dir is required");
  RunArtifacts artifacts(config.output_dir, "truth", config);
  GroundTruth truth = config.model->ground_truth();
  artifacts.finish_stage("closed_form");
  artifacts.write("truth.csv", truth_csv(truth));
  artifacts.write_manifest();
}

}  // namespace swelm
