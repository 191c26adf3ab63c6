#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "swelm/dataset.hpp"
#include "swelm/detail/hexfloat.hpp"
#include "swelm/detail/sha256.hpp"
#include "swelm/elm.hpp"
#include "swelm/errors.hpp"
#include "swelm/mc_sobol.hpp"
#include "swelm/models.hpp"
#include "swelm/ridge_selection.hpp"
#include "swelm/sobol_analytic.hpp"
#include "swelm/sweep.hpp"

namespace swelm {

using json = nlohmann::json;

namespace detail {

// 17 significant digits: lossless double round trip in CSV artifacts.
inline std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline json hex_array(const double* data, Eigen::Index count) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < count; ++i) arr.push_back(double_to_hex(data[i]));
  return arr;
}

inline std::vector<double> hex_array_to_doubles(const json& arr) {
  std::vector<double> out;
  out.reserve(arr.size());
  for (const auto& v : arr) out.push_back(hex_to_double(v.get<std::string>()));
  return out;
}

inline json plain_array(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

}  // namespace detail

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << content;
  if (!out) throw IoError("write failed: " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string sha256_file(const std::filesystem::path& path) {
  return detail::Sha256::hash(read_text_file(path));
}

// ---- surrogate JSON (bit-exact doubles via hex-float strings) ----

inline json surrogate_to_json(const TrainedSurrogate& surrogate) {
  const HiddenLayer& layer = surrogate.layer();
  json doc;
  doc["schema"] = "swelm-surrogate-v1";
  doc["d"] = layer.d();
  doc["n"] = layer.n();
  doc["sparsity_p"] = detail::double_to_hex(layer.sparsity_p());
  doc["alpha"] = detail::double_to_hex(surrogate.reg_alpha());
  // row-major weight storage
  json weights = json::array();
  for (Eigen::Index j = 0; j < layer.n(); ++j) {
    for (Eigen::Index l = 0; l < layer.d(); ++l) {
      weights.push_back(detail::double_to_hex(layer.weights()(j, l)));
    }
  }
  doc["weights"] = std::move(weights);
  doc["biases"] = detail::hex_array(layer.biases().data(), layer.n());
  doc["beta"] = detail::hex_array(surrogate.output_weights().data(), layer.n());
  doc["training_stats"] = {
      {"residual_norm", detail::double_to_hex(surrogate.training_stats().residual_norm)},
      {"solution_norm", detail::double_to_hex(surrogate.training_stats().solution_norm)},
      {"train_size", surrogate.training_stats().train_size}};
  if (layer.seeds()) {
    doc["seeds"] = {{"master_seed", layer.seeds()->master_seed},
                    {"weights_label", layer.seeds()->weights_label},
                    {"biases_label", layer.seeds()->biases_label},
                    {"mask_label", layer.seeds()->mask_label}};
  }
  return doc;
}

inline TrainedSurrogate surrogate_from_json(const json& doc) {
  if (doc.value("schema", "") != "swelm-surrogate-v1") {
    throw IoError("surrogate_from_json: unknown schema");
  }
  const Eigen::Index d = doc.at("d").get<Eigen::Index>();
  const Eigen::Index n = doc.at("n").get<Eigen::Index>();
  std::vector<double> flat = detail::hex_array_to_doubles(doc.at("weights"));
  if (static_cast<Eigen::Index>(flat.size()) != n * d) {
    throw IoError("surrogate_from_json: weight count mismatch");
  }
  Eigen::MatrixXd weights(n, d);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index l = 0; l < d; ++l) {
      weights(j, l) = flat[static_cast<std::size_t>(j * d + l)];
    }
  }
  std::vector<double> biases = detail::hex_array_to_doubles(doc.at("biases"));
  std::vector<double> beta = detail::hex_array_to_doubles(doc.at("beta"));
  if (static_cast<Eigen::Index>(biases.size()) != n ||
      static_cast<Eigen::Index>(beta.size()) != n) {
    throw IoError("surrogate_from_json: vector length mismatch");
  }
  std::optional<LayerSeeds> seeds;
  if (doc.contains("seeds")) {
    seeds = LayerSeeds{doc["seeds"].at("master_seed").get<std::uint64_t>(),
                       doc["seeds"].at("weights_label").get<std::string>(),
                       doc["seeds"].at("biases_label").get<std::string>(),
                       doc["seeds"].at("mask_label").get<std::string>()};
  }
  HiddenLayer layer(std::move(weights),
                    Eigen::Map<Eigen::VectorXd>(biases.data(), n).eval(),
                    detail::hex_to_double(doc.at("sparsity_p").get<std::string>()),
                    std::move(seeds));
  TrainingStats stats;
  if (doc.contains("training_stats")) {
    stats.residual_norm =
        detail::hex_to_double(doc["training_stats"].at("residual_norm").get<std::string>());
    stats.solution_norm =
        detail::hex_to_double(doc["training_stats"].at("solution_norm").get<std::string>());
    stats.train_size = doc["training_stats"].at("train_size").get<Eigen::Index>();
  }
  return TrainedSurrogate(layer, Eigen::Map<Eigen::VectorXd>(beta.data(), n).eval(),
                          detail::hex_to_double(doc.at("alpha").get<std::string>()), stats);
}

// ---- report JSON / CSV ----

inline json report_to_json(const SobolReport& report) {
  json doc;
  doc["mean"] = report.mean;
  doc["variance"] = report.variance;
  doc["first_order"] = detail::plain_array(report.first_order);
  doc["total"] = detail::plain_array(report.total);
  if (!report.subset_entries.empty()) {
    json subsets = json::array();
    for (const auto& entry : report.subset_entries) {
      subsets.push_back({{"u", entry.u}, {"s_u", entry.s_u}, {"s_u_tot", entry.s_u_tot}});
    }
    doc["subsets"] = std::move(subsets);
  }
  doc["diagnostics"] = {
      {"raw_variance", report.diagnostics.raw_variance},
      {"term_magnitude", report.diagnostics.term_magnitude},
      {"variance_clamped", report.diagnostics.variance_clamped},
      {"first_order_numerators", detail::plain_array(report.diagnostics.first_order_numerators)},
      {"complement_variances", detail::plain_array(report.diagnostics.complement_variances)}};
  return doc;
}

// indices.csv / truth.csv schema: one row per input, 1-based k.
inline std::string indices_csv(const Eigen::VectorXd& first_order, const Eigen::VectorXd& total) {
  std::string out = "k,S_k,S_k_tot\n";
  for (Eigen::Index k = 0; k < first_order.size(); ++k) {
    out += std::to_string(k + 1) + "," + detail::csv_number(first_order(k)) + "," +
           detail::csv_number(total(k)) + "\n";
  }
  return out;
}

inline std::string report_csv(const SobolReport& report) {
  return indices_csv(report.first_order, report.total);
}

inline std::string truth_csv(const GroundTruth& truth) {
  return indices_csv(truth.first_order, truth.total);
}

inline std::string alpha_path_csv(const AlphaPath& path) {
  std::string out = "alpha,residual_norm,solution_norm,gcv\n";
  for (std::size_t i = 0; i < path.size(); ++i) {
    out += detail::csv_number(path.alphas[i]) + "," + detail::csv_number(path.residual_norms[i]) +
           "," + detail::csv_number(path.solution_norms[i]) + "," +
           detail::csv_number(path.gcv_scores[i]) + "\n";
  }
  return out;
}

// ---- sweep JSON / CSV ----

inline std::string sweep_csv(const SweepResult& result) {
  std::string out = "p,alpha,E_surr\n";
  for (const SweepCandidate& cand : result.candidates) {
    if (!cand.ok) continue;
    out += detail::csv_number(cand.p) + "," + detail::csv_number(cand.alpha) + "," +
           detail::csv_number(cand.e_surr) + "\n";
  }
  return out;
}

inline const char* alpha_policy_name(AlphaPolicy policy) {
  switch (policy) {
    case AlphaPolicy::LCurve: return "lcurve";
    case AlphaPolicy::GCV: return "gcv";
    case AlphaPolicy::Fixed: return "fixed";
  }
  return "lcurve";
}

inline AlphaPolicy alpha_policy_from_name(const std::string& name) {
  if (name == "lcurve") return AlphaPolicy::LCurve;
  if (name == "gcv") return AlphaPolicy::GCV;
  if (name == "fixed") return AlphaPolicy::Fixed;
  throw ConfigError("unknown alpha policy '" + name + "'");
}

inline json sweep_to_json(const SweepResult& result) {
  json doc;
  doc["schema"] = "swelm-sweep-v1";
  doc["master_seed"] = result.config.seed.master_seed;
  doc["seed_label"] = result.config.seed.stream_label;
  doc["n"] = result.config.n;
  doc["alpha_policy"] = alpha_policy_name(result.config.alpha_policy);
  doc["p_grid"] = result.config.p_grid;
  doc["improvement_threshold"] = result.config.improvement_threshold;
  doc["selected_p"] = result.selected_p;
  doc["train_smaller_than_n"] = result.train_smaller_than_n;
  json candidates = json::array();
  for (const SweepCandidate& cand : result.candidates) {
    json c;
    c["p"] = cand.p;
    c["ok"] = cand.ok;
    if (cand.ok) {
      c["alpha"] = cand.alpha;
      c["e_surr"] = cand.e_surr;
      c["alpha_degenerate"] = cand.alpha_degenerate;
      c["alpha_near_endpoint"] = cand.alpha_near_endpoint;
    } else {
      c["error"] = cand.error;
    }
    candidates.push_back(std::move(c));
  }
  doc["candidates"] = std::move(candidates);
  doc["report"] = report_to_json(result.selected_report);
  return doc;
}

inline std::string estimate_csv(const PickFreezeEstimate& est) {
  std::string out = "k,S_k,S_k_tot,S_k_stderr,S_k_tot_stderr\n";
  for (Eigen::Index k = 0; k < est.first_order.size(); ++k) {
    out += std::to_string(k + 1) + "," + detail::csv_number(est.first_order(k)) + "," +
           detail::csv_number(est.total(k)) + "," +
           detail::csv_number(est.first_order_std_error(k)) + "," +
           detail::csv_number(est.total_std_error(k)) + "\n";
  }
  return out;
}

// ---- comparison CSV ----

inline std::string compare_csv(const SobolReport& analytic, const PickFreezeEstimate& mc,
                               const ComparisonRecord& rec) {
  std::string out =
      "k,S_analytic,S_mc,S_stderr,S_flag,Stot_analytic,Stot_mc,Stot_stderr,Stot_flag\n";
  for (Eigen::Index k = 0; k < analytic.first_order.size(); ++k) {
    out += std::to_string(k + 1) + "," + detail::csv_number(analytic.first_order(k)) + "," +
           detail::csv_number(mc.first_order(k)) + "," +
           detail::csv_number(mc.first_order_std_error(k)) + "," +
           (rec.first_order_flag[k] ? "1" : "0") + "," + detail::csv_number(analytic.total(k)) +
           "," + detail::csv_number(mc.total(k)) + "," +
           detail::csv_number(mc.total_std_error(k)) + "," + (rec.total_flag[k] ? "1" : "0") +
           "\n";
  }
  return out;
}

// ---- dataset CSV (x columns then y, header row) ----

inline std::string dataset_csv(const Dataset& data) {
  std::string out;
  const Eigen::Index d = data.dimension();
  for (Eigen::Index k = 0; k < d; ++k) out += "x" + std::to_string(k + 1) + ",";
  out += "y\n";
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    for (Eigen::Index k = 0; k < d; ++k) {
      out += detail::csv_number(data.inputs()(i, k)) + ",";
    }
    out += detail::csv_number(data.outputs()(i)) + "\n";
  }
  return out;
}

inline Dataset dataset_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IoError("dataset_from_csv: empty file");
  Eigen::Index d = static_cast<Eigen::Index>(std::count(line.begin(), line.end(), ','));
  if (d < 1) throw IoError("dataset_from_csv: header must contain x columns and y");
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError("dataset_from_csv: unparsable cell '" + cell + "'");
      }
    }
    if (static_cast<Eigen::Index>(row.size()) != d + 1) {
      throw IoError("dataset_from_csv: ragged row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("dataset_from_csv: no data rows");
  Eigen::MatrixXd inputs(static_cast<Eigen::Index>(rows.size()), d);
  Eigen::VectorXd outputs(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Eigen::Index k = 0; k < d; ++k) {
      inputs(static_cast<Eigen::Index>(i), k) = rows[i][static_cast<std::size_t>(k)];
    }
    outputs(static_cast<Eigen::Index>(i)) = rows[i][static_cast<std::size_t>(d)];
  }
  return Dataset(std::move(inputs), std::move(outputs));
}

}  // namespace swelm
