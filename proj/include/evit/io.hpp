#pragma once

// File formats. Metadata, representations, models and reports are JSON;
// feature/label tables and training records are CSV with numbers written to
// 17 significant digits so every double round-trips exactly.

#include <Eigen/Dense>

#include <cctype>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "evit/decision.hpp"
#include "evit/domain.hpp"
#include "evit/error.hpp"
#include "evit/evaluation.hpp"
#include "evit/population_sim.hpp"
#include "evit/quality_model.hpp"
#include "evit/similarity.hpp"
#include "evit/transfer.hpp"

namespace evit::io {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Text helpers

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(std::string_view s, const std::string& where) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError(where + ": not a number: '" + std::string(s) + "'");
  return v;
}

inline int parse_int(std::string_view s, const std::string& where) {
  int v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError(where + ": not an integer: '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

/// Ids end up in file names and '|'-joined CSV cells.
inline void validate_id(const std::string& id) {
  if (id.empty()) throw ValidationError("empty id");
  for (char c : id)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'))
      throw ValidationError("id '" + id + "' may only contain letters, digits, '_', '-' and '.'");
}

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw ConfigError("write failed for '" + path.string() + "'");
}

inline Json read_json(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("invalid JSON in '" + path.string() + "': " + e.what());
  }
}

inline void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

// Reads a CSV into header + rows of cells; blank lines are skipped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline CsvTable read_csv(const fs::path& path) {
  std::istringstream in(read_text(path));
  CsvTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line, ',');
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size())
      throw ConfigError("'" + path.string() + "': row " + std::to_string(t.rows.size() + 1) + " has " +
                        std::to_string(cells.size()) + " cells, header has " + std::to_string(t.header.size()));
    t.rows.push_back(std::move(cells));
  }
  if (!have_header) throw ConfigError("'" + path.string() + "' is empty");
  return t;
}

// ---------------------------------------------------------------------------
// JSON field access with config-error reporting

template <typename T>
T get(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(where + ": field '" + key + "' has the wrong type (" + e.what() + ")");
  }
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback, const std::string& where) {
  return j.contains(key) ? get<T>(j, key, where) : fallback;
}

// ---------------------------------------------------------------------------
// Domains

inline Json to_json(const Representation& r) {
  Json modes = Json::array();
  for (Eigen::Index i = 0; i < r.modeshapes.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < r.modeshapes.cols(); ++j) row.push_back(r.modeshapes(i, j));
    modes.push_back(std::move(row));
  }
  Json edges = Json::array();
  for (const auto& [a, b] : r.graph_edges) edges.push_back({a, b});
  return Json{{"modeshapes", std::move(modes)}, {"graph_edges", std::move(edges)}};
}

inline Representation representation_from_json(const Json& j, const std::string& where) {
  Representation r;
  const auto modes = get<std::vector<std::vector<double>>>(j, "modeshapes", where);
  const std::size_t cols = modes.empty() ? 0 : modes.front().size();
  r.modeshapes.resize(static_cast<Eigen::Index>(modes.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (modes[i].size() != cols) throw ConfigError(where + ": ragged modeshape matrix");
    for (std::size_t k = 0; k < cols; ++k)
      r.modeshapes(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = modes[i][k];
  }
  for (const auto& e : get<std::vector<std::pair<int, int>>>(j, "graph_edges", where)) {
    const Edge edge = make_edge(e.first, e.second);
    if (!r.graph_edges.insert(edge).second) throw ConfigError(where + ": duplicate graph edge");
  }
  return r;
}

inline std::string features_csv(const Eigen::MatrixXd& x, const std::vector<int>* labels) {
  std::string out;
  for (Eigen::Index j = 0; j < x.cols(); ++j) out += (j ? ",f" : "f") + std::to_string(j + 1);
  if (labels) out += x.cols() ? ",label" : "label";
  out += '\n';
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (j) out += ',';
      out += format_double(x(i, j));
    }
    if (labels) out += (x.cols() ? "," : "") + std::to_string((*labels)[static_cast<std::size_t>(i)]);
    out += '\n';
  }
  return out;
}

/// Writes <dir>/<id>.json and <dir>/<id>.csv.
inline void write_domain(const fs::path& dir, const Domain& d) {
  validate_id(d.id);
  validate(d);
  const std::string csv_name = d.id + ".csv";
  Json j{{"id", d.id},
         {"n_samples", d.n_samples()},
         {"n_features", d.n_features()},
         {"n_classes", d.n_classes},
         {"labelled", d.labelled()},
         {"features_csv", csv_name},
         {"representation", to_json(d.representation)}};
  write_json(dir / (d.id + ".json"), j);
  write_text(dir / csv_name, features_csv(d.features, d.labels ? &*d.labels : nullptr));
}

inline Domain read_domain(const fs::path& dir, const std::string& id) {
  const fs::path meta_path = dir / (id + ".json");
  const std::string where = meta_path.string();
  const Json j = read_json(meta_path);
  Domain d;
  d.id = get<std::string>(j, "id", where);
  if (d.id != id) throw ConfigError(where + ": id field '" + d.id + "' does not match file name");
  d.n_classes = get<int>(j, "n_classes", where);
  const bool labelled = get<bool>(j, "labelled", where);
  const auto n_samples = get<Eigen::Index>(j, "n_samples", where);
  const auto n_features = get<Eigen::Index>(j, "n_features", where);
  d.representation = representation_from_json(get<Json>(j, "representation", where), where);

  const fs::path csv_path = dir / get<std::string>(j, "features_csv", where);
  const CsvTable t = read_csv(csv_path);
  const std::size_t expect_cols = static_cast<std::size_t>(n_features) + (labelled ? 1 : 0);
  if (t.header.size() != expect_cols)
    throw ConfigError(csv_path.string() + ": expected " + std::to_string(expect_cols) + " columns");
  if (static_cast<Eigen::Index>(t.rows.size()) != n_samples)
    throw ConfigError(csv_path.string() + ": expected " + std::to_string(n_samples) + " rows");
  d.features.resize(n_samples, n_features);
  if (labelled) d.labels.emplace();
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    for (Eigen::Index k = 0; k < n_features; ++k)
      d.features(static_cast<Eigen::Index>(i), k) =
          parse_double(t.rows[i][static_cast<std::size_t>(k)], csv_path.string());
    if (labelled) {
      const std::string& cell = t.rows[i].back();
      if (cell.empty())
        throw ValidationError(csv_path.string() + ": missing label in row " + std::to_string(i + 1) +
                              "; partially labelled domains are not supported");
      d.labels->push_back(parse_int(cell, csv_path.string()));
    }
  }
  validate(d);
  return d;
}

inline void write_labels(const fs::path& path, const std::vector<int>& labels) {
  std::string out = "label\n";
  for (int y : labels) out += std::to_string(y) + '\n';
  write_text(path, out);
}

inline std::vector<int> read_labels(const fs::path& path) {
  const CsvTable t = read_csv(path);
  if (t.header.size() != 1 || t.header[0] != "label") throw ConfigError(path.string() + ": expected a 'label' column");
  std::vector<int> out;
  for (const auto& row : t.rows) out.push_back(parse_int(row[0], path.string()));
  return out;
}

// ---------------------------------------------------------------------------
// Configuration documents

inline DamageState damage_from_json(const Json& j, const std::string& where) {
  DamageState d;
  d.class_label = get<int>(j, "class_label", where);
  if (j.contains("spring_index") && !j.at("spring_index").is_null()) d.spring_index = get<int>(j, "spring_index", where);
  d.reduction = get_or<double>(j, "reduction", 0.0, where);
  return d;
}

inline std::vector<double> scalar_or_list(const Json& j, const char* key, std::size_t n, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing field '" + key + "'");
  if (j.at(key).is_number()) return std::vector<double>(n, j.at(key).get<double>());
  auto v = get<std::vector<double>>(j, key, where);
  if (v.size() != n)
    throw ConfigError(where + ": '" + key + "' needs " + std::to_string(n) + " entries, got " + std::to_string(v.size()));
  return v;
}

/// Structures come either as an explicit "structures" list of
/// {id, boundary, temperature_factor} or as n_structures plus a
/// "boundaries" list assigned cyclically (ids s00, s01, ...).
inline PopulationConfig population_config_from_json(const Json& j, const std::string& where) {
  PopulationConfig c;
  c.n_dof = get<int>(j, "n_dof", where);
  if (c.n_dof < 1) throw ValidationError(where + ": n_dof must be positive");
  const auto n = static_cast<std::size_t>(c.n_dof);
  c.nominal_masses = scalar_or_list(j, "nominal_masses", n, where);
  c.nominal_stiffnesses = scalar_or_list(j, "nominal_stiffnesses", n + 1, where);
  c.stiffness_perturbation_std = get_or<double>(j, "perturbation_std", 0.0, where);
  c.n_per_class = get<int>(j, "n_per_class", where);
  c.noise_std = get<double>(j, "noise_std", where);
  c.target_id = get_or<std::string>(j, "target_id", "", where);
  for (const auto& dj : get<Json>(j, "damage_states", where)) c.damage_states.push_back(damage_from_json(dj, where));

  if (j.contains("structures")) {
    for (const auto& sj : j.at("structures")) {
      StructureEntry e;
      e.id = get<std::string>(sj, "id", where);
      e.boundary = parse_boundary(get<std::string>(sj, "boundary", where));
      e.temperature_factor = get_or<double>(sj, "temperature_factor", 1.0, where);
      c.structures.push_back(std::move(e));
    }
    if (j.contains("n_structures") && get<std::size_t>(j, "n_structures", where) != c.structures.size())
      throw ConfigError(where + ": n_structures disagrees with the structures list");
  } else {
    const auto count = get<int>(j, "n_structures", where);
    if (count < 1) throw ValidationError(where + ": n_structures must be at least 1");
    const auto boundaries = get_or<std::vector<std::string>>(j, "boundaries", {"fixed-free"}, where);
    if (boundaries.empty()) throw ConfigError(where + ": boundaries list is empty");
    const auto temps = get_or<std::vector<double>>(j, "temperature_factors", {}, where);
    for (int i = 0; i < count; ++i) {
      StructureEntry e;
      char id[16];
      std::snprintf(id, sizeof id, "s%02d", i);
      e.id = id;
      e.boundary = parse_boundary(boundaries[static_cast<std::size_t>(i) % boundaries.size()]);
      if (!temps.empty()) e.temperature_factor = temps[static_cast<std::size_t>(i) % temps.size()];
      c.structures.push_back(std::move(e));
    }
  }
  for (const auto& s : c.structures) validate_id(s.id);
  validate(c);
  return c;
}

inline AlgorithmParams params_from_json(const Json& j, const std::string& where) {
  AlgorithmParams p;
  p.tca_components = get_or<int>(j, "tca_components", p.tca_components, where);
  p.tca_mu = get_or<double>(j, "tca_mu", p.tca_mu, where);
  if (j.contains("tca_kernel_bandwidth")) {
    const auto& b = j.at("tca_kernel_bandwidth");
    if (b.is_string()) {
      if (b.get<std::string>() != "median") throw ConfigError(where + ": tca_kernel_bandwidth must be a number or \"median\"");
    } else {
      p.tca_kernel_bandwidth = get<double>(j, "tca_kernel_bandwidth", where);
    }
  }
  p.knn_k = get_or<int>(j, "knn_k", p.knn_k, where);
  validate(p);
  return p;
}

inline Json to_json(const AlgorithmParams& p) {
  Json j{{"tca_components", p.tca_components}, {"tca_mu", p.tca_mu}};
  if (p.tca_kernel_bandwidth)
    j["tca_kernel_bandwidth"] = *p.tca_kernel_bandwidth;
  else
    j["tca_kernel_bandwidth"] = "median";
  j["knn_k"] = p.knn_k;
  return j;
}

inline UtilitySpec utility_from_json(const Json& j, const std::string& where) {
  UtilitySpec s;
  s.prior_damage = get<double>(j, "prior_damage", where);
  s.cost_inspection = get<double>(j, "cost_inspection", where);
  s.cost_failure = get<double>(j, "cost_failure", where);
  s.accuracy_weight = get_or<double>(j, "accuracy_weight", 0.0, where);
  s.utility_offset = get_or<double>(j, "utility_offset", 0.0, where);
  s.cost_per_source = get_or<double>(j, "cost_per_source", 0.0, where);
  s.n_mc = get_or<int>(j, "n_mc", s.n_mc, where);
  if (j.contains("cost_per_algorithm"))
    for (const auto& [name, cost] : j.at("cost_per_algorithm").items())
      s.cost_per_algorithm[parse_algorithm(name)] = cost.get<double>();
  s.cost_per_algorithm.try_emplace(AlgorithmId::Null, 0.0);
  validate(s);
  return s;
}

inline EnumerationConstraints constraints_from_json(const Json& j, const std::string& where) {
  EnumerationConstraints c;
  c.mode = parse_enumeration_mode(get_or<std::string>(j, "mode", "full", where));
  c.cap = get_or<int>(j, "cap", c.cap, where);
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed, where);
  validate(c);
  return c;
}

// ---------------------------------------------------------------------------
// Training records

inline const char* kRecordHeader =
    "algorithm,pseudo_target_id,source_ids,measure_id,sim_mean,sim_min,sim_max,accuracy,type1,type2,degenerate_flags";

inline std::string degenerate_flags(const QualityMeasures& q) {
  if (q.type1_degenerate && q.type2_degenerate) return "type1|type2";
  if (q.type1_degenerate) return "type1";
  if (q.type2_degenerate) return "type2";
  return "none";
}

inline std::string records_csv(std::span<const TrainingRecord> records) {
  std::string out = std::string(kRecordHeader) + '\n';
  for (const auto& r : records) {
    out += std::string(to_string(r.algorithm)) + ',' + r.pseudo_target_id + ',' + join(r.source_ids, '|') + ',' +
           to_string(r.similarity.measure) + ',' + format_double(r.similarity.mean) + ',' +
           format_double(r.similarity.min) + ',' + format_double(r.similarity.max) + ',' +
           format_double(r.quality.accuracy) + ',' + format_double(r.quality.type1_rate) + ',' +
           format_double(r.quality.type2_rate) + ',' + degenerate_flags(r.quality) + '\n';
  }
  return out;
}

inline void write_records(const fs::path& path, std::span<const TrainingRecord> records) {
  write_text(path, records_csv(records));
}

inline std::vector<TrainingRecord> read_records(const fs::path& path) {
  const CsvTable t = read_csv(path);
  if (join(t.header, ',') != kRecordHeader) throw ConfigError(path.string() + ": unexpected training-record header");
  const std::string where = path.string();
  std::vector<TrainingRecord> out;
  for (const auto& row : t.rows) {
    TrainingRecord r;
    r.algorithm = parse_algorithm(row[0]);
    r.pseudo_target_id = row[1];
    if (!row[2].empty()) r.source_ids = split(row[2], '|');
    for (const auto& id : r.source_ids)
      if (id == r.pseudo_target_id) throw ValidationError(where + ": pseudo-target '" + id + "' listed as its own source");
    r.similarity.measure = parse_measure(row[3]);
    r.similarity.mean = parse_double(row[4], where);
    r.similarity.min = parse_double(row[5], where);
    r.similarity.max = parse_double(row[6], where);
    r.quality.accuracy = parse_double(row[7], where);
    r.quality.type1_rate = parse_double(row[8], where);
    r.quality.type2_rate = parse_double(row[9], where);
    const std::string& flags = row[10];
    if (flags != "none" && flags != "type1" && flags != "type2" && flags != "type1|type2")
      throw ConfigError(where + ": bad degenerate_flags '" + flags + "'");
    r.quality.type1_degenerate = flags.find("type1") != std::string::npos;
    r.quality.type2_degenerate = flags.find("type2") != std::string::npos;
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Quality models

inline Json to_json(const QualityModel& m) {
  Json comps = Json::object();
  for (QualityComponent c : kQualityComponents) {
    const auto& gp = m.component(c);
    const auto& h = gp.hyperparameters();
    Json xs = Json::array();
    for (Eigen::Index i = 0; i < gp.inputs().rows(); ++i) {
      Json row = Json::array();
      for (Eigen::Index k = 0; k < gp.inputs().cols(); ++k) row.push_back(gp.inputs()(i, k));
      xs.push_back(std::move(row));
    }
    comps[to_string(c)] = Json{{"lengthscale", h.lengthscale},
                               {"signal_variance", h.signal_variance},
                               {"noise_variance", h.noise_variance},
                               {"mean", h.mean},
                               {"training_inputs", std::move(xs)},
                               {"training_targets", std::vector<double>(gp.targets().begin(), gp.targets().end())}};
  }
  return Json{{"algorithm", to_string(m.algorithm)},
              {"inputs", m.include_min_max ? "mean_min_max" : "mean"},
              {"target_transform", "logit"},
              {"components", std::move(comps)}};
}

inline QualityModel quality_model_from_json(const Json& j, const std::string& where) {
  QualityModel m;
  m.algorithm = parse_algorithm(get<std::string>(j, "algorithm", where));
  const auto inputs = get<std::string>(j, "inputs", where);
  if (inputs != "mean" && inputs != "mean_min_max") throw ConfigError(where + ": unknown inputs '" + inputs + "'");
  m.include_min_max = inputs == "mean_min_max";
  const Json comps = get<Json>(j, "components", where);
  for (QualityComponent c : kQualityComponents) {
    const Json cj = get<Json>(comps, to_string(c), where);
    GaussianProcessRegressor::Hyperparameters h;
    h.lengthscale = get<double>(cj, "lengthscale", where);
    h.signal_variance = get<double>(cj, "signal_variance", where);
    h.noise_variance = get<double>(cj, "noise_variance", where);
    h.mean = get<double>(cj, "mean", where);
    const auto xs = get<std::vector<std::vector<double>>>(cj, "training_inputs", where);
    const auto ys = get<std::vector<double>>(cj, "training_targets", where);
    const Eigen::Index p = m.include_min_max ? 3 : 1;
    Eigen::MatrixXd x(static_cast<Eigen::Index>(xs.size()), p);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (static_cast<Eigen::Index>(xs[i].size()) != p) throw ConfigError(where + ": training input width mismatch");
      for (Eigen::Index k = 0; k < p; ++k) x(static_cast<Eigen::Index>(i), k) = xs[i][static_cast<std::size_t>(k)];
    }
    const Eigen::VectorXd y = Eigen::VectorXd::Map(ys.data(), static_cast<Eigen::Index>(ys.size()));
    m.components[static_cast<std::size_t>(c)] = GaussianProcessRegressor::from_parameters(x, y, h);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Recommendations and reports

inline Json to_json(const TransferStrategy& t) {
  return Json{{"algorithm", to_string(t.algorithm)},
              {"source_ids", std::vector<std::string>(t.source_ids.begin(), t.source_ids.end())}};
}

inline TransferStrategy strategy_from_json(const Json& j, const std::string& where) {
  TransferStrategy t;
  t.algorithm = parse_algorithm(get<std::string>(j, "algorithm", where));
  for (const auto& id : get<std::vector<std::string>>(j, "source_ids", where)) t.source_ids.insert(id);
  validate(t);
  return t;
}

inline Json to_json(const QualityMeasures& q) {
  return Json{{"accuracy", q.accuracy}, {"type1", q.type1_rate}, {"type2", q.type2_rate}};
}

inline QualityMeasures quality_from_json(const Json& j, const std::string& where) {
  QualityMeasures q;
  q.accuracy = get<double>(j, "accuracy", where);
  q.type1_rate = get<double>(j, "type1", where);
  q.type2_rate = get<double>(j, "type2", where);
  return q;
}

inline Json to_json(const Recommendation& r) {
  Json ranked = Json::array();
  int rank = 1;
  for (const auto& e : r.ranked) {
    Json sim = nullptr;
    if (e.similarity)
      sim = Json{{"measure", to_string(e.similarity->measure)},
                 {"mean", e.similarity->mean},
                 {"min", e.similarity->min},
                 {"max", e.similarity->max}};
    ranked.push_back(Json{{"rank", rank++},
                          {"strategy", to_json(e.strategy)},
                          {"evit", e.evit},
                          {"expected_utility_quality", e.expected_utility_quality},
                          {"transfer_cost", e.transfer_cost},
                          {"objective", e.objective},
                          {"negative_transfer", e.negative_transfer},
                          {"similarity", std::move(sim)},
                          {"predicted_quality_mean", to_json(e.predicted_mean)}});
  }
  return Json{{"best", to_json(r.best)}, {"ranked", std::move(ranked)}};
}

inline Recommendation recommendation_from_json(const Json& j, const std::string& where) {
  Recommendation r;
  r.best = strategy_from_json(get<Json>(j, "best", where), where);
  for (const auto& e : get<Json>(j, "ranked", where)) {
    RankedStrategy s;
    s.strategy = strategy_from_json(get<Json>(e, "strategy", where), where);
    s.evit = get<double>(e, "evit", where);
    s.expected_utility_quality = get<double>(e, "expected_utility_quality", where);
    s.transfer_cost = get<double>(e, "transfer_cost", where);
    s.objective = get<double>(e, "objective", where);
    s.negative_transfer = get<bool>(e, "negative_transfer", where);
    if (e.contains("similarity") && !e.at("similarity").is_null()) {
      const Json& sj = e.at("similarity");
      s.similarity = SimilarityVector{parse_measure(get<std::string>(sj, "measure", where)),
                                      get<double>(sj, "mean", where), get<double>(sj, "min", where),
                                      get<double>(sj, "max", where)};
    }
    s.predicted_mean = quality_from_json(get<Json>(e, "predicted_quality_mean", where), where);
    r.ranked.push_back(std::move(s));
  }
  return r;
}

inline Json to_json(const RegretReport& r, std::span<const OracleResult> oracle) {
  Json table = Json::array();
  for (const auto& o : oracle)
    table.push_back(Json{{"strategy", to_json(o.strategy)},
                         {"realised", to_json(o.realised)},
                         {"realised_utility", o.realised_utility}});
  return Json{{"recommended", to_json(r.recommended)},
              {"oracle_best", to_json(r.oracle_best)},
              {"regret", r.regret},
              {"avoided_negative_transfer", r.avoided_negative_transfer},
              {"recommended_utility", r.recommended_utility},
              {"oracle_best_utility", r.oracle_best_utility},
              {"null_utility", r.null_utility},
              {"random_transfer_regret", r.random_transfer_regret},
              {"oracle_results", std::move(table)}};
}

/// Aligned plain-text rendering of a ranked recommendation.
inline std::string render_table(const Recommendation& r) {
  std::ostringstream os;
  os << std::left << std::setw(5) << "rank" << std::setw(36) << "strategy" << std::right << std::setw(14) << "EVIT"
     << std::setw(14) << "EU(Q|T)" << std::setw(12) << "U(T)" << std::setw(14) << "objective" << std::setw(9) << "S_mean"
     << "  neg\n";
  int rank = 1;
  for (const auto& e : r.ranked) {
    std::string name = describe(e.strategy);
    if (name.size() > 35) name = name.substr(0, 32) + "...";
    os << std::left << std::setw(5) << rank++ << std::setw(36) << name << std::right << std::fixed
       << std::setprecision(4) << std::setw(14) << e.evit << std::setw(14) << e.expected_utility_quality
       << std::setw(12) << e.transfer_cost << std::setw(14) << e.objective << std::setw(9);
    if (e.similarity)
      os << e.similarity->mean;
    else
      os << "-";
    os << "  " << (e.negative_transfer ? "yes" : "no") << '\n';
  }
  os << "best: " << describe(r.best) << '\n';
  return os.str();
}

}  // namespace evit::io
