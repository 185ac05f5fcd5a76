#pragma once

// Synthetic population of lumped mass-spring chains: assembly, modal
// analysis and noisy natural-frequency feature synthesis.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "evit/domain.hpp"
#include "evit/error.hpp"
#include "evit/random.hpp"

namespace evit {

enum class Boundary { FixedFree, FixedFixed };

inline const char* to_string(Boundary b) { return b == Boundary::FixedFree ? "fixed-free" : "fixed-fixed"; }

inline Boundary parse_boundary(const std::string& s) {
  if (s == "fixed-free") return Boundary::FixedFree;
  if (s == "fixed-fixed") return Boundary::FixedFixed;
  throw ValidationError("unknown boundary condition '" + s + "' (expected fixed-free or fixed-fixed)");
}

/// Springs in a chain of n_dof masses: one per mass, plus the closing spring
/// to the far wall for fixed-fixed.
inline int spring_count(int n_dof, Boundary b) { return b == Boundary::FixedFree ? n_dof : n_dof + 1; }

struct DamageState {
  int class_label = 0;
  std::optional<int> spring_index;
  double reduction = 0.0;  // fractional stiffness loss of spring_index
};

struct StructureSpec {
  std::string id;
  int n_dof = 0;
  std::vector<double> masses;
  std::vector<double> stiffnesses;
  Boundary boundary = Boundary::FixedFree;
  std::vector<DamageState> damage_states;
  double temperature_factor = 1.0;
};

inline void validate(const DamageState& d, int n_springs) {
  if (!(d.reduction >= 0.0 && d.reduction < 1.0))
    throw ValidationError("damage reduction must lie in [0,1), got " + std::to_string(d.reduction));
  if (d.class_label < 0) throw ValidationError("damage class label must be non-negative");
  if (d.class_label == 0 && (d.spring_index || d.reduction != 0.0))
    throw ValidationError("class 0 is the undamaged state and cannot carry a damaged spring");
  if (d.class_label != 0 && !d.spring_index)
    throw ValidationError("damage class " + std::to_string(d.class_label) + " needs a spring index");
  if (d.spring_index && (*d.spring_index < 0 || *d.spring_index >= n_springs))
    throw ValidationError("damaged spring index " + std::to_string(*d.spring_index) + " outside 0.." +
                          std::to_string(n_springs - 1));
}

/// Class labels must form 0..C-1; returns C.
inline int class_count(const std::vector<DamageState>& states) {
  std::set<int> labels;
  for (const auto& s : states) labels.insert(s.class_label);
  if (labels.empty()) return 0;
  const int c = *labels.rbegin() + 1;
  if (static_cast<int>(labels.size()) != c)
    throw ValidationError("damage class labels must be contiguous 0..C-1");
  return c;
}

inline void validate(const StructureSpec& s) {
  if (s.n_dof < 1) throw ValidationError("structure '" + s.id + "': n_dof must be positive");
  const int n_springs = spring_count(s.n_dof, s.boundary);
  if (static_cast<int>(s.masses.size()) != s.n_dof)
    throw ValidationError("structure '" + s.id + "': expected " + std::to_string(s.n_dof) + " masses, got " +
                          std::to_string(s.masses.size()));
  if (static_cast<int>(s.stiffnesses.size()) != n_springs)
    throw ValidationError("structure '" + s.id + "': expected " + std::to_string(n_springs) + " stiffnesses for " +
                          to_string(s.boundary) + ", got " + std::to_string(s.stiffnesses.size()));
  for (double m : s.masses)
    if (!(m > 0.0)) throw ValidationError("structure '" + s.id + "': masses must be positive");
  for (double k : s.stiffnesses)
    if (!(k > 0.0)) throw ValidationError("structure '" + s.id + "': stiffnesses must be positive");
  if (!(s.temperature_factor > 0.0))
    throw ValidationError("structure '" + s.id + "': temperature factor must be positive");
  for (const auto& d : s.damage_states) validate(d, n_springs);
  class_count(s.damage_states);
}

struct StructuralModel {
  Eigen::MatrixXd mass_matrix;
  Eigen::MatrixXd stiffness_matrix;
};

struct ModalData {
  Eigen::VectorXd natural_frequencies;  // rad/s, ascending
  Eigen::MatrixXd modeshapes;           // columns mass-normalised
};

/// Chain connectivity. Node 0 is the left wall, nodes 1..n_dof the masses
/// and node n_dof+1 the right wall (connected only when fixed-fixed).
inline EdgeSet chain_graph(int n_dof, Boundary b) {
  EdgeSet edges;
  for (int i = 0; i < n_dof; ++i) edges.insert(make_edge(i, i + 1));
  if (b == Boundary::FixedFixed) edges.insert(make_edge(n_dof, n_dof + 1));
  return edges;
}

inline StructuralModel build_structure(const StructureSpec& spec, const DamageState& damage) {
  validate(spec);
  const int n = spec.n_dof;
  const int n_springs = spring_count(n, spec.boundary);
  validate(damage, n_springs);

  std::vector<double> k(spec.stiffnesses);
  if (damage.spring_index) k[static_cast<std::size_t>(*damage.spring_index)] *= 1.0 - damage.reduction;
  for (double& ki : k) ki *= spec.temperature_factor;

  StructuralModel model;
  model.mass_matrix = Eigen::VectorXd::Map(spec.masses.data(), n).asDiagonal();
  Eigen::MatrixXd& K = model.stiffness_matrix;
  K.setZero(n, n);
  // Spring i joins mass i-1 (or the left wall for i = 0) to mass i.
  for (int i = 0; i < n; ++i) {
    K(i, i) += k[static_cast<std::size_t>(i)];
    if (i > 0) {
      K(i - 1, i - 1) += k[static_cast<std::size_t>(i)];
      K(i - 1, i) -= k[static_cast<std::size_t>(i)];
      K(i, i - 1) -= k[static_cast<std::size_t>(i)];
    }
  }
  if (spec.boundary == Boundary::FixedFixed) K(n - 1, n - 1) += k[static_cast<std::size_t>(n)];
  return model;
}

namespace detail {

inline bool symmetric(const Eigen::MatrixXd& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

// Flip each column so its largest-magnitude entry (first on ties) is positive.
inline void fix_column_signs(Eigen::MatrixXd& v) {
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < v.rows(); ++i)
      if (std::abs(v(i, j)) > std::abs(v(best, j))) best = i;
    if (v(best, j) < 0.0) v.col(j) *= -1.0;
  }
}

}  // namespace detail

/// Solves K phi = w^2 M phi for all modes, ascending in frequency, with
/// mass-normalised modeshapes.
inline ModalData modal_analysis(const StructuralModel& model) {
  const auto& M = model.mass_matrix;
  const auto& K = model.stiffness_matrix;
  if (M.rows() != K.rows() || M.cols() != K.cols() || M.rows() == 0)
    throw NumericalError("modal_analysis: mass and stiffness matrices differ in size or are empty");
  if (!detail::symmetric(M, 1e-12) || !detail::symmetric(K, 1e-12))
    throw NumericalError("modal_analysis: mass or stiffness matrix is not symmetric");
  if (Eigen::LLT<Eigen::MatrixXd>(M).info() != Eigen::Success)
    throw NumericalError("modal_analysis: mass matrix is not positive definite");

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(K, M);
  if (solver.info() != Eigen::Success) throw NumericalError("modal_analysis: eigensolver did not converge");

  ModalData out;
  out.natural_frequencies = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  out.modeshapes = solver.eigenvectors();
  detail::fix_column_signs(out.modeshapes);
  return out;
}

inline Representation structure_representation(const StructureSpec& spec) {
  DamageState healthy;
  Representation r;
  r.modeshapes = modal_analysis(build_structure(spec, healthy)).modeshapes;
  r.graph_edges = chain_graph(spec.n_dof, spec.boundary);
  return r;
}

/// One labelled domain per structure: n_per_class noisy copies of each
/// damage state's natural frequencies. Noise is relative, std = noise_std * f.
inline Domain synthesize_domain(const StructureSpec& spec, int n_per_class, double noise_std, std::uint64_t seed) {
  validate(spec);
  if (spec.damage_states.empty()) throw ValidationError("structure '" + spec.id + "' has no damage states");
  if (n_per_class < 1) throw ValidationError("n_per_class must be positive");
  if (!(noise_std >= 0.0)) throw ValidationError("noise_std must be non-negative");

  const int n_states = static_cast<int>(spec.damage_states.size());
  Domain d;
  d.id = spec.id;
  d.n_classes = class_count(spec.damage_states);
  d.representation = structure_representation(spec);
  d.features.resize(static_cast<Eigen::Index>(n_states) * n_per_class, spec.n_dof);
  d.labels.emplace();
  d.labels->reserve(static_cast<std::size_t>(n_states * n_per_class));

  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::Index row = 0;
  for (const auto& state : spec.damage_states) {
    const Eigen::VectorXd f = modal_analysis(build_structure(spec, state)).natural_frequencies;
    for (int s = 0; s < n_per_class; ++s, ++row) {
      for (Eigen::Index j = 0; j < f.size(); ++j) d.features(row, j) = f(j) * (1.0 + noise_std * gauss(rng));
      d.labels->push_back(state.class_label);
    }
  }
  return d;
}

struct StructureEntry {
  std::string id;
  Boundary boundary = Boundary::FixedFree;
  double temperature_factor = 1.0;
};

struct PopulationConfig {
  int n_dof = 10;
  std::vector<double> nominal_masses;       // n_dof
  std::vector<double> nominal_stiffnesses;  // n_dof + 1; fixed-free chains use the first n_dof
  double stiffness_perturbation_std = 0.0;  // relative
  std::vector<StructureEntry> structures;
  std::vector<DamageState> damage_states;
  int n_per_class = 20;
  double noise_std = 0.0;
  std::string target_id;  // empty: last structure

  std::size_t n_structures() const { return structures.size(); }
};

inline void validate(const PopulationConfig& c) {
  if (c.structures.empty()) throw ValidationError("population config needs at least one structure");
  if (c.n_dof < 1) throw ValidationError("n_dof must be positive");
  if (static_cast<int>(c.nominal_masses.size()) != c.n_dof)
    throw ValidationError("nominal_masses must have n_dof entries");
  if (static_cast<int>(c.nominal_stiffnesses.size()) != c.n_dof + 1)
    throw ValidationError("nominal_stiffnesses must have n_dof + 1 entries");
  if (!(c.stiffness_perturbation_std >= 0.0)) throw ValidationError("perturbation std must be non-negative");
  if (c.damage_states.empty()) throw ValidationError("population config needs at least one damage state");
  std::set<std::string> ids;
  for (const auto& s : c.structures)
    if (s.id.empty() || !ids.insert(s.id).second) throw ValidationError("structure ids must be unique and non-empty");
  if (!c.target_id.empty() && !ids.count(c.target_id))
    throw ValidationError("target id '" + c.target_id + "' is not a configured structure");
}

/// Seed of a structure's private stream. Depends on the id only, so
/// reordering structures in the config does not change their data.
inline std::uint64_t structure_seed(std::uint64_t master, const std::string& id) { return derive_seed(master, id); }

/// Draws the structure's manufactured stiffnesses and returns its full spec.
inline StructureSpec sample_structure(const PopulationConfig& c, const StructureEntry& entry, Rng& rng) {
  StructureSpec spec;
  spec.id = entry.id;
  spec.n_dof = c.n_dof;
  spec.boundary = entry.boundary;
  spec.temperature_factor = entry.temperature_factor;
  spec.masses = c.nominal_masses;
  spec.damage_states = c.damage_states;
  const int n_springs = spring_count(c.n_dof, entry.boundary);

  std::normal_distribution<double> gauss(0.0, 1.0);
  constexpr int kMaxAttempts = 100;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    spec.stiffnesses.assign(c.nominal_stiffnesses.begin(), c.nominal_stiffnesses.begin() + n_springs);
    bool ok = true;
    for (double& k : spec.stiffnesses) {
      k *= 1.0 + c.stiffness_perturbation_std * gauss(rng);
      ok = ok && k > 0.0;
    }
    if (ok) return spec;
  }
  throw ValidationError("structure '" + entry.id + "': no positive stiffness draw after 100 attempts; "
                        "reduce stiffness_perturbation_std");
}

inline std::vector<Domain> generate_population(const PopulationConfig& config, std::uint64_t seed) {
  validate(config);
  std::vector<Domain> out;
  out.reserve(config.structures.size());
  for (const auto& entry : config.structures) {
    Rng rng(structure_seed(seed, entry.id));
    const StructureSpec spec = sample_structure(config, entry, rng);
    out.push_back(synthesize_domain(spec, config.n_per_class, config.noise_std, rng()));
  }
  return out;
}

/// Splits generated domains into sources and the (label-hidden) target.
inline Population make_population(std::vector<Domain> domains, const std::string& target_id) {
  if (domains.empty()) throw ValidationError("make_population: no domains");
  auto it = target_id.empty() ? domains.end() - 1
                              : std::find_if(domains.begin(), domains.end(),
                                             [&](const Domain& d) { return d.id == target_id; });
  if (it == domains.end()) throw ValidationError("target id '" + target_id + "' not found");
  Population p;
  auto hidden = hide_labels(std::move(*it));
  p.target_domain = std::move(hidden.domain);
  p.hidden_target_labels = std::move(hidden.labels);
  domains.erase(it);
  p.source_domains = std::move(domains);
  validate(p);
  return p;
}

}  // namespace evit
