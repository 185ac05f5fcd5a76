#pragma once

#include <Eigen/Dense>

#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "evit/error.hpp"

namespace evit {

/// Undirected edge, stored with first < second.
using Edge = std::pair<int, int>;
using EdgeSet = std::set<Edge>;

inline Edge make_edge(int a, int b) {
  if (a == b) throw ValidationError("graph edge is a self-loop on node " + std::to_string(a));
  return a < b ? Edge{a, b} : Edge{b, a};
}

/// Structural representation used for similarity scoring: modeshapes of the
/// undamaged structure plus its element-connectivity graph.
struct Representation {
  Eigen::MatrixXd modeshapes;  // n_dof x n_modes
  EdgeSet graph_edges;

  bool operator==(const Representation& o) const {
    return modeshapes.rows() == o.modeshapes.rows() && modeshapes.cols() == o.modeshapes.cols() &&
           modeshapes == o.modeshapes && graph_edges == o.graph_edges;
  }
};

inline void validate(const Representation& r) {
  for (const auto& [a, b] : r.graph_edges) {
    if (a >= b) throw ValidationError("graph edge (" + std::to_string(a) + "," + std::to_string(b) +
                                      ") is not normalised or is a self-loop");
  }
}

struct Domain {
  std::string id;
  Eigen::MatrixXd features;                 // N x d
  std::optional<std::vector<int>> labels;   // N class indices, absent for targets
  Representation representation;
  int n_classes = 1;
  // Set by merge_sources: the representations of the merged domains, in order.
  std::vector<Representation> constituents;

  Eigen::Index n_samples() const { return features.rows(); }
  Eigen::Index n_features() const { return features.cols(); }
  bool labelled() const { return labels.has_value(); }
};

inline void validate(const Domain& d) {
  if (d.n_classes < 1) throw ValidationError("domain '" + d.id + "': n_classes must be positive");
  if (d.labels) {
    if (static_cast<Eigen::Index>(d.labels->size()) != d.features.rows())
      throw ValidationError("domain '" + d.id + "': " + std::to_string(d.labels->size()) +
                            " labels for " + std::to_string(d.features.rows()) + " samples");
    for (int y : *d.labels)
      if (y < 0 || y >= d.n_classes)
        throw ValidationError("domain '" + d.id + "': label " + std::to_string(y) +
                              " outside 0.." + std::to_string(d.n_classes - 1));
  }
  validate(d.representation);
}

/// Candidate source domains plus one target. In simulation the target's true
/// labels are kept aside in hidden_target_labels for oracle scoring only.
struct Population {
  std::vector<Domain> source_domains;
  Domain target_domain;
  std::optional<std::vector<int>> hidden_target_labels;

  std::size_t n_sources() const { return source_domains.size(); }
  const Domain& source(const std::string& id) const {
    for (const auto& d : source_domains)
      if (d.id == id) return d;
    throw ValidationError("unknown source domain '" + id + "'");
  }
};

inline void validate(const Population& p) {
  if (p.source_domains.empty()) throw ValidationError("population has no source domains");
  const auto d = p.source_domains.front().n_features();
  const auto c = p.source_domains.front().n_classes;
  std::set<std::string> ids;
  for (const auto& s : p.source_domains) {
    validate(s);
    if (!s.labelled()) throw ValidationError("source domain '" + s.id + "' has no labels");
    if (s.n_features() != d) throw ValidationError("source domain '" + s.id + "' has mismatched feature dimension");
    if (s.n_classes != c) throw ValidationError("source domain '" + s.id + "' has a different class alphabet");
    if (!ids.insert(s.id).second) throw ValidationError("duplicate source id '" + s.id + "'");
  }
  validate(p.target_domain);
  if (ids.count(p.target_domain.id)) throw ValidationError("target id '" + p.target_domain.id + "' is also a source");
  if (p.target_domain.labelled())
    throw ValidationError("target domain '" + p.target_domain.id +
                          "' carries labels; labelled or partially labelled targets are not supported");
  if (p.target_domain.n_features() != d) throw ValidationError("target domain has mismatched feature dimension");
  if (p.hidden_target_labels &&
      static_cast<Eigen::Index>(p.hidden_target_labels->size()) != p.target_domain.n_samples())
    throw ValidationError("hidden target labels do not match target sample count");
}

struct HiddenLabels {
  Domain domain;
  std::vector<int> labels;
};

inline HiddenLabels hide_labels(Domain domain) {
  if (!domain.labels) throw PreconditionError("hide_labels: domain '" + domain.id + "' has no labels");
  std::vector<int> labels = std::move(*domain.labels);
  domain.labels.reset();
  return {std::move(domain), std::move(labels)};
}

inline Domain restore_labels(Domain domain, std::vector<int> labels) {
  domain.labels = std::move(labels);
  validate(domain);
  return domain;
}

/// Row-concatenates labelled domains in the given order. The merged domain's
/// representation is the first constituent's; all are kept in constituents.
inline Domain merge_sources(std::span<const Domain* const> domains) {
  if (domains.empty()) throw ValidationError("merge_sources: empty domain list");
  const Domain& first = *domains.front();
  Eigen::Index rows = 0;
  for (const Domain* d : domains) {
    if (!d->labelled()) throw ValidationError("merge_sources: domain '" + d->id + "' is unlabelled");
    if (d->n_features() != first.n_features())
      throw ValidationError("merge_sources: domain '" + d->id + "' has " + std::to_string(d->n_features()) +
                            " features, expected " + std::to_string(first.n_features()));
    if (d->n_classes != first.n_classes)
      throw ValidationError("merge_sources: domain '" + d->id + "' has a different class alphabet");
    rows += d->n_samples();
  }

  Domain out;
  out.n_classes = first.n_classes;
  out.features.resize(rows, first.n_features());
  out.labels.emplace();
  out.labels->reserve(static_cast<std::size_t>(rows));
  out.representation = first.representation;
  Eigen::Index r = 0;
  for (const Domain* d : domains) {
    if (!out.id.empty()) out.id += '+';
    out.id += d->id;
    out.features.middleRows(r, d->n_samples()) = d->features;
    r += d->n_samples();
    out.labels->insert(out.labels->end(), d->labels->begin(), d->labels->end());
    out.constituents.push_back(d->representation);
  }
  return out;
}

inline Domain merge_sources(std::span<const Domain> domains) {
  std::vector<const Domain*> ptrs;
  ptrs.reserve(domains.size());
  for (const auto& d : domains) ptrs.push_back(&d);
  return merge_sources(std::span<const Domain* const>(ptrs));
}

}  // namespace evit
