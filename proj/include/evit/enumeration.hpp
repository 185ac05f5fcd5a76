#pragma once

#include <algorithm>
#include <cstdint>
#include <iterator>
#include <string>
#include <vector>

#include "evit/error.hpp"
#include "evit/random.hpp"

namespace evit {

enum class EnumerationMode { Full, SingleSource, RandomCap };

inline const char* to_string(EnumerationMode m) {
  switch (m) {
    case EnumerationMode::Full: return "full";
    case EnumerationMode::SingleSource: return "single_source";
    case EnumerationMode::RandomCap: return "random_cap";
  }
  return "?";
}

inline EnumerationMode parse_enumeration_mode(const std::string& s) {
  if (s == "full") return EnumerationMode::Full;
  if (s == "single_source") return EnumerationMode::SingleSource;
  if (s == "random_cap") return EnumerationMode::RandomCap;
  throw ValidationError("unknown enumeration mode '" + s + "' (expected full, single_source or random_cap)");
}

struct EnumerationConstraints {
  EnumerationMode mode = EnumerationMode::Full;
  int cap = 100;
  std::uint64_t seed = 0;
};

inline void validate(const EnumerationConstraints& c) {
  if (c.cap < 1) throw ValidationError("enumeration cap must be positive");
}

// Both the strategy space and the training-data space explode with N_s;
// beyond this many sources full enumeration is refused.
inline constexpr std::size_t kMaxFullSources = 20;

/// The transfer framework needs at least two candidate sources: with fewer
/// there is no pseudo-target/source split to learn quality models from.
inline void require_multiple_sources(std::size_t n_sources, const char* where) {
  if (n_sources < 2)
    throw PreconditionError(std::string(where) + ": the number of candidate source domains N_s must be greater "
                            "than 1 (got " + std::to_string(n_sources) +
                            "); with N_s <= 1 no training data for P(Q|S,T) can be generated");
}

/// One pseudo-transfer task for meta-model training: the labels of source
/// `pseudo_target` are hidden and `sources` (indices, ascending, never
/// containing pseudo_target) transfer onto it. An empty source set is the
/// no-transfer case.
struct TrainingPair {
  std::size_t pseudo_target = 0;
  std::vector<std::size_t> sources;

  bool operator==(const TrainingPair&) const = default;
};

/// N_s * 2^(N_s-1): every pseudo-target with every subset of the others.
inline std::uint64_t full_pair_count(std::size_t n_sources) {
  return n_sources == 0 ? 0 : n_sources * (std::uint64_t{1} << (n_sources - 1));
}

inline std::uint64_t single_source_pair_count(std::size_t n_sources) {
  return n_sources < 2 ? 0 : n_sources * (n_sources - 1);
}

namespace detail {

// Uniform sample without replacement of `k` items, kept in original order.
template <typename T>
std::vector<T> sample_in_order(const std::vector<T>& items, std::size_t k, std::uint64_t seed) {
  if (k >= items.size()) return items;
  std::vector<T> out;
  out.reserve(k);
  Rng rng(seed);
  std::sample(items.begin(), items.end(), std::back_inserter(out), k, rng);
  return out;
}

}  // namespace detail

/// Pseudo-target/source-subset pairs per the constraints.
///  full:          all N_s * 2^(N_s-1) pairs (the empty subset included),
///  single_source: the N_s(N_s-1) ordered (pseudo-target, source) pairs,
///  random_cap:    `cap` pairs drawn uniformly from the non-empty full pairs.
/// Order: pseudo-target ascending, then subset bitmask ascending.
inline std::vector<TrainingPair> enumerate_training_pairs(std::size_t n_sources, const EnumerationConstraints& c) {
  validate(c);
  require_multiple_sources(n_sources, "enumerate_training_pairs");
  std::vector<TrainingPair> pairs;

  if (c.mode == EnumerationMode::SingleSource) {
    for (std::size_t p = 0; p < n_sources; ++p)
      for (std::size_t s = 0; s < n_sources; ++s)
        if (s != p) pairs.push_back({p, {s}});
    return pairs;
  }

  if (n_sources > kMaxFullSources)
    throw PreconditionError("enumerate_training_pairs: " + std::to_string(n_sources) +
                            " sources is too many for subset enumeration; use single_source");
  const bool keep_empty = c.mode == EnumerationMode::Full;
  const std::uint64_t n_masks = std::uint64_t{1} << (n_sources - 1);
  for (std::size_t p = 0; p < n_sources; ++p) {
    // Bits index the other sources in ascending order, skipping p.
    for (std::uint64_t mask = keep_empty ? 0 : 1; mask < n_masks; ++mask) {
      TrainingPair tp{p, {}};
      for (std::size_t bit = 0; bit + 1 < n_sources; ++bit)
        if (mask >> bit & 1u) tp.sources.push_back(bit < p ? bit : bit + 1);
      pairs.push_back(std::move(tp));
    }
  }
  if (c.mode == EnumerationMode::RandomCap)
    pairs = detail::sample_in_order(pairs, static_cast<std::size_t>(c.cap), derive_seed(c.seed, "training-pairs"));
  return pairs;
}

}  // namespace evit
