#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "adi/dataset.hpp"
#include "adi/errors.hpp"

namespace adi {

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

/// Pool reference carried by a leaf node: (dataset id, class id).
struct LeafConcept {
  std::uint32_t dataset_id = 0;
  std::uint32_t class_id = 0;
  friend bool operator==(const LeafConcept&, const LeafConcept&) = default;
};

struct ConceptNode {
  NodeId id = kNoNode;
  int level = 0;  // 1 = root .. num_levels() = leaves
  NodeId parent = kNoNode;
  std::vector<NodeId> children;
  double local_prob = 0.0;
  std::optional<LeafConcept> leaf;  // present iff the node is a leaf
};

struct LeafStat {
  NodeId leaf = kNoNode;
  std::uint32_t dataset_id = 0;
  std::uint32_t class_id = 0;
  double global_prob = 0.0;
};

/// Tree of concepts with sibling-normalized local probabilities. Every sibling
/// group sums to 1; the leaf global probabilities (path products) therefore
/// sum to 1 as well. Mutation is strictly sequential; concurrent reads are fine
/// as long as no adjustment runs.
class ConceptHierarchy {
 public:
  /// Sibling-group members are clamped to this floor after each update so that
  /// repeated negative feedback can never drive a probability negative.
  static constexpr double kProbabilityFloor = 1e-6;

  /// Root -> one internal node per dataset -> one leaf per class, local
  /// probabilities 1/q per sibling group of size q.
  static ConceptHierarchy build_from_pool(const DatasetPool& pool);

  /// Assembles a hierarchy from explicit nodes (ids must be 0..n-1, node 0 the
  /// root). Children lists are derived from parent links in id order.
  static ConceptHierarchy from_nodes(std::vector<ConceptNode> nodes);

  std::size_t size() const { return nodes_.size(); }  // |C|, root included
  int num_levels() const { return num_levels_; }
  const ConceptNode& node(NodeId id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  const std::vector<NodeId>& leaves() const { return leaves_; }

  /// Top-down multinomial walk over local probabilities; returns a leaf id.
  NodeId random_walk(std::mt19937_64& rng) const;

  /// Applies the per-level target/sibling update with sign `positive`, then
  /// floor-clamps and rebalances each touched sibling group, walking from the
  /// leaf up to the children of the root. delta_fn maps a level to the
  /// adjustment magnitude and must be positive on 2..num_levels().
  void adjust_probabilities(NodeId leaf, bool positive,
                            const std::function<double(int)>& delta_fn);

  /// If the node's probability exceeds the sum of its siblings', subtracts the
  /// excess d and redistributes d/|U| to each sibling. No-op otherwise.
  void rebalance(NodeId node_id);

  double global_probability(NodeId leaf) const;

  /// All leaves with their pool references and global probabilities, sorted by
  /// descending probability, ties by leaf id.
  std::vector<LeafStat> snapshot() const;

  /// Structural and probabilistic invariants; throws Error on violation.
  void check_invariants(double tol = 1e-9) const;

  void save_tsv(const std::string& path) const;
  static ConceptHierarchy load_tsv(const std::string& path);

 private:
  ConceptNode& node_mut(NodeId id) { return nodes_[static_cast<std::size_t>(id)]; }
  void clamp_group(NodeId parent);
  void rebalance_in_group(NodeId node_id);

  std::vector<ConceptNode> nodes_;
  std::vector<NodeId> leaves_;
  int num_levels_ = 0;
};

}  // namespace adi
