#include "adi/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace adi {

ConceptHierarchy ConceptHierarchy::build_from_pool(const DatasetPool& pool) {
  if (pool.empty()) throw EmptyPool("cannot build a hierarchy from an empty pool");
  for (const auto& ds : pool.datasets()) {
    if (ds.classes().empty())
      throw EmptyClass("dataset '" + ds.name() + "' has no classes");
    for (const auto& c : ds.classes())
      if (c.samples.rows() == 0)
        throw EmptyClass("class " + std::to_string(c.id) + " of dataset '" + ds.name() +
                         "' has no samples");
  }

  ConceptHierarchy h;
  h.num_levels_ = 3;
  const auto& sources = pool.datasets();

  ConceptNode root;
  root.id = 0;
  root.level = 1;
  root.local_prob = 1.0;
  h.nodes_.push_back(root);

  const double ds_prob = 1.0 / static_cast<double>(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    ConceptNode n;
    n.id = static_cast<NodeId>(1 + i);
    n.level = 2;
    n.parent = 0;
    n.local_prob = ds_prob;
    h.nodes_.push_back(n);
    h.nodes_[0].children.push_back(n.id);
  }

  for (std::size_t i = 0; i < sources.size(); ++i) {
    const NodeId parent = static_cast<NodeId>(1 + i);
    const double leaf_prob = 1.0 / static_cast<double>(sources[i].classes().size());
    for (const auto& c : sources[i].classes()) {
      ConceptNode n;
      n.id = static_cast<NodeId>(h.nodes_.size());
      n.level = 3;
      n.parent = parent;
      n.local_prob = leaf_prob;
      n.leaf = LeafConcept{sources[i].id(), c.id};
      h.nodes_.push_back(n);
      h.nodes_[static_cast<std::size_t>(parent)].children.push_back(n.id);
      h.leaves_.push_back(n.id);
    }
  }
  return h;
}

ConceptHierarchy ConceptHierarchy::from_nodes(std::vector<ConceptNode> nodes) {
  if (nodes.empty()) throw Error("hierarchy needs at least a root node");
  ConceptHierarchy h;
  h.nodes_ = std::move(nodes);
  for (std::size_t i = 0; i < h.nodes_.size(); ++i) {
    if (h.nodes_[i].id != static_cast<NodeId>(i))
      throw Error("node ids must be dense 0..n-1");
    h.nodes_[i].children.clear();
  }
  if (h.nodes_[0].parent != kNoNode || h.nodes_[0].level != 1)
    throw Error("node 0 must be the level-1 root");
  for (std::size_t i = 1; i < h.nodes_.size(); ++i) {
    const auto& n = h.nodes_[i];
    if (n.parent == kNoNode) throw Error("non-root node without parent");
    if (n.parent < 0 || static_cast<std::size_t>(n.parent) >= h.nodes_.size())
      throw Error("parent id out of range");
    h.nodes_[static_cast<std::size_t>(n.parent)].children.push_back(n.id);
  }
  h.num_levels_ = 0;
  for (const auto& n : h.nodes_) h.num_levels_ = std::max(h.num_levels_, n.level);
  for (const auto& n : h.nodes_) {
    if (n.children.empty()) {
      if (n.level != h.num_levels_)
        throw Error("leaf node " + std::to_string(n.id) + " not at the deepest level");
      h.leaves_.push_back(n.id);
    }
    for (NodeId c : n.children)
      if (h.nodes_[static_cast<std::size_t>(c)].level != n.level + 1)
        throw Error("child level must be parent level + 1");
  }
  return h;
}

NodeId ConceptHierarchy::random_walk(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  NodeId cur = 0;
  while (!node(cur).children.empty()) {
    const auto& kids = node(cur).children;
    double total = 0.0;
    for (NodeId c : kids) total += node(c).local_prob;
    const double target = uniform(rng) * total;
    double acc = 0.0;
    NodeId pick = kids.back();
    for (NodeId c : kids) {
      acc += node(c).local_prob;
      if (acc > target) {
        pick = c;
        break;
      }
    }
    cur = pick;
  }
  return cur;
}

void ConceptHierarchy::clamp_group(NodeId parent) {
  auto& kids = node_mut(parent).children;
  // Raise members to the floor and give the remaining mass to the rest,
  // proportionally; iterate in case the rescale drops someone else below.
  for (std::size_t round = 0; round <= kids.size(); ++round) {
    double low_mass = 0.0;
    double rest_mass = 0.0;
    std::size_t low_count = 0;
    for (NodeId c : kids) {
      double p = node(c).local_prob;
      if (p <= kProbabilityFloor) {
        ++low_count;
        low_mass += kProbabilityFloor;
      } else {
        rest_mass += p;
      }
    }
    if (low_count == kids.size()) {
      for (NodeId c : kids) node_mut(c).local_prob = 1.0 / static_cast<double>(kids.size());
      return;
    }
    const double scale = (1.0 - low_mass) / rest_mass;
    bool dropped = false;
    for (NodeId c : kids) {
      double& p = node_mut(c).local_prob;
      if (p <= kProbabilityFloor) {
        p = kProbabilityFloor;
      } else {
        p *= scale;
        dropped |= (p < kProbabilityFloor);
      }
    }
    if (!dropped) return;
  }
}

void ConceptHierarchy::rebalance_in_group(NodeId node_id) {
  const ConceptNode& n = node(node_id);
  const auto& kids = node(n.parent).children;
  if (kids.size() < 2) return;
  double sibling_sum = 0.0;
  for (NodeId c : kids)
    if (c != node_id) sibling_sum += node(c).local_prob;
  const double p = n.local_prob;
  if (p <= sibling_sum) return;
  const double d = p - sibling_sum;
  const double share = d / static_cast<double>(kids.size() - 1);
  node_mut(node_id).local_prob = p - d;
  for (NodeId c : kids)
    if (c != node_id) node_mut(c).local_prob += share;
}

void ConceptHierarchy::rebalance(NodeId node_id) {
  const ConceptNode& n = node(node_id);
  if (n.parent == kNoNode || node(n.parent).children.size() < 2)
    throw std::logic_error("rebalance requires a node with at least one sibling");
  rebalance_in_group(node_id);
}

void ConceptHierarchy::adjust_probabilities(NodeId leaf, bool positive,
                                            const std::function<double(int)>& delta_fn) {
  const ConceptNode& l = node(leaf);
  if (!l.leaf.has_value() || l.level != num_levels_)
    throw std::invalid_argument("adjust_probabilities expects a leaf node");
  const double w = positive ? 1.0 : -1.0;

  NodeId cur = leaf;
  for (int level = num_levels_; level >= 2; --level) {
    const NodeId parent = node(cur).parent;
    const auto& kids = node(parent).children;
    if (kids.size() > 1) {
      const double dj = delta_fn(level);
      if (!(dj > 0.0)) throw std::invalid_argument("delta_fn must be positive on 2..L");
      const double share = w * dj / static_cast<double>(kids.size() - 1);
      node_mut(cur).local_prob += w * dj;
      for (NodeId c : kids)
        if (c != cur) node_mut(c).local_prob -= share;
      clamp_group(parent);
      rebalance_in_group(cur);
    }
    // an only child keeps probability 1: the sibling share is undefined and
    // renormalization would undo the update anyway
    cur = parent;
  }
}

double ConceptHierarchy::global_probability(NodeId leaf) const {
  const ConceptNode& l = node(leaf);
  if (l.level != num_levels_ || !l.children.empty())
    throw std::invalid_argument("global_probability expects a leaf node");
  double p = 1.0;
  NodeId cur = leaf;
  while (cur != kNoNode) {
    p *= node(cur).local_prob;
    cur = node(cur).parent;
  }
  return p;
}

std::vector<LeafStat> ConceptHierarchy::snapshot() const {
  std::vector<LeafStat> out;
  out.reserve(leaves_.size());
  for (NodeId id : leaves_) {
    const auto& n = node(id);
    out.push_back({id, n.leaf->dataset_id, n.leaf->class_id, global_probability(id)});
  }
  std::sort(out.begin(), out.end(), [](const LeafStat& a, const LeafStat& b) {
    if (a.global_prob != b.global_prob) return a.global_prob > b.global_prob;
    return a.leaf < b.leaf;
  });
  return out;
}

void ConceptHierarchy::check_invariants(double tol) const {
  if (nodes_.empty()) throw Error("empty hierarchy");
  if (std::abs(node(0).local_prob - 1.0) > 0.0) throw Error("root local_prob must be 1");
  for (const auto& n : nodes_) {
    if (!n.children.empty()) {
      double sum = 0.0;
      for (NodeId c : n.children) sum += node(c).local_prob;
      if (std::abs(sum - 1.0) > tol)
        throw Error("sibling group under node " + std::to_string(n.id) + " sums to " +
                    std::to_string(sum));
      if (n.children.size() > 1) {
        for (NodeId c : n.children)
          if (node(c).local_prob < kProbabilityFloor - 1e-12)
            throw Error("node " + std::to_string(c) + " below probability floor");
      }
    }
    if (n.children.empty() && n.level != num_levels_)
      throw Error("leaf not at deepest level");
    if (n.children.empty() && !n.leaf.has_value())
      throw Error("leaf node " + std::to_string(n.id) + " without a pool reference");
  }
  double glob = 0.0;
  for (NodeId id : leaves_) glob += global_probability(id);
  if (std::abs(glob - 1.0) > tol)
    throw Error("leaf global probabilities sum to " + std::to_string(glob));
}

void ConceptHierarchy::save_tsv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << "L\t" << num_levels_ << "\t|C|\t" << nodes_.size() << "\n";
  out << "id\tlevel\tparent\tlocal_prob\tdataset\tclass\n";
  char buf[64];
  for (const auto& n : nodes_) {
    std::snprintf(buf, sizeof(buf), "%.17g", n.local_prob);
    out << n.id << '\t' << n.level << '\t' << n.parent << '\t' << buf << '\t';
    if (n.leaf)
      out << n.leaf->dataset_id << '\t' << n.leaf->class_id << '\n';
    else
      out << "-1\t-1\n";
  }
  if (!out) throw Error("failed writing " + path);
}

ConceptHierarchy ConceptHierarchy::load_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedFile(path, 0, "cannot open file");
  std::string line;
  if (!std::getline(in, line)) throw MalformedFile(path, 0, "missing header");
  if (!std::getline(in, line)) throw MalformedFile(path, 0, "missing column header");
  std::vector<ConceptNode> nodes;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    ConceptNode n;
    long dataset = -1, cls = -1;
    if (!(ss >> n.id >> n.level >> n.parent >> n.local_prob >> dataset >> cls))
      throw MalformedFile(path, 0, "bad node line: " + line);
    if (dataset >= 0)
      n.leaf = LeafConcept{static_cast<std::uint32_t>(dataset),
                           static_cast<std::uint32_t>(cls)};
    nodes.push_back(std::move(n));
  }
  return from_nodes(std::move(nodes));
}

}  // namespace adi
