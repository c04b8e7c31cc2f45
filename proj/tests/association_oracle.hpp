#pragma once

// Test-only exhaustive references for the association engine.

#include "sse/association.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <vector>

namespace sse::testing {

struct OracleOptimum {
  double affinity = 0.0;
  int kept = 0;
};

/// Enumerates every edge subset and keeps the valid ones: identity components hold at most one
/// node of each of person/face/body/voice, and each body keeps at most one group edge.
inline OracleOptimum exhaustive_partition_optimum(const RelationGraph& g) {
  std::vector<std::pair<EdgeKey, EdgeState>> edges(g.edges().begin(), g.edges().end());
  const auto ids = g.node_ids();
  std::map<EntityId, int> index;
  for (int i = 0; i < static_cast<int>(ids.size()); ++i) index[ids[i]] = i;
  const int m = static_cast<int>(edges.size());
  const int n = static_cast<int>(ids.size());

  OracleOptimum best{-1.0, 0};
  std::vector<int> parent(n);
  for (long mask = 0; mask < (1L << m); ++mask) {
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    std::map<int, int> group_edges_per_body;
    double affinity = 0.0;
    int kept = 0;
    bool ok = true;
    for (int e = 0; e < m && ok; ++e) {
      if (!(mask >> e & 1)) continue;
      const auto& [key, state] = edges[e];
      affinity += state.likelihood;
      ++kept;
      const bool group_edge = key.first.kind == EntityKind::group || key.second.kind == EntityKind::group;
      if (group_edge) {
        const EntityId& body = key.first.kind == EntityKind::body ? key.first : key.second;
        if (++group_edges_per_body[index[body]] > 1) ok = false;
      } else {
        parent[find(index[key.first])] = find(index[key.second]);
      }
    }
    if (!ok) continue;
    std::map<int, std::array<int, 5>> counts;
    for (int i = 0; i < n; ++i) {
      if (ids[i].kind == EntityKind::group) continue;
      if (++counts[find(i)][static_cast<int>(ids[i].kind)] > 1) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    if (affinity > best.affinity + 1e-9 || (std::abs(affinity - best.affinity) <= 1e-9 && kept < best.kept))
      best = {affinity, kept};
  }
  return best;
}

/// Random admissible graph with at most `max_features` face/body/voice nodes and `max_edges` edges.
inline RelationGraph random_relation_graph(std::mt19937& rng, int max_features = 8, int max_edges = 14) {
  std::uniform_int_distribution<int> feature_count(1, max_features);
  std::uniform_int_distribution<int> person_count(0, 3);
  std::uniform_int_distribution<int> group_count(0, 2);
  const int nf = feature_count(rng);
  std::vector<EntityId> nodes;
  std::uniform_int_distribution<int> kind(0, 2);
  for (int i = 0; i < nf; ++i) {
    const EntityKind k = std::array{EntityKind::face, EntityKind::body, EntityKind::voice}[kind(rng)];
    nodes.push_back({k, std::string(to_string(k)) + "_" + std::to_string(i)});
  }
  for (int i = 0, np = person_count(rng); i < np; ++i) nodes.push_back(person_id("p" + std::to_string(i)));
  for (int i = 0, ng = group_count(rng); i < ng; ++i) nodes.push_back(group_id("g" + std::to_string(i)));

  std::vector<EdgeKey> pairs;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (std::size_t j = i + 1; j < nodes.size(); ++j)
      if (admissible(nodes[i].kind, nodes[j].kind)) pairs.push_back(make_edge_key(nodes[i], nodes[j]));
  std::shuffle(pairs.begin(), pairs.end(), rng);
  std::uniform_int_distribution<int> edge_count(0, max_edges);
  pairs.resize(std::min<std::size_t>(pairs.size(), edge_count(rng)));

  // Coarse likelihoods so that ties between partitions actually occur.
  std::uniform_int_distribution<int> tenth(0, 10);
  RelationGraph g;
  for (const auto& id : nodes) g.add_node(id);
  for (const auto& [a, b] : pairs) g.submit({a, b, tenth(rng) / 10.0, 0.0});
  return g;
}

/// Minimum over all permutations (rows <= cols) of the assignment cost; forbidden = +inf entries
/// are skipped, maximising the number of pairs first.
inline std::pair<int, double> brute_force_assignment(const Eigen::MatrixXd& cost) {
  const bool transpose = cost.rows() > cost.cols();
  const Eigen::MatrixXd c = transpose ? Eigen::MatrixXd(cost.transpose()) : cost;
  std::vector<int> cols(c.cols());
  std::iota(cols.begin(), cols.end(), 0);
  int best_pairs = -1;
  double best = std::numeric_limits<double>::infinity();
  do {
    int pairs = 0;
    double total = 0.0;
    for (int i = 0; i < c.rows(); ++i) {
      const double x = c(i, cols[i]);
      if (std::isfinite(x)) {
        ++pairs;
        total += x;
      }
    }
    if (pairs > best_pairs || (pairs == best_pairs && total < best)) {
      best_pairs = pairs;
      best = total;
    }
  } while (std::next_permutation(cols.begin(), cols.end()));
  return {best_pairs, best};
}

}  // namespace sse::testing
