#include "sse/association.hpp"

#include "sse/hungarian.hpp"

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/connected_components.hpp>
#include <boost/graph/dijkstra_shortest_paths.hpp>
#include <boost/graph/kruskal_min_spanning_tree.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

namespace sse {

bool admissible(EntityKind a, EntityKind b) {
  if (a > b) std::swap(a, b);
  using K = EntityKind;
  if (a == K::face && b == K::body) return true;
  if (a == K::body && b == K::voice) return true;
  if (a == K::body && b == K::group) return true;
  if (is_feature(a) && b == K::person) return true;
  return false;
}

EdgeKey make_edge_key(const EntityId& a, const EntityId& b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

void RelationGraph::submit(const MatchCandidate& c) {
  if (c.a == c.b) throw std::invalid_argument("match candidate links " + c.a.token + " to itself");
  if (!admissible(c.a.kind, c.b.kind))
    throw InadmissiblePair("inadmissible pair " + std::string(to_string(c.a.kind)) + "-" +
                           std::string(to_string(c.b.kind)) + " (" + c.a.token + ", " + c.b.token + ")");
  if (!(c.likelihood >= 0.0 && c.likelihood <= 1.0))
    throw std::invalid_argument("likelihood outside [0,1] for (" + c.a.token + ", " + c.b.token + ")");
  add_node(c.a);
  add_node(c.b);
  edges_[make_edge_key(c.a, c.b)] = EdgeState{c.likelihood, c.time};
}

void RelationGraph::remove_node(const EntityId& id) {
  nodes_.erase(id);
  std::erase_if(edges_, [&](const auto& e) { return e.first.first == id || e.first.second == id; });
}

void RelationGraph::remove_kind(EntityKind kind) {
  std::erase_if(nodes_, [&](const auto& n) { return n.first.kind == kind; });
  std::erase_if(edges_, [&](const auto& e) { return e.first.first.kind == kind || e.first.second.kind == kind; });
}

void RelationGraph::set_group_centre(const GroupId& id, const Vec2d& centre) { nodes_[id].centre = centre; }

std::optional<Vec2d> RelationGraph::group_centre(const GroupId& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) return std::nullopt;
  return it->second.centre;
}

std::optional<EdgeState> RelationGraph::edge(const EntityId& a, const EntityId& b) const {
  auto it = edges_.find(make_edge_key(a, b));
  if (it == edges_.end()) return std::nullopt;
  return it->second;
}

std::vector<EntityId> RelationGraph::node_ids() const {
  std::vector<EntityId> ids;
  ids.reserve(nodes_.size());
  for (const auto& [id, _] : nodes_) ids.push_back(id);
  return ids;
}

std::vector<EntityId> RelationGraph::neighbours(const EntityId& id) const {
  std::vector<EntityId> out;
  for (const auto& [key, _] : edges_) {
    if (key.first == id) out.push_back(key.second);
    if (key.second == id) out.push_back(key.first);
  }
  return out;
}

void RelationGraph::prune(double now, double ttl) {
  if (!(ttl > 0.0)) throw std::invalid_argument("prune: ttl must be positive");
  std::erase_if(edges_, [&](const auto& e) { return now - e.second.last_updated > ttl; });
  std::set<EntityId> touched;
  for (const auto& [key, _] : edges_) {
    touched.insert(key.first);
    touched.insert(key.second);
  }
  std::erase_if(nodes_, [&](const auto& n) { return n.first.kind != EntityKind::person && !touched.contains(n.first); });
}

RelationGraph submit_match(RelationGraph g, const MatchCandidate& c) {
  g.submit(c);
  return g;
}

RelationGraph prune_stale(RelationGraph g, double now, double ttl_seconds) {
  g.prune(now, ttl_seconds);
  return g;
}

const PersonRecord* PartitionResult::person_of(const FeatureId& feature) const {
  for (const auto& p : persons)
    if (p.face == feature || p.body == feature || p.voice == feature) return &p;
  return nullptr;
}

// Partition search ---------------------------------------------------------------------------

namespace {

constexpr double kAffinityTolerance = 1e-9;

int slot_of(EntityKind k) {
  switch (k) {
    case EntityKind::person: return 0;
    case EntityKind::body: return 1;
    case EntityKind::face: return 2;
    case EntityKind::voice: return 3;
    default: return -1;
  }
}

/// One connected component of the identity graph (no group nodes).
struct Component {
  std::vector<EntityId> nodes;  // search order: persons, bodies, faces, voices
  std::vector<int> slot;
  Eigen::MatrixXd weight;  // likelihood, 0 where no edge
  std::vector<std::vector<char>> linked;
};

struct Score {
  double affinity = 0.0;
  std::vector<EdgeKey> kept;  // sorted
};

bool better(const Score& a, const Score& b) {
  if (a.affinity > b.affinity + kAffinityTolerance) return true;
  if (a.affinity < b.affinity - kAffinityTolerance) return false;
  if (a.kept.size() != b.kept.size()) return a.kept.size() < b.kept.size();
  return a.kept < b.kept;
}

Score evaluate(const Component& c, const std::vector<int>& cluster_of) {
  Score s;
  const int n = static_cast<int>(c.nodes.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (cluster_of[i] == cluster_of[j] && c.linked[i][j] && c.weight(i, j) > 0.0)
        s.kept.push_back(make_edge_key(c.nodes[i], c.nodes[j]));
  std::sort(s.kept.begin(), s.kept.end());
  // Summed in key order so equal partitions give bit-identical affinities.
  for (const auto& k : s.kept) {
    const auto ia = std::find(c.nodes.begin(), c.nodes.end(), k.first) - c.nodes.begin();
    const auto ib = std::find(c.nodes.begin(), c.nodes.end(), k.second) - c.nodes.begin();
    s.affinity += c.weight(ia, ib);
  }
  return s;
}

/// Assignment-seeded greedy partition: bodies to persons, then faces and voices to clusters.
std::vector<int> seed_partition(const Component& c) {
  const int n = static_cast<int>(c.nodes.size());
  std::vector<int> cluster_of(n, -1);
  std::vector<std::vector<int>> clusters;
  for (int i = 0; i < n; ++i)
    if (c.slot[i] == 0) {
      cluster_of[i] = static_cast<int>(clusters.size());
      clusters.push_back({i});
    }

  auto attach = [&](int slot) {
    std::vector<int> rows;
    for (int i = 0; i < n; ++i)
      if (c.slot[i] == slot) rows.push_back(i);
    if (rows.empty()) return;
    const int m = static_cast<int>(clusters.size());
    if (m > 0) {
      Eigen::MatrixXd gain = Eigen::MatrixXd::Zero(static_cast<int>(rows.size()), m);
      Eigen::MatrixXd cost(static_cast<int>(rows.size()), m);
      double max_gain = 0.0;
      for (int r = 0; r < gain.rows(); ++r)
        for (int k = 0; k < m; ++k) {
          bool any = false;
          for (int member : clusters[k]) {
            if (c.slot[member] == slot) {
              any = false;
              gain(r, k) = 0.0;
              break;
            }
            if (c.linked[rows[r]][member]) {
              any = true;
              gain(r, k) += c.weight(rows[r], member);
            }
          }
          cost(r, k) = any ? 0.0 : forbidden<double>();
          max_gain = std::max(max_gain, gain(r, k));
        }
      for (int r = 0; r < cost.rows(); ++r)
        for (int k = 0; k < m; ++k)
          if (std::isfinite(cost(r, k))) cost(r, k) = max_gain - gain(r, k);
      const auto assignment = hungarian_assign(cost);
      for (int r = 0; r < static_cast<int>(rows.size()); ++r) {
        const int k = assignment.row_to_col[r];
        if (k >= 0) cluster_of[rows[r]] = k;
      }
      for (int r = 0; r < static_cast<int>(rows.size()); ++r)
        if (cluster_of[rows[r]] >= 0) clusters[cluster_of[rows[r]]].push_back(rows[r]);
    }
    for (int i : rows)
      if (cluster_of[i] < 0) {
        cluster_of[i] = static_cast<int>(clusters.size());
        clusters.push_back({i});
      }
  };
  attach(1);
  attach(2);
  attach(3);
  return cluster_of;
}

/// Single-node moves until no move improves the score.
void local_improve(const Component& c, std::vector<int>& cluster_of) {
  const int n = static_cast<int>(c.nodes.size());
  Score best = evaluate(c, cluster_of);
  for (int round = 0; round < 4 * n; ++round) {
    bool improved = false;
    for (int i = 0; i < n; ++i) {
      const int original = cluster_of[i];
      std::set<int> targets(cluster_of.begin(), cluster_of.end());
      const int fresh = *std::max_element(cluster_of.begin(), cluster_of.end()) + 1;
      targets.insert(fresh);
      for (int t : targets) {
        if (t == original) continue;
        bool clash = false;
        for (int j = 0; j < n; ++j)
          if (j != i && cluster_of[j] == t && c.slot[j] == c.slot[i]) clash = true;
        if (clash) continue;
        cluster_of[i] = t;
        Score s = evaluate(c, cluster_of);
        if (better(s, best)) {
          best = std::move(s);
          improved = true;
          break;
        }
        cluster_of[i] = original;
      }
    }
    if (!improved) break;
  }
}

class ExactSearch {
 public:
  explicit ExactSearch(const Component& c) : c_(c), n_(static_cast<int>(c.nodes.size())) {
    // Optimistic remaining gain: each later node can gain at most its best edge per other slot.
    remaining_.assign(n_ + 1, 0.0);
    for (int k = n_ - 1; k >= 0; --k) {
      double per_slot[4] = {0, 0, 0, 0};
      for (int j = 0; j < k; ++j)
        if (c_.linked[k][j]) per_slot[c_.slot[j]] = std::max(per_slot[c_.slot[j]], c_.weight(k, j));
      remaining_[k] = remaining_[k + 1] + per_slot[0] + per_slot[1] + per_slot[2] + per_slot[3];
    }
  }

  std::vector<int> solve(std::vector<int> incumbent) {
    best_assignment_ = std::move(incumbent);
    best_ = evaluate(c_, best_assignment_);
    current_.assign(n_, -1);
    masks_.clear();
    recurse(0, 0.0);
    return best_assignment_;
  }

 private:
  void recurse(int i, double affinity) {
    if (affinity + remaining_[i] < best_.affinity - kAffinityTolerance) return;
    if (i == n_) {
      Score s = evaluate(c_, current_);
      if (better(s, best_)) {
        best_ = std::move(s);
        best_assignment_ = current_;
      }
      return;
    }
    const int bit = 1 << c_.slot[i];
    const int clusters = static_cast<int>(masks_.size());
    for (int k = 0; k < clusters; ++k) {
      if (masks_[k] & bit) continue;
      double gain = 0.0;
      for (int j = 0; j < i; ++j)
        if (current_[j] == k && c_.linked[i][j]) gain += c_.weight(i, j);
      current_[i] = k;
      masks_[k] |= bit;
      recurse(i + 1, affinity + gain);
      masks_[k] &= ~bit;
    }
    current_[i] = clusters;
    masks_.push_back(bit);
    recurse(i + 1, affinity);
    masks_.pop_back();
    current_[i] = -1;
  }

  const Component& c_;
  int n_;
  std::vector<double> remaining_;
  std::vector<int> current_;
  std::vector<int> masks_;
  Score best_;
  std::vector<int> best_assignment_;
};

std::vector<Component> identity_components(const RelationGraph& g) {
  std::vector<EntityId> ids;
  for (const auto& id : g.node_ids())
    if (id.kind != EntityKind::group) ids.push_back(id);
  std::map<EntityId, int> index;
  for (int i = 0; i < static_cast<int>(ids.size()); ++i) index[ids[i]] = i;

  boost::adjacency_list<boost::vecS, boost::vecS, boost::undirectedS> graph(ids.size());
  for (const auto& [key, _] : g.edges())
    if (index.contains(key.first) && index.contains(key.second))
      boost::add_edge(index[key.first], index[key.second], graph);
  std::vector<int> comp(ids.size());
  const int count = ids.empty() ? 0 : boost::connected_components(graph, comp.data());

  std::vector<std::vector<EntityId>> members(count);
  for (std::size_t i = 0; i < ids.size(); ++i) members[comp[i]].push_back(ids[i]);

  std::vector<Component> out;
  for (auto& m : members) {
    std::stable_sort(m.begin(), m.end(), [](const EntityId& a, const EntityId& b) {
      if (slot_of(a.kind) != slot_of(b.kind)) return slot_of(a.kind) < slot_of(b.kind);
      return a.token < b.token;
    });
    Component c;
    c.nodes = m;
    const int n = static_cast<int>(m.size());
    c.slot.resize(n);
    c.weight = Eigen::MatrixXd::Zero(n, n);
    c.linked.assign(n, std::vector<char>(n, 0));
    for (int i = 0; i < n; ++i) c.slot[i] = slot_of(m[i].kind);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (auto e = g.edge(m[i], m[j])) {
          c.weight(i, j) = c.weight(j, i) = e->likelihood;
          c.linked[i][j] = c.linked[j][i] = 1;
        }
    out.push_back(std::move(c));
  }
  return out;
}

/// Splits clusters into the connected pieces of their positive edges.
std::vector<std::vector<int>> kept_clusters(const Component& c, const std::vector<int>& cluster_of) {
  const int n = static_cast<int>(c.nodes.size());
  std::vector<int> piece(n, -1);
  std::vector<std::vector<int>> out;
  for (int s = 0; s < n; ++s) {
    if (piece[s] >= 0) continue;
    std::vector<int> stack{s}, members;
    piece[s] = static_cast<int>(out.size());
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      members.push_back(u);
      for (int v = 0; v < n; ++v)
        if (piece[v] < 0 && cluster_of[v] == cluster_of[u] && c.linked[u][v] && c.weight(u, v) > 0.0) {
          piece[v] = piece[s];
          stack.push_back(v);
        }
    }
    std::sort(members.begin(), members.end());
    out.push_back(std::move(members));
  }
  return out;
}

}  // namespace

PartitionResult solve_partition(const RelationGraph& g, const PartitionOptions& options) {
  PartitionResult result;
  std::set<EdgeKey> kept;
  std::map<FeatureId, PersonId> owner_of_body;
  std::set<EntityId> taken_ids;
  for (const auto& id : g.node_ids()) taken_ids.insert(id);

  for (const Component& c : identity_components(g)) {
    std::vector<int> assignment = seed_partition(c);
    local_improve(c, assignment);
    if (static_cast<int>(c.nodes.size()) <= options.exact_node_limit)
      assignment = ExactSearch(c).solve(std::move(assignment));

    for (const auto& e : evaluate(c, assignment).kept) kept.insert(e);

    for (const auto& cluster : kept_clusters(c, assignment)) {
      PersonRecord rec;
      bool has_person = false;
      for (int i : cluster) {
        const EntityId& id = c.nodes[i];
        switch (id.kind) {
          case EntityKind::person:
            rec.id = id;
            has_person = true;
            break;
          case EntityKind::face: rec.face = id; break;
          case EntityKind::body: rec.body = id; break;
          case EntityKind::voice: rec.voice = id; break;
          default: break;
        }
      }
      if (!rec.face && !rec.body && !rec.voice) continue;
      if (has_person) {
        rec.anonymous = rec.id.token.starts_with(options.anonymous_prefix);
      } else {
        if (!rec.body) continue;
        EntityId candidate = person_id(options.anonymous_prefix + rec.body->token);
        for (int suffix = 1; taken_ids.contains(candidate); ++suffix)
          candidate = person_id(options.anonymous_prefix + rec.body->token + "_" + std::to_string(suffix));
        taken_ids.insert(candidate);
        rec.id = candidate;
        rec.anonymous = true;
      }
      if (rec.body) owner_of_body[*rec.body] = rec.id;
      result.persons.push_back(std::move(rec));
    }
  }

  // Groups attach after persons: each body keeps its strongest group edge.
  std::map<FeatureId, std::pair<GroupId, double>> best_group;
  for (const auto& [key, state] : g.edges()) {
    const bool fwd = key.first.kind == EntityKind::body && key.second.kind == EntityKind::group;
    const bool rev = key.second.kind == EntityKind::body && key.first.kind == EntityKind::group;
    if (!fwd && !rev) continue;
    const EntityId& body = fwd ? key.first : key.second;
    const EntityId& group = fwd ? key.second : key.first;
    if (!(state.likelihood > 0.0) || !owner_of_body.contains(body)) continue;
    auto it = best_group.find(body);
    if (it == best_group.end() || state.likelihood > it->second.second ||
        (state.likelihood == it->second.second && group < it->second.first))
      best_group[body] = {group, state.likelihood};
  }
  std::map<GroupId, GroupRecord> groups;
  for (const auto& [body, choice] : best_group) {
    kept.insert(make_edge_key(body, choice.first));
    auto& rec = groups[choice.first];
    rec.id = choice.first;
    rec.members.insert(owner_of_body.at(body));
    rec.center = g.group_centre(choice.first).value_or(Vec2d::Zero());
  }
  for (auto& [_, rec] : groups) result.groups.push_back(std::move(rec));

  std::sort(result.persons.begin(), result.persons.end(),
            [](const PersonRecord& a, const PersonRecord& b) { return a.id < b.id; });
  for (const auto& [key, state] : g.edges()) {
    WeightedEdge e{key.first, key.second, state.likelihood};
    if (kept.contains(key)) {
      result.kept_edges.push_back(e);
      result.affinity += state.likelihood;
    } else {
      result.discarded_edges.push_back(e);
    }
  }
  return result;
}

// Voice identification -----------------------------------------------------------------------

void VoiceDatabase::store(const PersonId& id, const Eigen::VectorXd& embedding) {
  const double norm = embedding.norm();
  if (norm > 0.0) entries[id] = embedding / norm;
}

std::optional<VoiceMatch> voice_match(const Eigen::VectorXd& embedding, const VoiceDatabase& db, double threshold) {
  std::optional<VoiceMatch> best;
  for (const auto& [id, stored] : db.entries) {
    if (stored.size() != embedding.size()) continue;
    const double sim = stored.dot(embedding);
    if (sim > threshold && (!best || sim > best->similarity)) best = VoiceMatch{id, sim};
  }
  return best;
}

std::optional<MatchCandidate> voice_match_candidate(const VoiceObservation& voice, const VoiceDatabase& db,
                                                    double threshold, double now) {
  auto m = voice_match(voice.embedding, db, threshold);
  if (!m) return std::nullopt;
  return MatchCandidate{voice.id, m->person, std::clamp(m->similarity, 0.0, 1.0), now};
}

// Diagnostics -------------------------------------------------------------------------------

namespace {

using WeightedGraph = boost::adjacency_list<boost::vecS, boost::vecS, boost::undirectedS, boost::no_property,
                                            boost::property<boost::edge_weight_t, double>>;

struct IndexedGraph {
  std::vector<EntityId> ids;
  std::map<EntityId, int> index;
};

IndexedGraph index_nodes(const RelationGraph& g) {
  IndexedGraph ig;
  ig.ids = g.node_ids();
  for (int i = 0; i < static_cast<int>(ig.ids.size()); ++i) ig.index[ig.ids[i]] = i;
  return ig;
}

}  // namespace

std::vector<std::vector<EntityId>> connected_components(const RelationGraph& g) {
  const IndexedGraph ig = index_nodes(g);
  boost::adjacency_list<boost::vecS, boost::vecS, boost::undirectedS> graph(ig.ids.size());
  for (const auto& [key, _] : g.edges()) boost::add_edge(ig.index.at(key.first), ig.index.at(key.second), graph);
  std::vector<int> comp(ig.ids.size());
  const int count = ig.ids.empty() ? 0 : boost::connected_components(graph, comp.data());
  std::vector<std::vector<EntityId>> out(count);
  for (std::size_t i = 0; i < ig.ids.size(); ++i) out[comp[i]].push_back(ig.ids[i]);
  return out;
}

SpanningForest minimum_spanning_forest(const RelationGraph& g) {
  const IndexedGraph ig = index_nodes(g);
  WeightedGraph graph(ig.ids.size());
  for (const auto& [key, state] : g.edges())
    boost::add_edge(ig.index.at(key.first), ig.index.at(key.second), 1.0 - state.likelihood, graph);
  std::vector<boost::graph_traits<WeightedGraph>::edge_descriptor> tree;
  boost::kruskal_minimum_spanning_tree(graph, std::back_inserter(tree));
  SpanningForest forest;
  for (const auto& e : tree) {
    const EntityId& a = ig.ids[boost::source(e, graph)];
    const EntityId& b = ig.ids[boost::target(e, graph)];
    const EdgeKey key = make_edge_key(a, b);
    const double l = g.edges().at(key).likelihood;
    forest.edges.push_back({key.first, key.second, l});
  }
  std::sort(forest.edges.begin(), forest.edges.end(),
            [](const WeightedEdge& x, const WeightedEdge& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });
  for (const auto& e : forest.edges) forest.weight += 1.0 - e.likelihood;
  return forest;
}

LikelihoodPath most_likely_path(const RelationGraph& g, const EntityId& from, const EntityId& to) {
  LikelihoodPath path;
  const IndexedGraph ig = index_nodes(g);
  if (!ig.index.contains(from) || !ig.index.contains(to)) return path;
  WeightedGraph graph(ig.ids.size());
  for (const auto& [key, state] : g.edges())
    if (state.likelihood > 0.0)
      boost::add_edge(ig.index.at(key.first), ig.index.at(key.second), -std::log(state.likelihood), graph);
  const int n = static_cast<int>(ig.ids.size());
  std::vector<double> dist(n);
  std::vector<int> pred(n);
  const int s = ig.index.at(from);
  boost::dijkstra_shortest_paths(graph, s, boost::predecessor_map(pred.data()).distance_map(dist.data()));
  const int t = ig.index.at(to);
  if (t != s && pred[t] == t) return path;
  path.reachable = true;
  path.cost = dist[t];
  for (int v = t;; v = pred[v]) {
    path.nodes.push_back(ig.ids[v]);
    if (v == s) break;
  }
  std::reverse(path.nodes.begin(), path.nodes.end());
  return path;
}

GraphDiagnostics graph_diagnostics(const RelationGraph& g, const std::optional<std::pair<EntityId, EntityId>>& query) {
  GraphDiagnostics d;
  d.components = connected_components(g);
  d.mst = minimum_spanning_forest(g);
  if (query) d.path = most_likely_path(g, query->first, query->second);
  return d;
}

// Person manager ------------------------------------------------------------------------------

void PersonManager::replace_groups(const std::vector<MatchCandidate>& candidates,
                                   const std::map<GroupId, Vec2d>& centres) {
  graph_.remove_kind(EntityKind::group);
  for (const auto& c : candidates) {
    try {
      graph_.submit(c);
    } catch (const std::invalid_argument&) {
      ++rejected_;
    }
  }
  for (const auto& [id, centre] : centres)
    if (graph_.has_node(id)) graph_.set_group_centre(id, centre);
}

PartitionResult PersonManager::resolve(double now) {
  graph_.prune(now, config_.ttl);
  std::set<FeatureId> fresh(observed_.begin(), observed_.end());
  for (const auto& id : observed_) graph_.add_node(id);
  observed_.clear();
  while (!queue_.empty()) {
    const MatchCandidate& c = queue_.front();
    try {
      graph_.submit(c);
      fresh.insert(c.a);
      fresh.insert(c.b);
    } catch (const std::invalid_argument&) {
      ++rejected_;
    }
    queue_.pop_front();
  }
  PartitionResult result = solve_partition(graph_, config_.partition);

  // Anchor every binding to its person so it survives detector flicker. Anchors of unseen
  // features weaken and finally expire, so a stale feature cannot outweigh a live one.
  for (const auto& p : result.persons) {
    for (const auto* slot : {&p.face, &p.body, &p.voice}) {
      if (!*slot) continue;
      const auto existing = graph_.edge(p.id, **slot);
      if (!existing) {
        graph_.submit(MatchCandidate{p.id, **slot, config_.anchor_likelihood, now});
      } else if (fresh.contains(**slot)) {
        graph_.submit(MatchCandidate{p.id, **slot, std::max(existing->likelihood, config_.anchor_likelihood), now});
      } else {
        graph_.submit(MatchCandidate{p.id, **slot, existing->likelihood * config_.anchor_decay, existing->last_updated});
      }
    }
  }
  return result;
}

}  // namespace sse
