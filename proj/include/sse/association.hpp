#pragma once

// Person manager: a probabilistic relation graph between features, persons and groups, and the
// partition of that graph into persons that maximises the total association likelihood.

#include "sse/scene.hpp"

#include <Eigen/Core>

#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace sse {

struct InadmissiblePair : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// face-body, body-voice, body-group and feature-person are the only associable kind pairs.
bool admissible(EntityKind a, EntityKind b);

struct MatchCandidate {
  EntityId a;
  EntityId b;
  double likelihood = 0.0;
  double time = 0.0;
};

/// Canonical undirected edge key, first < second.
using EdgeKey = std::pair<EntityId, EntityId>;
EdgeKey make_edge_key(const EntityId& a, const EntityId& b);

struct EdgeState {
  double likelihood = 0.0;
  double last_updated = 0.0;
};

class RelationGraph {
 public:
  void add_node(const EntityId& id) { nodes_.try_emplace(id); }
  bool has_node(const EntityId& id) const { return nodes_.contains(id); }

  /// Inserts or overwrites edge (c.a, c.b). Throws InadmissiblePair / std::invalid_argument.
  void submit(const MatchCandidate& c);

  void remove_node(const EntityId& id);
  void remove_kind(EntityKind kind);
  void set_group_centre(const GroupId& id, const Vec2d& centre);
  std::optional<Vec2d> group_centre(const GroupId& id) const;

  std::optional<EdgeState> edge(const EntityId& a, const EntityId& b) const;
  const std::map<EdgeKey, EdgeState>& edges() const { return edges_; }
  std::vector<EntityId> node_ids() const;
  std::vector<EntityId> neighbours(const EntityId& id) const;

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  /// Drops edges older than ttl, then feature and group nodes left isolated. Persons stay.
  void prune(double now, double ttl);

 private:
  struct NodeInfo {
    std::optional<Vec2d> centre;
  };
  std::map<EntityId, NodeInfo> nodes_;
  std::map<EdgeKey, EdgeState> edges_;
};

RelationGraph submit_match(RelationGraph g, const MatchCandidate& c);
RelationGraph prune_stale(RelationGraph g, double now, double ttl_seconds);

struct WeightedEdge {
  EntityId a;
  EntityId b;
  double likelihood = 0.0;

  friend bool operator==(const WeightedEdge&, const WeightedEdge&) = default;
};

struct PartitionResult {
  std::vector<PersonRecord> persons;
  std::vector<GroupRecord> groups;
  double affinity = 0.0;
  std::vector<WeightedEdge> kept_edges;
  std::vector<WeightedEdge> discarded_edges;

  const PersonRecord* person_of(const FeatureId& feature) const;
};

struct PartitionOptions {
  /// Components with more nodes than this fall back to assignment-seeded local search.
  int exact_node_limit = 16;
  /// Synthesised persons are named prefix + body token.
  std::string anonymous_prefix = "anon_";
};

/// Most probable person/feature partition: maximal total likelihood of kept edges, then fewest
/// kept edges, then lexicographically smallest kept edge list. Unowned bodies get a new
/// anonymous person; groups attach to persons through their body's strongest group edge.
PartitionResult solve_partition(const RelationGraph& g, const PartitionOptions& options = {});

/// Voice identification against stored signatures (cosine similarity of unit vectors).
struct VoiceMatch {
  PersonId person;
  double similarity = 0.0;
};

struct VoiceDatabase {
  std::map<PersonId, Eigen::VectorXd> entries;
  void store(const PersonId& id, const Eigen::VectorXd& embedding);
};

/// Best entry whose similarity strictly exceeds `threshold`.
std::optional<VoiceMatch> voice_match(const Eigen::VectorXd& embedding, const VoiceDatabase& db, double threshold);
/// Same, emitting the voice-person candidate on success.
std::optional<MatchCandidate> voice_match_candidate(const VoiceObservation& voice, const VoiceDatabase& db,
                                                    double threshold, double now);

// Graph diagnostics ---------------------------------------------------------------------------

std::vector<std::vector<EntityId>> connected_components(const RelationGraph& g);

struct SpanningForest {
  std::vector<WeightedEdge> edges;
  /// Sum of (1 - likelihood) over the forest.
  double weight = 0.0;
};
SpanningForest minimum_spanning_forest(const RelationGraph& g);

struct LikelihoodPath {
  bool reachable = false;
  /// Sum of -log(likelihood); +inf when unreachable.
  double cost = std::numeric_limits<double>::infinity();
  std::vector<EntityId> nodes;
};
LikelihoodPath most_likely_path(const RelationGraph& g, const EntityId& from, const EntityId& to);

struct GraphDiagnostics {
  std::vector<std::vector<EntityId>> components;
  SpanningForest mst;
  std::optional<LikelihoodPath> path;
};
GraphDiagnostics graph_diagnostics(const RelationGraph& g,
                                   const std::optional<std::pair<EntityId, EntityId>>& query = std::nullopt);

// Stateful resolver ---------------------------------------------------------------------------

struct PersonManagerConfig {
  double ttl = 2.0;
  double anchor_likelihood = 0.95;
  /// Per-resolve factor on the anchor of a feature that was neither observed nor matched.
  double anchor_decay = 0.9;
  double voice_threshold = 0.7;
  PartitionOptions partition;
};

/// Owns the relation graph. Candidates queue in arrival order and are applied on resolve().
class PersonManager {
 public:
  explicit PersonManager(PersonManagerConfig config = {}) : config_(std::move(config)) {}

  void submit(MatchCandidate c) { queue_.push_back(std::move(c)); }
  /// Registers a feature seen this tick, so an unmatched body still yields a person.
  void observe(const FeatureId& id) { observed_.push_back(id); }
  /// Replaces every group node with the given body-group candidates and centres.
  void replace_groups(const std::vector<MatchCandidate>& candidates, const std::map<GroupId, Vec2d>& centres);

  /// Prunes, applies the queue, partitions, then refreshes the anchor edges of features seen
  /// this tick and decays the others.
  PartitionResult resolve(double now);

  const RelationGraph& graph() const { return graph_; }
  VoiceDatabase& voices() { return voices_; }
  const VoiceDatabase& voices() const { return voices_; }
  const PersonManagerConfig& config() const { return config_; }
  /// Candidates rejected as inadmissible since construction.
  int rejected() const { return rejected_; }

 private:
  PersonManagerConfig config_;
  RelationGraph graph_;
  VoiceDatabase voices_;
  std::deque<MatchCandidate> queue_;
  std::vector<FeatureId> observed_;
  int rejected_ = 0;
};

}  // namespace sse
