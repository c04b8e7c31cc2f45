#include "sse/groups.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace sse {

namespace {

constexpr double kImprovement = 1e-9;

std::vector<int> canonical(std::span<const int> labels) {
  std::map<int, int> renumber;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int l : labels) out.push_back(renumber.try_emplace(l, static_cast<int>(renumber.size())).first->second);
  return out;
}

class Search {
 public:
  Search(std::span<const PersonPose> persons, const GcffParams& params) : persons_(persons), params_(params) {}

  double cost(const std::vector<int>& labels) const { return gcff_objective(persons_, labels, params_); }

  /// Best-improvement descent over relocations (including to a fresh group) and merges.
  std::vector<int> descend(std::vector<int> labels) const {
    const int n = static_cast<int>(labels.size());
    double current = cost(labels);
    for (;;) {
      labels = canonical(labels);
      const int groups = *std::max_element(labels.begin(), labels.end()) + 1;
      std::vector<int> best_labels;
      double best = current;
      auto consider = [&](std::vector<int> candidate) {
        const double c = cost(candidate);
        if (c < best - kImprovement) {
          best = c;
          best_labels = std::move(candidate);
        }
      };
      for (int i = 0; i < n; ++i)
        for (int g = 0; g <= groups; ++g) {
          if (g == labels[i]) continue;
          auto candidate = labels;
          candidate[i] = g;
          consider(std::move(candidate));
        }
      for (int a = 0; a < groups; ++a)
        for (int b = a + 1; b < groups; ++b) {
          auto candidate = labels;
          for (int& l : candidate)
            if (l == b) l = a;
          consider(std::move(candidate));
        }
      if (best_labels.empty()) return labels;
      labels = std::move(best_labels);
      current = best;
    }
  }

  /// Single-linkage start: join persons whose candidates are close enough that pairing pays.
  std::vector<int> linkage_start() const {
    const int n = static_cast<int>(persons_.size());
    const double sigma2 = params_.position_noise * params_.position_noise;
    const double join2 = 2.0 * params_.mdl * sigma2;
    std::vector<int> parent(n);
    for (int i = 0; i < n; ++i) parent[i] = i;
    auto find = [&](int i) {
      while (parent[i] != i) i = parent[i] = parent[parent[i]];
      return i;
    };
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const Vec2d a = o_space_candidate(persons_[i].pose, params_.stride);
        const Vec2d b = o_space_candidate(persons_[j].pose, params_.stride);
        if ((a - b).squaredNorm() < join2) parent[find(i)] = find(j);
      }
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) labels[i] = find(i);
    return labels;
  }

 private:
  std::span<const PersonPose> persons_;
  const GcffParams& params_;
};

}  // namespace

void GcffParams::validate() const {
  if (!(stride > 0.0) || !(mdl > 0.0) || !(position_noise > 0.0))
    throw std::invalid_argument("gcff: stride, mdl and position noise must be positive");
}

Vec2d o_space_candidate(const Pose2& pose, double stride) {
  return {pose.x + stride * std::cos(pose.theta), pose.y + stride * std::sin(pose.theta)};
}

double gcff_objective(std::span<const PersonPose> persons, std::span<const int> labels, const GcffParams& params) {
  if (labels.size() != persons.size()) throw std::invalid_argument("gcff_objective: one label per person");
  std::map<int, std::pair<Vec2d, int>> sums;
  for (std::size_t i = 0; i < persons.size(); ++i) {
    auto& [sum, count] = sums.try_emplace(labels[i], Vec2d::Zero(), 0).first->second;
    sum += o_space_candidate(persons[i].pose, params.stride);
    ++count;
  }
  const double sigma2 = params.position_noise * params.position_noise;
  double total = params.mdl * static_cast<double>(sums.size());
  for (std::size_t i = 0; i < persons.size(); ++i) {
    const auto& [sum, count] = sums.at(labels[i]);
    total += (o_space_candidate(persons[i].pose, params.stride) - sum / count).squaredNorm() / sigma2;
  }
  return total;
}

std::vector<int> gcff_partition(std::span<const PersonPose> persons, const GcffParams& params) {
  params.validate();
  for (const auto& p : persons)
    if (!std::isfinite(p.pose.x) || !std::isfinite(p.pose.y) || !std::isfinite(p.pose.theta))
      throw std::invalid_argument("gcff: non-finite pose for " + p.id.token);
  const int n = static_cast<int>(persons.size());
  if (n == 0) return {};

  const Search search(persons, params);
  std::vector<int> singletons(n), together(n, 0);
  for (int i = 0; i < n; ++i) singletons[i] = i;

  std::vector<int> best;
  double best_cost = 0.0;
  for (const auto& start : {singletons, search.linkage_start(), together}) {
    auto labels = search.descend(start);
    const double c = search.cost(labels);
    if (best.empty() || c < best_cost - kImprovement) {
      best = std::move(labels);
      best_cost = c;
    }
  }
  return canonical(best);
}

std::vector<GroupRecord> detect_groups(std::span<const PersonPose> persons, const GcffParams& params) {
  const auto labels = gcff_partition(persons, params);
  const int groups = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<GroupRecord> out(groups);
  std::vector<int> counts(groups, 0);
  for (int g = 0; g < groups; ++g) out[g].id = group_id("group_" + std::to_string(g + 1));
  for (std::size_t i = 0; i < persons.size(); ++i) {
    auto& rec = out[labels[i]];
    rec.members.insert(persons[i].id);
    rec.center += o_space_candidate(persons[i].pose, params.stride);
    ++counts[labels[i]];
  }
  for (int g = 0; g < groups; ++g) out[g].center /= counts[g];
  return out;
}

}  // namespace sse
