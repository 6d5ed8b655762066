#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ellembed/store.hpp"
#include "ellembed/types.hpp"

namespace ellembed {

/// Directed "u has hypernym v" relation set. Construction deduplicates pairs
/// and inserts the self-loop (u, u) for every node that appears, since a
/// noun is always its own hypernym.
struct RelationGraph {
  std::vector<std::string> nodes;                // first-appearance order
  std::unordered_map<std::string, int> index;
  std::vector<std::pair<int, int>> edges;        // sorted, deduplicated
  std::vector<std::vector<int>> positives;       // per node, sorted targets

  int node_count() const { return static_cast<int>(nodes.size()); }
  bool is_positive(int u, int v) const;
};

RelationGraph make_graph(
    const std::vector<std::pair<std::string, std::string>>& raw_edges);

/// "child<TAB>hypernym" lines; '#' starts a comment.
RelationGraph load_edges(std::istream& in);

/// Reachability closure (self-loops included). The graph must be acyclic
/// apart from self-loops; a cycle raises GraphError.
RelationGraph transitive_closure(const RelationGraph& graph);

struct SoftmaxLossResult {
  double loss = 0.0;
  GradientPair d_u;
  GradientPair d_v;
  std::vector<GradientPair> d_negatives;
};

/// Max-shifted negative log-softmax of the positive pseudo-dot-product
/// [u:v] against [u:v'] for the sampled negatives, with gradients for all
/// participants. An empty negative list yields zero loss.
SoftmaxLossResult softmax_loss(const EllipticalPoint& u,
                               const EllipticalPoint& v,
                               const std::vector<const EllipticalPoint*>& negs,
                               int iters = 20);

struct HypernymConfig {
  int dim = 5;
  int rank = 0;        // 0 -> dim
  int negatives = 50;
  int batch = 1000;
  double lr = 0.0;     // 0 -> dimension rule: 0.02 for d in {3,4}, else 0.01
  int epochs = 50;
  int ns_iters = 6;
  double epsilon = 0.01;
  double tau = kGaussianTau;
  double init_std = 0.1;
  std::uint64_t seed = 0;
  int threads = 0;
  std::ostream* log = nullptr;  // "epoch mean_loss" lines
};

inline double hypernym_default_lr(int dim) {
  return (dim == 3 || dim == 4) ? 0.02 : 0.01;
}

/// SGD on the softmax loss over relation batches with one shared embedding
/// set; uniform negatives, rejecting true positives of the query node.
EmbeddingStore train_hypernym(const RelationGraph& graph,
                              const HypernymConfig& config);

struct ReconstructionMetrics {
  double mean_rank = 0.0;  // >= 1
  double map = 0.0;        // in (0, 1]
};

/// Link reconstruction from a precomputed score grid (scores(u, v) is the
/// similarity of pair (u, v); the diagonal is ignored). For each positive
/// (u, v) the rank counts negatives of u scoring >= the positive; average
/// precision ranks all candidates v' != u. Ties resolve against positives.
ReconstructionMetrics reconstruction_from_scores(const Matrix& scores,
                                                 const RelationGraph& graph);

/// Scores every node pair with the polarization form and ranks positives.
ReconstructionMetrics eval_reconstruction(const EmbeddingStore& store,
                                          const RelationGraph& graph,
                                          int iters = 20, int threads = 0);

}  // namespace ellembed
