#include "ellembed/hypernym.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <set>
#include <sstream>

#include "ellembed/batch.hpp"
#include "ellembed/optim.hpp"
#include "ellembed/parallel.hpp"
#include "ellembed/rng.hpp"

namespace ellembed {

bool RelationGraph::is_positive(int u, int v) const {
  const auto& p = positives[u];
  return std::binary_search(p.begin(), p.end(), v);
}

RelationGraph make_graph(
    const std::vector<std::pair<std::string, std::string>>& raw_edges) {
  RelationGraph g;
  auto intern = [&](const std::string& name) {
    auto it = g.index.find(name);
    if (it != g.index.end()) return it->second;
    const int id = static_cast<int>(g.nodes.size());
    g.index.emplace(name, id);
    g.nodes.push_back(name);
    return id;
  };
  std::set<std::pair<int, int>> edges;
  for (const auto& [child, parent] : raw_edges) {
    const int u = intern(child);
    const int v = intern(parent);
    edges.emplace(u, v);
  }
  for (int u = 0; u < g.node_count(); ++u) edges.emplace(u, u);
  g.edges.assign(edges.begin(), edges.end());
  g.positives.resize(g.node_count());
  for (const auto& [u, v] : g.edges) g.positives[u].push_back(v);
  return g;
}

RelationGraph load_edges(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> raw;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw FormatError("expected 'child<TAB>hypernym'", lineno);
    }
    std::string child = line.substr(0, tab);
    std::string parent = line.substr(tab + 1);
    while (!parent.empty() && (parent.back() == '\r' || parent.back() == ' ' ||
                               parent.back() == '\t')) {
      parent.pop_back();
    }
    if (child.empty() || parent.empty()) {
      throw FormatError("empty node name", lineno);
    }
    raw.emplace_back(std::move(child), std::move(parent));
  }
  if (raw.empty()) throw DataError("edge list is empty");
  return make_graph(raw);
}

RelationGraph transitive_closure(const RelationGraph& graph) {
  const int n = graph.node_count();
  std::vector<std::vector<int>> adjacency(n);
  for (const auto& [u, v] : graph.edges) {
    if (u != v) adjacency[u].push_back(v);
  }

  // Cycle check (self-loops excluded): iterative DFS three-coloring.
  std::vector<int> color(n, 0);  // 0 white, 1 gray, 2 black
  for (int start = 0; start < n; ++start) {
    if (color[start] != 0) continue;
    std::vector<std::pair<int, std::size_t>> stack{{start, 0}};
    color[start] = 1;
    while (!stack.empty()) {
      auto& [u, next] = stack.back();
      if (next < adjacency[u].size()) {
        const int v = adjacency[u][next++];
        if (color[v] == 1) {
          throw GraphError("transitive_closure: cycle through '" +
                           graph.nodes[v] + "'");
        }
        if (color[v] == 0) {
          color[v] = 1;
          stack.emplace_back(v, 0);
        }
      } else {
        color[u] = 2;
        stack.pop_back();
      }
    }
  }

  std::vector<std::pair<std::string, std::string>> closed;
  std::vector<char> reached(n);
  for (int u = 0; u < n; ++u) {
    std::fill(reached.begin(), reached.end(), 0);
    std::vector<int> stack{u};
    reached[u] = 1;
    while (!stack.empty()) {
      const int x = stack.back();
      stack.pop_back();
      for (int v : adjacency[x]) {
        if (!reached[v]) {
          reached[v] = 1;
          stack.push_back(v);
        }
      }
    }
    for (int v = 0; v < n; ++v) {
      if (reached[v]) closed.emplace_back(graph.nodes[u], graph.nodes[v]);
    }
  }
  return make_graph(closed);
}

// ---------------------------------------------------------------------------

SoftmaxLossResult softmax_loss(const EllipticalPoint& u,
                               const EllipticalPoint& v,
                               const std::vector<const EllipticalPoint*>& negs,
                               int iters) {
  std::vector<const EllipticalPoint*> others;
  others.reserve(1 + negs.size());
  others.push_back(&v);
  for (const auto* n : negs) others.push_back(n);
  PolarizationBatch batch = polarization_batch(u, others, iters);

  double max_score = batch.value[0];
  for (double s : batch.value) max_score = std::max(max_score, s);
  double z = 0.0;
  for (double s : batch.value) z += std::exp(s - max_score);
  const double log_z = max_score + std::log(z);

  SoftmaxLossResult out;
  out.loss = log_z - batch.value[0];
  out.d_u = GradientPair(u.dim(), u.factor_rank());
  out.d_v = GradientPair(v.dim(), v.factor_rank());
  out.d_negatives.reserve(negs.size());
  for (const auto* n : negs) {
    out.d_negatives.emplace_back(n->dim(), n->factor_rank());
  }

  const double tau = u.tau;
  for (std::size_t k = 0; k < others.size(); ++k) {
    const EllipticalPoint& other = *others[k];
    const double p = std::exp(batch.value[k] - log_z);
    const double coeff = k == 0 ? p - 1.0 : p;  // d loss / d score_k
    out.d_u.d_mean += coeff * other.mean;
    out.d_u.d_factor += coeff * tau * (batch.t_ab[k] * u.factor);
    GradientPair& other_grad = k == 0 ? out.d_v : out.d_negatives[k - 1];
    other_grad.d_mean += coeff * u.mean;
    other_grad.d_factor += coeff * tau * (batch.t_ba[k] * other.factor);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct HypernymExample {
  int u = 0;
  int v = 0;
  std::vector<int> negatives;
};

}  // namespace

EmbeddingStore train_hypernym(const RelationGraph& graph,
                              const HypernymConfig& config) {
  if (graph.edges.empty()) throw DataError("train_hypernym: empty relation set");
  const int dim = config.dim;
  const int rank = config.rank > 0 ? config.rank : dim;
  if (dim < 1) throw DomainError("train_hypernym: dim must be positive");
  if (config.epsilon <= 0.0) {
    throw DomainError("train_hypernym: epsilon must be positive for training");
  }
  const double lr = config.lr > 0.0 ? config.lr : hypernym_default_lr(dim);

  Rng rng(config.seed);
  EmbeddingStore store;
  StoreSection& sec = store.add_section(StoreSide::single, dim, rank,
                                        config.tau, config.epsilon);
  for (const auto& name : graph.nodes) {
    EllipticalPoint p;
    p.mean = Vector(dim);
    for (int i = 0; i < dim; ++i) p.mean[i] = config.init_std * rng.normal();
    p.factor = Matrix(dim, rank);
    for (int r = 0; r < dim; ++r) {
      for (int c = 0; c < rank; ++c) {
        p.factor(r, c) = config.init_std * rng.normal();
      }
    }
    p.epsilon = config.epsilon;
    p.tau = config.tau;
    sec.add(name, std::move(p));
  }

  SgdState opt{lr};
  const int n_nodes = graph.node_count();
  std::vector<std::size_t> order(graph.edges.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<HypernymExample> batch;
  std::vector<SoftmaxLossResult> results;
  double epoch_loss = 0.0;
  std::int64_t epoch_examples = 0;

  auto flush = [&]() {
    if (batch.empty()) return;
    results.resize(batch.size());
    parallel_for(std::ssize(batch), config.threads, [&](std::ptrdiff_t e) {
      const HypernymExample& ex = batch[e];
      std::vector<const EllipticalPoint*> negs;
      negs.reserve(ex.negatives.size());
      for (int id : ex.negatives) negs.push_back(&sec.points[id]);
      results[e] = softmax_loss(sec.points[ex.u], sec.points[ex.v], negs,
                                config.ns_iters);
    });
    const double scale = 1.0 / static_cast<double>(batch.size());
    std::map<int, GradientPair> grads;
    auto add = [&](int id, const GradientPair& g) {
      auto it = grads
                    .try_emplace(id, sec.points[id].dim(),
                                 sec.points[id].factor_rank())
                    .first;
      it->second += g;
    };
    for (std::size_t e = 0; e < batch.size(); ++e) {
      const HypernymExample& ex = batch[e];
      const SoftmaxLossResult& r = results[e];
      epoch_loss += r.loss;
      add(ex.u, r.d_u);
      add(ex.v, r.d_v);
      for (std::size_t k = 0; k < ex.negatives.size(); ++k) {
        add(ex.negatives[k], r.d_negatives[k]);
      }
    }
    for (auto& [id, g] : grads) {
      g *= scale;
      sgd_step(opt, id, sec.points[id].mean, sec.points[id].factor, g);
    }
    epoch_examples += std::ssize(batch);
    batch.clear();
  };

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    epoch_loss = 0.0;
    epoch_examples = 0;
    // Fisher-Yates with the shared stream keeps runs reproducible.
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = rng.uniform_int(static_cast<int>(i));
      std::swap(order[i - 1], order[j]);
    }
    for (std::size_t idx : order) {
      const auto [u, v] = graph.edges[idx];
      HypernymExample ex;
      ex.u = u;
      ex.v = v;
      const int candidates =
          n_nodes - static_cast<int>(graph.positives[u].size());
      if (candidates > 0) {
        ex.negatives.reserve(config.negatives);
        for (int k = 0; k < config.negatives; ++k) {
          for (int attempt = 0; attempt < 1000; ++attempt) {
            const int cand = rng.uniform_int(n_nodes);
            if (!graph.is_positive(u, cand)) {
              ex.negatives.push_back(cand);
              break;
            }
          }
        }
      }
      batch.push_back(std::move(ex));
      if (std::ssize(batch) >= config.batch) flush();
    }
    flush();
    const double mean_loss =
        epoch_examples > 0 ? epoch_loss / static_cast<double>(epoch_examples)
                           : 0.0;
    if (!std::isfinite(mean_loss)) {
      throw NumericalError("train_hypernym: non-finite epoch loss at epoch " +
                           std::to_string(epoch));
    }
    if (config.log != nullptr) {
      (*config.log) << epoch << ' ' << mean_loss << '\n';
    }
  }
  return store;
}

// ---------------------------------------------------------------------------

ReconstructionMetrics reconstruction_from_scores(const Matrix& scores,
                                                 const RelationGraph& graph) {
  const int n = graph.node_count();
  if (scores.rows() != n || scores.cols() != n) {
    throw ShapeError("reconstruction_from_scores: score grid size mismatch");
  }
  std::vector<double> ap(n, -1.0);
  std::vector<double> rank_sum(n, 0.0);
  std::vector<std::int64_t> rank_count(n, 0);

  parallel_for(n, 0, [&](std::ptrdiff_t u) {
    std::vector<int> pos;
    for (int v : graph.positives[u]) {
      if (v != u) pos.push_back(v);
    }
    if (pos.empty()) return;

    // Mean rank: each positive against the negatives only; ties count
    // against the positive.
    for (int p : pos) {
      const double sp = scores(u, p);
      std::int64_t worse_or_equal = 0;
      for (int v = 0; v < n; ++v) {
        if (v == u || graph.is_positive(static_cast<int>(u), v)) continue;
        if (scores(u, v) >= sp) ++worse_or_equal;
      }
      rank_sum[u] += static_cast<double>(1 + worse_or_equal);
      ++rank_count[u];
    }

    // Average precision over the full candidate ranking.
    std::vector<int> candidates;
    candidates.reserve(n - 1);
    for (int v = 0; v < n; ++v) {
      if (v != u) candidates.push_back(v);
    }
    std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
      const double sa = scores(u, a);
      const double sb = scores(u, b);
      if (sa != sb) return sa > sb;
      const bool pa = graph.is_positive(static_cast<int>(u), a);
      const bool pb = graph.is_positive(static_cast<int>(u), b);
      if (pa != pb) return !pa;  // negatives first on ties
      return a < b;
    });
    double hits = 0.0;
    double precision_sum = 0.0;
    for (std::size_t pos_idx = 0; pos_idx < candidates.size(); ++pos_idx) {
      if (graph.is_positive(static_cast<int>(u), candidates[pos_idx])) {
        hits += 1.0;
        precision_sum += hits / static_cast<double>(pos_idx + 1);
      }
    }
    ap[u] = precision_sum / static_cast<double>(pos.size());
  });

  ReconstructionMetrics out;
  double total_rank = 0.0;
  std::int64_t total_positives = 0;
  double ap_total = 0.0;
  int queries = 0;
  for (int u = 0; u < n; ++u) {
    total_rank += rank_sum[u];
    total_positives += rank_count[u];
    if (ap[u] >= 0.0) {
      ap_total += ap[u];
      ++queries;
    }
  }
  if (total_positives == 0) {
    throw DataError("reconstruction: graph has no non-self relations");
  }
  out.mean_rank = total_rank / static_cast<double>(total_positives);
  out.map = ap_total / static_cast<double>(queries);
  return out;
}

ReconstructionMetrics eval_reconstruction(const EmbeddingStore& store,
                                          const RelationGraph& graph,
                                          int iters, int threads) {
  const StoreSection& sec = store.resolve(StoreSide::single);
  std::vector<EllipticalPoint> points;
  points.reserve(graph.node_count());
  for (const auto& name : graph.nodes) {
    const EllipticalPoint* p = sec.find(name);
    if (p == nullptr) {
      throw DataError("eval_reconstruction: node '" + name +
                      "' missing from store");
    }
    points.push_back(*p);
  }
  Matrix scores = pairwise_polarization(points, points, iters, threads);
  return reconstruction_from_scores(scores, graph);
}

}  // namespace ellembed
