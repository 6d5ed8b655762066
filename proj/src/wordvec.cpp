#include "ellembed/wordvec.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "ellembed/batch.hpp"
#include "ellembed/geometry.hpp"
#include "ellembed/optim.hpp"
#include "ellembed/parallel.hpp"

namespace ellembed {

// ---------------------------------------------------------------------------
// Corpus handling
// ---------------------------------------------------------------------------

std::vector<std::string> tokenize_line(const std::string& line) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : line) {
    if (std::isspace(c)) {
      if (!current.empty()) {
        tokens.push_back(std::move(current));
        current.clear();
      }
    } else if (std::isalpha(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (std::isdigit(c) || c >= 0x80) {
      current.push_back(static_cast<char>(c));
    }
    // remaining ASCII (punctuation) is deleted
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Vocabulary build_vocab(std::istream& corpus, int min_count) {
  if (min_count < 1) throw DomainError("build_vocab: min_count must be >= 1");
  std::unordered_map<std::string, std::int64_t> counts;
  std::string line;
  while (std::getline(corpus, line)) {
    for (auto& tok : tokenize_line(line)) ++counts[tok];
  }
  std::vector<std::pair<std::string, std::int64_t>> kept;
  for (auto& [tok, c] : counts) {
    if (c >= min_count) kept.emplace_back(tok, c);
  }
  if (kept.empty()) {
    throw DataError("build_vocab: no token reaches min_count = " +
                    std::to_string(min_count));
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });

  Vocabulary vocab;
  vocab.min_count = min_count;
  vocab.words.reserve(kept.size());
  vocab.counts.reserve(kept.size());
  for (auto& [tok, c] : kept) {
    vocab.ids.emplace(tok, static_cast<int>(vocab.words.size()));
    vocab.words.push_back(tok);
    vocab.counts.push_back(c);
    vocab.total += c;
  }
  return vocab;
}

double discard_prob(double f, double t) {
  if (f <= 0.0) throw DomainError("discard_prob: frequency must be positive");
  if (t <= 0.0) throw DomainError("discard_prob: threshold must be positive");
  return std::max(0.0, 1.0 - std::sqrt(t / f));
}

std::vector<std::pair<int, int>> window_pairs(int sequence_length,
                                              int window) {
  if (window < 1) throw DomainError("window_pairs: window must be positive");
  const int half = window / 2;
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < sequence_length; ++i) {
    const int lo = std::max(0, i - half);
    const int hi = std::min(sequence_length - 1, i + half);
    for (int j = lo; j <= hi; ++j) {
      if (j != i) pairs.emplace_back(i, j);
    }
  }
  return pairs;
}

NegativeSampler::NegativeSampler(const std::vector<std::int64_t>& counts,
                                 double power) {
  if (counts.empty()) {
    throw DataError("negative sampler: empty vocabulary");
  }
  cdf_.resize(counts.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    acc += std::pow(static_cast<double>(counts[i]), power);
    cdf_[i] = acc;
  }
  if (acc <= 0.0) throw DataError("negative sampler: all-zero counts");
  for (double& v : cdf_) v /= acc;
  cdf_.back() = 1.0;
}

int NegativeSampler::sample(Rng& rng) const {
  const double u = rng.uniform();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  return static_cast<int>(it - cdf_.begin());
}

double NegativeSampler::probability(int id) const {
  const double lo = id == 0 ? 0.0 : cdf_[id - 1];
  return cdf_[id] - lo;
}

// ---------------------------------------------------------------------------
// Loss
// ---------------------------------------------------------------------------

HingeLossResult hinge_loss(const EllipticalPoint& w, const EllipticalPoint& c,
                           const std::vector<const EllipticalPoint*>& negatives,
                           double margin, int iters) {
  std::vector<const EllipticalPoint*> others;
  others.reserve(1 + negatives.size());
  others.push_back(&c);
  for (const auto* n : negatives) others.push_back(n);
  PolarizationBatch batch = polarization_batch(w, others, iters);

  const double n = static_cast<double>(negatives.size());
  double value = margin - batch.value[0];
  for (std::size_t k = 0; k < negatives.size(); ++k) {
    value += batch.value[k + 1] / n;
  }

  HingeLossResult out;
  out.d_input = GradientPair(w.dim(), w.factor_rank());
  out.d_context = GradientPair(c.dim(), c.factor_rank());
  out.d_negatives.reserve(negatives.size());
  for (const auto* neg : negatives) {
    out.d_negatives.emplace_back(neg->dim(), neg->factor_rank());
  }
  if (value <= 0.0) return out;  // hinge inactive: loss and gradients zero

  out.loss = value;
  const double tau = w.tau;
  // d/d[w:c] = -1, d/d[w:neg_k] = 1/n.
  out.d_input.d_mean = -c.mean;
  out.d_input.d_factor = -tau * (batch.t_ab[0] * w.factor);
  out.d_context.d_mean = -w.mean;
  out.d_context.d_factor = -tau * (batch.t_ba[0] * c.factor);
  for (std::size_t k = 0; k < negatives.size(); ++k) {
    const EllipticalPoint& neg = *negatives[k];
    out.d_input.d_mean += neg.mean / n;
    out.d_input.d_factor += (tau / n) * (batch.t_ab[k + 1] * w.factor);
    out.d_negatives[k].d_mean = w.mean / n;
    out.d_negatives[k].d_factor =
        (tau / n) * (batch.t_ba[k + 1] * neg.factor);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

namespace {

void fill_section(StoreSection& sec, const Vocabulary& vocab, double init_std,
                  Rng& rng) {
  const int dim = static_cast<int>(sec.dim);
  const int rank = static_cast<int>(sec.rank);
  for (const auto& word : vocab.words) {
    EllipticalPoint p;
    p.mean = Vector(dim);
    for (int i = 0; i < dim; ++i) p.mean[i] = init_std * rng.normal();
    p.factor = Matrix(dim, rank);
    for (int r = 0; r < dim; ++r) {
      for (int c = 0; c < rank; ++c) p.factor(r, c) = init_std * rng.normal();
    }
    p.epsilon = sec.epsilon;
    p.tau = sec.tau;
    sec.add(word, std::move(p));
  }
}

struct SkipgramExample {
  int word = 0;
  int context = 0;
  std::vector<int> negatives;
};

}  // namespace

EmbeddingStore train_skipgram(const std::string& corpus_path,
                              const SkipgramConfig& config) {
  std::ifstream vocab_stream(corpus_path);
  if (!vocab_stream) throw DataError("cannot open corpus '" + corpus_path + "'");
  Vocabulary vocab = build_vocab(vocab_stream, config.min_count);

  const int dim = config.dim;
  const int rank = config.rank > 0 ? config.rank : dim;
  if (dim < 1) throw DomainError("train_skipgram: dim must be positive");
  if (config.epsilon <= 0.0) {
    throw DomainError("train_skipgram: epsilon must be positive for training");
  }

  Rng rng(config.seed);
  EmbeddingStore store;
  store.add_section(StoreSide::input, dim, rank, config.tau, config.epsilon);
  store.add_section(StoreSide::context, dim, rank, config.tau, config.epsilon);
  StoreSection& input = *store.section(StoreSide::input);
  StoreSection& context = *store.section(StoreSide::context);
  fill_section(input, vocab, config.init_std, rng);
  fill_section(context, vocab, config.init_std, rng);
  NegativeSampler sampler(vocab.counts, config.smoothing_power);
  AdagradState opt_input(config.lr, config.adagrad_eps);
  AdagradState opt_context(config.lr, config.adagrad_eps);
  opt_input.init(input.points);
  opt_context.init(context.points);

  std::vector<SkipgramExample> batch;
  batch.reserve(config.batch);
  std::vector<HingeLossResult> results;
  double epoch_loss = 0.0;
  std::int64_t epoch_examples = 0;

  auto flush = [&]() {
    if (batch.empty()) return;
    results.resize(batch.size());
    parallel_for(std::ssize(batch), config.threads, [&](std::ptrdiff_t e) {
      const SkipgramExample& ex = batch[e];
      std::vector<const EllipticalPoint*> negs;
      negs.reserve(ex.negatives.size());
      for (int id : ex.negatives) negs.push_back(&context.points[id]);
      results[e] = hinge_loss(input.points[ex.word],
                              context.points[ex.context], negs, config.margin,
                              config.ns_iters);
    });

    // Deterministic accumulation: batch order, then sorted parameter ids.
    const double scale = 1.0 / static_cast<double>(batch.size());
    std::map<int, GradientPair> input_grads;
    std::map<int, GradientPair> context_grads;
    auto add = [&](std::map<int, GradientPair>& dst, int id,
                   const GradientPair& g, const EllipticalPoint& p) {
      auto it = dst.try_emplace(id, p.dim(), p.factor_rank()).first;
      it->second += g;
    };
    for (std::size_t e = 0; e < batch.size(); ++e) {
      const SkipgramExample& ex = batch[e];
      const HingeLossResult& r = results[e];
      epoch_loss += r.loss;
      if (r.loss == 0.0) continue;
      add(input_grads, ex.word, r.d_input, input.points[ex.word]);
      add(context_grads, ex.context, r.d_context, context.points[ex.context]);
      for (std::size_t k = 0; k < ex.negatives.size(); ++k) {
        add(context_grads, ex.negatives[k], r.d_negatives[k],
            context.points[ex.negatives[k]]);
      }
    }
    for (auto& [id, g] : input_grads) {
      g *= scale;
      adagrad_step(opt_input, id, input.points[id].mean,
                   input.points[id].factor, g);
    }
    for (auto& [id, g] : context_grads) {
      g *= scale;
      adagrad_step(opt_context, id, context.points[id].mean,
                   context.points[id].factor, g);
    }
    epoch_examples += std::ssize(batch);
    batch.clear();
  };

  std::vector<int> sequence;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    epoch_loss = 0.0;
    epoch_examples = 0;
    std::ifstream corpus(corpus_path);
    if (!corpus) throw DataError("cannot reopen corpus '" + corpus_path + "'");
    std::string line;
    while (std::getline(corpus, line)) {
      sequence.clear();
      for (const auto& tok : tokenize_line(line)) {
        const int id = vocab.lookup(tok);
        if (id < 0) continue;
        const double p = discard_prob(vocab.frequency(id), config.subsample_t);
        if (p > 0.0 && rng.uniform() < p) continue;
        sequence.push_back(id);
      }
      for (const auto& [i, j] :
           window_pairs(static_cast<int>(sequence.size()), config.window)) {
        SkipgramExample ex;
        ex.word = sequence[i];
        ex.context = sequence[j];
        ex.negatives.reserve(config.negatives);
        if (vocab.size() > 1) {
          for (int k = 0; k < config.negatives; ++k) {
            // rejection: never propose the true context
            for (int attempt = 0; attempt < 1000; ++attempt) {
              const int neg = sampler.sample(rng);
              if (neg != ex.context) {
                ex.negatives.push_back(neg);
                break;
              }
            }
          }
        }
        batch.push_back(std::move(ex));
        if (std::ssize(batch) >= config.batch) flush();
      }
    }
    flush();
    const double mean_loss =
        epoch_examples > 0
            ? epoch_loss / static_cast<double>(epoch_examples)
            : 0.0;
    if (!std::isfinite(mean_loss)) {
      throw NumericalError("train_skipgram: non-finite epoch loss at epoch " +
                           std::to_string(epoch));
    }
    if (config.log != nullptr) {
      (*config.log) << epoch << ' ' << mean_loss << '\n';
    }
  }
  return store;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace {

std::vector<double> average_ranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ShapeError("spearman: length mismatch");
  if (x.size() < 2) {
    throw DegenerateError("spearman: need at least two samples");
  }
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = rx[i] - mx;
    const double dy = ry[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw DegenerateError("spearman: correlation undefined for constant input");
  }
  return sxy / std::sqrt(sxx * syy);
}

std::vector<SimilarityRow> load_similarity_dataset(std::istream& in) {
  std::vector<SimilarityRow> rows;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream iss(line);
    SimilarityRow row;
    if (!(iss >> row.word1)) continue;  // blank line
    if (!(iss >> row.word2 >> row.score)) {
      throw FormatError("expected 'word1 word2 score'", lineno);
    }
    std::string extra;
    if (iss >> extra) {
      throw FormatError("trailing fields after score", lineno);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

SimilarityMeasure measure_from_string(const std::string& s) {
  if (s == "cosine_mixture") return SimilarityMeasure::cosine_mixture;
  if (s == "bures_cosine") return SimilarityMeasure::bures_cosine;
  if (s == "polarization") return SimilarityMeasure::polarization;
  throw DataError("unknown similarity measure '" + s + "'");
}

SimilarityEvalResult eval_similarity(const EmbeddingStore& store,
                                     const std::vector<SimilarityRow>& rows,
                                     SimilarityMeasure measure, double rho,
                                     StoreSide side, int iters) {
  const StoreSection& sec = store.resolve(side);
  std::vector<double> human, model;
  SimilarityEvalResult out;
  for (const auto& row : rows) {
    const EllipticalPoint* a = sec.find(row.word1);
    const EllipticalPoint* b = sec.find(row.word2);
    if (a == nullptr || b == nullptr) {
      ++out.skipped;
      continue;
    }
    double score = 0.0;
    switch (measure) {
      case SimilarityMeasure::cosine_mixture:
        score = cosine_mixture(*a, *b, rho, iters);
        break;
      case SimilarityMeasure::bures_cosine:
        score = bures_cosine(*a, *b, rho, iters);
        break;
      case SimilarityMeasure::polarization:
        score = polarization(*a, *b, iters);
        break;
    }
    human.push_back(row.score);
    model.push_back(score);
  }
  out.covered = static_cast<int>(human.size());
  if (out.covered == 0) {
    throw DataError("eval_similarity: no dataset pair is covered by the store");
  }
  out.spearman = spearman(human, model);
  return out;
}

int matched_elliptical_dim(int diagonal_gaussian_dim) {
  if (diagonal_gaussian_dim < 1) {
    throw DomainError("matched_elliptical_dim: dimension must be positive");
  }
  const long budget = 2L * diagonal_gaussian_dim;  // means + diagonal variances
  int best = 1;
  for (int d = 1; static_cast<long>(d) + static_cast<long>(d) * (d + 1) / 2 <=
                  budget; ++d) {
    best = d;
  }
  return best;
}

}  // namespace ellembed
