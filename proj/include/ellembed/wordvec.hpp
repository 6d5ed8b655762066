#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ellembed/rng.hpp"
#include "ellembed/store.hpp"
#include "ellembed/types.hpp"

namespace ellembed {

// ---------------------------------------------------------------------------
// Corpus handling
// ---------------------------------------------------------------------------

/// Lowercases ASCII letters, deletes ASCII punctuation (anything that is not
/// a letter, digit or whitespace), keeps bytes >= 0x80 untouched so UTF-8
/// letters survive, then splits on whitespace.
std::vector<std::string> tokenize_line(const std::string& line);

struct Vocabulary {
  std::vector<std::string> words;                 // id -> token
  std::unordered_map<std::string, int> ids;       // token -> id
  std::vector<std::int64_t> counts;               // per id
  std::int64_t total = 0;                         // retained-token total
  int min_count = 1;

  int size() const { return static_cast<int>(words.size()); }
  double frequency(int id) const {
    return static_cast<double>(counts[id]) / static_cast<double>(total);
  }
  int lookup(const std::string& token) const {
    auto it = ids.find(token);
    return it == ids.end() ? -1 : it->second;
  }
};

/// Counts normalized tokens and drops those seen fewer than min_count times.
/// Ids are assigned by decreasing count (ties lexicographic). Throws
/// DataError when nothing survives.
Vocabulary build_vocab(std::istream& corpus, int min_count);

/// Probability of dropping an occurrence of a word with corpus frequency f:
/// max(0, 1 - sqrt(t/f)). Words at or below the threshold are always kept.
double discard_prob(double f, double t);

/// Skipgram pair positions for one token sequence: every position i pairs
/// with the positions j != i at distance at most window/2 on each side.
std::vector<std::pair<int, int>> window_pairs(int sequence_length, int window);

/// Draws word ids with probability counts_i^power / sum_j counts_j^power.
class NegativeSampler {
 public:
  NegativeSampler(const std::vector<std::int64_t>& counts, double power);
  int sample(Rng& rng) const;
  double probability(int id) const;
  int size() const { return static_cast<int>(cdf_.size()); }

 private:
  std::vector<double> cdf_;
};

// ---------------------------------------------------------------------------
// Loss
// ---------------------------------------------------------------------------

struct HingeLossResult {
  double loss = 0.0;
  GradientPair d_input;                  // w.r.t. the center word
  GradientPair d_context;                // w.r.t. the positive context
  std::vector<GradientPair> d_negatives;
};

/// Margin loss [M - [w:c] + (1/n) sum_k [w:neg_k]]_+ with gradients through
/// the polarization form on every participant. Gradients are zero when the
/// hinge is inactive. An empty negative list drops the mean-of-negatives
/// term (degenerate single-word corpora).
HingeLossResult hinge_loss(const EllipticalPoint& w, const EllipticalPoint& c,
                           const std::vector<const EllipticalPoint*>& negatives,
                           double margin, int iters = 20);

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct SkipgramConfig {
  int dim = 12;
  int rank = 0;              // factor columns; 0 means full (= dim)
  double margin = 10.0;
  int window = 10;           // window/2 context words per side
  int negatives = 1;
  double subsample_t = 1e-5;
  double smoothing_power = 0.75;
  int epochs = 5;
  int batch = 10000;
  double lr = 0.01;
  double adagrad_eps = 1e-8;
  int min_count = 100;
  int ns_iters = 6;
  double epsilon = 0.01;
  double tau = kGaussianTau;
  double init_std = 0.1;
  std::uint64_t seed = 0;
  int threads = 0;
  std::ostream* log = nullptr;  // "epoch mean_loss" lines
};

/// Windowed skipgram training with subsampling, smoothed negative sampling
/// and Adagrad updates on separate input and context embedding sets.
EmbeddingStore train_skipgram(const std::string& corpus_path,
                              const SkipgramConfig& config);

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Spearman rank correlation; ties receive average ranks. Throws
/// DegenerateError for fewer than two samples or a constant vector.
double spearman(std::span<const double> x, std::span<const double> y);

struct SimilarityRow {
  std::string word1, word2;
  double score = 0.0;
};

/// "word1 word2 score" lines, tab- or space-separated; '#' starts a comment.
std::vector<SimilarityRow> load_similarity_dataset(std::istream& in);

enum class SimilarityMeasure { cosine_mixture, bures_cosine, polarization };

SimilarityMeasure measure_from_string(const std::string& s);

struct SimilarityEvalResult {
  double spearman = 0.0;
  int covered = 0;
  int skipped = 0;  // rows with out-of-vocabulary words
};

/// Spearman correlation between human scores and model scores over the
/// covered pairs of the dataset.
SimilarityEvalResult eval_similarity(const EmbeddingStore& store,
                                     const std::vector<SimilarityRow>& rows,
                                     SimilarityMeasure measure, double rho,
                                     StoreSide side, int iters = 20);

/// Elliptical dimension whose parameter count d + d(d+1)/2 matches the 2m
/// free parameters of a diagonal Gaussian embedding of dimension m (the
/// largest such d when no exact match exists).
int matched_elliptical_dim(int diagonal_gaussian_dim);

}  // namespace ellembed
