// ellembed command line: train and evaluate elliptical Wasserstein
// embeddings (mds / skipgram / hypernym), score similarity datasets and
// export SVG visualizations.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ellembed/batch.hpp"
#include "ellembed/hypernym.hpp"
#include "ellembed/mds.hpp"
#include "ellembed/store.hpp"
#include "ellembed/viz.hpp"
#include "ellembed/wordvec.hpp"

namespace {

using namespace ellembed;

Matrix read_numeric_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream iss(line);
    std::vector<double> row;
    double v;
    while (iss >> v) row.push_back(v);
    if (!iss.eof()) {
      throw FormatError("non-numeric field in table", lineno);
    }
    if (row.empty()) continue;
    if (!rows.empty() && rows.front().size() != row.size()) {
      throw FormatError("ragged table row", lineno);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("table '" + path + "' is empty");
  Matrix out(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) out(i, j) = rows[i][j];
  }
  return out;
}

std::vector<Vector> read_means_file(const std::string& path, Index dim) {
  Matrix table = read_numeric_table(path);
  if (table.cols() != dim) {
    throw ShapeError("means file must have one row of " + std::to_string(dim) +
                     " values per item");
  }
  std::vector<Vector> means;
  means.reserve(table.rows());
  for (Index i = 0; i < table.rows(); ++i) {
    means.push_back(table.row(i).transpose());
  }
  return means;
}

std::vector<std::string> split_words(const std::string& csv) {
  std::vector<std::string> out;
  std::string current;
  for (char c : csv) {
    if (c == ',') {
      if (!current.empty()) out.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) out.push_back(current);
  return out;
}

/// Owns the optional log stream ("-" means stdout, empty means none).
struct LogSink {
  std::ofstream file;
  std::ostream* stream = nullptr;

  explicit LogSink(const std::string& path) {
    if (path.empty()) return;
    if (path == "-") {
      stream = &std::cout;
      return;
    }
    file.open(path);
    if (!file) throw DataError("cannot open log file '" + path + "'");
    stream = &file;
  }
};

struct CommonOptions {
  std::uint64_t seed = 0;
  int threads = 0;
};

void attach_common(CLI::App* cmd, CommonOptions& common) {
  // Config-file values are spliced in front of the command line, so the
  // last occurrence of an option (the explicit flag) wins.
  cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  cmd->add_option("--seed", common.seed, "Random seed")->capture_default_str();
  cmd->add_option("--threads", common.threads,
                  "Worker threads (0 = all cores)")
      ->capture_default_str();
  std::string ignored;
  cmd->add_option("--config", ignored,
                  "Line-oriented 'key = value' file; flags override");
}

/// "key = value" lines ('#' comments) turned into --key=value tokens.
std::vector<std::string> config_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file '" + path + "'");
  std::vector<std::string> tokens;
  std::string line;
  long lineno = 0;
  auto trim = [](std::string s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return std::string();
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string trimmed = trim(line);
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw FormatError("config line is not 'key = value'", lineno);
    }
    const std::string key = trim(trimmed.substr(0, eq));
    const std::string value = trim(trimmed.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw FormatError("config line is not 'key = value'", lineno);
    }
    if (key == "config") continue;  // no recursive config files
    tokens.push_back("--" + key + "=" + value);
  }
  return tokens;
}

/// Applies `--config <file>` by inserting the file's tokens right after the
/// subcommand chain, before any explicit flags.
std::vector<std::string> splice_config(std::vector<std::string> args) {
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
      break;
    }
  }
  if (config_path.empty()) return args;

  std::size_t insert_at = 0;
  while (insert_at < args.size() && args[insert_at][0] != '-') {
    ++insert_at;  // skip the subcommand chain ("mds", "eval similarity", ...)
  }
  std::vector<std::string> extra = config_tokens(config_path);
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(insert_at),
              extra.begin(), extra.end());
  return args;
}

double family_tau(const std::string& family, double tau_flag, int dim) {
  if (tau_flag > 0.0) return tau_flag;
  if (family == "uniform") return uniform_tau(dim);
  return kGaussianTau;
}

// --- subcommand payloads ---------------------------------------------------

struct MdsArgs {
  CommonOptions common;
  std::string input, out, log_path, init_means, family = "gaussian";
  bool matrix_input = false;
  int dim = 2, iters = 1000, dof = 4, ns_iters = 6;
  double lr = 0.01, epsilon = 0.01, tau_flag = 0.0;
};

int run_mds(const MdsArgs& args) {
  Matrix table = read_numeric_table(args.input);
  Matrix d = args.matrix_input ? table : euclidean_dissimilarities(table);
  const double tau = family_tau(args.family, args.tau_flag, args.dim);
  MdsProblem problem = make_mds_problem(std::move(d), args.dim, tau);

  MdsConfig config;
  config.iters = args.iters;
  config.lr = args.lr;
  config.dof = args.dof;
  config.ns_iters = args.ns_iters;
  config.epsilon = args.epsilon;
  config.seed = args.common.seed;
  config.threads = args.common.threads;
  LogSink log(args.log_path);
  config.stress_log = log.stream;

  std::vector<Vector> means;
  if (!args.init_means.empty()) {
    means = read_means_file(args.init_means, args.dim);
    config.init_means = &means;
  }

  std::vector<EllipticalPoint> points = fit_mds(problem, config);

  EmbeddingStore store;
  StoreSection& sec =
      store.add_section(StoreSide::single, args.dim,
                        points.front().factor_rank(), tau, args.epsilon);
  for (std::size_t i = 0; i < points.size(); ++i) {
    sec.add("item" + std::to_string(i), points[i]);
  }
  save_store(store, args.out);
  std::cout << "normalized_stress="
            << normalized_stress(points, problem.dissimilarities, 20,
                                 args.common.threads)
            << " items=" << points.size() << '\n';
  return 0;
}

struct SkipgramArgs {
  CommonOptions common;
  std::string corpus, out, log_path;
  SkipgramConfig config;
};

int run_skipgram(SkipgramArgs& args) {
  args.config.seed = args.common.seed;
  args.config.threads = args.common.threads;
  LogSink log(args.log_path);
  args.config.log = log.stream;
  EmbeddingStore store = train_skipgram(args.corpus, args.config);
  save_store(store, args.out);
  std::cout << "vocabulary=" << store.sections.front().size() << '\n';
  return 0;
}

struct HypernymArgs {
  CommonOptions common;
  std::string edges, out, log_path;
  bool closure = false;
  bool eval_after = false;
  HypernymConfig config;
};

int run_hypernym(HypernymArgs& args) {
  std::ifstream in(args.edges);
  if (!in) throw DataError("cannot open '" + args.edges + "'");
  RelationGraph graph = load_edges(in);
  if (args.closure) graph = transitive_closure(graph);

  args.config.seed = args.common.seed;
  args.config.threads = args.common.threads;
  LogSink log(args.log_path);
  args.config.log = log.stream;
  EmbeddingStore store = train_hypernym(graph, args.config);
  save_store(store, args.out);
  std::cout << "nodes=" << graph.node_count()
            << " relations=" << graph.edges.size() << '\n';
  if (args.eval_after) {
    ReconstructionMetrics m =
        eval_reconstruction(store, graph, 20, args.common.threads);
    std::cout << "mean_rank=" << m.mean_rank << " map=" << m.map << '\n';
  }
  return 0;
}

struct EvalSimilarityArgs {
  CommonOptions common;
  std::string store_path, dataset, measure = "cosine_mixture",
              side = "context";
  double rho = 1.0;
  int ns_iters = 20;
};

int run_eval_similarity(const EvalSimilarityArgs& args) {
  EmbeddingStore store = load_store(args.store_path);
  std::ifstream in(args.dataset);
  if (!in) throw DataError("cannot open '" + args.dataset + "'");
  auto rows = load_similarity_dataset(in);
  StoreSide side = side_from_string(args.side);
  SimilarityEvalResult r =
      eval_similarity(store, rows, measure_from_string(args.measure), args.rho,
                      side, args.ns_iters);
  std::cout << "spearman=" << r.spearman << " covered=" << r.covered
            << " skipped=" << r.skipped << '\n';
  return 0;
}

struct EvalReconstructionArgs {
  CommonOptions common;
  std::string store_path, edges;
  bool closure = false;
  int ns_iters = 20;
};

int run_eval_reconstruction(const EvalReconstructionArgs& args) {
  EmbeddingStore store = load_store(args.store_path);
  std::ifstream in(args.edges);
  if (!in) throw DataError("cannot open '" + args.edges + "'");
  RelationGraph graph = load_edges(in);
  if (args.closure) graph = transitive_closure(graph);
  ReconstructionMetrics m =
      eval_reconstruction(store, graph, args.ns_iters, args.common.threads);
  std::cout << "mean_rank=" << m.mean_rank << " map=" << m.map << '\n';
  return 0;
}

struct VizArgs {
  CommonOptions common;
  std::string store_path, words_csv, reference, out = "-",
              mode = "precision", side = "context";
  bool sqrt_radii = false;
  double width = 800, height = 600, margin = 40;
};

int run_viz(const VizArgs& args) {
  EmbeddingStore store = load_store(args.store_path);
  VizOptions options;
  options.mode = args.mode == "covariance" ? EllipseMode::covariance
                                           : EllipseMode::precision;
  options.sqrt_radii = args.sqrt_radii;
  options.reference = args.reference;
  options.side = side_from_string(args.side);
  options.canvas.width = args.width;
  options.canvas.height = args.height;
  options.canvas.margin = args.margin;
  const std::string svg = render_store(store, split_words(args.words_csv),
                                       options);
  if (args.out == "-") {
    std::cout << svg;
  } else {
    std::ofstream out(args.out);
    if (!out) throw DataError("cannot open '" + args.out + "' for writing");
    out << svg;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Elliptical embeddings in the 2-Wasserstein (Bures) geometry"};
  app.require_subcommand(1);

  MdsArgs mds_args;
  CLI::App* mds = app.add_subcommand(
      "mds", "Embed a dissimilarity structure as elliptical measures");
  attach_common(mds, mds_args.common);
  mds->add_option("--input", mds_args.input,
                  "Numeric table (rows = items) or n x n matrix")
      ->required();
  mds->add_flag("--matrix", mds_args.matrix_input,
                "Treat --input as a precomputed dissimilarity matrix");
  mds->add_option("--dim", mds_args.dim, "Embedding dimension")
      ->capture_default_str();
  mds->add_option("--iters", mds_args.iters, "Gradient iterations")
      ->capture_default_str();
  mds->add_option("--lr", mds_args.lr, "Adagrad learning rate")
      ->capture_default_str();
  mds->add_option("--dof", mds_args.dof, "Wishart degrees of freedom")
      ->capture_default_str();
  mds->add_option("--ns-iters", mds_args.ns_iters, "Square-root iterations")
      ->capture_default_str();
  mds->add_option("--epsilon", mds_args.epsilon, "Scale regularizer")
      ->capture_default_str();
  mds->add_option("--family", mds_args.family, "gaussian or uniform")
      ->check(CLI::IsMember({"gaussian", "uniform"}))
      ->capture_default_str();
  mds->add_option("--tau", mds_args.tau_flag,
                  "Family constant (overrides --family)");
  mds->add_option("--init-means", mds_args.init_means,
                  "Optional coordinates file seeding the means");
  mds->add_option("--log", mds_args.log_path,
                  "Per-iteration stress log ('-' for stdout)");
  mds->add_option("--out", mds_args.out, "Output embedding store")->required();

  SkipgramArgs sg_args;
  CLI::App* sg = app.add_subcommand(
      "skipgram", "Train elliptical word embeddings on a text corpus");
  attach_common(sg, sg_args.common);
  sg->add_option("--corpus", sg_args.corpus, "UTF-8 text corpus")->required();
  sg->add_option("--out", sg_args.out, "Output embedding store")->required();
  sg->add_option("--dim", sg_args.config.dim, "Embedding dimension")
      ->capture_default_str();
  sg->add_option("--rank", sg_args.config.rank, "Factor rank (0 = dim)")
      ->capture_default_str();
  sg->add_option("--margin", sg_args.config.margin, "Hinge margin")
      ->capture_default_str();
  sg->add_option("--window", sg_args.config.window,
                 "Window size (window/2 context words per side)")
      ->capture_default_str();
  sg->add_option("--negatives", sg_args.config.negatives,
                 "Negative contexts per positive pair")
      ->capture_default_str();
  sg->add_option("--subsample", sg_args.config.subsample_t,
                 "Frequent-word subsampling threshold")
      ->capture_default_str();
  sg->add_option("--power", sg_args.config.smoothing_power,
                 "Negative-distribution smoothing power")
      ->capture_default_str();
  sg->add_option("--epochs", sg_args.config.epochs, "Training epochs")
      ->capture_default_str();
  sg->add_option("--batch", sg_args.config.batch, "Batch size")
      ->capture_default_str();
  sg->add_option("--lr", sg_args.config.lr, "Adagrad learning rate")
      ->capture_default_str();
  sg->add_option("--min-count", sg_args.config.min_count,
                 "Keep tokens with at least this many occurrences")
      ->capture_default_str();
  sg->add_option("--ns-iters", sg_args.config.ns_iters,
                 "Square-root iterations")
      ->capture_default_str();
  sg->add_option("--epsilon", sg_args.config.epsilon, "Scale regularizer")
      ->capture_default_str();
  sg->add_option("--init-std", sg_args.config.init_std,
                 "Initialization standard deviation")
      ->capture_default_str();
  sg->add_option("--log", sg_args.log_path,
                 "Per-epoch mean-loss log ('-' for stdout)");

  HypernymArgs hy_args;
  CLI::App* hy = app.add_subcommand(
      "hypernym", "Train elliptical embeddings of a relation graph");
  attach_common(hy, hy_args.common);
  hy->add_option("--edges", hy_args.edges, "child<TAB>hypernym edge list")
      ->required();
  hy->add_flag("--closure", hy_args.closure,
               "Take the transitive closure of the edges first");
  hy->add_option("--out", hy_args.out, "Output embedding store")->required();
  hy->add_option("--dim", hy_args.config.dim, "Embedding dimension")
      ->capture_default_str();
  hy->add_option("--rank", hy_args.config.rank, "Factor rank (0 = dim)")
      ->capture_default_str();
  hy->add_option("--negatives", hy_args.config.negatives,
                 "Negatives per positive relation")
      ->capture_default_str();
  hy->add_option("--batch", hy_args.config.batch, "Relations per batch")
      ->capture_default_str();
  hy->add_option("--lr", hy_args.config.lr,
                 "SGD learning rate (0 = 0.02 for dim 3-4, else 0.01)")
      ->capture_default_str();
  hy->add_option("--epochs", hy_args.config.epochs, "Training epochs")
      ->capture_default_str();
  hy->add_option("--ns-iters", hy_args.config.ns_iters,
                 "Square-root iterations")
      ->capture_default_str();
  hy->add_option("--epsilon", hy_args.config.epsilon, "Scale regularizer")
      ->capture_default_str();
  hy->add_option("--init-std", hy_args.config.init_std,
                 "Initialization standard deviation")
      ->capture_default_str();
  hy->add_option("--log", hy_args.log_path,
                 "Per-epoch mean-loss log ('-' for stdout)");
  hy->add_flag("--eval", hy_args.eval_after,
               "Report reconstruction metrics after training");

  CLI::App* eval =
      app.add_subcommand("eval", "Evaluate a trained embedding store");
  eval->require_subcommand(1);

  EvalSimilarityArgs es_args;
  CLI::App* es = eval->add_subcommand(
      "similarity", "Spearman correlation against a human-scored dataset");
  attach_common(es, es_args.common);
  es->add_option("--store", es_args.store_path, "Embedding store")->required();
  es->add_option("--dataset", es_args.dataset,
                 "'word1 word2 score' lines ('#' comments)")
      ->required();
  es->add_option("--measure", es_args.measure,
                 "cosine_mixture, bures_cosine or polarization")
      ->check(CLI::IsMember({"cosine_mixture", "bures_cosine",
                             "polarization"}))
      ->capture_default_str();
  es->add_option("--rho", es_args.rho, "Covariance mixing coefficient")
      ->capture_default_str();
  es->add_option("--side", es_args.side, "input or context embeddings")
      ->check(CLI::IsMember({"input", "context", "single"}))
      ->capture_default_str();
  es->add_option("--ns-iters", es_args.ns_iters, "Square-root iterations")
      ->capture_default_str();

  EvalReconstructionArgs er_args;
  CLI::App* er = eval->add_subcommand(
      "reconstruction", "Mean rank / MAP of relation reconstruction");
  attach_common(er, er_args.common);
  er->add_option("--store", er_args.store_path, "Embedding store")->required();
  er->add_option("--edges", er_args.edges, "child<TAB>hypernym edge list")
      ->required();
  er->add_flag("--closure", er_args.closure, "Close the edge set first");
  er->add_option("--ns-iters", er_args.ns_iters, "Square-root iterations")
      ->capture_default_str();

  VizArgs viz_args;
  CLI::App* viz = app.add_subcommand(
      "viz", "Render embeddings as an SVG of 2-D ellipses");
  attach_common(viz, viz_args.common);
  viz->add_option("--store", viz_args.store_path, "Embedding store")
      ->required();
  viz->add_option("--words", viz_args.words_csv, "Comma-separated word list")
      ->required();
  viz->add_option("--ref", viz_args.reference,
                  "Reference word spanning the projection plane (d > 2)");
  viz->add_option("--mode", viz_args.mode, "precision or covariance view")
      ->check(CLI::IsMember({"precision", "covariance"}))
      ->capture_default_str();
  viz->add_flag("--sqrt-radii", viz_args.sqrt_radii,
                "Use sqrt(eigenvalue) radii");
  viz->add_option("--side", viz_args.side, "Section to draw from")
      ->check(CLI::IsMember({"input", "context", "single"}))
      ->capture_default_str();
  viz->add_option("--width", viz_args.width, "Canvas width")
      ->capture_default_str();
  viz->add_option("--height", viz_args.height, "Canvas height")
      ->capture_default_str();
  viz->add_option("--margin", viz_args.margin, "Canvas margin")
      ->capture_default_str();
  viz->add_option("--out", viz_args.out, "Output file ('-' for stdout)")
      ->capture_default_str();

  try {
    std::vector<std::string> args =
        splice_config(std::vector<std::string>(argv + 1, argv + argc));
    std::reverse(args.begin(), args.end());  // parse(vector) wants that order
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exit 0
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (mds->parsed()) return run_mds(mds_args);
    if (sg->parsed()) return run_skipgram(sg_args);
    if (hy->parsed()) return run_hypernym(hy_args);
    if (eval->parsed()) {
      if (es->parsed()) return run_eval_similarity(es_args);
      if (er->parsed()) return run_eval_reconstruction(er_args);
    }
    if (viz->parsed()) return run_viz(viz_args);
    std::cerr << "no subcommand selected\n";
    return 1;
  } catch (const ConvergenceError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const SingularityError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const NonDifferentiableError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
