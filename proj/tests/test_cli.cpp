// End-to-end tests of the ellembed binary: exit codes, file formats and
// reproducibility, driven through a shell.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "ellembed/store.hpp"

namespace {

const std::string kCli = ELLEMBED_CLI_PATH;
const std::string kData = ELLEMBED_DATA_DIR;
const std::string kTmp = "/tmp/ellembed_cli";

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunResult run(const std::string& args) {
  if (std::system(("mkdir -p " + kTmp).c_str()) != 0) std::abort();
  const std::string out_path = kTmp + "/stdout.txt";
  const std::string err_path = kTmp + "/stderr.txt";
  const std::string cmd =
      kCli + " " + args + " >" + out_path + " 2>" + err_path;
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path);
  out << contents;
}

std::string ten_row_table() {
  std::ostringstream ss;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 4; ++j) {
      ss << 0.5 * i + 0.25 * j * j << ' ';
    }
    ss << '\n';
  }
  return ss.str();
}

}  // namespace

TEST_CASE("no arguments: usage text on stderr, exit 1") {
  RunResult r = run("");
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("Usage") != std::string::npos);
}

TEST_CASE("help exits 0") {
  RunResult r = run("viz --help");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("--words") != std::string::npos);

  r = run("--help");
  CHECK(r.exit_code == 0);
}

TEST_CASE("unknown flags exit 1") {
  RunResult r = run("mds --no-such-flag");
  CHECK(r.exit_code == 1);
}

TEST_CASE("mds end-to-end on a ten-row table") {
  if (std::system(("mkdir -p " + kTmp).c_str()) != 0) std::abort();
  write_file(kTmp + "/table.txt", ten_row_table());
  RunResult r = run("mds --input " + kTmp + "/table.txt --dim 2 --iters 1000"
                    " --out " + kTmp + "/mds.ell --log " + kTmp +
                    "/stress.log --lr 0.1 --seed 3");
  CAPTURE(r.err);
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("normalized_stress=") != std::string::npos);

  ellembed::EmbeddingStore store = ellembed::load_store(kTmp + "/mds.ell");
  REQUIRE(store.sections.size() == 1);
  CHECK(store.sections[0].size() == 10);
  CHECK(store.sections[0].dim == 2);

  // Stress log: "iter value" lines from 0 to 1000.
  std::ifstream log(kTmp + "/stress.log");
  int iter = -1, lines = 0;
  double value;
  while (log >> iter >> value) ++lines;
  CHECK(lines == 1001);
  CHECK(iter == 1000);
}

TEST_CASE("mds rejects bad inputs with exit 2") {
  RunResult r = run("mds --input /nonexistent.txt --out " + kTmp + "/x.ell");
  CHECK(r.exit_code == 2);

  write_file(kTmp + "/asym.txt", "0 1\n2 0\n");
  r = run("mds --matrix --input " + kTmp + "/asym.txt --out " + kTmp +
          "/x.ell");
  CHECK(r.exit_code == 2);
}

TEST_CASE("config file values are overridden by flags") {
  write_file(kTmp + "/table.txt", ten_row_table());
  write_file(kTmp + "/mds.cfg", "dim = 3\niters = 5\nlr = 0.05\n");

  RunResult r = run("mds --input " + kTmp + "/table.txt --config " + kTmp +
                    "/mds.cfg --out " + kTmp + "/cfg_a.ell");
  CAPTURE(r.err);
  CHECK(r.exit_code == 0);
  CHECK(ellembed::load_store(kTmp + "/cfg_a.ell").sections[0].dim == 3);

  r = run("mds --input " + kTmp + "/table.txt --config " + kTmp +
          "/mds.cfg --dim 2 --out " + kTmp + "/cfg_b.ell");
  CHECK(r.exit_code == 0);
  CHECK(ellembed::load_store(kTmp + "/cfg_b.ell").sections[0].dim == 2);
}

TEST_CASE("skipgram + eval similarity round trip") {
  RunResult r = run("skipgram --corpus " + kData + "/corpus_small.txt --dim 3"
                    " --epochs 1 --batch 64 --min-count 100 --subsample 1e-3"
                    " --lr 0.05 --seed 1 --out " + kTmp + "/sg.ell");
  CAPTURE(r.err);
  CHECK(r.exit_code == 0);

  ellembed::EmbeddingStore store = ellembed::load_store(kTmp + "/sg.ell");
  CHECK(store.section(ellembed::StoreSide::input) != nullptr);
  CHECK(store.section(ellembed::StoreSide::context) != nullptr);

  r = run("eval similarity --store " + kTmp + "/sg.ell --dataset " + kData +
          "/similarity_toy.tsv --measure cosine_mixture --side context");
  CAPTURE(r.err);
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("spearman=") != std::string::npos);
  CHECK(r.out.find("covered=") != std::string::npos);
}

TEST_CASE("skipgram runs are reproducible at the file level") {
  const std::string common =
      "skipgram --corpus " + kData + "/corpus_small.txt --dim 2 --epochs 1"
      " --batch 32 --min-count 200 --subsample 1e-3 --seed 7 --out ";
  RunResult a = run(common + kTmp + "/rep_a.ell");
  RunResult b = run(common + kTmp + "/rep_b.ell --threads 2");
  CHECK(a.exit_code == 0);
  CHECK(b.exit_code == 0);
  CHECK(slurp(kTmp + "/rep_a.ell") == slurp(kTmp + "/rep_b.ell"));
  CHECK(!slurp(kTmp + "/rep_a.ell").empty());
}

TEST_CASE("hypernym + eval reconstruction round trip") {
  RunResult r = run("hypernym --edges " + kData + "/edges_toy.tsv --closure"
                    " --dim 3 --epochs 60 --batch 8 --lr 0.3 --negatives 10"
                    " --seed 2 --out " + kTmp + "/hy.ell --eval");
  CAPTURE(r.err);
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("mean_rank=") != std::string::npos);
  CHECK(r.out.find("map=") != std::string::npos);

  r = run("eval reconstruction --store " + kTmp + "/hy.ell --edges " + kData +
          "/edges_toy.tsv --closure");
  CHECK(r.exit_code == 0);
  CHECK(r.out.rfind("mean_rank=", 0) == 0);  // normative output format
  CHECK(r.out.find(" map=") != std::string::npos);
}

TEST_CASE("viz renders SVG from a trained store") {
  write_file(kTmp + "/table.txt", ten_row_table());
  RunResult r = run("mds --input " + kTmp + "/table.txt --dim 2 --iters 50"
                    " --lr 0.1 --out " + kTmp + "/viz_src.ell");
  REQUIRE(r.exit_code == 0);

  r = run("viz --store " + kTmp + "/viz_src.ell --words item0,item1,item2"
          " --mode precision --side single --out " + kTmp + "/plot.svg");
  CAPTURE(r.err);
  CHECK(r.exit_code == 0);
  const std::string svg = slurp(kTmp + "/plot.svg");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("<ellipse") != std::string::npos);
  CHECK(svg.find("item0") != std::string::npos);

  // stdout mode
  r = run("viz --store " + kTmp + "/viz_src.ell --words item0 --side single");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("<svg") != std::string::npos);
}

TEST_CASE("viz precision mode on Dirac scales fails numerically (exit 3)") {
  // Hand-written store of pure point embeddings.
  write_file(kTmp + "/dirac.ell",
             "ellembed 1 2 0 1 0 2 single\n"
             "a 0 0\n"
             "b 1 1\n");
  RunResult r = run("viz --store " + kTmp + "/dirac.ell --words a,b"
                    " --mode precision --side single --out " + kTmp +
                    "/bad.svg");
  CHECK(r.exit_code == 3);

  // Covariance mode accepts the same store.
  r = run("viz --store " + kTmp + "/dirac.ell --words a,b --mode covariance"
          " --side single --out " + kTmp + "/ok.svg");
  CAPTURE(r.err);
  CHECK(r.exit_code == 0);
}

TEST_CASE("corrupt store files exit 2") {
  write_file(kTmp + "/corrupt.ell", "ellembed 9 zz\n");
  RunResult r = run("eval similarity --store " + kTmp + "/corrupt.ell"
                    " --dataset " + kData + "/similarity_toy.tsv");
  CHECK(r.exit_code == 2);
}
