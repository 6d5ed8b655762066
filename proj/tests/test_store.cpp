#include "ellembed/store.hpp"

#include <sstream>

#include "doctest.h"
#include "oracles.hpp"

using namespace ellembed;

namespace {

EmbeddingStore sample_store() {
  Rng rng(60);
  EmbeddingStore store;
  StoreSection& input = store.add_section(StoreSide::input, 2, 2, 1.0, 0.01);
  StoreSection& context =
      store.add_section(StoreSide::context, 2, 2, 1.0, 0.01);
  for (const char* tok : {"alpha", "beta", "gamma"}) {
    input.add(tok, oracle::random_point(2, rng, 2, 0.01));
    context.add(tok, oracle::random_point(2, rng, 2, 0.01));
  }
  return store;
}

std::string serialize(const EmbeddingStore& store) {
  std::ostringstream out;
  save_store(store, out);
  return out.str();
}

}  // namespace

TEST_CASE("save/load round-trip is byte-identical on re-save") {
  EmbeddingStore store = sample_store();
  const std::string first = serialize(store);
  std::istringstream in(first);
  EmbeddingStore loaded = load_store(in);
  CHECK(serialize(loaded) == first);
  CHECK(loaded.sections.size() == 2);
  CHECK(loaded.section(StoreSide::input)->size() == 3);

  const EllipticalPoint* p = loaded.section(StoreSide::context)->find("beta");
  REQUIRE(p != nullptr);
  const EllipticalPoint* q = store.section(StoreSide::context)->find("beta");
  CHECK((p->mean - q->mean).norm() == 0.0);
  CHECK((p->factor - q->factor).norm() == 0.0);
}

TEST_CASE("format arithmetic: one header plus one line per token") {
  EmbeddingStore store;
  StoreSection& sec = store.add_section(StoreSide::single, 2, 2, 1.0, 0.0);
  Rng rng(61);
  for (const char* tok : {"a", "b", "c"}) {
    sec.add(tok, oracle::random_point(2, rng, 2, 0.0));
  }
  const std::string text = serialize(store);
  int lines = 0;
  for (char c : text) lines += c == '\n';
  CHECK(lines == 4);

  std::istringstream header(text.substr(0, text.find('\n')));
  std::string magic;
  int version, d, k, count;
  double tau, eps;
  std::string side;
  header >> magic >> version >> d >> k >> tau >> eps >> count >> side;
  CHECK(magic == "ellembed");
  CHECK(version == 1);
  CHECK(d == 2);
  CHECK(k == 2);
  CHECK(count == 3);
  CHECK(side == "single");
}

TEST_CASE("truncated files and bad headers raise FormatError with a line") {
  EmbeddingStore store = sample_store();
  std::string text = serialize(store);

  SUBCASE("truncation") {
    const auto cut = text.rfind('\n', text.size() - 2);
    std::istringstream in(text.substr(0, cut + 1));
    CHECK_THROWS_AS(load_store(in), FormatError);
  }
  SUBCASE("wrong magic") {
    std::istringstream in("wrongmagic 1 2 2 1 0 1 single\n");
    CHECK_THROWS_AS(load_store(in), FormatError);
  }
  SUBCASE("wrong version") {
    std::istringstream in("ellembed 7 2 2 1 0 0 single\n");
    CHECK_THROWS_AS(load_store(in), FormatError);
  }
  SUBCASE("bad field count in a record") {
    std::istringstream in("ellembed 1 2 0 1 0 1 single\ntok 1.0\n");
    try {
      load_store(in);
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(e.line() == 2);
    }
  }
  SUBCASE("empty file") {
    std::istringstream in("");
    CHECK_THROWS_AS(load_store(in), FormatError);
  }
}

TEST_CASE("tokens with whitespace cannot be persisted") {
  EmbeddingStore store;
  StoreSection& sec = store.add_section(StoreSide::single, 1, 0, 1.0, 0.0);
  sec.add("bad token", dirac(Vector::Zero(1)));
  std::ostringstream out;
  CHECK_THROWS_AS(save_store(store, out), DataError);
}

TEST_CASE("duplicate tokens are rejected") {
  EmbeddingStore store;
  StoreSection& sec = store.add_section(StoreSide::single, 1, 0, 1.0, 0.0);
  sec.add("x", dirac(Vector::Zero(1)));
  CHECK_THROWS_AS(sec.add("x", dirac(Vector::Zero(1))), DataError);
}

TEST_CASE("resolve falls back to the single section") {
  EmbeddingStore store;
  store.add_section(StoreSide::single, 1, 0, 1.0, 0.0);
  CHECK(&store.resolve(StoreSide::context) == &store.sections.front());
  CHECK(&store.resolve(StoreSide::input) == &store.sections.front());

  EmbeddingStore empty;
  CHECK_THROWS_AS(empty.resolve(StoreSide::context), DataError);
}
