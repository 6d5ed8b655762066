#include "ellembed/store.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ellembed {

namespace {
constexpr const char* kMagic = "ellembed";
constexpr int kVersion = 1;
}  // namespace

std::string to_string(StoreSide side) {
  switch (side) {
    case StoreSide::input: return "input";
    case StoreSide::context: return "context";
    case StoreSide::single: return "single";
  }
  return "single";
}

StoreSide side_from_string(const std::string& s) {
  if (s == "input") return StoreSide::input;
  if (s == "context") return StoreSide::context;
  if (s == "single") return StoreSide::single;
  throw FormatError("unknown store side '" + s + "'");
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int StoreSection::add(const std::string& token, EllipticalPoint point) {
  if (point.dim() != dim || point.factor_rank() != rank) {
    throw ShapeError("store section: point shape mismatch for '" + token +
                     "'");
  }
  const int id = static_cast<int>(points.size());
  auto [it, inserted] = index.emplace(token, id);
  if (!inserted) {
    throw DataError("store section: duplicate token '" + token + "'");
  }
  tokens.push_back(token);
  points.push_back(std::move(point));
  return id;
}

const EllipticalPoint* StoreSection::find(const std::string& token) const {
  auto it = index.find(token);
  return it == index.end() ? nullptr : &points[it->second];
}

StoreSection& EmbeddingStore::add_section(StoreSide side, Index dim,
                                          Index rank, double tau,
                                          double epsilon) {
  if (section(side) != nullptr) {
    throw DataError("store already has a '" + to_string(side) + "' section");
  }
  StoreSection s;
  s.side = side;
  s.dim = dim;
  s.rank = rank;
  s.tau = tau;
  s.epsilon = epsilon;
  // At most one section per side; reserving all three keeps references to
  // earlier sections valid across later add_section calls.
  if (sections.capacity() < 3) sections.reserve(3);
  sections.push_back(std::move(s));
  return sections.back();
}

const StoreSection* EmbeddingStore::section(StoreSide side) const {
  for (const auto& s : sections) {
    if (s.side == side) return &s;
  }
  return nullptr;
}

StoreSection* EmbeddingStore::section(StoreSide side) {
  for (auto& s : sections) {
    if (s.side == side) return &s;
  }
  return nullptr;
}

const StoreSection& EmbeddingStore::resolve(StoreSide side) const {
  if (const StoreSection* s = section(side)) return *s;
  if (const StoreSection* s = section(StoreSide::single)) return *s;
  throw DataError("store has no '" + to_string(side) +
                  "' section and no 'single' fallback");
}

void save_store(const EmbeddingStore& store, std::ostream& out) {
  for (const auto& sec : store.sections) {
    out << kMagic << ' ' << kVersion << ' ' << sec.dim << ' ' << sec.rank
        << ' ' << format_double(sec.tau) << ' ' << format_double(sec.epsilon)
        << ' ' << sec.points.size() << ' ' << to_string(sec.side) << '\n';
    for (std::size_t i = 0; i < sec.points.size(); ++i) {
      const auto& token = sec.tokens[i];
      for (char c : token) {
        if (std::isspace(static_cast<unsigned char>(c))) {
          throw DataError("cannot persist token containing whitespace: '" +
                          token + "'");
        }
      }
      const auto& p = sec.points[i];
      out << token;
      for (Index j = 0; j < p.mean.size(); ++j) {
        out << ' ' << format_double(p.mean[j]);
      }
      for (Index r = 0; r < p.factor.rows(); ++r) {
        for (Index c = 0; c < p.factor.cols(); ++c) {
          out << ' ' << format_double(p.factor(r, c));
        }
      }
      out << '\n';
    }
  }
}

void save_store(const EmbeddingStore& store, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  save_store(store, out);
  if (!out.good()) throw DataError("failed writing '" + path + "'");
}

namespace {

double parse_double(const std::string& field, long line) {
  try {
    std::size_t pos = 0;
    double v = std::stod(field, &pos);
    if (pos != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw FormatError("expected a number, got '" + field + "'", line);
  }
}

long parse_long(const std::string& field, long line) {
  try {
    std::size_t pos = 0;
    long v = std::stol(field, &pos);
    if (pos != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw FormatError("expected an integer, got '" + field + "'", line);
  }
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream iss(line);
  std::string f;
  while (iss >> f) fields.push_back(std::move(f));
  return fields;
}

}  // namespace

EmbeddingStore load_store(std::istream& in) {
  EmbeddingStore store;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto header = split_ws(line);
    if (header.size() != 8 || header[0] != kMagic) {
      throw FormatError("expected section header 'ellembed 1 d k tau eps "
                        "count side'", lineno);
    }
    if (parse_long(header[1], lineno) != kVersion) {
      throw FormatError("unsupported format version " + header[1], lineno);
    }
    const long d = parse_long(header[2], lineno);
    const long k = parse_long(header[3], lineno);
    const double tau = parse_double(header[4], lineno);
    const double epsilon = parse_double(header[5], lineno);
    const long count = parse_long(header[6], lineno);
    if (d < 0 || k < 0 || count < 0) {
      throw FormatError("invalid section shape", lineno);
    }
    StoreSide side = StoreSide::single;
    try {
      side = side_from_string(header[7]);
    } catch (const FormatError& e) {
      throw FormatError(e.what(), lineno);
    }
    auto& sec = store.add_section(side, d, k, tau, epsilon);

    const long fields_per_record = 1 + d + d * k;
    for (long r = 0; r < count; ++r) {
      if (!std::getline(in, line)) {
        throw FormatError("truncated section: expected " +
                          std::to_string(count) + " records, got " +
                          std::to_string(r), lineno + r + 1);
      }
      const long record_line = ++lineno;
      auto fields = split_ws(line);
      if (std::ssize(fields) != fields_per_record) {
        throw FormatError("record has " + std::to_string(fields.size()) +
                          " fields, expected " +
                          std::to_string(fields_per_record), record_line);
      }
      EllipticalPoint p;
      p.tau = tau;
      p.epsilon = epsilon;
      p.mean = Vector(d);
      p.factor = Matrix(d, k);
      long f = 1;
      for (long j = 0; j < d; ++j) {
        p.mean[j] = parse_double(fields[f++], record_line);
      }
      for (long row = 0; row < d; ++row) {
        for (long col = 0; col < k; ++col) {
          p.factor(row, col) = parse_double(fields[f++], record_line);
        }
      }
      try {
        sec.add(fields[0], std::move(p));
      } catch (const DataError& e) {
        throw FormatError(e.what(), record_line);
      }
    }
  }
  if (store.sections.empty()) {
    throw FormatError("empty store file", lineno == 0 ? 1 : lineno);
  }
  return store;
}

EmbeddingStore load_store(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return load_store(in);
}

}  // namespace ellembed
