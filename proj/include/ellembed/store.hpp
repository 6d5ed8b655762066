#pragma once

#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "ellembed/types.hpp"

namespace ellembed {

enum class StoreSide { input, context, single };

std::string to_string(StoreSide side);
StoreSide side_from_string(const std::string& s);

/// One named collection of points sharing dimension, factor rank, family
/// constant and regularizer.
struct StoreSection {
  StoreSide side = StoreSide::single;
  Index dim = 0;
  Index rank = 0;
  double tau = kGaussianTau;
  double epsilon = 0.0;
  std::vector<std::string> tokens;
  std::vector<EllipticalPoint> points;
  std::unordered_map<std::string, int> index;

  int add(const std::string& token, EllipticalPoint point);
  const EllipticalPoint* find(const std::string& token) const;
  std::size_t size() const { return points.size(); }
};

/// Persistent collection of embeddings; skipgram stores carry an input and a
/// context section, the other trainers a single one.
struct EmbeddingStore {
  std::vector<StoreSection> sections;

  StoreSection& add_section(StoreSide side, Index dim, Index rank, double tau,
                            double epsilon);
  const StoreSection* section(StoreSide side) const;
  StoreSection* section(StoreSide side);

  /// Section used when `side` is requested: the exact side if present,
  /// otherwise the single section. Throws DataError when neither exists.
  const StoreSection& resolve(StoreSide side) const;
};

// Text format, one section after another:
//   ellembed 1 <d> <k> <tau> <epsilon> <count> <side>
//   <token> <d mean values> <d*k factor values, row-major>
// Doubles are printed with round-trip precision, so save -> load -> save is
// byte-identical.
void save_store(const EmbeddingStore& store, std::ostream& out);
void save_store(const EmbeddingStore& store, const std::string& path);
EmbeddingStore load_store(std::istream& in);
EmbeddingStore load_store(const std::string& path);

/// Round-trip-exact decimal rendering of a double (shortest form of %.17g
/// semantics is not needed; 17 significant digits always round-trip).
std::string format_double(double v);

}  // namespace ellembed
