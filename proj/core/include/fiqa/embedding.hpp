#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace fiqa {

using Vector = std::vector<double>;

inline constexpr std::size_t kDefaultEmbeddingDim = 128;

/// Identity of one face image: (subject, image) is unique within a Dataset.
struct RecordKey {
  std::string subject;
  std::string image;

  friend auto operator<=>(const RecordKey&, const RecordKey&) = default;
};

std::string to_string(const RecordKey& key);

struct EmbeddingRecord {
  std::string subject_id;
  std::string image_id;
  Vector vector;

  RecordKey key() const { return {subject_id, image_id}; }
};

/// Ordered collection of embedding records sharing one dimension.
///
/// Records keep insertion order. `add` enforces the dimension, finiteness,
/// and key-uniqueness invariants, so a Dataset is always valid.
class Dataset {
 public:
  explicit Dataset(std::size_t dim = kDefaultEmbeddingDim);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  const std::vector<EmbeddingRecord>& records() const noexcept { return records_; }

  /// Throws ContractError on wrong dimension, non-finite entries, empty ids,
  /// or a duplicate key.
  void add(EmbeddingRecord record);

  const EmbeddingRecord* find(const RecordKey& key) const;
  /// Throws DataError naming the key when absent.
  const EmbeddingRecord& at(const RecordKey& key) const;

  /// subject_id -> record positions, in insertion order.
  std::map<std::string, std::vector<std::size_t>> subjects() const;

 private:
  std::size_t dim_;
  std::vector<EmbeddingRecord> records_;
  std::map<RecordKey, std::size_t> index_;
};

}  // namespace fiqa
