#include "fiqa/embedding.hpp"

#include <cmath>

#include "fiqa/error.hpp"

namespace fiqa {

std::string to_string(const RecordKey& key) {
  return "(" + key.subject + ", " + key.image + ")";
}

Dataset::Dataset(std::size_t dim) : dim_(dim) {
  if (dim_ == 0) throw ContractError("embedding dimension must be at least 1");
}

void Dataset::add(EmbeddingRecord record) {
  if (record.subject_id.empty() || record.image_id.empty())
    throw ContractError("record has an empty subject or image id");
  if (record.vector.size() != dim_)
    throw ContractError("record " + to_string(record.key()) + " has dimension " +
                        std::to_string(record.vector.size()) + ", dataset expects " +
                        std::to_string(dim_));
  for (double v : record.vector) {
    if (!std::isfinite(v))
      throw ContractError("record " + to_string(record.key()) + " has a non-finite entry");
  }
  auto key = record.key();
  auto [it, inserted] = index_.emplace(std::move(key), records_.size());
  if (!inserted) throw ContractError("duplicate record key " + to_string(it->first));
  records_.push_back(std::move(record));
}

const EmbeddingRecord* Dataset::find(const RecordKey& key) const {
  auto it = index_.find(key);
  return it == index_.end() ? nullptr : &records_[it->second];
}

const EmbeddingRecord& Dataset::at(const RecordKey& key) const {
  if (const auto* record = find(key)) return *record;
  throw DataError("no embedding for record " + to_string(key));
}

std::map<std::string, std::vector<std::size_t>> Dataset::subjects() const {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < records_.size(); ++i) groups[records_[i].subject_id].push_back(i);
  return groups;
}

}  // namespace fiqa
