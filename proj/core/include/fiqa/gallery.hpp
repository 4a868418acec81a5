#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fiqa/embedding.hpp"

namespace fiqa {

/// How the single template image of each subject is chosen.
enum class TemplatePolicy {
  first,   ///< lexicographically smallest image_id
  random,  ///< uniform pick, seeded
};

std::string_view to_string(TemplatePolicy policy);
/// Accepts "first" or "random"; throws ContractError otherwise.
TemplatePolicy parse_template_policy(std::string_view text);

/// One template per subject plus the remaining images as probes.
///
/// Subjects with a single image only contribute a template; they widen the
/// impostor gallery without producing probes.
struct GalleryPartition {
  std::map<std::string, EmbeddingRecord> templates;  // keyed by subject_id
  std::vector<EmbeddingRecord> probes;               // dataset order
  std::string policy_tag;
  std::uint64_t seed = 0;

  const EmbeddingRecord* template_for(const std::string& subject_id) const;
};

/// Deterministic in (policy, seed). Throws DataError on an empty dataset.
GalleryPartition partition(const Dataset& dataset, TemplatePolicy policy = TemplatePolicy::first,
                           std::uint64_t seed = 0);

/// Record keys of a partition; enough to rebuild it against the same dataset.
struct PartitionManifest {
  std::vector<RecordKey> templates;
  std::vector<RecordKey> probes;
  std::string policy_tag;
  std::uint64_t seed = 0;
};

PartitionManifest make_manifest(const GalleryPartition& partition);

/// Rebuilds a partition, checking that the manifest is a true partition of
/// `dataset` (every record exactly once, one template per subject, probes only
/// for subjects that have a template). Throws DataError otherwise.
GalleryPartition apply_manifest(const Dataset& dataset, const PartitionManifest& manifest);

// JSON: {"policy_tag": ..., "probes": [[s, i], ...], "seed": n, "templates": [[s, i], ...]}
void write_manifest(std::ostream& out, const PartitionManifest& manifest);
PartitionManifest read_manifest(std::istream& in, const std::string& source = "<stream>");
void save_manifest(const std::filesystem::path& path, const PartitionManifest& manifest);
PartitionManifest load_manifest(const std::filesystem::path& path);

}  // namespace fiqa
