#include "fiqa/gallery.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <random>
#include <set>

#include <json.hpp>

#include "fiqa/error.hpp"
#include "fiqa/io.hpp"

namespace fiqa {

std::string_view to_string(TemplatePolicy policy) {
  switch (policy) {
    case TemplatePolicy::first:
      return "first";
    case TemplatePolicy::random:
      return "random";
  }
  return "unknown";
}

TemplatePolicy parse_template_policy(std::string_view text) {
  if (text == "first") return TemplatePolicy::first;
  if (text == "random") return TemplatePolicy::random;
  throw ContractError("unknown template policy '" + std::string(text) +
                      "' (expected first or random)");
}

const EmbeddingRecord* GalleryPartition::template_for(const std::string& subject_id) const {
  auto it = templates.find(subject_id);
  return it == templates.end() ? nullptr : &it->second;
}

GalleryPartition partition(const Dataset& dataset, TemplatePolicy policy, std::uint64_t seed) {
  if (dataset.empty()) throw DataError("cannot partition an empty dataset");

  const auto& records = dataset.records();
  std::mt19937_64 rng(seed);
  std::vector<bool> is_template(records.size(), false);

  GalleryPartition result;
  result.policy_tag = std::string(to_string(policy));
  result.seed = seed;

  for (auto& [subject, positions] : dataset.subjects()) {
    std::sort(positions.begin(), positions.end(), [&](std::size_t a, std::size_t b) {
      return records[a].image_id < records[b].image_id;
    });
    std::size_t pick = 0;
    if (policy == TemplatePolicy::random) {
      std::uniform_int_distribution<std::size_t> dist(0, positions.size() - 1);
      pick = dist(rng);
    }
    is_template[positions[pick]] = true;
    result.templates.emplace(subject, records[positions[pick]]);
  }

  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!is_template[i]) result.probes.push_back(records[i]);
  }
  return result;
}

PartitionManifest make_manifest(const GalleryPartition& partition) {
  PartitionManifest manifest;
  manifest.policy_tag = partition.policy_tag;
  manifest.seed = partition.seed;
  for (const auto& [subject, record] : partition.templates) manifest.templates.push_back(record.key());
  for (const auto& record : partition.probes) manifest.probes.push_back(record.key());
  return manifest;
}

GalleryPartition apply_manifest(const Dataset& dataset, const PartitionManifest& manifest) {
  GalleryPartition result;
  result.policy_tag = manifest.policy_tag;
  result.seed = manifest.seed;

  std::set<RecordKey> seen;
  auto claim = [&](const RecordKey& key) -> const EmbeddingRecord& {
    if (!seen.insert(key).second)
      throw DataError("manifest lists record " + to_string(key) + " more than once");
    const auto* record = dataset.find(key);
    if (!record) throw DataError("manifest record " + to_string(key) + " is not in the dataset");
    return *record;
  };

  for (const auto& key : manifest.templates) {
    const auto& record = claim(key);
    if (!result.templates.emplace(key.subject, record).second)
      throw DataError("manifest has more than one template for subject '" + key.subject + "'");
  }
  for (const auto& key : manifest.probes) {
    const auto& record = claim(key);
    if (!result.template_for(key.subject))
      throw DataError("probe " + to_string(key) + " has no template for its subject");
    result.probes.push_back(record);
  }
  if (seen.size() != dataset.size())
    throw DataError("manifest covers " + std::to_string(seen.size()) + " of " +
                    std::to_string(dataset.size()) + " dataset records");
  return result;
}

void write_manifest(std::ostream& out, const PartitionManifest& manifest) {
  auto keys = [](const std::vector<RecordKey>& list) {
    auto array = nlohmann::json::array();
    for (const auto& key : list) array.push_back({key.subject, key.image});
    return array;
  };
  nlohmann::json json;
  json["policy_tag"] = manifest.policy_tag;
  json["seed"] = manifest.seed;
  json["templates"] = keys(manifest.templates);
  json["probes"] = keys(manifest.probes);
  out << json.dump(1) << '\n';
}

PartitionManifest read_manifest(std::istream& in, const std::string& source) {
  try {
    const auto json = nlohmann::json::parse(in);
    auto keys = [&](const char* field) {
      std::vector<RecordKey> list;
      for (const auto& entry : json.at(field)) {
        if (!entry.is_array() || entry.size() != 2)
          throw DataError(source + ": '" + field + "' entries must be [subject, image] pairs");
        list.push_back({entry[0].get<std::string>(), entry[1].get<std::string>()});
      }
      return list;
    };
    PartitionManifest manifest;
    manifest.policy_tag = json.at("policy_tag").get<std::string>();
    manifest.seed = json.at("seed").get<std::uint64_t>();
    manifest.templates = keys("templates");
    manifest.probes = keys("probes");
    return manifest;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(source + ": malformed partition manifest: " + e.what());
  }
}

void save_manifest(const std::filesystem::path& path, const PartitionManifest& manifest) {
  auto out = open_output(path);
  write_manifest(out, manifest);
  if (!out) throw DataError("failed writing " + path.string());
}

PartitionManifest load_manifest(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_manifest(in, path.string());
}

}  // namespace fiqa
