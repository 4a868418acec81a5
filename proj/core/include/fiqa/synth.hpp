#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <vector>

#include "fiqa/embedding.hpp"

namespace fiqa {

/// Gaussian clusters around random points on a sphere. Each image carries its
/// own noise scale tau, which is the ground-truth quality (smaller is better).
struct SynthSpec {
  std::size_t n_subjects = 2;
  std::size_t images_per_subject = 1;
  std::size_t dim = kDefaultEmbeddingDim;
  double noise_low = 0.0;
  double noise_high = 0.0;
  double centroid_scale = 1.0;
  std::uint64_t seed = 0;
  /// Optional per-subject image counts; when non-empty it replaces
  /// n_subjects x images_per_subject.
  std::vector<std::size_t> image_counts;

  /// Throws ContractError on an invalid spec.
  void validate() const;
};

struct SynthTruth {
  std::map<RecordKey, double> tau;
};

struct SynthData {
  Dataset dataset;
  SynthTruth truth;
};

/// Deterministic per seed. Subject ids are "S<n>", image ids "S<n>_<k>",
/// zero-padded so lexicographic order matches generation order.
SynthData generate(const SynthSpec& spec);

/// Image counts of a dataset shaped like LFW: 1680 subjects with two or more
/// images (9164 images in total) followed by 4069 single-image subjects.
std::vector<std::size_t> lfw_shaped_counts();

// CSV: subject,image,tau
void write_truth(std::ostream& out, const SynthData& data);
void save_truth(const std::filesystem::path& path, const SynthData& data);

}  // namespace fiqa
