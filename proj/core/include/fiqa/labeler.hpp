#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "fiqa/error.hpp"
#include "fiqa/gallery.hpp"

namespace fiqa {

/// Supervision for one probe image.
///
/// `z_score` is the genuine distance standardized against the probe's
/// impostor distribution; negative means the probe sits closer to its own
/// template than to the typical other subject. `target` maps it into (0,1)
/// with higher meaning better quality.
struct QualityLabel {
  std::string subject_id;
  std::string image_id;
  double genuine_dist = 0.0;
  double impostor_mean = 0.0;
  double impostor_std = 0.0;
  double z_score = 0.0;
  double target = 0.5;

  RecordKey key() const { return {subject_id, image_id}; }
};

struct ImpostorStats {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

/// All impostor distances were equal, so no z-score exists.
class DegenerateDistributionError : public NumericError {
 public:
  DegenerateDistributionError(const std::string& what, ImpostorStats stats)
      : NumericError(what), stats_(stats) {}
  ImpostorStats stats() const noexcept { return stats_; }

 private:
  ImpostorStats stats_;
};

/// Distance from the probe to its own subject's template.
/// Throws DataError when the subject has no template.
double genuine_score(const EmbeddingRecord& probe, const GalleryPartition& partition);

/// Mean and population std of the distances from the probe to every template
/// of another subject. Throws DataError with fewer than two impostor templates
/// and DegenerateDistributionError when the std is zero.
ImpostorStats impostor_stats(const EmbeddingRecord& probe, const GalleryPartition& partition);

/// (genuine - mean) / std. Throws NumericError unless std > 0.
double normalize(double genuine_dist, double impostor_mean, double impostor_std);

/// 1 / (1 + exp(z)), kept strictly inside (0,1) at extreme z.
/// Throws NumericError on non-finite input.
double to_target(double z_score);

enum class LabelFailurePolicy { fail_fast, skip };

struct SkippedProbe {
  RecordKey key;
  std::string reason;
};

struct LabelSet {
  std::vector<QualityLabel> labels;   // probe order
  std::vector<SkippedProbe> skipped;  // only filled under LabelFailurePolicy::skip
};

/// One label per probe. Under fail_fast the first per-probe error is rethrown
/// (same category) with the probe key prepended.
LabelSet label_dataset(const GalleryPartition& partition,
                       LabelFailurePolicy policy = LabelFailurePolicy::fail_fast);

// CSV: subject,image,genuine_dist,imp_mean,imp_std,z,target (17 significant digits)
void write_labels(std::ostream& out, const std::vector<QualityLabel>& labels);
std::vector<QualityLabel> read_labels(std::istream& in, const std::string& source = "<stream>");
void save_labels(const std::filesystem::path& path, const std::vector<QualityLabel>& labels);
std::vector<QualityLabel> load_labels(const std::filesystem::path& path);

}  // namespace fiqa
