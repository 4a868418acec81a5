#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "fiqa/embedding.hpp"

namespace fiqa {

/// An unordered pair of dataset records. `first < second` are positions in
/// the dataset the pair set was built from.
struct ScoredPair {
  std::size_t first = 0;
  std::size_t second = 0;
  double distance = 0.0;
};

struct PairSet {
  std::vector<ScoredPair> same_pairs;  // matching subject_id
  std::vector<ScoredPair> diff_pairs;  // differing subject_id
};

/// Every unordered pair of distinct records, classified by subject.
/// Throws DataError with fewer than two records.
PairSet build_pairs(const Dataset& dataset);

/// Fraction of different-subject pairs accepted (distance <= threshold).
/// Throws DataError when there are none.
double far_at(const PairSet& pairs, double threshold);
/// Fraction of same-subject pairs rejected (distance > threshold).
/// Throws DataError when there are none.
double frr_at(const PairSet& pairs, double threshold);

struct EvalCurve {
  std::vector<double> thresholds;  // strictly increasing
  std::vector<double> far;
  std::vector<double> frr;
};

/// FAR/FRR at each grid point. Throws ContractError on an empty or
/// non-increasing grid and DataError on an empty same or diff set.
EvalCurve curve(const PairSet& pairs, std::span<const double> thresholds);

/// `points` evenly spaced thresholds from 0 to the largest pair distance.
std::vector<double> default_grid(const PairSet& pairs, std::size_t points = 512);

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
};

/// Linear interpolation across the first sign change of (far - frr). A grid
/// point with far == frr is returned as is. Throws NumericError when the curve
/// never crosses.
EerResult eer(const EvalCurve& curve);

/// Equal-width bins over the combined [min, max] distance range.
struct DistanceHistograms {
  std::vector<double> edges;  // bins + 1 entries
  std::vector<std::size_t> intra;
  std::vector<std::size_t> inter;
};

/// Throws ContractError when bins == 0 and DataError when there are no pairs.
DistanceHistograms distance_histograms(const PairSet& pairs, std::size_t bins);

void write_curve(std::ostream& out, const EvalCurve& curve);  // threshold,far,frr
void write_eer(std::ostream& out, const EerResult& result, std::size_t n_same, std::size_t n_diff);
void write_histograms(std::ostream& out, const DistanceHistograms& histograms);
void save_curve(const std::filesystem::path& path, const EvalCurve& curve);
void save_eer(const std::filesystem::path& path, const EerResult& result, std::size_t n_same,
              std::size_t n_diff);
void save_histograms(const std::filesystem::path& path, const DistanceHistograms& histograms);

}  // namespace fiqa
