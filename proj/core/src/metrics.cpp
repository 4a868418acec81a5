#include "fiqa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "fiqa/distance.hpp"
#include "fiqa/error.hpp"
#include "fiqa/io.hpp"

namespace fiqa {
namespace {

std::vector<double> sorted_distances(const std::vector<ScoredPair>& pairs) {
  std::vector<double> d;
  d.reserve(pairs.size());
  for (const auto& p : pairs) d.push_back(p.distance);
  std::sort(d.begin(), d.end());
  return d;
}

std::size_t count_at_most(const std::vector<double>& sorted, double threshold) {
  return static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), threshold) -
                                  sorted.begin());
}

}  // namespace

PairSet build_pairs(const Dataset& dataset) {
  if (dataset.size() < 2) throw DataError("pair construction needs at least 2 records");
  const auto& records = dataset.records();
  PairSet pairs;
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (std::size_t j = i + 1; j < records.size(); ++j) {
      ScoredPair pair{i, j, euclidean_distance(records[i].vector, records[j].vector)};
      if (records[i].subject_id == records[j].subject_id)
        pairs.same_pairs.push_back(pair);
      else
        pairs.diff_pairs.push_back(pair);
    }
  }
  return pairs;
}

double far_at(const PairSet& pairs, double threshold) {
  if (pairs.diff_pairs.empty()) throw DataError("FAR undefined: no different-subject pairs");
  const auto accepted = std::count_if(pairs.diff_pairs.begin(), pairs.diff_pairs.end(),
                                      [&](const ScoredPair& p) { return p.distance <= threshold; });
  return static_cast<double>(accepted) / static_cast<double>(pairs.diff_pairs.size());
}

double frr_at(const PairSet& pairs, double threshold) {
  if (pairs.same_pairs.empty()) throw DataError("FRR undefined: no same-subject pairs");
  const auto rejected = std::count_if(pairs.same_pairs.begin(), pairs.same_pairs.end(),
                                      [&](const ScoredPair& p) { return p.distance > threshold; });
  return static_cast<double>(rejected) / static_cast<double>(pairs.same_pairs.size());
}

EvalCurve curve(const PairSet& pairs, std::span<const double> thresholds) {
  if (thresholds.empty()) throw ContractError("threshold grid is empty");
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > thresholds[i - 1]))
      throw ContractError("threshold grid must be strictly increasing (index " + std::to_string(i) +
                          ")");
  }
  if (pairs.same_pairs.empty() || pairs.diff_pairs.empty())
    throw DataError("curve needs both same-subject and different-subject pairs");

  const auto same = sorted_distances(pairs.same_pairs);
  const auto diff = sorted_distances(pairs.diff_pairs);
  const double n_same = static_cast<double>(same.size());
  const double n_diff = static_cast<double>(diff.size());

  EvalCurve result;
  result.thresholds.assign(thresholds.begin(), thresholds.end());
  result.far.reserve(thresholds.size());
  result.frr.reserve(thresholds.size());
  for (double t : thresholds) {
    result.far.push_back(static_cast<double>(count_at_most(diff, t)) / n_diff);
    result.frr.push_back(static_cast<double>(same.size() - count_at_most(same, t)) / n_same);
  }
  return result;
}

std::vector<double> default_grid(const PairSet& pairs, std::size_t points) {
  if (points < 2) throw ContractError("default grid needs at least 2 points");
  double max_d = 0.0;
  for (const auto* set : {&pairs.same_pairs, &pairs.diff_pairs})
    for (const auto& p : *set) max_d = std::max(max_d, p.distance);
  if (!(max_d > 0.0)) throw DataError("all pair distances are zero; grid is degenerate");

  std::vector<double> grid(points);
  const double step = max_d / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) grid[i] = step * static_cast<double>(i);
  grid.back() = max_d;
  return grid;
}

EerResult eer(const EvalCurve& curve) {
  const auto& t = curve.thresholds;
  if (t.empty() || curve.far.size() != t.size() || curve.frr.size() != t.size())
    throw ContractError("malformed curve");

  for (std::size_t i = 0; i < t.size(); ++i) {
    const double gap = curve.far[i] - curve.frr[i];
    if (gap == 0.0) return {curve.far[i], t[i]};
    if (i + 1 < t.size()) {
      const double next = curve.far[i + 1] - curve.frr[i + 1];
      if (gap < 0.0 && next > 0.0) {
        const double s = gap / (gap - next);
        return {curve.far[i] + s * (curve.far[i + 1] - curve.far[i]),
                t[i] + s * (t[i + 1] - t[i])};
      }
    }
  }
  throw NumericError("FAR and FRR do not cross on this threshold grid; widen the grid");
}

DistanceHistograms distance_histograms(const PairSet& pairs, std::size_t bins) {
  if (bins == 0) throw ContractError("histogram needs at least one bin");
  if (pairs.same_pairs.empty() && pairs.diff_pairs.empty())
    throw DataError("histogram of an empty pair set");

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto* set : {&pairs.same_pairs, &pairs.diff_pairs}) {
    for (const auto& p : *set) {
      lo = std::min(lo, p.distance);
      hi = std::max(hi, p.distance);
    }
  }
  const double width = (hi - lo) / static_cast<double>(bins);

  DistanceHistograms h;
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = lo + width * static_cast<double>(i);
  h.edges.back() = hi;
  h.intra.assign(bins, 0);
  h.inter.assign(bins, 0);

  auto bin_of = [&](double d) -> std::size_t {
    if (!(width > 0.0)) return 0;
    const auto b = static_cast<std::size_t>(std::floor((d - lo) / width));
    return std::min(b, bins - 1);
  };
  for (const auto& p : pairs.same_pairs) ++h.intra[bin_of(p.distance)];
  for (const auto& p : pairs.diff_pairs) ++h.inter[bin_of(p.distance)];
  return h;
}

void write_curve(std::ostream& out, const EvalCurve& curve) {
  out << "threshold,far,frr\n";
  for (std::size_t i = 0; i < curve.thresholds.size(); ++i) {
    out << format_real(curve.thresholds[i]) << ',' << format_real(curve.far[i]) << ','
        << format_real(curve.frr[i]) << '\n';
  }
}

void write_eer(std::ostream& out, const EerResult& result, std::size_t n_same, std::size_t n_diff) {
  out << "{\"eer\": " << format_real(result.eer) << ", \"threshold\": " << format_real(result.threshold)
      << ", \"n_same\": " << n_same << ", \"n_diff\": " << n_diff << "}\n";
}

void write_histograms(std::ostream& out, const DistanceHistograms& h) {
  out << "bin_lo,bin_hi,intra_count,inter_count\n";
  for (std::size_t i = 0; i < h.intra.size(); ++i) {
    out << format_real(h.edges[i]) << ',' << format_real(h.edges[i + 1]) << ',' << h.intra[i] << ','
        << h.inter[i] << '\n';
  }
}

void save_curve(const std::filesystem::path& path, const EvalCurve& curve) {
  auto out = open_output(path);
  write_curve(out, curve);
  if (!out) throw DataError("failed writing " + path.string());
}

void save_eer(const std::filesystem::path& path, const EerResult& result, std::size_t n_same,
              std::size_t n_diff) {
  auto out = open_output(path);
  write_eer(out, result, n_same, n_diff);
  if (!out) throw DataError("failed writing " + path.string());
}

void save_histograms(const std::filesystem::path& path, const DistanceHistograms& histograms) {
  auto out = open_output(path);
  write_histograms(out, histograms);
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace fiqa
