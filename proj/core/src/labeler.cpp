#include "fiqa/labeler.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "fiqa/distance.hpp"
#include "fiqa/io.hpp"

namespace fiqa {
namespace {

constexpr const char* kLabelsHeader = "subject,image,genuine_dist,imp_mean,imp_std,z,target";

QualityLabel label_probe(const EmbeddingRecord& probe, const GalleryPartition& partition) {
  QualityLabel label;
  label.subject_id = probe.subject_id;
  label.image_id = probe.image_id;
  label.genuine_dist = genuine_score(probe, partition);
  const auto stats = impostor_stats(probe, partition);
  label.impostor_mean = stats.mean;
  label.impostor_std = stats.std;
  label.z_score = normalize(label.genuine_dist, stats.mean, stats.std);
  label.target = to_target(label.z_score);
  return label;
}

}  // namespace

double genuine_score(const EmbeddingRecord& probe, const GalleryPartition& partition) {
  const auto* tmpl = partition.template_for(probe.subject_id);
  if (!tmpl) throw DataError("no template for subject '" + probe.subject_id + "'");
  return euclidean_distance(probe.vector, tmpl->vector);
}

ImpostorStats impostor_stats(const EmbeddingRecord& probe, const GalleryPartition& partition) {
  std::vector<double> distances;
  distances.reserve(partition.templates.size());
  for (const auto& [subject, tmpl] : partition.templates) {
    if (subject != probe.subject_id) distances.push_back(euclidean_distance(probe.vector, tmpl.vector));
  }
  if (distances.size() < 2)
    throw DataError("probe " + to_string(probe.key()) + " has " + std::to_string(distances.size()) +
                    " impostor templates, need at least 2");

  const double n = static_cast<double>(distances.size());
  double sum = 0.0;
  for (double d : distances) sum += d;
  const double mean = sum / n;
  double sq = 0.0;
  for (double d : distances) sq += (d - mean) * (d - mean);
  const ImpostorStats stats{mean, std::sqrt(sq / n)};

  if (!(stats.std > 0.0))
    throw DegenerateDistributionError(
        "impostor distances of probe " + to_string(probe.key()) + " are all equal (mean " +
            format_real(stats.mean, 9) + ", std 0)",
        stats);
  return stats;
}

double normalize(double genuine_dist, double impostor_mean, double impostor_std) {
  if (!(impostor_std > 0.0))
    throw NumericError("impostor std must be positive, got " + format_real(impostor_std, 9));
  return (genuine_dist - impostor_mean) / impostor_std;
}

double to_target(double z_score) {
  if (!std::isfinite(z_score)) throw NumericError("z-score is not finite");
  // Evaluated on the side where exp() cannot overflow.
  double target;
  if (z_score >= 0.0) {
    const double e = std::exp(-z_score);
    target = e / (1.0 + e);
  } else {
    target = 1.0 / (1.0 + std::exp(z_score));
  }
  constexpr double lo = std::numeric_limits<double>::denorm_min();
  const double hi = std::nextafter(1.0, 0.0);
  return std::clamp(target, lo, hi);
}

LabelSet label_dataset(const GalleryPartition& partition, LabelFailurePolicy policy) {
  LabelSet result;
  result.labels.reserve(partition.probes.size());
  for (const auto& probe : partition.probes) {
    const std::string where = "probe " + to_string(probe.key()) + ": ";
    try {
      result.labels.push_back(label_probe(probe, partition));
    } catch (const Error& e) {
      if (policy == LabelFailurePolicy::skip) {
        result.skipped.push_back({probe.key(), e.what()});
        continue;
      }
      if (dynamic_cast<const NumericError*>(&e)) throw NumericError(where + e.what());
      if (dynamic_cast<const ContractError*>(&e)) throw ContractError(where + e.what());
      throw DataError(where + e.what());
    }
  }
  return result;
}

void write_labels(std::ostream& out, const std::vector<QualityLabel>& labels) {
  out << kLabelsHeader << '\n';
  for (const auto& l : labels) {
    out << csv_field(l.subject_id) << ',' << csv_field(l.image_id) << ','
        << format_real(l.genuine_dist) << ',' << format_real(l.impostor_mean) << ','
        << format_real(l.impostor_std) << ',' << format_real(l.z_score) << ','
        << format_real(l.target) << '\n';
  }
}

std::vector<QualityLabel> read_labels(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) != split_csv_line(kLabelsHeader))
    throw DataError(source + ": expected header '" + kLabelsHeader + "'");

  std::vector<QualityLabel> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::string where = source + ":" + std::to_string(line_no);
    try {
      const auto f = split_csv_line(line);
      if (f.size() != 7) throw DataError("expected 7 fields, got " + std::to_string(f.size()));
      QualityLabel l;
      l.subject_id = f[0];
      l.image_id = f[1];
      l.genuine_dist = parse_real(f[2], "genuine_dist");
      l.impostor_mean = parse_real(f[3], "imp_mean");
      l.impostor_std = parse_real(f[4], "imp_std");
      l.z_score = parse_real(f[5], "z");
      l.target = parse_real(f[6], "target");
      if (!(l.target > 0.0 && l.target < 1.0)) throw DataError("target outside (0,1)");
      labels.push_back(std::move(l));
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
  }
  return labels;
}

void save_labels(const std::filesystem::path& path, const std::vector<QualityLabel>& labels) {
  auto out = open_output(path);
  write_labels(out, labels);
  if (!out) throw DataError("failed writing " + path.string());
}

std::vector<QualityLabel> load_labels(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_labels(in, path.string());
}

}  // namespace fiqa
