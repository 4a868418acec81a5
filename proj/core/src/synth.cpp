#include "fiqa/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <string>

#include "fiqa/error.hpp"
#include "fiqa/io.hpp"

namespace fiqa {
namespace {

std::string padded(std::size_t value, std::size_t count) {
  const int width = std::max(4, static_cast<int>(std::to_string(count).size()));
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*zu", width, value);
  return buf;
}

}  // namespace

void SynthSpec::validate() const {
  if (image_counts.empty()) {
    if (n_subjects < 2) throw ContractError("synthetic spec needs at least 2 subjects");
    if (images_per_subject < 1) throw ContractError("images_per_subject must be >= 1");
  } else {
    if (image_counts.size() < 2) throw ContractError("synthetic spec needs at least 2 subjects");
    for (std::size_t c : image_counts)
      if (c < 1) throw ContractError("every subject needs at least one image");
  }
  if (dim < 1) throw ContractError("dim must be >= 1");
  if (!(noise_low >= 0.0) || !std::isfinite(noise_high) || !(noise_low <= noise_high))
    throw ContractError("noise range must satisfy 0 <= noise_low <= noise_high");
  if (!(centroid_scale > 0.0) || !std::isfinite(centroid_scale))
    throw ContractError("centroid_scale must be > 0");
}

SynthData generate(const SynthSpec& spec) {
  spec.validate();
  const auto counts = spec.image_counts.empty()
                          ? std::vector<std::size_t>(spec.n_subjects, spec.images_per_subject)
                          : spec.image_counts;

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SynthData data{Dataset(spec.dim), {}};
  const std::size_t max_count = *std::max_element(counts.begin(), counts.end());
  Vector centroid(spec.dim);
  for (std::size_t s = 0; s < counts.size(); ++s) {
    // Normalized Gaussian draw: uniform on the sphere.
    double norm = 0.0;
    do {
      norm = 0.0;
      for (auto& c : centroid) {
        c = gauss(rng);
        norm += c * c;
      }
      norm = std::sqrt(norm);
    } while (norm == 0.0);
    for (auto& c : centroid) c *= spec.centroid_scale / norm;

    const std::string subject = "S" + padded(s, counts.size());
    for (std::size_t k = 0; k < counts[s]; ++k) {
      const double tau = spec.noise_low + (spec.noise_high - spec.noise_low) * unit(rng);
      EmbeddingRecord record{subject, subject + "_" + padded(k, max_count), centroid};
      for (auto& x : record.vector) x += tau * gauss(rng);
      data.truth.tau.emplace(record.key(), tau);
      data.dataset.add(std::move(record));
    }
  }
  return data;
}

std::vector<std::size_t> lfw_shaped_counts() {
  constexpr std::size_t multi_subjects = 1680;
  constexpr std::size_t multi_images = 9164;  // 1680 templates + 7484 probes
  constexpr std::size_t single_subjects = 4069;

  std::vector<std::size_t> counts(multi_subjects, multi_images / multi_subjects);
  for (std::size_t i = 0; i < multi_images % multi_subjects; ++i) ++counts[i];
  counts.insert(counts.end(), single_subjects, 1);
  return counts;
}

void write_truth(std::ostream& out, const SynthData& data) {
  out << "subject,image,tau\n";
  for (const auto& record : data.dataset.records()) {
    out << csv_field(record.subject_id) << ',' << csv_field(record.image_id) << ','
        << format_real(data.truth.tau.at(record.key())) << '\n';
  }
}

void save_truth(const std::filesystem::path& path, const SynthData& data) {
  auto out = open_output(path);
  write_truth(out, data);
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace fiqa
