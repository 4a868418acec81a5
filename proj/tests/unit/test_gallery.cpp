#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "fiqa/error.hpp"
#include "fiqa/gallery.hpp"
#include "fiqa/synth.hpp"

using namespace fiqa;

namespace {

Dataset grid_dataset(std::size_t subjects, std::size_t images) {
  SynthSpec spec;
  spec.n_subjects = subjects;
  spec.images_per_subject = images;
  spec.dim = 4;
  spec.noise_low = 0.1;
  spec.noise_high = 0.2;
  spec.seed = 8;
  return generate(spec).dataset;
}

std::string manifest_text(const GalleryPartition& p) {
  std::ostringstream out;
  write_manifest(out, make_manifest(p));
  return out.str();
}

void expect_true_partition(const Dataset& ds, const GalleryPartition& p) {
  std::set<RecordKey> seen;
  for (const auto& [subject, r] : p.templates) {
    EXPECT_EQ(subject, r.subject_id);
    EXPECT_TRUE(seen.insert(r.key()).second);
  }
  const auto groups = ds.subjects();
  for (const auto& r : p.probes) {
    EXPECT_TRUE(seen.insert(r.key()).second) << "record in both sets";
    EXPECT_GE(groups.at(r.subject_id).size(), 2u);
  }
  EXPECT_EQ(seen.size(), ds.size());
  EXPECT_EQ(p.templates.size(), groups.size());
}

}  // namespace

TEST(Partition, SingleImageSubject) {
  Dataset ds(2);
  ds.add({"solo", "x", {1.0, 2.0}});
  const auto p = partition(ds);
  EXPECT_EQ(p.templates.size(), 1u);
  EXPECT_TRUE(p.probes.empty());
}

TEST(Partition, ThreeByThreeIsDeterministic) {
  const auto ds = grid_dataset(3, 3);
  for (auto policy : {TemplatePolicy::first, TemplatePolicy::random}) {
    const auto a = partition(ds, policy, 41);
    const auto b = partition(ds, policy, 41);
    EXPECT_EQ(a.templates.size(), 3u);
    EXPECT_EQ(a.probes.size(), 6u);
    expect_true_partition(ds, a);
    EXPECT_EQ(manifest_text(a), manifest_text(b));
  }
}

TEST(Partition, FirstPolicyPicksSmallestImageId) {
  Dataset ds(1);
  ds.add({"a", "z9", {0.0}});
  ds.add({"a", "b2", {1.0}});
  ds.add({"a", "m5", {2.0}});
  const auto p = partition(ds, TemplatePolicy::first, 123);
  EXPECT_EQ(p.templates.at("a").image_id, "b2");
  ASSERT_EQ(p.probes.size(), 2u);
  EXPECT_EQ(p.probes[0].image_id, "z9");  // dataset order is kept
  EXPECT_EQ(p.probes[1].image_id, "m5");
  EXPECT_EQ(p.policy_tag, "first");
}

TEST(Partition, RandomPolicyDependsOnSeed) {
  const auto ds = grid_dataset(40, 5);
  std::set<std::string> manifests;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto p = partition(ds, TemplatePolicy::random, seed);
    expect_true_partition(ds, p);
    manifests.insert(manifest_text(p));
  }
  EXPECT_GT(manifests.size(), 1u);
}

TEST(Partition, EmptyDatasetIsError) {
  // A Dataset cannot be constructed empty by the loader, but the type allows it.
  EXPECT_THROW(partition(Dataset(3)), DataError);
}

TEST(Partition, LfwShape) {
  SynthSpec spec;
  spec.image_counts = lfw_shaped_counts();
  spec.dim = 2;
  spec.noise_high = 0.1;
  const auto ds = generate(spec).dataset;
  ASSERT_EQ(ds.size(), 13233u);
  const auto p = partition(ds);
  EXPECT_EQ(p.templates.size(), 5749u);
  EXPECT_EQ(p.probes.size(), 7484u);
}

TEST(Manifest, RoundTripAndApply) {
  const auto ds = grid_dataset(4, 3);
  const auto p = partition(ds, TemplatePolicy::random, 9);
  std::stringstream buf;
  write_manifest(buf, make_manifest(p));
  const auto manifest = read_manifest(buf);
  EXPECT_EQ(manifest.policy_tag, "random");
  EXPECT_EQ(manifest.seed, 9u);
  const auto rebuilt = apply_manifest(ds, manifest);
  EXPECT_EQ(manifest_text(rebuilt), manifest_text(p));
}

TEST(Manifest, ApplyRejectsNonPartitions) {
  const auto ds = grid_dataset(3, 2);
  const auto good = make_manifest(partition(ds));

  auto missing = good;
  missing.probes.pop_back();
  EXPECT_THROW(apply_manifest(ds, missing), DataError);

  auto duplicate = good;
  duplicate.probes.push_back(duplicate.templates.front());
  EXPECT_THROW(apply_manifest(ds, duplicate), DataError);

  auto unknown = good;
  unknown.probes.push_back({"ghost", "g1"});
  EXPECT_THROW(apply_manifest(ds, unknown), DataError);

  auto two_templates = good;
  two_templates.templates.push_back(two_templates.probes.front());
  two_templates.probes.erase(two_templates.probes.begin());
  EXPECT_THROW(apply_manifest(ds, two_templates), DataError);

  auto orphan = good;
  const auto moved = orphan.templates.front();
  orphan.templates.erase(orphan.templates.begin());
  orphan.probes.push_back(moved);
  EXPECT_THROW(apply_manifest(ds, orphan), DataError);
}

TEST(Manifest, MalformedJson) {
  std::istringstream in("{\"templates\": 3}");
  EXPECT_THROW(read_manifest(in), DataError);
}

TEST(TemplatePolicyText, ParsesKnownNames) {
  EXPECT_EQ(parse_template_policy("first"), TemplatePolicy::first);
  EXPECT_EQ(parse_template_policy("random"), TemplatePolicy::random);
  EXPECT_THROW(parse_template_policy("best"), ContractError);
}
