#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <set>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "fiqa/embedding_io.hpp"
#include "fiqa/io.hpp"
#include "fiqa/metrics.hpp"

namespace fiqa::cli {
namespace {

void validate_or_usage(const TrainConfig& config) {
  try {
    config.validate();
  } catch (const ContractError& e) {
    throw UsageError(std::string("invalid training configuration: ") + e.what());
  }
}

void validate_or_usage(const SynthSpec& spec) {
  try {
    spec.validate();
  } catch (const ContractError& e) {
    throw UsageError(std::string("invalid simulation spec: ") + e.what());
  }
}

void require_file(const fs::path& path, const char* what) {
  if (!fs::is_regular_file(path))
    throw DataError(std::string(what) + " file not found: " + path.string());
}

SynthSpec default_synth_spec() {
  SynthSpec spec;
  spec.n_subjects = 50;
  spec.images_per_subject = 10;
  spec.dim = 32;
  spec.noise_low = 0.05;
  spec.noise_high = 1.0;
  spec.centroid_scale = 1.0;
  return spec;
}

// Rejects keys outside `allowed` so a typo in a config cannot be ignored silently.
void check_keys(const nlohmann::json& object, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!object.is_object()) throw UsageError(where + " must be a JSON object");
  for (const auto& [key, value] : object.items()) {
    if (!allowed.count(key)) throw UsageError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read_key(const nlohmann::json& object, const char* key, T& into) {
  if (!object.contains(key)) return;
  try {
    into = object.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("bad value for '") + key + "': " + e.what());
  }
}

struct QualitySummary {
  std::size_t count = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

void write_quality_summary(const fs::path& model, const fs::path& embeddings, const fs::path& out) {
  const auto head = load_model(model).head;
  const auto dataset = load_embeddings(embeddings);
  QualitySummary s;
  s.min = 1.0;
  double sum = 0.0;
  for (const auto& r : dataset.records()) {
    const double q = predict(head, r.vector);
    sum += q;
    s.min = std::min(s.min, q);
    s.max = std::max(s.max, q);
    ++s.count;
  }
  s.mean = sum / static_cast<double>(s.count);
  auto file = open_output(out);
  file << "{\"count\": " << s.count << ", \"mean\": " << format_real(s.mean)
       << ", \"min\": " << format_real(s.min) << ", \"max\": " << format_real(s.max) << "}\n";
}

}  // namespace

void cmd_simulate(const SynthSpec& spec, const fs::path& embeddings_out, const fs::path& truth_out) {
  validate_or_usage(spec);
  const auto data = generate(spec);
  save_embeddings(embeddings_out, data.dataset);
  save_truth(truth_out, data);
}

void cmd_partition(const fs::path& embeddings, TemplatePolicy policy, std::uint64_t seed,
                   const fs::path& manifest_out) {
  require_file(embeddings, "embeddings");
  const auto dataset = load_embeddings(embeddings);
  save_manifest(manifest_out, make_manifest(partition(dataset, policy, seed)));
}

std::size_t cmd_label(const fs::path& embeddings, const fs::path& manifest,
                      const fs::path& labels_out, LabelFailurePolicy on_error) {
  require_file(embeddings, "embeddings");
  require_file(manifest, "manifest");
  const auto dataset = load_embeddings(embeddings);
  const auto gallery = apply_manifest(dataset, load_manifest(manifest));
  const auto result = label_dataset(gallery, on_error);
  for (const auto& skipped : result.skipped)
    std::cerr << "skipped probe " << to_string(skipped.key) << ": " << skipped.reason << '\n';
  save_labels(labels_out, result.labels);
  return result.skipped.size();
}

TrainResult cmd_train(const fs::path& embeddings, const fs::path& labels, const TrainConfig& config,
                      const fs::path& model_out, const fs::path& history_out) {
  validate_or_usage(config);
  require_file(embeddings, "embeddings");
  require_file(labels, "labels");
  const auto dataset = load_embeddings(embeddings);
  auto result = train(load_labels(labels), dataset, config);
  save_model(model_out, result.head, config);
  save_history(history_out, result.history);
  return result;
}

void cmd_score(const fs::path& model, const fs::path& embeddings, const fs::path& scores_out) {
  require_file(model, "model");
  require_file(embeddings, "embeddings");
  const auto head = load_model(model).head;
  const auto dataset = load_embeddings(embeddings);
  if (dataset.dim() != head.weights.size())
    throw DataError("model dimension " + std::to_string(head.weights.size()) +
                    " does not match embedding dimension " + std::to_string(dataset.dim()));

  auto out = open_output(scores_out);
  out << "subject,image,quality\n";
  for (const auto& r : dataset.records()) {
    out << csv_field(r.subject_id) << ',' << csv_field(r.image_id) << ','
        << format_real(predict(head, r.vector)) << '\n';
  }
  if (!out) throw DataError("failed writing " + scores_out.string());
}

void cmd_eval(const fs::path& embeddings, std::size_t grid_size, std::size_t bins,
              const fs::path& out_dir) {
  if (grid_size < 2) throw UsageError("--grid-size must be at least 2");
  if (bins < 1) throw UsageError("--bins must be at least 1");
  require_file(embeddings, "embeddings");
  const auto pairs = build_pairs(load_embeddings(embeddings));
  const auto grid = default_grid(pairs, grid_size);
  const auto roc = curve(pairs, grid);
  save_curve(out_dir / "curve.csv", roc);
  save_histograms(out_dir / "histogram.csv", distance_histograms(pairs, bins));
  save_eer(out_dir / "eer.json", eer(roc), pairs.same_pairs.size(), pairs.diff_pairs.size());
}

void cmd_pipeline(const fs::path& config_path, const std::optional<fs::path>& out_dir_override) {
  require_file(config_path, "config");
  nlohmann::json config;
  try {
    auto in = open_input(config_path);
    config = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(config_path.string() + ": malformed JSON: " + e.what());
  }
  check_keys(config,
             {"out_dir", "seed", "embeddings", "policy", "simulate", "train", "grid_size", "bins"},
             "pipeline config");

  const fs::path base = config_path.parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };

  std::uint64_t seed = 0;
  std::string out_dir = "pipeline_out";
  std::string policy_text = "first";
  std::size_t grid_size = 512;
  std::size_t bins = 32;
  read_key(config, "seed", seed);
  read_key(config, "out_dir", out_dir);
  read_key(config, "policy", policy_text);
  read_key(config, "grid_size", grid_size);
  read_key(config, "bins", bins);

  TemplatePolicy policy;
  try {
    policy = parse_template_policy(policy_text);
  } catch (const ContractError& e) {
    throw UsageError(e.what());
  }

  TrainConfig train_config;
  if (config.contains("train")) {
    const auto& t = config["train"];
    check_keys(t, {"lr", "momentum", "weight_decay", "batch_size", "epochs", "train_fraction"},
               "'train'");
    read_key(t, "lr", train_config.learning_rate);
    read_key(t, "momentum", train_config.momentum);
    read_key(t, "weight_decay", train_config.weight_decay);
    read_key(t, "batch_size", train_config.batch_size);
    read_key(t, "epochs", train_config.epochs);
    read_key(t, "train_fraction", train_config.train_fraction);
  }
  train_config.seed = seed;
  validate_or_usage(train_config);
  if (grid_size < 2) throw UsageError("grid_size must be at least 2");
  if (bins < 1) throw UsageError("bins must be at least 1");

  const fs::path out = out_dir_override ? *out_dir_override : resolve(out_dir);
  fs::path embeddings;
  if (config.contains("embeddings")) {
    if (config.contains("simulate")) throw UsageError("config sets both 'embeddings' and 'simulate'");
    std::string path_text;
    read_key(config, "embeddings", path_text);
    embeddings = resolve(path_text);
    require_file(embeddings, "embeddings");
  } else {
    SynthSpec spec = default_synth_spec();
    if (config.contains("simulate")) {
      const auto& s = config["simulate"];
      check_keys(s, {"subjects", "images_per_subject", "dim", "noise_low", "noise_high", "centroid_scale"},
                 "'simulate'");
      read_key(s, "subjects", spec.n_subjects);
      read_key(s, "images_per_subject", spec.images_per_subject);
      read_key(s, "dim", spec.dim);
      read_key(s, "noise_low", spec.noise_low);
      read_key(s, "noise_high", spec.noise_high);
      read_key(s, "centroid_scale", spec.centroid_scale);
    }
    spec.seed = seed;
    validate_or_usage(spec);
    embeddings = out / "embeddings.jsonl";
    cmd_simulate(spec, embeddings, out / "truth.csv");
  }

  cmd_partition(embeddings, policy, seed, out / "manifest.json");
  cmd_label(embeddings, out / "manifest.json", out / "labels.csv");
  cmd_train(embeddings, out / "labels.csv", train_config, out / "model.json", out / "history.csv");
  cmd_score(out / "model.json", embeddings, out / "scores.csv");
  cmd_eval(embeddings, grid_size, bins, out);
  write_quality_summary(out / "model.json", embeddings, out / "quality_summary.json");
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Face image quality labelling, training and verification metrics", "fiqa"};
  app.require_subcommand(1);

  std::string embeddings, manifest, labels, model, out;
  std::uint64_t seed = 0;

  auto* simulate = app.add_subcommand("simulate", "Generate a seeded synthetic embedding set");
  SynthSpec spec = default_synth_spec();
  simulate->add_option("--subjects", spec.n_subjects, "Number of subjects")->capture_default_str();
  simulate->add_option("--images-per-subject", spec.images_per_subject, "Images per subject")
      ->capture_default_str();
  simulate->add_option("--dim", spec.dim, "Embedding dimension")->capture_default_str();
  simulate->add_option("--noise-low", spec.noise_low, "Lower bound of per-image noise scale")
      ->capture_default_str();
  simulate->add_option("--noise-high", spec.noise_high, "Upper bound of per-image noise scale")
      ->capture_default_str();
  simulate->add_option("--centroid-scale", spec.centroid_scale, "Radius of subject centroids")
      ->capture_default_str();
  simulate->add_option("--seed", seed, "RNG seed")->capture_default_str();
  simulate->add_option("--embeddings", embeddings, "Output JSON Lines embeddings")->required();
  simulate->add_option("--out", out, "Output truth CSV (subject,image,tau)")->required();

  auto* part = app.add_subcommand("partition", "Split embeddings into templates and probes");
  std::string policy_text = "first";
  part->add_option("--embeddings", embeddings, "Input JSON Lines embeddings")->required();
  part->add_option("--policy", policy_text, "Template selection policy")
      ->check(CLI::IsMember({"first", "random"}))
      ->capture_default_str();
  part->add_option("--seed", seed, "Seed for the random policy")->capture_default_str();
  part->add_option("--out", out, "Output manifest JSON")->required();

  auto* label = app.add_subcommand("label", "Generate quality labels for every probe");
  std::string on_error = "fail";
  label->add_option("--embeddings", embeddings, "Input JSON Lines embeddings")->required();
  label->add_option("--manifest", manifest, "Partition manifest JSON")->required();
  label->add_option("--on-error", on_error, "Per-probe error handling")
      ->check(CLI::IsMember({"fail", "skip"}))
      ->capture_default_str();
  label->add_option("--out", out, "Output labels CSV")->required();

  auto* trn = app.add_subcommand("train", "Train the sigmoid quality head");
  TrainConfig config;
  trn->add_option("--embeddings", embeddings, "Input JSON Lines embeddings")->required();
  trn->add_option("--labels", labels, "Labels CSV")->required();
  trn->add_option("--lr", config.learning_rate, "Learning rate")->capture_default_str();
  trn->add_option("--momentum", config.momentum, "Momentum")->capture_default_str();
  trn->add_option("--weight-decay", config.weight_decay, "L2 weight decay")->capture_default_str();
  trn->add_option("--batch-size", config.batch_size, "Mini-batch size")->capture_default_str();
  trn->add_option("--epochs", config.epochs, "Training epochs")->capture_default_str();
  trn->add_option("--train-fraction", config.train_fraction, "Training split fraction")
      ->capture_default_str();
  trn->add_option("--seed", seed, "Split and shuffle seed")->capture_default_str();
  trn->add_option("--model", model, "Output model JSON")->required();
  trn->add_option("--out", out, "Output history CSV")->required();

  auto* score = app.add_subcommand("score", "Predict quality for every embedding");
  score->add_option("--model", model, "Model JSON")->required();
  score->add_option("--embeddings", embeddings, "Input JSON Lines embeddings")->required();
  score->add_option("--out", out, "Output scores CSV")->required();

  auto* eval = app.add_subcommand("eval", "FAR/FRR curve, EER and distance histograms");
  std::size_t grid_size = 512, bins = 32;
  eval->add_option("--embeddings", embeddings, "Input JSON Lines embeddings")->required();
  eval->add_option("--grid-size", grid_size, "Threshold grid points")->capture_default_str();
  eval->add_option("--bins", bins, "Histogram bins")->capture_default_str();
  eval->add_option("--out", out, "Output directory")->required();

  auto* pipe = app.add_subcommand("pipeline", "Run every stage from a JSON config");
  std::string config_path;
  pipe->add_option("config", config_path, "Pipeline config JSON")->required();
  pipe->add_option("--out", out, "Output directory (overrides out_dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (simulate->parsed()) {
      spec.seed = seed;
      cmd_simulate(spec, embeddings, out);
    } else if (part->parsed()) {
      cmd_partition(embeddings, parse_template_policy(policy_text), seed, out);
    } else if (label->parsed()) {
      const auto skipped = cmd_label(embeddings, manifest, out,
                                     on_error == "skip" ? LabelFailurePolicy::skip
                                                        : LabelFailurePolicy::fail_fast);
      if (skipped) std::cerr << skipped << " probe(s) skipped\n";
    } else if (trn->parsed()) {
      config.seed = seed;
      cmd_train(embeddings, labels, config, model, out);
    } else if (score->parsed()) {
      cmd_score(model, embeddings, out);
    } else if (eval->parsed()) {
      cmd_eval(embeddings, grid_size, bins, out);
    } else if (pipe->parsed()) {
      cmd_pipeline(config_path, out.empty() ? std::nullopt : std::optional<fs::path>(out));
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const Error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace fiqa::cli
