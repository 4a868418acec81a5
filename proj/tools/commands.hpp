#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>

#include "fiqa/error.hpp"
#include "fiqa/gallery.hpp"
#include "fiqa/labeler.hpp"
#include "fiqa/synth.hpp"
#include "fiqa/trainer.hpp"

namespace fiqa::cli {

namespace fs = std::filesystem;

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,  // unexpected
  kExitUsage = 2,
  kExitData = 3,
  kExitNumeric = 4,
};

/// Bad flags or configuration, detected before any computation.
class UsageError : public Error {
 public:
  using Error::Error;
};

void cmd_simulate(const SynthSpec& spec, const fs::path& embeddings_out, const fs::path& truth_out);

void cmd_partition(const fs::path& embeddings, TemplatePolicy policy, std::uint64_t seed,
                   const fs::path& manifest_out);

/// Returns the number of skipped probes (always 0 under fail_fast).
std::size_t cmd_label(const fs::path& embeddings, const fs::path& manifest,
                      const fs::path& labels_out,
                      LabelFailurePolicy on_error = LabelFailurePolicy::fail_fast);

TrainResult cmd_train(const fs::path& embeddings, const fs::path& labels, const TrainConfig& config,
                      const fs::path& model_out, const fs::path& history_out);

/// CSV subject,image,quality for every record of `embeddings`.
void cmd_score(const fs::path& model, const fs::path& embeddings, const fs::path& scores_out);

/// Writes curve.csv, eer.json and histogram.csv into `out_dir`.
void cmd_eval(const fs::path& embeddings, std::size_t grid_size, std::size_t bins,
              const fs::path& out_dir);

/// Runs simulate (or ingests), partition, label, train, score and eval from a
/// JSON config. Relative paths inside the config resolve against the config's
/// directory; `out_dir_override` wins over the config's "out_dir".
void cmd_pipeline(const fs::path& config, const std::optional<fs::path>& out_dir_override = {});

/// Full command-line entry point. Returns an ExitCode.
int run(int argc, const char* const* argv);

}  // namespace fiqa::cli
