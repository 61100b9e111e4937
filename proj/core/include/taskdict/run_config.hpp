#pragma once

#include <optional>
#include <string>
#include <vector>

#include "taskdict/tasks.hpp"
#include "taskdict/trainer.hpp"

namespace taskdict {

/// How (y, x) pairs are assembled from the referenced files.
enum class DataFormat {
  vectors,         // text file, one sample per line
  image_patches,   // PGM manifest + sliding-window patches
};

enum class PatchPairing {
  self,      // y = x (compressed sensing style)
  halftone,  // x = halftoned patch, y = original patch
  label,     // patches labeled by their source image
};

struct DataConfig {
  DataFormat format = DataFormat::vectors;
  std::string train;           // vectors file or manifest, task samples
  std::string unlabeled;       // optional second source for mu > 0
  double val_fraction = 0.0;   // held out from train for validation scoring

  // image_patches options
  int patch_side = 8;
  int patch_stride = 1;
  bool normalize = false;  // zero-mean + unit-norm per patch
  PatchPairing pairing = PatchPairing::self;
  long max_patches = 0;    // 0 = keep all; otherwise seeded subsample
};

struct SearchConfig {
  std::vector<double> lambda1_grid;
  std::vector<double> rho_grid;
  long iterations = 500;  // short-run budget per grid point
};

struct OutputConfig {
  std::string model;
  std::string telemetry;
};

/// Parsed [task]/[data]/[train]/[search]/[output] configuration file:
/// flat key = value lines under bracketed section headers, '#' comments.
struct RunConfig {
  TaskSpec task;
  DataConfig data;
  TrainConfig train;
  SearchConfig search;
  OutputConfig output;
  int init_passes = 2;
  double init_rho = 0.5;
  std::vector<double> mu_schedule;  // optional continuation stages, descending

  /// Throws ConfigError (with line numbers) on parse problems; verifies that
  /// every referenced input path exists.
  static RunConfig parse_file(const std::string& path);
  static RunConfig parse_text(const std::string& text, const std::string& origin);
};

}  // namespace taskdict
