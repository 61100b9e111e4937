#pragma once

#include <string>
#include <vector>

#include "taskdict/run_config.hpp"
#include "taskdict/types.hpp"

namespace taskdict {

/// Samples assembled from the config's train source, plus the unlabeled pool
/// when one is configured. For `vectors` the line layout depends on the task:
/// q target floats then the signal (regression), one +/-1 or 1..q label then
/// the signal (classification), or the bare signal (compressed sensing,
/// where y = x). For `image_patches` the manifest images are expanded by the
/// configured pairing. When task.m is 0 it is inferred and written back.
struct DatasetBundle {
  std::vector<Sample> train;
  std::vector<Sample> unlabeled;
};

DatasetBundle load_datasets(RunConfig& cfg);

/// Deterministic validation split: `fraction` of the samples (at least one
/// when fraction > 0) move to the returned validation set, selected by a
/// seeded permutation.
std::vector<Sample> split_validation(std::vector<Sample>& data, double fraction,
                                     std::uint64_t seed);

/// Signals file for encode/predict: one whitespace-separated length-m signal
/// per line.
Matrix load_signals(const std::string& path, Index expected_dim);

/// Labeled vectors file for evaluate, parsed with the task's line layout.
std::vector<Sample> load_labeled_vectors(const std::string& path, const TaskSpec& task);

}  // namespace taskdict
