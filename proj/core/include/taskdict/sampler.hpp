#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "taskdict/rng.hpp"
#include "taskdict/types.hpp"

namespace taskdict {

/// Cycles over a finite dataset in randomly permuted order: within one epoch
/// every sample is yielded exactly once, and a fresh permutation is drawn
/// from the seeded generator at each epoch boundary. Single consumer; create
/// independent streams (distinct seeds) for parallel experiments.
class SampleStream {
 public:
  SampleStream(std::shared_ptr<const std::vector<Sample>> data, std::uint64_t seed);

  const Sample& next();

  std::size_t size() const { return data_->size(); }
  long epoch() const { return epoch_; }

 private:
  void reshuffle();

  std::shared_ptr<const std::vector<Sample>> data_;
  Rng rng_;
  std::vector<std::uint32_t> order_;
  std::size_t cursor_ = 0;
  long epoch_ = 0;
};

SampleStream stream(std::shared_ptr<const std::vector<Sample>> dataset, std::uint64_t seed);
SampleStream stream(std::vector<Sample> dataset, std::uint64_t seed);

/// One manifest entry: a file path and an optional label that followed it.
struct ManifestEntry {
  std::string path;
  bool has_label = false;
  int label = 0;
};

/// Plain-text dataset manifest: one path per line, optional label after
/// whitespace. Blank lines and lines starting with '#' are skipped.
/// Relative paths are resolved against the manifest's directory.
std::vector<ManifestEntry> read_manifest(const std::string& path);

}  // namespace taskdict
