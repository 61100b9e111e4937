#include "taskdict/sampler.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "taskdict/errors.hpp"

namespace taskdict {

SampleStream::SampleStream(std::shared_ptr<const std::vector<Sample>> data, std::uint64_t seed)
    : data_(std::move(data)), rng_(seed) {
  if (!data_ || data_->empty()) throw DataError("sample stream: empty dataset");
  order_.resize(data_->size());
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<std::uint32_t>(i);
  rng_.shuffle(order_);
}

const Sample& SampleStream::next() {
  if (cursor_ == order_.size()) reshuffle();
  return (*data_)[order_[cursor_++]];
}

void SampleStream::reshuffle() {
  rng_.shuffle(order_);
  cursor_ = 0;
  ++epoch_;
}

SampleStream stream(std::shared_ptr<const std::vector<Sample>> dataset, std::uint64_t seed) {
  return SampleStream(std::move(dataset), seed);
}

SampleStream stream(std::vector<Sample> dataset, std::uint64_t seed) {
  return SampleStream(std::make_shared<const std::vector<Sample>>(std::move(dataset)), seed);
}

std::vector<ManifestEntry> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest: " + path);
  const auto base = std::filesystem::path(path).parent_path();

  std::vector<ManifestEntry> entries;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    ManifestEntry e;
    if (!(ls >> e.path)) continue;      // blank line
    if (e.path[0] == '#') continue;     // comment
    if (ls >> e.label) e.has_label = true;
    std::filesystem::path p(e.path);
    if (p.is_relative()) e.path = (base / p).string();
    entries.push_back(std::move(e));
  }
  if (entries.empty()) throw DataError("manifest has no entries: " + path);
  return entries;
}

}  // namespace taskdict
