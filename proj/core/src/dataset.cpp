#include "taskdict/dataset.hpp"

#include <fstream>
#include <sstream>

#include "taskdict/errors.hpp"
#include "taskdict/halftone.hpp"
#include "taskdict/image.hpp"
#include "taskdict/patches.hpp"
#include "taskdict/rng.hpp"
#include "taskdict/sampler.hpp"

namespace taskdict {

namespace {

std::vector<std::vector<double>> read_number_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::vector<double> row;
    double v;
    while (ls >> v) row.push_back(v);
    if (!ls.eof()) {
      throw DataError(path + ":" + std::to_string(lineno) + ": non-numeric token");
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(path + ": no samples");
  return rows;
}

std::vector<Sample> parse_vectors(const std::string& path, TaskSpec& task, bool labeled) {
  const auto rows = read_number_lines(path);
  const bool classification =
      task.kind == TaskKind::binary_linear || task.kind == TaskKind::binary_bilinear ||
      task.kind == TaskKind::multiclass_ova || task.kind == TaskKind::multiclass_softmax ||
      task.kind == TaskKind::multiclass_regression;
  const bool regression = task.kind == TaskKind::regression;

  std::size_t prefix = 0;
  if (labeled) {
    if (classification) prefix = 1;
    else if (regression) prefix = static_cast<std::size_t>(task.q);
  }
  const std::size_t width = rows.front().size();
  if (width <= prefix) throw DataError(path + ": lines too short for the task layout");
  const Index m = static_cast<Index>(width - prefix);
  if (task.m == 0) task.m = static_cast<int>(m);
  if (task.m != static_cast<int>(m)) {
    throw DataError(path + ": signal length " + std::to_string(m) +
                    " does not match task m = " + std::to_string(task.m));
  }

  std::vector<Sample> samples;
  samples.reserve(rows.size());
  int lineno = 0;
  for (const auto& row : rows) {
    ++lineno;
    if (row.size() != width) {
      throw DataError(path + ": inconsistent sample length at data row " +
                      std::to_string(lineno));
    }
    Sample s;
    s.x.resize(m);
    for (Index i = 0; i < m; ++i) s.x(i) = row[prefix + static_cast<std::size_t>(i)];
    if (labeled && classification) {
      s.label = static_cast<int>(row[0]);
    } else if (labeled && regression) {
      s.target.resize(static_cast<Index>(prefix));
      for (std::size_t i = 0; i < prefix; ++i) s.target(static_cast<Index>(i)) = row[i];
    } else if (labeled && task.kind == TaskKind::compressed_sensing) {
      s.target = s.x;  // noiseless: reconstruct the signal itself
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

std::vector<Sample> parse_patches(const std::string& manifest_path, TaskSpec& task,
                                  const DataConfig& data, std::uint64_t seed) {
  const auto entries = read_manifest(manifest_path);
  PatchConfig pc;
  pc.side = data.patch_side;
  pc.stride = data.patch_stride;
  pc.zero_mean = data.normalize;
  pc.unit_norm = data.normalize;

  const Index m = pc.dim();
  if (task.m == 0) task.m = static_cast<int>(m);
  if (task.m != static_cast<int>(m)) {
    throw DataError(manifest_path + ": patch length " + std::to_string(m) +
                    " does not match task m = " + std::to_string(task.m));
  }

  std::vector<Sample> samples;
  for (const auto& entry : entries) {
    const Image original = read_pgm(entry.path);
    if (data.pairing == PatchPairing::halftone) {
      const Image binary = floyd_steinberg(original);
      PatchConfig raw = pc;
      raw.zero_mean = raw.unit_norm = false;  // pairs keep their intensities
      const PatchSet xs = extract_patches(binary, raw);
      const PatchSet ys = extract_patches(original, raw);
      for (Index i = 0; i < xs.patches.cols(); ++i) {
        Sample s;
        s.x = xs.patches.col(i);
        s.target = ys.patches.col(i);
        samples.push_back(std::move(s));
      }
    } else {
      const PatchSet set = extract_patches(original, pc);
      for (Index i = 0; i < set.patches.cols(); ++i) {
        Sample s;
        s.x = set.patches.col(i);
        if (data.pairing == PatchPairing::self) {
          s.target = s.x;
        } else {
          if (!entry.has_label) {
            throw DataError(manifest_path + ": entry '" + entry.path +
                            "' needs a label for pair = label");
          }
          s.label = entry.label;
        }
        samples.push_back(std::move(s));
      }
    }
  }

  if (data.max_patches > 0 && static_cast<long>(samples.size()) > data.max_patches) {
    Rng rng(seed ^ 0x5eedu);
    std::vector<std::uint32_t> order(samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<std::uint32_t>(i);
    rng.shuffle(order);
    std::vector<Sample> kept;
    kept.reserve(static_cast<std::size_t>(data.max_patches));
    for (long i = 0; i < data.max_patches; ++i) kept.push_back(std::move(samples[order[i]]));
    samples = std::move(kept);
  }
  return samples;
}

}  // namespace

DatasetBundle load_datasets(RunConfig& cfg) {
  DatasetBundle bundle;
  if (cfg.data.format == DataFormat::vectors) {
    bundle.train = parse_vectors(cfg.data.train, cfg.task, /*labeled=*/true);
    if (!cfg.data.unlabeled.empty()) {
      bundle.unlabeled = parse_vectors(cfg.data.unlabeled, cfg.task, /*labeled=*/false);
    }
  } else {
    bundle.train = parse_patches(cfg.data.train, cfg.task, cfg.data, cfg.train.seed);
    if (!cfg.data.unlabeled.empty()) {
      DataConfig unlabeled_cfg = cfg.data;
      unlabeled_cfg.pairing = PatchPairing::self;
      bundle.unlabeled = parse_patches(cfg.data.unlabeled, cfg.task, unlabeled_cfg,
                                       cfg.train.seed + 1);
    }
  }
  return bundle;
}

std::vector<Sample> split_validation(std::vector<Sample>& data, double fraction,
                                     std::uint64_t seed) {
  std::vector<Sample> validation;
  if (fraction <= 0.0 || data.empty()) return validation;
  std::size_t count = static_cast<std::size_t>(fraction * static_cast<double>(data.size()));
  count = std::max<std::size_t>(count, 1);
  if (count >= data.size()) throw DataError("validation split would consume the whole dataset");

  Rng rng(seed ^ 0xa11da7a5u);
  std::vector<std::uint32_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<std::uint32_t>(i);
  rng.shuffle(order);

  std::vector<char> is_val(data.size(), 0);
  for (std::size_t i = 0; i < count; ++i) is_val[order[i]] = 1;
  std::vector<Sample> train;
  train.reserve(data.size() - count);
  validation.reserve(count);
  for (std::size_t i = 0; i < data.size(); ++i) {
    (is_val[i] ? validation : train).push_back(std::move(data[i]));
  }
  data = std::move(train);
  return validation;
}

Matrix load_signals(const std::string& path, Index expected_dim) {
  const auto rows = read_number_lines(path);
  const Index m = static_cast<Index>(rows.front().size());
  if (expected_dim > 0 && m != expected_dim) {
    throw DataError(path + ": signal length " + std::to_string(m) +
                    " does not match the model's m = " + std::to_string(expected_dim));
  }
  Matrix X(m, static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (static_cast<Index>(rows[i].size()) != m) {
      throw DataError(path + ": inconsistent signal length at data row " + std::to_string(i + 1));
    }
    for (Index j = 0; j < m; ++j) X(j, static_cast<Index>(i)) = rows[i][static_cast<std::size_t>(j)];
  }
  return X;
}

std::vector<Sample> load_labeled_vectors(const std::string& path, const TaskSpec& task) {
  TaskSpec copy = task;
  return parse_vectors(path, copy, /*labeled=*/true);
}

}  // namespace taskdict
