#include "taskdict/model_io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "taskdict/errors.hpp"

namespace taskdict {

namespace {

constexpr int kFormatVersion = 1;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void append_matrix(std::string& out, const Matrix& m) {
  const std::size_t bytes = static_cast<std::size_t>(m.size()) * sizeof(double);
  const std::size_t offset = out.size();
  out.resize(offset + bytes);
  std::memcpy(out.data() + offset, m.data(), bytes);  // column-major, little-endian
}

Matrix read_matrix(const std::string& bytes, std::size_t& offset, Index rows, Index cols,
                   const std::string& path) {
  const std::size_t need = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) *
                           sizeof(double);
  if (offset + need > bytes.size()) {
    throw DataError(path + ": payload shorter than the header dims require");
  }
  Matrix m(rows, cols);
  std::memcpy(m.data(), bytes.data() + offset, need);
  offset += need;
  return m;
}

std::pair<Index, Index> w_shape(const TaskSpec& spec) {
  return loss_w_shape(spec.loss(), spec.p, spec.m);
}

}  // namespace

void save_model(const TaskModel& model, const std::string& path) {
  const TaskSpec& spec = model.spec;
  spec.validate();
  if (model.models.size() != static_cast<std::size_t>(spec.model_count())) {
    throw std::invalid_argument("save_model: expected " + std::to_string(spec.model_count()) +
                                " models, got " + std::to_string(model.models.size()));
  }
  const TrainedModel& first = model.models.front();

  std::ostringstream header;
  header << "format = " << kFormatVersion << "\n";
  header << "task = " << task_kind_name(spec.kind) << "\n";
  header << "m = " << spec.m << "\n";
  header << "p = " << spec.p << "\n";
  header << "q = " << spec.q << "\n";
  header << "r = " << spec.r << "\n";
  header << "count = " << spec.model_count() << "\n";
  header << "lambda1 = " << format_double(first.config.lambda1) << "\n";
  header << "lambda2 = " << format_double(first.config.lambda2) << "\n";
  header << "loss = " << loss_kind_name(spec.loss().kind) << "\n";
  header << "has_z = " << (spec.has_transform() ? 1 : 0) << "\n";
  const std::string header_text = header.str();

  std::string payload;
  const auto [wr, wc] = w_shape(spec);
  for (const TrainedModel& tm : model.models) {
    if (tm.dict.signal_dim() != spec.encoder_dim() || tm.dict.atom_count() != spec.p) {
      throw std::invalid_argument("save_model: dictionary shape does not match the task spec");
    }
    if (tm.w.rows() != wr || tm.w.cols() != wc) {
      throw std::invalid_argument("save_model: W shape does not match the task spec");
    }
    if (spec.has_transform() != tm.z.has_value()) {
      throw std::invalid_argument("save_model: transform presence does not match the task spec");
    }
    append_matrix(payload, tm.dict.atoms);
    append_matrix(payload, tm.w);
    if (tm.z) {
      if (tm.z->rows() != spec.r || tm.z->cols() != spec.m) {
        throw std::invalid_argument("save_model: Z shape does not match the task spec");
      }
      append_matrix(payload, *tm.z);
    }
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file: " + path);
  std::uint64_t len = header_text.size();
  unsigned char len_bytes[8];
  for (int i = 0; i < 8; ++i) len_bytes[i] = static_cast<unsigned char>((len >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(len_bytes), 8);
  out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw DataError("failed writing model file: " + path);
}

TaskModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string bytes = buffer.str();
  if (bytes.size() < 8) throw DataError(path + ": truncated model file");

  std::uint64_t len = 0;
  for (int i = 0; i < 8; ++i) {
    len |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i])) << (8 * i);
  }
  if (8 + len > bytes.size()) throw DataError(path + ": header length exceeds file size");
  const std::string header_text = bytes.substr(8, len);

  std::map<std::string, std::string> kv;
  std::istringstream hs(header_text);
  std::string line;
  while (std::getline(hs, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    const auto trim = [](std::string& s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
    };
    trim(key);
    trim(value);
    kv[key] = value;
  }
  const auto require = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw DataError(path + ": model header missing '" + key + "'");
    return it->second;
  };

  if (std::stoi(require("format")) != kFormatVersion) {
    throw DataError(path + ": unsupported model format version");
  }
  TaskSpec spec;
  spec.kind = task_kind_from_name(require("task"));
  spec.m = std::stoi(require("m"));
  spec.p = std::stoi(require("p"));
  spec.q = std::stoi(require("q"));
  spec.r = std::stoi(require("r"));
  spec.validate();
  const int count = std::stoi(require("count"));
  if (count != spec.model_count()) {
    throw DataError(path + ": model count does not match the task kind");
  }
  const double lambda1 = std::stod(require("lambda1"));
  const double lambda2 = std::stod(require("lambda2"));
  if (loss_kind_from_name(require("loss")) != spec.loss().kind) {
    throw DataError(path + ": loss kind does not match the task kind");
  }
  const bool has_z = std::stoi(require("has_z")) != 0;
  if (has_z != spec.has_transform()) {
    throw DataError(path + ": has_z flag does not match the task kind");
  }

  TaskModel model;
  model.spec = spec;
  const auto [wr, wc] = w_shape(spec);
  std::size_t offset = 8 + len;
  for (int k = 0; k < count; ++k) {
    TrainedModel tm;
    tm.dict.atoms = read_matrix(bytes, offset, spec.encoder_dim(), spec.p, path);
    tm.w = read_matrix(bytes, offset, wr, wc, path);
    if (has_z) tm.z = read_matrix(bytes, offset, spec.r, spec.m, path);
    tm.loss = spec.loss();
    tm.config.lambda1 = lambda1;
    tm.config.lambda2 = lambda2;
    model.models.push_back(std::move(tm));
  }
  if (offset != bytes.size()) {
    throw DataError(path + ": payload longer than the header dims require");
  }
  return model;
}

std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file for hashing: " + path);
  std::uint64_t h = 1469598103934665603ull;
  char chunk[4096];
  while (in.read(chunk, sizeof(chunk)) || in.gcount() > 0) {
    const std::streamsize n = in.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(chunk[i]);
      h *= 1099511628211ull;
    }
    if (!in) break;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace taskdict
