#pragma once

#include <string>

#include "taskdict/tasks.hpp"

namespace taskdict {

/// Model file layout: an 8-byte little-endian header length, a plain-text
/// key=value header (format version, task kind, dims m/p/q/r, model count,
/// lambda1/lambda2, loss kind, has_z flag), then the dense payloads as raw
/// little-endian 64-bit floats in column-major order, one block per model:
/// D, W, and Z when present. Header dims determine every payload size, and
/// save(load(file)) reproduces the file byte for byte.
void save_model(const TaskModel& model, const std::string& path);
TaskModel load_model(const std::string& path);

/// FNV-1a 64-bit hash of the file bytes, as fixed-width hex.
std::string file_hash(const std::string& path);

}  // namespace taskdict
