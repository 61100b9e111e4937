#include "taskdict/run_config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "taskdict/errors.hpp"

namespace taskdict {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

std::vector<double> parse_double_list(const std::string& value, const std::string& where) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError(where + ": cannot parse number '" + item + "'");
    }
  }
  return out;
}

class Parser {
 public:
  Parser(const std::string& text, const std::string& origin) : origin_(origin) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::string section;
    while (std::getline(in, line)) {
      ++lineno;
      const std::string t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      if (t.front() == '[') {
        if (t.back() != ']') fail(lineno, "unterminated section header");
        section = trim(t.substr(1, t.size() - 2));
        continue;
      }
      const auto eq = t.find('=');
      if (eq == std::string::npos) fail(lineno, "expected 'key = value'");
      const std::string key = trim(t.substr(0, eq));
      const std::string value = trim(t.substr(eq + 1));
      if (key.empty()) fail(lineno, "empty key");
      if (section.empty()) fail(lineno, "key outside any [section]");
      entries_.push_back({section, key, value, lineno});
    }
  }

  [[noreturn]] void fail(int lineno, const std::string& msg) const {
    throw ConfigError(origin_ + ":" + std::to_string(lineno) + ": " + msg);
  }

  struct Entry {
    std::string section, key, value;
    int lineno;
  };

  const std::vector<Entry>& entries() const { return entries_; }
  const std::string& origin() const { return origin_; }

 private:
  std::string origin_;
  std::vector<Entry> entries_;
};

double to_double(const Parser& p, const Parser::Entry& e) {
  try {
    return std::stod(e.value);
  } catch (const std::exception&) {
    p.fail(e.lineno, "cannot parse number '" + e.value + "' for key '" + e.key + "'");
  }
}

long to_long(const Parser& p, const Parser::Entry& e) {
  try {
    return std::stol(e.value);
  } catch (const std::exception&) {
    p.fail(e.lineno, "cannot parse integer '" + e.value + "' for key '" + e.key + "'");
  }
}

bool to_bool(const Parser& p, const Parser::Entry& e) {
  if (e.value == "1" || e.value == "true" || e.value == "yes") return true;
  if (e.value == "0" || e.value == "false" || e.value == "no") return false;
  p.fail(e.lineno, "cannot parse flag '" + e.value + "' for key '" + e.key + "'");
}

}  // namespace

RunConfig RunConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  RunConfig cfg = parse_text(buffer.str(), path);

  // Relative data paths resolve against the config file's directory.
  const auto base = std::filesystem::path(path).parent_path();
  const auto resolve = [&](std::string& p) {
    if (p.empty()) return;
    std::filesystem::path fp(p);
    if (fp.is_relative()) p = (base / fp).string();
  };
  resolve(cfg.data.train);
  resolve(cfg.data.unlabeled);
  resolve(cfg.output.model);
  resolve(cfg.output.telemetry);

  for (const std::string* required : {&cfg.data.train, &cfg.data.unlabeled}) {
    if (!required->empty() && !std::filesystem::exists(*required)) {
      throw ConfigError(path + ": referenced path does not exist: " + *required);
    }
  }
  return cfg;
}

RunConfig RunConfig::parse_text(const std::string& text, const std::string& origin) {
  Parser parser(text, origin);
  RunConfig cfg;
  bool have_task_kind = false;

  for (const auto& e : parser.entries()) {
    if (e.section == "task") {
      if (e.key == "kind") {
        try {
          cfg.task.kind = task_kind_from_name(e.value);
        } catch (const std::exception& ex) {
          parser.fail(e.lineno, ex.what());
        }
        have_task_kind = true;
      } else if (e.key == "m") cfg.task.m = static_cast<int>(to_long(parser, e));
      else if (e.key == "p") cfg.task.p = static_cast<int>(to_long(parser, e));
      else if (e.key == "q") cfg.task.q = static_cast<int>(to_long(parser, e));
      else if (e.key == "r") cfg.task.r = static_cast<int>(to_long(parser, e));
      else parser.fail(e.lineno, "unknown key '" + e.key + "' in [task]");
    } else if (e.section == "data") {
      if (e.key == "format") {
        if (e.value == "vectors") cfg.data.format = DataFormat::vectors;
        else if (e.value == "image_patches") cfg.data.format = DataFormat::image_patches;
        else parser.fail(e.lineno, "unknown data format '" + e.value + "'");
      } else if (e.key == "train") cfg.data.train = e.value;
      else if (e.key == "unlabeled") cfg.data.unlabeled = e.value;
      else if (e.key == "val_fraction") cfg.data.val_fraction = to_double(parser, e);
      else if (e.key == "patch_side") cfg.data.patch_side = static_cast<int>(to_long(parser, e));
      else if (e.key == "patch_stride") cfg.data.patch_stride = static_cast<int>(to_long(parser, e));
      else if (e.key == "normalize") cfg.data.normalize = to_bool(parser, e);
      else if (e.key == "max_patches") cfg.data.max_patches = to_long(parser, e);
      else if (e.key == "pair") {
        if (e.value == "self") cfg.data.pairing = PatchPairing::self;
        else if (e.value == "halftone") cfg.data.pairing = PatchPairing::halftone;
        else if (e.value == "label") cfg.data.pairing = PatchPairing::label;
        else parser.fail(e.lineno, "unknown patch pairing '" + e.value + "'");
      } else parser.fail(e.lineno, "unknown key '" + e.key + "' in [data]");
    } else if (e.section == "train") {
      if (e.key == "lambda1") cfg.train.lambda1 = to_double(parser, e);
      else if (e.key == "lambda2") cfg.train.lambda2 = to_double(parser, e);
      else if (e.key == "nu_w") cfg.train.nu_w = to_double(parser, e);
      else if (e.key == "nu_z") cfg.train.nu_z = to_double(parser, e);
      else if (e.key == "rho") cfg.train.rho = to_double(parser, e);
      else if (e.key == "t0") cfg.train.t0 = to_long(parser, e);
      else if (e.key == "iterations") cfg.train.iterations = to_long(parser, e);
      else if (e.key == "batch") cfg.train.batch = static_cast<int>(to_long(parser, e));
      else if (e.key == "mu") cfg.train.mu = to_double(parser, e);
      else if (e.key == "mu_schedule") cfg.mu_schedule = parse_double_list(e.value, parser.origin());
      else if (e.key == "seed") cfg.train.seed = static_cast<std::uint64_t>(to_long(parser, e));
      else if (e.key == "threads") cfg.train.threads = static_cast<int>(to_long(parser, e));
      else if (e.key == "w_radius") cfg.train.w_radius = to_double(parser, e);
      else if (e.key == "max_active") cfg.train.max_active = static_cast<int>(to_long(parser, e));
      else if (e.key == "init_passes") cfg.init_passes = static_cast<int>(to_long(parser, e));
      else if (e.key == "init_rho") cfg.init_rho = to_double(parser, e);
      else parser.fail(e.lineno, "unknown key '" + e.key + "' in [train]");
    } else if (e.section == "search") {
      if (e.key == "lambda1_grid") cfg.search.lambda1_grid = parse_double_list(e.value, parser.origin());
      else if (e.key == "rho_grid") cfg.search.rho_grid = parse_double_list(e.value, parser.origin());
      else if (e.key == "iterations") cfg.search.iterations = to_long(parser, e);
      else parser.fail(e.lineno, "unknown key '" + e.key + "' in [search]");
    } else if (e.section == "output") {
      if (e.key == "model") cfg.output.model = e.value;
      else if (e.key == "telemetry") cfg.output.telemetry = e.value;
      else parser.fail(e.lineno, "unknown key '" + e.key + "' in [output]");
    } else {
      parser.fail(e.lineno, "unknown section [" + e.section + "]");
    }
  }

  if (!have_task_kind) throw ConfigError(origin + ": missing [task] kind");
  if (cfg.data.train.empty()) throw ConfigError(origin + ": missing [data] train");
  if (cfg.data.val_fraction < 0.0 || cfg.data.val_fraction >= 1.0) {
    throw ConfigError(origin + ": val_fraction must be in [0, 1)");
  }
  for (std::size_t i = 1; i < cfg.mu_schedule.size(); ++i) {
    if (cfg.mu_schedule[i] > cfg.mu_schedule[i - 1]) {
      throw ConfigError(origin + ": mu_schedule must be descending");
    }
  }
  return cfg;
}

}  // namespace taskdict
