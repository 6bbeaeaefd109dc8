#include "sabal/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "sabal/error.hpp"

namespace sabal::io {

using nlohmann::json;

namespace {

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line_of_offset(text, e.byte)) +
                                           ": malformed document (" + e.what() + ")");
  }
}

// Strict view of one JSON object: typed accessors, and finish() rejects keys
// nobody asked for.
class Fields {
 public:
  Fields(const json& obj, std::string_view text, std::string prefix, std::size_t origin = 0)
      : obj_(obj), text_(text), prefix_(std::move(prefix)), origin_(origin) {
    if (!obj_.is_object())
      fail_at(origin_, prefix_.empty() ? "document" : prefix_, "expected an object");
  }

  bool has(const std::string& key) const { return obj_.contains(key); }

  std::uint64_t uint(const std::string& key) {
    const json& j = get(key);
    if (!j.is_number_unsigned()) fail(key, "expected a nonnegative integer");
    return j.get<std::uint64_t>();
  }
  std::uint64_t uint_or(const std::string& key, std::uint64_t fallback) {
    return has(key) ? uint(key) : (seen_.insert(key), fallback);
  }
  double real(const std::string& key) {
    const json& j = get(key);
    if (!j.is_number()) fail(key, "expected a number");
    return j.get<double>();
  }
  double real_or(const std::string& key, double fallback) {
    return has(key) ? real(key) : (seen_.insert(key), fallback);
  }
  bool boolean_or(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& j = get(key);
    if (!j.is_boolean()) fail(key, "expected true or false");
    return j.get<bool>();
  }
  std::string string(const std::string& key) {
    const json& j = get(key);
    if (!j.is_string()) fail(key, "expected a string");
    return j.get<std::string>();
  }
  std::vector<double> reals(const std::string& key) {
    const json& j = get(key);
    if (!j.is_array()) fail(key, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& x : j) {
      if (!x.is_number()) fail(key, "expected an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }
  std::vector<std::uint64_t> uints(const std::string& key) {
    const json& j = get(key);
    if (!j.is_array()) fail(key, "expected an array of nonnegative integers");
    std::vector<std::uint64_t> out;
    for (const auto& x : j) {
      if (!x.is_number_unsigned()) fail(key, "expected an array of nonnegative integers");
      out.push_back(x.get<std::uint64_t>());
    }
    return out;
  }
  std::vector<std::string> strings(const std::string& key) {
    const json& j = get(key);
    if (!j.is_array()) fail(key, "expected an array of strings");
    std::vector<std::string> out;
    for (const auto& x : j) {
      if (!x.is_string()) fail(key, "expected an array of strings");
      out.push_back(x.get<std::string>());
    }
    return out;
  }
  Fields object(const std::string& key) {
    const json& j = get(key);
    if (!j.is_object()) fail(key, "expected an object");
    return Fields(j, text_, qualified(key), locate(key));
  }

  void finish() const {
    for (const auto& item : obj_.items())
      if (!seen_.count(item.key())) fail(item.key(), "unknown key");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what,
                         ErrorCode code = ErrorCode::ParseError) const {
    fail_at(locate(key), qualified(key), what, code);
  }

 private:
  const json& get(const std::string& key) {
    seen_.insert(key);
    if (!obj_.contains(key)) fail_at(origin_, qualified(key), "missing required key");
    return obj_.at(key);
  }
  // First occurrence of the quoted key at or after this object's own key.
  std::size_t locate(const std::string& key) const {
    const auto pos = text_.find("\"" + key + "\"", origin_);
    return pos == std::string_view::npos ? origin_ : pos;
  }
  std::string qualified(const std::string& key) const {
    return prefix_.empty() ? key : prefix_ + "." + key;
  }
  [[noreturn]] void fail_at(std::size_t offset, const std::string& key, const std::string& what,
                            ErrorCode code = ErrorCode::ParseError) const {
    throw Error(code, "line " + std::to_string(line_of_offset(text_, offset)) + ": key '" + key +
                          "': " + what);
  }

  const json& obj_;
  std::string_view text_;
  std::string prefix_;
  std::size_t origin_ = 0;
  std::set<std::string> seen_;
};

void append_reals(std::string& out, std::span<const double> xs) {
  out += '[';
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += format_real(xs[i]);
  }
  out += ']';
}

void append_indices(std::string& out, std::span<const std::size_t> xs) {
  out += '[';
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(xs[i]);
  }
  out += ']';
}

std::string quoted(std::string_view s) { return json(std::string(s)).dump(); }

}  // namespace

std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::ConfigInvalid, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

// ---------------------------------------------------------------------------
// Problem / result documents

SparseApproxProblem parse_problem(std::string_view text) {
  const json doc = parse_json(text);
  Fields f(doc, text, "");
  const auto m = f.uint("m");
  const auto n = f.uint("n");
  const auto b = f.uint("b");
  if (m < 1) f.fail("m", "must be >= 1");
  if (n < 1) f.fail("n", "must be >= 1");
  if (b < 1) f.fail("b", "must be >= 1");

  SparseApproxProblem p;
  p.b = b;
  p.alpha = f.real("alpha");
  p.beta = f.real("beta");
  if (p.alpha < 0.0) f.fail("alpha", "must be >= 0");
  if (p.beta < 0.0) f.fail("beta", "must be >= 0");
  p.v = f.reals("v");
  if (p.v.size() != m)
    f.fail("v", "expected " + std::to_string(m) + " values (m), got " + std::to_string(p.v.size()));
  auto phi = f.reals("phi");
  if (phi.size() != m * n)
    f.fail("phi", "expected " + std::to_string(m * n) + " values (m*n), got " +
                      std::to_string(phi.size()));
  p.phi = Matrix(m, n, std::move(phi));
  p.sigma2 = f.reals("sigma2");
  if (p.sigma2.size() != n)
    f.fail("sigma2",
           "expected " + std::to_string(n) + " values (n), got " + std::to_string(p.sigma2.size()));
  for (double s : p.sigma2)
    if (!(s >= 0.0)) f.fail("sigma2", "entries must be >= 0");
  f.finish();
  return p;
}

std::string serialize_problem(const SparseApproxProblem& p) {
  std::string out = "{\n";
  out += "  \"m\": " + std::to_string(p.m()) + ",\n";
  out += "  \"n\": " + std::to_string(p.n()) + ",\n";
  out += "  \"b\": " + std::to_string(p.b) + ",\n";
  out += "  \"alpha\": " + format_real(p.alpha) + ",\n";
  out += "  \"beta\": " + format_real(p.beta) + ",\n";
  out += "  \"v\": ";
  append_reals(out, p.v);
  out += ",\n  \"phi\": ";
  append_reals(out, p.phi.storage());
  out += ",\n  \"sigma2\": ";
  append_reals(out, p.sigma2);
  out += "\n}\n";
  return out;
}

std::string serialize_result(const SolveResult& r, std::string_view solver) {
  std::string out = "{\n";
  out += "  \"solver\": " + quoted(solver) + ",\n";
  out += "  \"n\": " + std::to_string(r.w.size()) + ",\n";
  out += "  \"w\": ";
  append_reals(out, r.w.values());
  out += ",\n  \"support\": ";
  append_indices(out, r.w.support());
  out += ",\n  \"selected\": ";
  append_indices(out, r.selected);
  out += ",\n  \"objective\": " + format_real(r.objective) + ",\n";
  out += "  \"support_value\": " + format_real(r.support_value) + ",\n";
  out += "  \"trace\": [";
  for (std::size_t i = 0; i < r.trace.size(); ++i) {
    if (i) out += ", ";
    out += "[" + std::to_string(r.trace[i].iteration) + ", " + format_real(r.trace[i].objective) + "]";
  }
  out += "]\n}\n";
  return out;
}

// ---------------------------------------------------------------------------
// Dataset CSV

std::string serialize_dataset_csv(const Dataset& data) {
  std::string out = "label";
  for (std::size_t d = 0; d < data.dim(); ++d) out += ",f" + std::to_string(d + 1);
  out += '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    out += std::to_string(data.labels[i]);
    for (double x : data.features.col(i)) out += "," + format_real(x);
    out += '\n';
  }
  return out;
}

Dataset parse_dataset_csv(std::string_view text, std::size_t num_classes) {
  auto fail = [](std::size_t line, const std::string& what) -> void {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
  };
  std::vector<std::string_view> lines;
  for (std::size_t pos = 0; pos < text.size();) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = end + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) fail(1, "missing header 'label,f1,...'");

  auto split = [](std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t pos = 0;
    while (true) {
      auto comma = line.find(',', pos);
      cells.push_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    return cells;
  };

  const auto header = split(lines[0]);
  if (header.size() < 2 || header[0] != "label") fail(1, "header must be 'label,f1,...,fD'");
  for (std::size_t d = 1; d < header.size(); ++d)
    if (header[d] != "f" + std::to_string(d))
      fail(1, "header column " + std::to_string(d + 1) + " must be 'f" + std::to_string(d) + "'");
  const std::size_t dim = header.size() - 1;

  std::vector<double> features;
  std::vector<std::size_t> labels;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto cells = split(lines[li]);
    if (cells.size() != dim + 1)
      fail(li + 1, "expected " + std::to_string(dim + 1) + " fields, got " + std::to_string(cells.size()));
    std::size_t label = 0;
    auto [lp, lec] = std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), label);
    if (lec != std::errc() || lp != cells[0].data() + cells[0].size())
      fail(li + 1, "field 'label' is not a nonnegative integer");
    labels.push_back(label);
    for (std::size_t d = 0; d < dim; ++d) {
      const auto cell = cells[d + 1];
      double x = 0.0;
      auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), x);
      if (ec != std::errc() || p != cell.data() + cell.size() || !std::isfinite(x))
        fail(li + 1, "field 'f" + std::to_string(d + 1) + "' is not a finite number");
      features.push_back(x);
    }
  }

  if (labels.empty()) fail(1, "no samples after the header");

  Dataset data;
  std::size_t max_label = 0;
  for (auto y : labels) max_label = std::max(max_label, y);
  data.num_classes = num_classes != 0 ? num_classes : max_label + 1;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] >= data.num_classes)
      fail(i + 2, "label " + std::to_string(labels[i]) + " exceeds class count");
  data.labels = std::move(labels);
  data.features = Matrix(dim, data.labels.size(), std::move(features));
  return data;
}

// ---------------------------------------------------------------------------
// Run and bench configs

namespace {

Strategy strategy_or_fail(Fields& f, const std::string& key, const std::string& name) {
  auto s = parse_strategy(name);
  if (!s) f.fail(key, "unknown strategy '" + name + "'");
  return *s;
}

BlobSpec parse_blobs(Fields& f) {
  BlobSpec spec;
  spec.classes = f.uint("classes");
  spec.points = f.uint("points");
  spec.radius = f.real("radius");
  spec.noise = f.real("noise");
  spec.seed = f.uint("seed");
  try {
    spec.validate();
  } catch (const Error& e) {
    f.fail("classes", e.what(), ErrorCode::ConfigInvalid);
  }
  return spec;
}

}  // namespace

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir) {
  const json doc = parse_json(text);
  Fields f(doc, text, "");
  RunConfig cfg;
  ALConfig& base = cfg.base;

  {
    Fields ds = f.object("dataset");
    const auto kind = ds.string("kind");
    if (kind == "blobs") {
      cfg.dataset.kind = DatasetSource::Kind::Blobs;
      cfg.dataset.blobs = parse_blobs(ds);
    } else if (kind == "csv") {
      cfg.dataset.kind = DatasetSource::Kind::Csv;
      cfg.dataset.csv_path = base_dir / ds.string("path");
      cfg.dataset.split_seed = ds.uint("split_seed");
      cfg.dataset.classes = ds.uint_or("classes", 0);
    } else {
      ds.fail("kind", "expected 'blobs' or 'csv'");
    }
    ds.finish();
  }

  for (const auto& name : f.strings("strategies"))
    cfg.strategies.push_back(strategy_or_fail(f, "strategies", name));
  if (cfg.strategies.empty()) f.fail("strategies", "must list at least one strategy", ErrorCode::ConfigInvalid);
  {
    const auto mode_name = f.string("embedding_mode");
    const auto mode = parse_embedding_mode(mode_name);
    if (!mode) f.fail("embedding_mode", "expected 'gradient' or 'posterior_sample'");
    base.embedding_mode = *mode;
  }
  base.seed_size = f.uint("seed_size");
  base.batch_size = f.uint("batch_size");
  base.rounds = f.uint("rounds");
  base.alpha = f.real("alpha");
  base.beta = f.real("beta");
  base.solver.tau = f.real_or("tau", 1.0);
  base.solver.iht_iterations = f.uint_or("iht_iterations", 100);
  base.solver.prox =
      f.boolean_or("paper_literal_prox", false) ? ProxRule::PaperLiteral : ProxRule::Corrected;
  base.ensemble_size = f.uint_or("ensemble_size", 5);
  base.include_seed_row = f.boolean_or("include_seed_row", false);

  {
    Fields fs = f.object("features");
    const auto kind = fs.string("kind");
    if (kind == "identity") {
      base.features.kind = FeatureKind::Identity;
    } else if (kind == "tanh_lift") {
      base.features.kind = FeatureKind::TanhLift;
      base.features.width = fs.uint("width");
      base.features.seed = fs.uint("seed");
      base.features.scale = fs.real_or("scale", 1.0);
    } else {
      fs.fail("kind", "expected 'identity' or 'tanh_lift'");
    }
    fs.finish();
  }
  {
    Fields tr = f.object("train");
    base.train.epochs = tr.uint("epochs");
    base.train.learning_rate = tr.real("learning_rate");
    base.train.weight_decay = tr.real("weight_decay");
    base.train.seed = tr.uint("seed");
    tr.finish();
  }
  cfg.seeds = f.uints("seeds");
  if (cfg.seeds.empty()) f.fail("seeds", "must list at least one seed", ErrorCode::ConfigInvalid);
  cfg.output = base_dir / f.string("output");
  f.finish();

  try {
    base.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigInvalid, e.what());
  }
  return cfg;
}

BenchConfig parse_bench_config(std::string_view text) {
  const json doc = parse_json(text);
  Fields f(doc, text, "");
  BenchConfig cfg;
  cfg.m = f.uint("m");
  for (auto n : f.uints("pool_sizes")) cfg.pool_sizes.push_back(n);
  for (auto b : f.uints("batch_sizes")) cfg.batch_sizes.push_back(b);
  for (const auto& name : f.strings("strategies"))
    cfg.strategies.push_back(strategy_or_fail(f, "strategies", name));
  cfg.repetitions = f.uint_or("repetitions", 5);
  cfg.alpha = f.real("alpha");
  cfg.beta = f.real("beta");
  cfg.solver.tau = f.real_or("tau", 1.0);
  cfg.solver.iht_iterations = f.uint_or("iht_iterations", 100);
  cfg.solver.prox =
      f.boolean_or("paper_literal_prox", false) ? ProxRule::PaperLiteral : ProxRule::Corrected;
  cfg.seed = f.uint("seed");
  f.finish();
  cfg.validate();
  return cfg;
}

SplitDataset load_dataset(const DatasetSource& source) {
  if (source.kind == DatasetSource::Kind::Blobs) return make_blobs(source.blobs);
  const std::string text = read_file(source.csv_path);
  try {
    return split_dataset(parse_dataset_csv(text, source.classes), source.split_seed);
  } catch (const Error& e) {
    throw Error(e.code(), source.csv_path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Outputs

std::string curve_rows(const ALRun& run, Strategy strategy, std::uint64_t seed) {
  std::string out;
  for (const auto& r : run.records) {
    out += std::to_string(r.round) + "," + std::to_string(r.labeled_count) + "," +
           format_real(r.test_accuracy) + "," + format_real(r.acquisition_seconds) + "," +
           strategy_name(strategy) + "," + std::to_string(seed) + "\n";
  }
  return out;
}

std::string serialize_summary(const std::vector<ArmSummary>& arms, const RunConfig& config) {
  std::string out = "{\n";
  out += "  \"auc_convention\": \"100 x mean test accuracy over rounds\",\n";
  out += "  \"seed_size\": " + std::to_string(config.base.seed_size) + ",\n";
  out += "  \"batch_size\": " + std::to_string(config.base.batch_size) + ",\n";
  out += "  \"rounds\": " + std::to_string(config.base.rounds) + ",\n";
  out += "  \"embedding_mode\": " + quoted(embedding_mode_name(config.base.embedding_mode)) + ",\n";
  out += "  \"arms\": [";
  for (std::size_t i = 0; i < arms.size(); ++i) {
    out += i ? ",\n    " : "\n    ";
    out += "{\"method\": " + quoted(strategy_name(arms[i].strategy)) +
           ", \"seed\": " + std::to_string(arms[i].seed) + ", \"auc\": " + format_real(arms[i].auc) +
           ", \"final_accuracy\": " + format_real(arms[i].final_accuracy) + "}";
  }
  out += "\n  ],\n  \"mean_auc\": {";
  bool first = true;
  for (Strategy s : config.strategies) {
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& a : arms)
      if (a.strategy == s) {
        total += a.auc;
        ++count;
      }
    if (count == 0) continue;
    out += first ? "\n    " : ",\n    ";
    first = false;
    out += quoted(strategy_name(s)) + ": " + format_real(total / static_cast<double>(count));
  }
  out += "\n  }\n}\n";
  return out;
}

std::string serialize_bench(const std::vector<BenchRow>& rows) {
  std::string out = "strategy,n,b,median_seconds,repetitions\n";
  for (const auto& r : rows)
    out += std::string(strategy_name(r.strategy)) + "," + std::to_string(r.n) + "," +
           std::to_string(r.b) + "," + format_real(r.median_seconds) + "," +
           std::to_string(r.repetitions) + "\n";
  return out;
}

}  // namespace sabal::io
