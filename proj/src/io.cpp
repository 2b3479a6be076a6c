#include "mfsp/io.hpp"

#include "mfsp/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace mfsp::io {

using nlohmann::json;

namespace {

template <class T>
void put_le(std::string& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get_le(std::string_view bytes, std::size_t offset) {
  unsigned char raw[sizeof(T)];
  std::memcpy(raw, bytes.data() + offset, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
  T value;
  std::memcpy(&value, raw, sizeof(T));
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw InvalidInput("write failed for " + path.string());
}

std::string encode_mfsm(const Matrix& m) {
  std::string out;
  out.reserve(kMfsmHeaderSize + static_cast<std::size_t>(m.size()) * 8);
  out.append("MFSM", 4);
  put_le<std::uint32_t>(out, kMfsmVersion);
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
  // Eigen's default storage is column-major, matching the payload layout.
  for (Eigen::Index i = 0; i < m.size(); ++i) put_le<double>(out, m.data()[i]);
  return out;
}

Matrix decode_mfsm(std::string_view bytes) {
  if (bytes.size() < kMfsmHeaderSize) throw ParseError("MFSM file shorter than its header");
  if (bytes.substr(0, 4) != "MFSM") throw ParseError("bad MFSM magic");
  const auto version = get_le<std::uint32_t>(bytes, 4);
  if (version != kMfsmVersion) {
    throw ParseError("unsupported MFSM version " + std::to_string(version));
  }
  const auto rows = get_le<std::uint64_t>(bytes, 8);
  const auto cols = get_le<std::uint64_t>(bytes, 16);
  const std::uint64_t payload = bytes.size() - kMfsmHeaderSize;
  if (cols != 0 && rows > payload / 8 / cols) throw ParseError("MFSM payload too short");
  if (rows * cols * 8 != payload) {
    throw ParseError("MFSM payload is " + std::to_string(payload) + " bytes, expected " +
                     std::to_string(rows * cols * 8));
  }
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::uint64_t i = 0; i < rows * cols; ++i) {
    const double v = get_le<double>(bytes, kMfsmHeaderSize + 8 * i);
    if (!std::isfinite(v)) {
      throw ParseError("non-finite value at entry (" + std::to_string(i % std::max<std::uint64_t>(rows, 1)) +
                       ", " + std::to_string(rows ? i / rows : 0) + ")");
    }
    m.data()[i] = v;
  }
  return m;
}

void write_mfsm(const fs::path& path, const Matrix& m) { write_text(path, encode_mfsm(m)); }

Matrix read_mfsm(const fs::path& path) { return decode_mfsm(read_text(path)); }

Matrix parse_csv(std::string_view text) {
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    line = trim(line);
    if (line.empty()) {
      if (trim(text).empty()) break;
      throw ParseError("empty row", line_no);
    }
    std::size_t count = 0;
    while (true) {
      const auto comma = line.find(',');
      const auto cell = line.substr(0, comma);
      const auto v = parse_double(cell);
      if (!v) throw ParseError("non-numeric cell '" + std::string(trim(cell)) + "'", line_no);
      if (!std::isfinite(*v)) throw ParseError("non-finite value", line_no);
      values.push_back(*v);
      ++count;
      if (comma == std::string_view::npos) break;
      line = line.substr(comma + 1);
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      throw ParseError("ragged row: " + std::to_string(count) + " cells, expected " +
                       std::to_string(cols),
                       line_no);
    }
    ++rows;
  }
  if (rows == 0) throw ParseError("CSV file is empty");
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[r * cols + c];
    }
  }
  return m;
}

std::string format_csv(const Matrix& m) {
  std::string out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      out += format_double(m(r, c));
    }
    out += '\n';
  }
  return out;
}

Matrix read_csv(const fs::path& path) { return parse_csv(read_text(path)); }

void write_csv(const fs::path& path, const Matrix& m) { write_text(path, format_csv(m)); }

MatrixFormat format_from_path(const fs::path& path) {
  const auto ext = path.extension().string();
  return ext == ".csv" || ext == ".txt" ? MatrixFormat::csv : MatrixFormat::mfsm;
}

MatrixFormat parse_format(std::string_view name) {
  if (name == "csv") return MatrixFormat::csv;
  if (name == "mfsm") return MatrixFormat::mfsm;
  throw InvalidInput("unknown matrix format '" + std::string(name) + "'");
}

Matrix load_matrix(const fs::path& path, std::optional<MatrixFormat> format) {
  if (!fs::exists(path)) throw ParseError("no such file: " + path.string());
  try {
    return format.value_or(format_from_path(path)) == MatrixFormat::csv ? read_csv(path)
                                                                        : read_mfsm(path);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_matrix(const fs::path& path, const Matrix& m, std::optional<MatrixFormat> format) {
  if (format.value_or(format_from_path(path)) == MatrixFormat::csv) {
    write_csv(path, m);
  } else {
    write_mfsm(path, m);
  }
}

SnapshotMatrix load_snapshots(const fs::path& path, std::optional<MatrixFormat> format) {
  return make_snapshots(load_matrix(path, format), false);
}

IndexSet load_candidate_mask(const fs::path& path) {
  const Matrix mask = load_matrix(path);
  if (mask.cols() != 1) throw ParseError("candidate mask must have exactly one column");
  IndexSet out;
  for (Eigen::Index i = 0; i < mask.rows(); ++i) {
    if (mask(i, 0) != 0.0) out.push_back(static_cast<Index>(i));
  }
  if (out.empty()) throw InvalidInput("candidate mask selects no locations");
  return out;
}

namespace {

std::string_view measure_name(EnergyMeasure m) {
  return m == EnergyMeasure::squared ? "squared" : "linear";
}

EnergyMeasure parse_measure(std::string_view s) {
  if (s == "squared") return EnergyMeasure::squared;
  if (s == "linear") return EnergyMeasure::linear;
  throw InvalidInput("unknown energy measure '" + std::string(s) + "'");
}

}  // namespace

void save_model(const fs::path& dir, const ReducedModel& model) {
  fs::create_directories(dir);
  write_mfsm(dir / "phi.mfsm", model.phi);
  write_mfsm(dir / "sing_vals.mfsm", model.sing_vals);
  write_mfsm(dir / "prior_var.mfsm", model.prior_var);
  write_mfsm(dir / "mean.mfsm", model.mean);
  json meta;
  meta["format"] = "mfsp-model";
  meta["version"] = 1;
  meta["locations"] = model.phi.rows();
  meta["modes"] = model.phi.cols();
  meta["candidates"] = model.cand_idx.size();
  meta["snapshot_count"] = model.snapshot_count;
  meta["lambda"] = model.lambda;
  meta["energy"] = model.energy;
  meta["energy_measure"] = measure_name(model.measure);
  meta["centered"] = model.centered;
  meta["cand_idx"] = model.cand_idx;
  write_text(dir / "model.json", meta.dump(2) + "\n");
}

ReducedModel load_model(const fs::path& dir) {
  json meta;
  try {
    meta = json::parse(read_text(dir / "model.json"));
    if (meta.at("format") != "mfsp-model") throw ParseError("not a model directory");
  } catch (const json::exception& e) {
    throw ParseError((dir / "model.json").string() + ": " + e.what());
  }
  ReducedModel model;
  try {
    model.lambda = meta.at("lambda").get<double>();
    model.snapshot_count = meta.at("snapshot_count").get<Index>();
    model.energy = meta.at("energy").get<double>();
    model.measure = parse_measure(meta.at("energy_measure").get<std::string>());
    model.centered = meta.at("centered").get<bool>();
    model.cand_idx = meta.at("cand_idx").get<IndexSet>();
  } catch (const json::exception& e) {
    throw ParseError((dir / "model.json").string() + ": " + e.what());
  }
  model.phi = read_mfsm(dir / "phi.mfsm");
  model.sing_vals = read_mfsm(dir / "sing_vals.mfsm");
  model.prior_var = read_mfsm(dir / "prior_var.mfsm");
  model.mean = read_mfsm(dir / "mean.mfsm");
  if (model.sing_vals.size() != model.phi.cols() || model.prior_var.size() != model.phi.cols() ||
      model.mean.size() != model.phi.rows()) {
    throw ParseError("model files in " + dir.string() + " have inconsistent shapes");
  }
  model.psi = restrict_to_candidates(model.phi, model.cand_idx);
  return model;
}

std::string instance_fingerprint(const ProblemInstance& inst) {
  std::string bytes;
  put_le<std::uint64_t>(bytes, inst.dim());
  put_le<std::uint64_t>(bytes, inst.locations());
  for (double v : {inst.cheap.cost, inst.cheap.sigma, inst.exp.cost, inst.exp.sigma, inst.budget}) {
    put_le<double>(bytes, v);
  }
  for (const Matrix* a : {&inst.a_cheap, &inst.a_exp}) {
    for (Eigen::Index i = 0; i < a->size(); ++i) put_le<double>(bytes, a->data()[i]);
  }
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string design_to_json(const DesignFile& design) {
  const DesignResult& r = design.result;
  const Selection sorted = r.selection.sorted();
  json j;
  j["format"] = "mfsp-design";
  j["version"] = 1;
  j["algorithm"] = r.algorithm;
  j["fingerprint"] = design.fingerprint;
  j["cost_cheap"] = design.cheap.cost;
  j["cost_exp"] = design.exp.cost;
  j["sigma_cheap"] = design.cheap.sigma;
  j["sigma_exp"] = design.exp.sigma;
  j["budget"] = r.budget;
  j["cheap_idx"] = sorted.cheap_idx;
  j["exp_idx"] = sorted.exp_idx;
  j["k_ch"] = sorted.cheap_idx.size();
  j["k_exp"] = sorted.exp_idx.size();
  j["spend"] = r.spend;
  j["phi_d"] = r.phi_d;
  if (!r.trace.empty()) {
    json trace = json::array();
    for (const auto& s : r.trace) {
      trace.push_back({{"step", s.step},
                       {"fidelity", std::string(to_string(s.fidelity))},
                       {"location", s.location},
                       {"gain_per_cost", s.gain_per_cost},
                       {"phi_d", s.phi_d}});
    }
    j["trace"] = std::move(trace);
  }
  if (r.iterative) {
    j["candidates"] = r.iterative->candidates;
    j["refinements"] = r.iterative->refinements;
  }
  return j.dump(2) + "\n";
}

DesignFile design_from_json(std::string_view text) {
  DesignFile d;
  try {
    const json j = json::parse(text);
    if (j.at("format") != "mfsp-design") throw ParseError("not a design file");
    DesignResult& r = d.result;
    r.algorithm = j.at("algorithm").get<std::string>();
    d.fingerprint = j.at("fingerprint").get<std::string>();
    d.cheap = {j.at("cost_cheap").get<double>(), j.at("sigma_cheap").get<double>()};
    d.exp = {j.at("cost_exp").get<double>(), j.at("sigma_exp").get<double>()};
    r.budget = j.at("budget").get<double>();
    r.selection.cheap_idx = j.at("cheap_idx").get<IndexSet>();
    r.selection.exp_idx = j.at("exp_idx").get<IndexSet>();
    r.spend = j.at("spend").get<double>();
    r.phi_d = j.at("phi_d").get<double>();
    if (j.contains("trace")) {
      for (const auto& s : j.at("trace")) {
        TraceStep step;
        step.step = s.at("step").get<std::size_t>();
        step.fidelity =
            s.at("fidelity").get<std::string>() == "cheap" ? Fidelity::cheap : Fidelity::expensive;
        step.location = s.at("location").get<Index>();
        step.gain_per_cost = s.at("gain_per_cost").get<double>();
        step.phi_d = s.at("phi_d").get<double>();
        r.trace.push_back(step);
      }
    }
    if (j.contains("candidates")) {
      r.iterative = IterativeStats{j.at("candidates").get<std::size_t>(),
                                   j.at("refinements").get<std::size_t>()};
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("design file: ") + e.what());
  }
  const Selection& sel = d.result.selection;
  if (!std::is_sorted(sel.cheap_idx.begin(), sel.cheap_idx.end()) ||
      !std::is_sorted(sel.exp_idx.begin(), sel.exp_idx.end())) {
    throw ParseError("design file: indices must be sorted ascending");
  }
  if (d.result.spend > d.result.budget * (1.0 + kBudgetSlack)) {
    throw ParseError("design file: spend exceeds budget");
  }
  return d;
}

void write_design(const fs::path& path, const DesignFile& design) {
  write_text(path, design_to_json(design));
}

DesignFile read_design(const fs::path& path) {
  try {
    return design_from_json(read_text(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

ProblemInstance instance_for_design(const ReducedModel& model, const DesignFile& design) {
  ProblemInstance inst = assemble_instance(model, design.cheap, design.exp, design.result.budget);
  if (instance_fingerprint(inst) != design.fingerprint) {
    throw InvalidInput("design fingerprint " + design.fingerprint +
                       " does not match the supplied model");
  }
  design.result.selection.validate(inst.locations());
  return inst;
}

namespace {

bool parse_bool(std::string_view v, std::size_t line) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ParseError("expected a boolean, got '" + std::string(v) + "'", line);
}

double parse_number(std::string_view v, std::size_t line) {
  const auto d = parse_double(v);
  if (!d || !std::isfinite(*d)) throw ParseError("expected a number, got '" + std::string(v) + "'", line);
  return *d;
}

template <class Int>
Int parse_integer(std::string_view v, std::size_t line) {
  v = trim(v);
  Int out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    throw ParseError("expected a non-negative integer, got '" + std::string(v) + "'", line);
  }
  return out;
}

std::pair<double, double> parse_pair(std::string_view v, std::size_t line) {
  const auto comma = v.find(',');
  if (comma == std::string_view::npos) {
    throw ParseError("expected two comma-separated numbers", line);
  }
  return {parse_number(v.substr(0, comma), line), parse_number(v.substr(comma + 1), line)};
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key = value", line_no);
    std::string key(trim(line.substr(0, eq)));
    std::replace(key.begin(), key.end(), '-', '_');
    const std::string_view value = trim(line.substr(eq + 1));

    if (key == "lambda") cfg.lambda = parse_number(value, line_no);
    else if (key == "energy") cfg.energy = parse_number(value, line_no);
    else if (key == "train_frac") cfg.train_frac = parse_number(value, line_no);
    else if (key == "cost_cheap") cfg.cost_cheap = parse_number(value, line_no);
    else if (key == "cost_exp") cfg.cost_exp = parse_number(value, line_no);
    else if (key == "sigma_cheap") cfg.sigma_cheap = parse_number(value, line_no);
    else if (key == "sigma_exp") cfg.sigma_exp = parse_number(value, line_no);
    else if (key == "costs") std::tie(cfg.cost_cheap, cfg.cost_exp) = parse_pair(value, line_no);
    else if (key == "sigmas") std::tie(cfg.sigma_cheap, cfg.sigma_exp) = parse_pair(value, line_no);
    else if (key == "budget") cfg.budget = parse_number(value, line_no);
    else if (key == "algorithm") cfg.algorithm = std::string(value);
    else if (key == "seed") cfg.seed = parse_integer<std::uint64_t>(value, line_no);
    else if (key == "max_iters") cfg.max_iters = parse_integer<std::size_t>(value, line_no);
    else if (key == "center") cfg.center = parse_bool(value, line_no);
    else if (key == "candidate_mask") cfg.candidate_mask = std::string(value);
    else if (key == "energy_measure") cfg.energy_measure = std::string(value);
    else if (key == "threads") cfg.threads = parse_integer<unsigned>(value, line_no);
    else throw ParseError("unknown configuration key '" + key + "'", line_no);
  }
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  try {
    return parse_config(read_text(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string format_comparison_csv(const Comparison& cmp) {
  std::string out = "design,k_ch,k_exp,spend,phi_d,mean_rel_err\n";
  for (const auto& row : cmp.rows) {
    out += row.name + ',' + std::to_string(row.k_cheap) + ',' + std::to_string(row.k_exp) + ',' +
           format_double(row.spend) + ',' + format_double(row.phi_d) + ',' +
           (row.mean_rel_err ? format_double(*row.mean_rel_err) : std::string()) + '\n';
  }
  return out;
}

std::string format_histogram_csv(const Comparison& cmp) {
  std::string out;
  for (const auto& row : cmp.rows) {
    out += "# marker," + row.name + ',' + format_double(row.phi_d) + '\n';
  }
  out += "bin_lo,bin_hi,count\n";
  for (const auto& bin : cmp.histogram) {
    out += format_double(bin.lo) + ',' + format_double(bin.hi) + ',' + std::to_string(bin.count) + '\n';
  }
  return out;
}

}  // namespace mfsp::io
