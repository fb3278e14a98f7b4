#include "spikemix/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "spikemix/error.hpp"

namespace spikemix::io {

using json = nlohmann::json;

namespace {

[[noreturn]] void fail(std::string_view where, const std::string& msg) {
  throw ConfigError(std::string(where) + ": " + msg);
}

int line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

json parse_json(std::string_view text, std::string_view where) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    fail(where, "malformed JSON at line " + std::to_string(line_of(text, byte)));
  }
}

void require_object(const json& j, std::string_view where) {
  if (!j.is_object()) fail(where, "expected a JSON object");
}

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
  for (const auto& item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
      fail(where, "unknown key '" + item.key() + "'");
  }
}

void check_schema(const json& obj, std::string_view where) {
  if (!obj.contains("schema_version")) fail(where, "missing schema_version");
  const json& v = obj.at("schema_version");
  if (!v.is_number_integer() || v.get<long long>() != kSchemaVersion)
    fail(where, "unsupported schema_version " + v.dump() + " (expected " + std::to_string(kSchemaVersion) + ")");
}

const json& field(const json& obj, const char* key, std::string_view where) {
  if (!obj.contains(key)) fail(where, std::string("missing key '") + key + "'");
  return obj.at(key);
}

double as_double(const json& v, std::string_view where, std::string_view key) {
  if (!v.is_number()) fail(where, "'" + std::string(key) + "' must be a number");
  return v.get<double>();
}

long long as_integer(const json& v, std::string_view where, std::string_view key) {
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::nearbyint(d) == d && std::abs(d) < 9e15) return static_cast<long long>(d);
  }
  fail(where, "'" + std::string(key) + "' must be an integer");
}

int as_int(const json& v, std::string_view where, std::string_view key) {
  const long long x = as_integer(v, where, key);
  if (x < INT32_MIN || x > INT32_MAX) fail(where, "'" + std::string(key) + "' out of range");
  return static_cast<int>(x);
}

std::uint64_t as_u64(const json& v, std::string_view where, std::string_view key) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  const long long x = as_integer(v, where, key);
  if (x < 0) fail(where, "'" + std::string(key) + "' must be non-negative");
  return static_cast<std::uint64_t>(x);
}

bool as_bool(const json& v, std::string_view where, std::string_view key) {
  if (!v.is_boolean()) fail(where, "'" + std::string(key) + "' must be true or false");
  return v.get<bool>();
}

std::string as_string(const json& v, std::string_view where, std::string_view key) {
  if (!v.is_string()) fail(where, "'" + std::string(key) + "' must be a string");
  return v.get<std::string>();
}

const json& as_array(const json& v, std::string_view where, std::string_view key) {
  if (!v.is_array()) fail(where, "'" + std::string(key) + "' must be an array");
  return v;
}

std::vector<double> as_doubles(const json& v, std::string_view where, std::string_view key) {
  std::vector<double> out;
  for (const auto& e : as_array(v, where, key)) out.push_back(as_double(e, where, key));
  return out;
}

std::vector<int> as_ints(const json& v, std::string_view where, std::string_view key) {
  std::vector<int> out;
  for (const auto& e : as_array(v, where, key)) out.push_back(as_int(e, where, key));
  return out;
}

// Runs a validate() overload and reports its complaint as a config error.
template <class T>
void validated(const T& value, std::string_view where) {
  try {
    validate(value);
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
}

json theta_json(const std::vector<ClusterParams>& params) {
  json arr = json::array();
  for (const auto& p : params) arr.push_back({p.mu, p.log_psi});
  return arr;
}

std::vector<ClusterParams> theta_from(const json& v, std::string_view where) {
  std::vector<ClusterParams> out;
  for (const auto& e : as_array(v, where, "theta")) {
    if (!e.is_array() || e.size() != 2) fail(where, "each theta entry must be [mu, log_psi]");
    out.push_back({as_double(e[0], where, "theta"), as_double(e[1], where, "theta")});
  }
  return out;
}

// ---- hyperparameters (shared by run configs and trace headers) ----

const std::initializer_list<std::string_view> kHyperKeys = {
    "alpha",       "m",     "particles",     "csmc_rounds",       "iterations",
    "burn_in",     "base",  "proposal_sd",   "proposal_variance", "mixture",
    "finite_alpha", "reuse_cluster_estimates"};

json hyper_json(const Hyperparams& h) {
  json j;
  j["alpha"] = h.alpha;
  j["m"] = h.m;
  j["particles"] = h.particles;
  j["csmc_rounds"] = h.csmc_rounds;
  j["iterations"] = h.iterations;
  j["burn_in"] = h.burn_in;
  j["base"] = {{"mu_mean", h.base.mu_mean},
               {"mu_var", h.base.mu_var},
               {"logpsi_lo", h.base.logpsi_lo},
               {"logpsi_hi", h.base.logpsi_hi}};
  j["proposal_sd"] = {h.proposal_sd[0], h.proposal_sd[1]};
  j["mixture"] = h.kind == MixtureKind::finite ? "finite" : "dp";
  if (h.kind == MixtureKind::finite) j["finite_alpha"] = h.finite_alpha;
  j["reuse_cluster_estimates"] = h.reuse_cluster_estimates;
  return j;
}

std::array<double, 2> pair_or_scalar(const json& v, std::string_view where, std::string_view key) {
  if (v.is_number()) {
    const double x = as_double(v, where, key);
    return {x, x};
  }
  const auto xs = as_doubles(v, where, key);
  if (xs.size() != 2) fail(where, "'" + std::string(key) + "' must be a number or a pair");
  return {xs[0], xs[1]};
}

// Reads the hyperparameter keys present in `j` into `h`.
void read_hyper(const json& j, Hyperparams& h, std::string_view where) {
  if (j.contains("alpha")) h.alpha = as_double(j["alpha"], where, "alpha");
  if (j.contains("m")) h.m = as_int(j["m"], where, "m");
  if (j.contains("particles")) h.particles = as_int(j["particles"], where, "particles");
  if (j.contains("csmc_rounds")) h.csmc_rounds = as_int(j["csmc_rounds"], where, "csmc_rounds");
  if (j.contains("iterations")) h.iterations = as_int(j["iterations"], where, "iterations");
  if (j.contains("burn_in")) h.burn_in = as_int(j["burn_in"], where, "burn_in");
  if (j.contains("base")) {
    const json& b = j["base"];
    const std::string bw = std::string(where) + ".base";
    require_object(b, bw);
    check_keys(b, {"mu_mean", "mu_var", "logpsi_lo", "logpsi_hi"}, bw);
    if (b.contains("mu_mean")) h.base.mu_mean = as_double(b["mu_mean"], bw, "mu_mean");
    if (b.contains("mu_var")) h.base.mu_var = as_double(b["mu_var"], bw, "mu_var");
    if (b.contains("logpsi_lo")) h.base.logpsi_lo = as_double(b["logpsi_lo"], bw, "logpsi_lo");
    if (b.contains("logpsi_hi")) h.base.logpsi_hi = as_double(b["logpsi_hi"], bw, "logpsi_hi");
  }
  if (j.contains("proposal_sd") && j.contains("proposal_variance"))
    fail(where, "give proposal_sd or proposal_variance, not both");
  if (j.contains("proposal_sd")) h.proposal_sd = pair_or_scalar(j["proposal_sd"], where, "proposal_sd");
  if (j.contains("proposal_variance")) {
    const auto var = pair_or_scalar(j["proposal_variance"], where, "proposal_variance");
    if (!(var[0] > 0.0) || !(var[1] > 0.0)) fail(where, "proposal_variance must be positive");
    h.proposal_sd = {std::sqrt(var[0]), std::sqrt(var[1])};
  }
  if (j.contains("mixture")) {
    const std::string kind = as_string(j["mixture"], where, "mixture");
    if (kind == "dp") h.kind = MixtureKind::dirichlet_process;
    else if (kind == "finite") h.kind = MixtureKind::finite;
    else fail(where, "mixture must be \"dp\" or \"finite\"");
  }
  if (j.contains("finite_alpha")) h.finite_alpha = as_doubles(j["finite_alpha"], where, "finite_alpha");
  if (j.contains("reuse_cluster_estimates"))
    h.reuse_cluster_estimates = as_bool(j["reuse_cluster_estimates"], where, "reuse_cluster_estimates");
}

std::string dump_line(const json& j) { return j.dump() + "\n"; }

}  // namespace

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw ConfigError("failed writing " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw ConfigError("cannot write " + path.string());
  }
}

// ---- dataset ----

std::string dataset_to_json(const Dataset& ds) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["domain"] = std::string(to_string(ds.domain));
  j["bin_width_ms"] = ds.bin_width_ms;
  j["n_trials_bins"] = ds.n_trials_bins;
  j["onset_index"] = ds.onset_index;
  if (ds.true_onset_index) j["true_onset_index"] = *ds.true_onset_index;
  json series = json::array();
  for (const auto& s : ds.series)
    series.push_back({{"id", s.id}, {"x0", s.x0}, {"psi0", s.psi0}, {"counts", s.counts}});
  j["series"] = std::move(series);
  if (ds.truth) j["truth"] = *ds.truth;
  return dump_line(j);
}

Dataset dataset_from_json(std::string_view text) {
  constexpr std::string_view where = "dataset";
  const json j = parse_json(text, where);
  require_object(j, where);
  check_keys(j, {"schema_version", "domain", "bin_width_ms", "n_trials_bins", "onset_index",
                 "true_onset_index", "series", "truth"},
             where);
  check_schema(j, where);
  Dataset ds;
  ds.domain = domain_from_string(as_string(field(j, "domain", where), where, "domain"));
  ds.bin_width_ms = as_double(field(j, "bin_width_ms", where), where, "bin_width_ms");
  ds.n_trials_bins = as_int(field(j, "n_trials_bins", where), where, "n_trials_bins");
  if (j.contains("onset_index")) ds.onset_index = as_int(j["onset_index"], where, "onset_index");
  if (j.contains("true_onset_index"))
    ds.true_onset_index = as_int(j["true_onset_index"], where, "true_onset_index");
  const json& series = as_array(field(j, "series", where), where, "series");
  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::string sw = "dataset.series[" + std::to_string(i) + "]";
    const json& s = series[i];
    require_object(s, sw);
    check_keys(s, {"id", "x0", "psi0", "counts"}, sw);
    DatasetSeries out;
    out.id = as_string(field(s, "id", sw), sw, "id");
    out.x0 = as_double(field(s, "x0", sw), sw, "x0");
    if (s.contains("psi0")) out.psi0 = as_double(s["psi0"], sw, "psi0");
    out.counts = as_ints(field(s, "counts", sw), sw, "counts");
    ds.series.push_back(std::move(out));
  }
  if (j.contains("truth")) ds.truth = as_ints(j["truth"], where, "truth");
  validate(ds);
  return ds;
}

Dataset read_dataset(const std::filesystem::path& path) {
  try {
    return dataset_from_json(read_text(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_dataset(const Dataset& ds, const std::filesystem::path& path) {
  write_text(path, dataset_to_json(ds));
}

// ---- run config ----

std::string run_config_to_json(const RunConfig& cfg) {
  json j = hyper_json(cfg.hyper);
  j["schema_version"] = kSchemaVersion;
  if (cfg.psi0) j["psi0"] = *cfg.psi0;
  j["seed"] = cfg.seed;
  j["workers"] = cfg.workers;
  if (cfg.domain) j["domain"] = std::string(to_string(*cfg.domain));
  if (!cfg.data_path.empty()) j["data"] = cfg.data_path;
  if (!cfg.out_path.empty()) j["out"] = cfg.out_path;
  return j.dump(2) + "\n";
}

RunConfig run_config_from_json(std::string_view text) {
  constexpr std::string_view where = "config";
  const json j = parse_json(text, where);
  require_object(j, where);
  std::vector<std::string_view> allowed(kHyperKeys);
  for (std::string_view k : {"schema_version", "psi0", "seed", "workers", "domain", "data", "out"})
    allowed.push_back(k);
  for (const auto& item : j.items())
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
      fail(where, "unknown key '" + item.key() + "'");
  check_schema(j, where);

  RunConfig cfg;
  read_hyper(j, cfg.hyper, where);
  if (j.contains("psi0")) {
    cfg.psi0 = as_double(j["psi0"], where, "psi0");
    if (!(*cfg.psi0 > 0.0) || !std::isfinite(*cfg.psi0)) fail(where, "psi0 must be positive");
  }
  if (j.contains("seed")) cfg.seed = as_u64(j["seed"], where, "seed");
  if (j.contains("workers")) {
    cfg.workers = as_int(j["workers"], where, "workers");
    if (cfg.workers < 0) fail(where, "workers must be >= 0");
  }
  if (j.contains("domain")) cfg.domain = domain_from_string(as_string(j["domain"], where, "domain"));
  if (j.contains("data")) cfg.data_path = as_string(j["data"], where, "data");
  if (j.contains("out")) cfg.out_path = as_string(j["out"], where, "out");
  validated(cfg.hyper, where);
  return cfg;
}

RunConfig read_run_config(const std::filesystem::path& path) {
  try {
    return run_config_from_json(read_text(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

// ---- simulation config ----

std::string simulate_config_to_json(const SimulateConfig& cfg) {
  const SimConfig& s = cfg.sim;
  json j;
  j["schema_version"] = kSchemaVersion;
  j["seed"] = cfg.seed;
  j["n_per_type"] = s.n_per_type;
  j["R"] = s.R;
  j["delta_ms"] = s.delta_ms;
  j["M"] = s.M;
  j["T_pre"] = s.T_pre;
  j["T_post"] = s.T_post;
  j["early_bins"] = s.early_bins;
  j["rate_lo"] = s.rate_lo;
  j["rate_hi"] = s.rate_hi;
  j["onset_offset_bins"] = s.onset_offset_bins;
  j["psi0"] = s.psi0;
  return j.dump(2) + "\n";
}

SimulateConfig simulate_config_from_json(std::string_view text) {
  constexpr std::string_view where = "simulation config";
  const json j = parse_json(text, where);
  require_object(j, where);
  check_keys(j, {"schema_version", "seed", "n_per_type", "R", "delta_ms", "M", "T_pre", "T_post",
                 "early_bins", "rate_lo", "rate_hi", "onset_offset_bins", "psi0"},
             where);
  check_schema(j, where);
  SimulateConfig cfg;
  SimConfig& s = cfg.sim;
  if (j.contains("seed")) cfg.seed = as_u64(j["seed"], where, "seed");
  if (j.contains("n_per_type")) s.n_per_type = as_int(j["n_per_type"], where, "n_per_type");
  if (j.contains("R")) s.R = as_int(j["R"], where, "R");
  if (j.contains("delta_ms")) s.delta_ms = as_double(j["delta_ms"], where, "delta_ms");
  if (j.contains("M")) s.M = as_int(j["M"], where, "M");
  if (j.contains("T_pre")) s.T_pre = as_int(j["T_pre"], where, "T_pre");
  if (j.contains("T_post")) s.T_post = as_int(j["T_post"], where, "T_post");
  if (j.contains("early_bins")) s.early_bins = as_int(j["early_bins"], where, "early_bins");
  if (j.contains("rate_lo")) s.rate_lo = as_double(j["rate_lo"], where, "rate_lo");
  if (j.contains("rate_hi")) s.rate_hi = as_double(j["rate_hi"], where, "rate_hi");
  if (j.contains("onset_offset_bins"))
    s.onset_offset_bins = as_int(j["onset_offset_bins"], where, "onset_offset_bins");
  if (j.contains("psi0")) s.psi0 = as_double(j["psi0"], where, "psi0");
  validated(s, where);
  return cfg;
}

SimulateConfig read_simulate_config(const std::filesystem::path& path) {
  try {
    return simulate_config_from_json(read_text(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

// ---- trace ----

std::string trace_header_line(const TraceHeader& header) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "header";
  j["seed"] = header.seed;
  j["hyper"] = hyper_json(header.hyper);
  j["series_ids"] = header.series_ids;
  return dump_line(j);
}

std::string trace_record_line(const GibbsSample& sample) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["iter"] = sample.iteration;
  j["K"] = sample.state.num_clusters();
  j["Z"] = sample.state.assignments;
  j["theta"] = theta_json(sample.state.params);
  json acc = json::array();
  for (bool a : sample.accepted) acc.push_back(a);
  j["accepted"] = std::move(acc);
  return dump_line(j);
}

TraceWriter::TraceWriter(const std::filesystem::path& path, const TraceHeader& header)
    : out_(std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc)), path_(path) {
  if (!*out_) throw ConfigError("cannot write " + path.string());
  *out_ << trace_header_line(header) << std::flush;
}

TraceWriter::~TraceWriter() = default;

void TraceWriter::write(const GibbsSample& sample) {
  *out_ << trace_record_line(sample) << std::flush;
  if (!*out_) throw ConfigError("failed writing " + path_.string());
  ++records_;
}

GibbsTrace TraceFile::to_trace() const {
  GibbsTrace trace;
  trace.samples = samples;
  trace.seed = header.seed;
  trace.hyper = header.hyper;
  return trace;
}

TraceFile parse_trace(std::istream& in, std::string_view source) {
  TraceFile file;
  std::string line;
  int line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = std::string(source) + " line " + std::to_string(line_no);
    const json j = parse_json(line, where);
    require_object(j, where);
    check_schema(j, where);
    if (!have_header) {
      if (!j.contains("kind") || j["kind"] != "header") fail(where, "first record must be the header");
      check_keys(j, {"schema_version", "kind", "seed", "hyper", "series_ids"}, where);
      file.header.seed = as_u64(field(j, "seed", where), where, "seed");
      const json& h = field(j, "hyper", where);
      require_object(h, where + ".hyper");
      check_keys(h, kHyperKeys, where + ".hyper");
      read_hyper(h, file.header.hyper, where + ".hyper");
      for (const auto& id : as_array(field(j, "series_ids", where), where, "series_ids"))
        file.header.series_ids.push_back(as_string(id, where, "series_ids"));
      if (file.header.series_ids.empty()) fail(where, "series_ids is empty");
      have_header = true;
      continue;
    }
    check_keys(j, {"schema_version", "iter", "K", "Z", "theta", "accepted"}, where);
    GibbsSample s;
    s.iteration = as_int(field(j, "iter", where), where, "iter");
    s.state.assignments = as_ints(field(j, "Z", where), where, "Z");
    s.state.params = theta_from(field(j, "theta", where), where);
    for (const auto& a : as_array(field(j, "accepted", where), where, "accepted"))
      s.accepted.push_back(as_bool(a, where, "accepted"));
    const int expected_iter = file.samples.empty() ? 1 : file.samples.back().iteration + 1;
    if (s.iteration != expected_iter)
      fail(where, "iter " + std::to_string(s.iteration) + " (expected " + std::to_string(expected_iter) + ")");
    if (j.contains("K") && as_int(j["K"], where, "K") != s.state.num_clusters())
      fail(where, "K does not match the number of theta entries");
    if (s.accepted.size() != s.state.params.size()) fail(where, "accepted must have one flag per cluster");
    try {
      validate(s.state, file.header.series_ids.size(),
               file.header.hyper.kind == MixtureKind::finite);
    } catch (const std::invalid_argument& e) {
      fail(where, e.what());
    }
    file.samples.push_back(std::move(s));
  }
  if (!have_header) fail(source, "empty trace");
  return file;
}

TraceFile read_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  return parse_trace(in, path.string());
}

// ---- co-occurrence CSV ----

std::string cooccurrence_to_csv(const CooccurrenceMatrix& m, const std::vector<std::string>& ids) {
  const int n = m.n;
  if (n < 1 || static_cast<int>(ids.size()) != n ||
      m.entries.size() != static_cast<std::size_t>(n) * n)
    throw std::invalid_argument("co-occurrence matrix and ids disagree in size");
  for (const auto& id : ids)
    if (id.find_first_of(",\"\n\r") != std::string::npos)
      throw std::invalid_argument("series id '" + id + "' cannot be written to CSV");
  for (int i = 0; i < n; ++i) {
    if (m(i, i) != 1.0) throw std::invalid_argument("co-occurrence diagonal must be 1");
    for (int j = 0; j < n; ++j) {
      if (!(m(i, j) >= 0.0 && m(i, j) <= 1.0)) throw std::invalid_argument("co-occurrence entry outside [0, 1]");
      if (m(i, j) != m(j, i)) throw std::invalid_argument("co-occurrence matrix is not symmetric");
    }
  }
  std::string out;
  for (int i = 0; i < n; ++i) {
    if (i) out += ',';
    out += ids[i];
  }
  out += '\n';
  char buf[32];
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j) out += ',';
      std::snprintf(buf, sizeof buf, "%.6f", m(i, j));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

void write_cooccurrence_csv(const CooccurrenceMatrix& m, const std::vector<std::string>& ids,
                            const std::filesystem::path& path) {
  write_text(path, cooccurrence_to_csv(m, ids));
}

LabelledMatrix cooccurrence_from_csv(std::string_view text) {
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };
  std::istringstream in{std::string(text)};
  std::string line;
  LabelledMatrix out;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    const std::string where = "co-occurrence CSV line " + std::to_string(line_no);
    if (out.ids.empty()) {
      out.ids = cells;
      out.matrix.n = static_cast<int>(cells.size());
      continue;
    }
    if (cells.size() != out.ids.size()) fail(where, "expected " + std::to_string(out.ids.size()) + " values");
    for (const auto& c : cells) {
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      if (c.empty() || end != c.c_str() + c.size()) fail(where, "'" + c + "' is not a number");
      out.matrix.entries.push_back(v);
    }
  }
  if (out.ids.empty()) fail("co-occurrence CSV", "empty file");
  if (out.matrix.entries.size() != out.ids.size() * out.ids.size())
    fail("co-occurrence CSV", "expected " + std::to_string(out.ids.size()) + " rows");
  return out;
}

LabelledMatrix read_cooccurrence_csv(const std::filesystem::path& path) {
  return cooccurrence_from_csv(read_text(path));
}

// ---- clustering ----

std::string clustering_to_json(const ClusteringReport& r) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["burn_in"] = r.burn_in;
  j["samples"] = r.samples;
  j["source_iter"] = r.selection.source_index;
  j["tie_count"] = r.selection.tie_count;
  j["frobenius_distance"] = r.selection.frobenius_distance;
  j["K"] = r.selection.params.size();
  j["series_ids"] = r.series_ids;
  j["Z"] = r.selection.assignments;
  j["theta"] = theta_json(r.selection.params);
  return j.dump(2) + "\n";
}

ClusteringReport clustering_from_json(std::string_view text) {
  constexpr std::string_view where = "clustering";
  const json j = parse_json(text, where);
  require_object(j, where);
  check_keys(j, {"schema_version", "burn_in", "samples", "source_iter", "tie_count",
                 "frobenius_distance", "K", "series_ids", "Z", "theta"},
             where);
  check_schema(j, where);
  ClusteringReport r;
  r.burn_in = as_int(field(j, "burn_in", where), where, "burn_in");
  r.samples = as_int(field(j, "samples", where), where, "samples");
  r.selection.source_index = as_int(field(j, "source_iter", where), where, "source_iter");
  r.selection.tie_count = as_int(field(j, "tie_count", where), where, "tie_count");
  r.selection.frobenius_distance = as_double(field(j, "frobenius_distance", where), where, "frobenius_distance");
  for (const auto& id : as_array(field(j, "series_ids", where), where, "series_ids"))
    r.series_ids.push_back(as_string(id, where, "series_ids"));
  r.selection.assignments = as_ints(field(j, "Z", where), where, "Z");
  r.selection.params = theta_from(field(j, "theta", where), where);
  if (j.contains("K") && as_int(j["K"], where, "K") != static_cast<int>(r.selection.params.size()))
    fail(where, "K does not match the number of theta entries");
  if (r.series_ids.size() != r.selection.assignments.size()) fail(where, "Z and series_ids differ in length");
  return r;
}

void write_clustering(const ClusteringReport& report, const std::filesystem::path& path) {
  write_text(path, clustering_to_json(report));
}

ClusteringReport read_clustering(const std::filesystem::path& path) {
  return clustering_from_json(read_text(path));
}

}  // namespace spikemix::io
