#include "pair/cli.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include "pair/io.hpp"
#include "pair/metrics.hpp"

namespace pair::cli {

namespace fs = std::filesystem;

namespace {

using Header = std::vector<std::pair<std::string, std::string>>;

// Keys whose value may also be null.
bool nullable(const std::string &path) { return path == "simulation.snr_db"; }

void check_against(const json &defaults, const json &doc,
                   const std::string &prefix) {
  require(doc.is_object(), ErrorKind::Config,
          (prefix.empty() ? std::string("config") : prefix) +
              " must be a JSON object");
  for (const auto &[key, value] : doc.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    require(defaults.contains(key), ErrorKind::Config,
            "unknown config key '" + path + "'");
    const json &def = defaults.at(key);
    if (def.is_object()) {
      check_against(def, value, path);
      continue;
    }
    if (value.is_null() && nullable(path))
      continue;
    bool ok = false;
    if (def.is_number_integer())
      ok = value.is_number_integer();
    else if (def.is_number())
      ok = value.is_number();
    else if (def.is_string())
      ok = value.is_string();
    else if (def.is_boolean())
      ok = value.is_boolean();
    else if (def.is_array())
      ok = value.is_array();
    require(ok, ErrorKind::Config,
            "config key '" + path + "' expects a " +
                std::string(def.is_number_integer() ? "integer"
                                                    : def.type_name()));
  }
}

// Integers given where a float is expected are stored as floats so that 1
// and 1.0 hash alike.
void canonicalize(const json &defaults, json &doc) {
  for (auto &[key, value] : doc.items()) {
    const json &def = defaults.at(key);
    if (def.is_object())
      canonicalize(def, value);
    else if (def.is_number_float() && value.is_number())
      value = value.get<double>();
  }
}

json merge(json base, const json &patch) {
  for (const auto &[key, value] : patch.items()) {
    if (base.contains(key) && base[key].is_object() && value.is_object())
      base[key] = merge(base[key], value);
    else
      base[key] = value;
  }
  return base;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

fs::path out_dir(const json &config) {
  return fs::path(config.at("out_dir").get<std::string>());
}

// Input path from the config, or the file simulate writes into out_dir.
fs::path input_path(const json &config, const char *key, const char *fallback) {
  const auto p = config.at("input").at(key).get<std::string>();
  return p.empty() ? out_dir(config) / fallback : fs::path(p);
}

void write_json(const fs::path &path, const json &doc) {
  if (path.has_parent_path())
    fs::create_directories(path.parent_path());
  std::ofstream os(path);
  require(static_cast<bool>(os), ErrorKind::Io, "cannot write " + path.string());
  os << doc.dump(2) << '\n';
  require(static_cast<bool>(os), ErrorKind::Io, "write failed: " + path.string());
}

void write_text(const fs::path &path, const std::string &text) {
  if (path.has_parent_path())
    fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  require(static_cast<bool>(os), ErrorKind::Io, "cannot write " + path.string());
  os << text;
  require(static_cast<bool>(os), ErrorKind::Io, "write failed: " + path.string());
}

std::string fixed(double v, int digits) {
  if (!std::isfinite(v))
    return v > 0 ? "inf" : "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// Finite doubles only; JSON has no infinity.
json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(); }

struct Inputs {
  AcquisitionSet acquisition;
  CoilMapSet coils;
};

Inputs load_inputs(const json &config) {
  return {load_acquisition(input_path(config, "acquisition", "acquisition")),
          load_coils(input_path(config, "coils", "coils"))};
}

PairOptions options_for(const json &config, const ReconConfig &rc) {
  PairOptions opt;
  if (rc.method == Method::Pair && rc.beta > 0.0)
    opt.m0 = load_real_image(input_path(config, "b0", "b0"));
  return opt;
}

struct RunOutput {
  ReconResult result;
  RealImage magnitude; // in the units of the input data
};

RunOutput run_recon(const Inputs &in, const ReconConfig &rc,
                    const PairOptions &opt) {
  const auto [normalized, scale] = normalize_global(in.acquisition);
  ReconResult r = reconstruct(normalized, in.coils, rc, opt);
  RealImage m = r.magnitude / scale;
  return {std::move(r), std::move(m)};
}

json trace_json(const ReconResult &r, const std::string &hash) {
  json steps = json::array();
  for (const auto &t : r.trace)
    steps.push_back({{"iteration", t.iteration},
                     {"relative_change", t.relative_change},
                     {"data_residual", t.data_residual}});
  return {{"config_hash", hash},
          {"method", to_string(r.config.method)},
          {"iterations", r.iterations},
          {"stop", r.stop == StopReason::Converged ? "converged"
                                                   : "max_iterations"},
          {"trace", steps}};
}

std::string csv_escape(const std::string &s) {
  if (s.find_first_of(",\"\n") == std::string::npos)
    return s;
  std::string out = "\"";
  for (char c : s)
    out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

} // namespace

int exit_code(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::Config:
  case ErrorKind::Domain:
  case ErrorKind::Shape:
    return kExitConfig;
  case ErrorKind::Io:
  case ErrorKind::Format:
    return kExitIo;
  case ErrorKind::Divergence:
  case ErrorKind::Numerical:
    return kExitDiverged;
  }
  return kExitConfig;
}

json default_config() {
  return {
      {"seed", 0},
      {"out_dir", "out"},
      {"simulation",
       {{"rows", 128},
        {"cols", 128},
        {"shots", 4},
        {"channels", 8},
        {"snr_db", 10.0},
        {"b_value", 1000.0},
        {"diffusivity", 0.7e-3},
        {"direction", {1.0, 0.0, 0.0}},
        {"undersample", "none"},
        {"rate", 1.0},
        {"restrict_coils", true},
        {"coil_radius", 0.4},
        {"coil_ring", 1.5}}},
      {"recon",
       {{"method", "PAIR"},
        {"lambda", 1.0},
        {"beta", 7e-4},
        {"eta", 1.5},
        {"keep", 25},
        {"sigma", 0.6},
        {"radius", 3},
        {"delta", kDefaultDelta},
        {"max_iters", 1000},
        {"tol", 1e-5}}},
      {"input", {{"acquisition", ""}, {"coils", ""}, {"b0", ""}, {"truth", ""}}},
      {"compare",
       {{"methods", {"PLRHM", "PHASE", "PAIR-TV", "PAIR"}},
        {"sweep_keep", json::array()},
        {"sweep_sigma", json::array()}}},
      {"metrics",
       {{"reference", ""},
        {"test", ""},
        {"reference_dwi", ""},
        {"test_dwi", ""},
        {"reference_b0", ""},
        {"test_b0", ""},
        {"b_value", 1000.0},
        {"directions", json::array()}}},
  };
}

void apply_override(json &config, const std::string &assignment) {
  const auto eq = assignment.find('=');
  require(eq != std::string::npos && eq > 0, ErrorKind::Config,
          "override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded())
    value = text;

  json *node = &config;
  std::stringstream parts(key);
  std::string part, path;
  std::vector<std::string> segments;
  while (std::getline(parts, part, '.'))
    segments.push_back(part);
  for (std::size_t i = 0; i < segments.size(); ++i) {
    path += (i ? "." : "") + segments[i];
    require(node->is_object() && node->contains(segments[i]),
            ErrorKind::Config, "unknown config key '" + path + "'");
    node = &(*node)[segments[i]];
  }
  require(!node->is_object(), ErrorKind::Config,
          "config key '" + key + "' is a section, not a value");
  *node = std::move(value);
}

void validate_config(const json &config) {
  check_against(default_config(), config, "");
}

json resolve_config(const std::optional<std::string> &path,
                    const std::vector<std::string> &overrides,
                    std::optional<std::uint64_t> seed,
                    const std::optional<std::string> &dir) {
  const json defaults = default_config();
  json config = defaults;
  if (path) {
    std::ifstream is(*path);
    require(static_cast<bool>(is), ErrorKind::Io, "cannot open config " + *path);
    json file;
    try {
      file = json::parse(is);
    } catch (const json::exception &e) {
      fail(ErrorKind::Config, "malformed config " + *path + ": " + e.what());
    }
    check_against(defaults, file, "");
    config = merge(config, file);
  }
  for (const auto &o : overrides)
    apply_override(config, o);
  if (seed)
    config["seed"] = *seed;
  if (dir)
    config["out_dir"] = *dir;
  validate_config(config);
  canonicalize(defaults, config);
  // Conversions validate ranges early, before any output is written.
  simulation_config(config);
  recon_config(config);
  return config;
}

std::string config_hash(const json &config) {
  json hashed = config;
  hashed.erase("out_dir");
  const std::string text = hashed.dump();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  require(EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(),
                     nullptr) == 1,
          ErrorKind::Numerical, "SHA-256 failed");
  static const char *hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

SimulationConfig simulation_config(const json &config) {
  const json &s = config.at("simulation");
  SimulationConfig sc;
  sc.rows = s.at("rows").get<Eigen::Index>();
  sc.cols = s.at("cols").get<Eigen::Index>();
  sc.shots = s.at("shots").get<int>();
  sc.channels = s.at("channels").get<int>();
  require(sc.rows >= 16 && sc.cols >= 16, ErrorKind::Config,
          "simulation grid must be at least 16x16");
  require(sc.shots >= 1 && sc.shots <= sc.cols, ErrorKind::Config,
          "simulation.shots must be in [1, cols]");
  require(sc.channels >= 1, ErrorKind::Config, "simulation.channels must be >= 1");
  if (s.at("snr_db").is_null())
    sc.snr_db.reset();
  else
    sc.snr_db = s.at("snr_db").get<double>();
  sc.b_value = s.at("b_value").get<double>();
  sc.diffusivity = s.at("diffusivity").get<double>();
  require(sc.b_value >= 0.0 && sc.diffusivity >= 0.0, ErrorKind::Config,
          "b_value and diffusivity must be >= 0");
  const json &d = s.at("direction");
  require(d.size() == 3 && std::all_of(d.begin(), d.end(),
                                       [](const json &v) { return v.is_number(); }),
          ErrorKind::Config, "simulation.direction must be 3 numbers");
  const double n = std::sqrt(d[0].get<double>() * d[0].get<double>() +
                             d[1].get<double>() * d[1].get<double>() +
                             d[2].get<double>() * d[2].get<double>());
  require(n > 0.0, ErrorKind::Config, "simulation.direction must be nonzero");
  sc.direction = {d[0].get<double>() / n, d[1].get<double>() / n,
                  d[2].get<double>() / n};
  const auto mode = s.at("undersample").get<std::string>();
  if (mode == "uniform")
    sc.undersample = UndersampleMode::Uniform;
  else if (mode == "partial-fourier")
    sc.undersample = UndersampleMode::PartialFourier;
  else
    require(mode == "none", ErrorKind::Config,
            "simulation.undersample must be none, uniform or partial-fourier");
  sc.rate = s.at("rate").get<double>();
  require(sc.rate > 0.0 && sc.rate <= 1.0, ErrorKind::Config,
          "simulation.rate must be in (0, 1]");
  sc.restrict_coils = s.at("restrict_coils").get<bool>();
  sc.geometry.loop_radius = s.at("coil_radius").get<double>();
  sc.geometry.ring_distance = s.at("coil_ring").get<double>();
  sc.seed = config.at("seed").get<std::uint64_t>();
  return sc;
}

ReconConfig recon_config(const json &config) {
  const json &r = config.at("recon");
  ReconConfig rc;
  rc.method = method_from_string(r.at("method").get<std::string>());
  rc.lambda = r.at("lambda").get<double>();
  rc.beta = r.at("beta").get<double>();
  rc.eta = r.at("eta").get<double>();
  rc.keep = r.at("keep").get<int>();
  rc.sigma = r.at("sigma").get<double>();
  rc.radius = r.at("radius").get<int>();
  rc.delta = r.at("delta").get<double>();
  rc.max_iters = r.at("max_iters").get<int>();
  rc.tol = r.at("tol").get<double>();
  rc.seed = config.at("seed").get<std::uint64_t>();
  rc.validate();
  return rc;
}

int cmd_simulate(const json &config, std::ostream &log) {
  const std::string hash = config_hash(config);
  const Header header{{"config_hash", hash}};
  const SimulationConfig sc = simulation_config(config);
  const SimulatedData sim = simulate(sc);
  const fs::path dir = out_dir(config);
  json portable = config;
  portable.erase("out_dir");

  save_acquisition(sim.acquisition, dir / "acquisition", header);
  save_coils(sim.coils, dir / "coils", header);
  save_real_image(sim.b0, dir / "b0", header);
  save_real_image(sim.magnitude, dir / "truth_magnitude", header);
  save_image_stack(sim.phases.phases(), dir / "truth_phases", header);
  export_grayscale(sim.magnitude, dir / "truth_magnitude.pgm",
                   GrayWindow{0.0, sim.magnitude.maxCoeff()},
                   "config_hash " + hash);

  json masks = json::array();
  for (int j = 0; j < sim.acquisition.shots(); ++j)
    masks.push_back({{"shot", j},
                     {"kind", to_string(sim.acquisition.mask(j).kind)},
                     {"lines", sim.acquisition.mask(j).lines()}});
  json motion = json::array();
  for (const auto &a : sim.motion.coefficients)
    motion.push_back(a);
  const json manifest = {
      {"config_hash", hash},
      {"config", portable},
      {"seed", sc.seed},
      {"random_streams",
       {{"motion", stream_seed(sc.seed, 1)},
        {"background", stream_seed(sc.seed, 2)},
        {"noise", stream_seed(sc.seed, 3)}}},
      {"rows", sc.rows},
      {"cols", sc.cols},
      {"shots", sc.shots},
      {"channels", sc.channels},
      {"motion_coefficients", motion},
      {"masks", masks},
      {"files",
       {"acquisition.json", "acquisition.cplx", "coils.json", "coils.cplx",
        "b0.json", "b0.cplx", "truth_magnitude.json", "truth_magnitude.cplx",
        "truth_phases.json", "truth_phases.cplx", "truth_magnitude.pgm"}},
  };
  write_json(dir / "manifest.json", manifest);
  log << "simulated " << sc.shots << " shots x " << sc.channels
      << " channels, " << sc.rows << "x" << sc.cols << " -> " << dir.string()
      << '\n';
  return kExitConverged;
}

int cmd_recon(const json &config, std::ostream &log) {
  const std::string hash = config_hash(config);
  const Header header{{"config_hash", hash}};
  const ReconConfig rc = recon_config(config);
  const Inputs in = load_inputs(config);
  const PairOptions opt = options_for(config, rc);

  const auto t0 = std::chrono::steady_clock::now();
  const RunOutput out = run_recon(in, rc, opt);
  const double wall = seconds_since(t0);

  const fs::path dir = out_dir(config) / lower(to_string(rc.method));
  save_real_image(out.magnitude, dir / "magnitude", header);
  export_grayscale(out.magnitude, dir / "magnitude.pgm", std::nullopt,
                   "config_hash " + hash);
  if (out.result.phases)
    save_image_stack(out.result.phases->phases(), dir / "phases", header);
  write_json(dir / "trace.json", trace_json(out.result, hash));

  const bool converged = out.result.stop == StopReason::Converged;
  // Wall time goes to the log only, so reruns leave identical files.
  log << to_string(rc.method) << ": "
      << (converged ? "converged" : "reached max_iters") << " after "
      << out.result.iterations << " iterations (" << fixed(wall, 2)
      << " s) -> " << dir.string() << '\n';
  return converged ? kExitConverged : kExitMaxIters;
}

int cmd_compare(const json &config, std::ostream &log) {
  const std::string hash = config_hash(config);
  const Inputs in = load_inputs(config);
  const RealImage truth =
      load_real_image(input_path(config, "truth", "truth_magnitude"));
  const ReconConfig base = recon_config(config);
  const json &cmp = config.at("compare");
  const json &keeps = cmp.at("sweep_keep");
  const json &sigmas = cmp.at("sweep_sigma");
  const bool sweep = !keeps.empty() || !sigmas.empty();
  require(!sweep || (!keeps.empty() && !sigmas.empty()), ErrorKind::Config,
          "a sweep needs both compare.sweep_keep and compare.sweep_sigma");

  struct Row {
    std::string method;
    int keep = 0;
    double sigma = 0.0;
    double psnr = 0.0;
    int iterations = 0;
    bool converged = false;
  };
  std::vector<Row> rows;
  auto run_one = [&](const ReconConfig &rc) {
    const auto t0 = std::chrono::steady_clock::now();
    const RunOutput out = run_recon(in, rc, options_for(config, rc));
    Row row{to_string(rc.method), rc.keep,  rc.sigma,
            psnr(truth, out.magnitude), out.result.iterations,
            out.result.stop == StopReason::Converged};
    log << row.method << " keep=" << row.keep << " sigma=" << fixed(row.sigma, 3)
        << " psnr=" << fixed(row.psnr, 3) << " dB iterations=" << row.iterations
        << (row.converged ? "" : " (max_iters)") << " time="
        << fixed(seconds_since(t0), 2) << " s\n";
    rows.push_back(row);
  };

  if (sweep) {
    for (const json &k : keeps)
      for (const json &s : sigmas) {
        require(k.is_number_integer() && s.is_number(), ErrorKind::Config,
                "sweep values must be integers (keep) and numbers (sigma)");
        ReconConfig rc = base;
        rc.keep = k.get<int>();
        rc.sigma = s.get<double>();
        rc.validate();
        run_one(rc);
      }
  } else {
    const json &methods = cmp.at("methods");
    require(!methods.empty(), ErrorKind::Config, "compare.methods is empty");
    for (const json &m : methods) {
      require(m.is_string(), ErrorKind::Config, "compare.methods holds names");
      ReconConfig rc = base;
      rc.method = method_from_string(m.get<std::string>());
      run_one(rc);
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row &a, const Row &b) { return a.psnr < b.psnr; });
  }

  json jrows = json::array();
  std::string csv = "method,keep,sigma,psnr_db,iterations,converged,config_hash\n";
  double lo = INFINITY, hi = -INFINITY;
  bool all_converged = true;
  for (const Row &r : rows) {
    jrows.push_back({{"method", r.method},
                     {"keep", r.keep},
                     {"sigma", r.sigma},
                     {"psnr_db", number_or_null(r.psnr)},
                     {"iterations", r.iterations},
                     {"converged", r.converged},
                     {"config_hash", hash}});
    csv += csv_escape(r.method) + "," + std::to_string(r.keep) + "," +
           fixed(r.sigma, 6) + "," + fixed(r.psnr, 6) + "," +
           std::to_string(r.iterations) + "," + (r.converged ? "true" : "false") +
           "," + hash + "\n";
    lo = std::min(lo, r.psnr);
    hi = std::max(hi, r.psnr);
    all_converged = all_converged && r.converged;
  }
  json report = {{"config_hash", hash},
                 {"mode", sweep ? "sweep" : "methods"},
                 {"rows", jrows}};
  if (sweep)
    report["psnr_spread_db"] = number_or_null(hi - lo);
  const fs::path dir = out_dir(config) / (sweep ? "sweep" : "compare");
  write_json(dir / "report.json", report);
  write_text(dir / "report.csv", csv);
  log << "report -> " << (dir / "report.json").string() << '\n';
  return all_converged ? kExitConverged : kExitMaxIters;
}

int cmd_metrics(const json &config, std::ostream &log) {
  const std::string hash = config_hash(config);
  const json &m = config.at("metrics");
  const std::string method = lower(config.at("recon").at("method").get<std::string>());
  auto path_or = [&](const char *key, const fs::path &fallback) {
    const auto p = m.at(key).get<std::string>();
    return p.empty() ? fallback : fs::path(p);
  };
  const fs::path dir = out_dir(config);
  json records = json::array();

  const RealImage ref = load_real_image(path_or("reference", dir / "truth_magnitude"));
  const RealImage test =
      load_real_image(path_or("test", dir / method / "magnitude"));
  const double p = psnr(ref, test);
  records.push_back(
      {{"metric", "psnr"}, {"value", number_or_null(p)}, {"config_hash", hash}});
  log << "psnr " << fixed(p, 4) << " dB\n";

  const auto ref_dwi = m.at("reference_dwi").get<std::string>();
  const auto test_dwi = m.at("test_dwi").get<std::string>();
  if (!ref_dwi.empty() || !test_dwi.empty()) {
    require(!ref_dwi.empty() && !test_dwi.empty(), ErrorKind::Config,
            "AAE needs both metrics.reference_dwi and metrics.test_dwi");
    const json &dirs = m.at("directions");
    const double b = m.at("b_value").get<double>();
    auto samples = [&](const std::string &path) {
      const auto stack = load_image_stack(path);
      require(stack.size() == dirs.size(), ErrorKind::Config,
              "metrics.directions must list one direction per DWI image");
      std::vector<DiffusionSample> out;
      for (std::size_t i = 0; i < stack.size(); ++i) {
        const json &d = dirs[i];
        require(d.is_array() && d.size() == 3, ErrorKind::Config,
                "each direction must be 3 numbers");
        out.push_back({stack[i].real(), b,
                       {d[0].get<double>(), d[1].get<double>(),
                        d[2].get<double>()}});
      }
      return out;
    };
    const RealImage ref_b0 = load_real_image(m.at("reference_b0").get<std::string>());
    const RealImage test_b0 = load_real_image(m.at("test_b0").get<std::string>());
    const double a =
        aae(primary_direction(fit_tensor(samples(ref_dwi), ref_b0)),
            primary_direction(fit_tensor(samples(test_dwi), test_b0)));
    records.push_back({{"metric", "aae"}, {"value", a}, {"config_hash", hash}});
    log << "aae " << fixed(a, 4) << " deg\n";
  }
  write_json(dir / "metrics.json", records);
  return kExitConverged;
}

int run(int argc, char **argv) {
  CLI::App app{"PAIR multi-shot DWI reconstruction"};
  app.require_subcommand(1);
  std::optional<std::string> config_path, dir;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  auto add_common = [&](CLI::App *sub) {
    sub->add_option("--config", config_path, "JSON run configuration");
    sub->add_option("--set", overrides, "Override a key, e.g. recon.beta=0.001")
        ->allow_extra_args(false);
    sub->add_option("--seed", seed, "Random seed");
    sub->add_option("--out-dir", dir, "Output directory");
  };
  struct Command {
    const char *name, *help;
    int (*fn)(const json &, std::ostream &);
  };
  const Command commands[] = {
      {"simulate", "Write a simulated acquisition with ground truth",
       cmd_simulate},
      {"recon", "Reconstruct one acquisition", cmd_recon},
      {"compare", "Run several methods or an (keep, sigma) sweep and report PSNR",
       cmd_compare},
      {"metrics", "PSNR and AAE of existing results", cmd_metrics},
  };
  std::vector<CLI::App *> subs;
  for (const Command &c : commands) {
    subs.push_back(app.add_subcommand(c.name, c.help));
    add_common(subs.back());
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  try {
    const json config = resolve_config(config_path, overrides, seed, dir);
    for (std::size_t i = 0; i < subs.size(); ++i)
      if (subs[i]->parsed())
        return commands[i].fn(config, std::cout);
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const fs::filesystem_error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const json::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}

} // namespace pair::cli
