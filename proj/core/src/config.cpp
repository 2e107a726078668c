#include "cebeam/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cebeam/dsp.hpp"
#include "cebeam/errors.hpp"

namespace cebeam {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw config_error("config key `" + key + "`: not a number: `" + v + "`");
  }
}

long to_long(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long d = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw config_error("config key `" + key + "`: not an integer: `" + v + "`");
  }
}

std::vector<std::string> split(const std::string& v, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream ss(v);
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::pre: return "pre";
    case Method::post: return "post";
    case Method::focus: return "focus";
  }
  return "?";
}

ExperimentConfig parse_config(const std::string& text, const std::string& name) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool theta_span_seen = false;
  double theta_min = 0.0, theta_max = 0.0;
  long theta_count = 0;

  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error(name + ":" + std::to_string(lineno) + ": expected `key = value`");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "pulse.f0_hz") cfg.f0 = to_double(key, value);
    else if (key == "pulse.bandwidth_hz") cfg.bandwidth = to_double(key, value);
    else if (key == "pulse.duration_s") cfg.duration = to_double(key, value);
    else if (key == "pulse.time_bandwidth") cfg.time_bandwidth = to_double(key, value);
    else if (key == "pulse.window") {
      if (value == "rectangular") cfg.window.kind = Window::rectangular;
      else if (value == "tapered-cosine") cfg.window.kind = Window::tapered_cosine;
      else throw config_error("pulse.window: expected rectangular | tapered-cosine");
    } else if (key == "pulse.taper") cfg.window.taper = to_double(key, value);
    else if (key == "sampling.fs_hz") cfg.fs = to_double(key, value);
    else if (key == "acquisition.window_s") cfg.acquisition_window = to_double(key, value);
    else if (key == "array.elements") cfg.elements = static_cast<std::size_t>(to_long(key, value));
    else if (key == "array.pitch_m") cfg.pitch = to_double(key, value);
    else if (key == "medium.sound_speed") cfg.sound_speed = to_double(key, value);
    else if (key == "phantom.file") cfg.phantom_file = value;
    else if (key == "scatterer") {
      std::istringstream ss(value);
      Scatterer s;
      if (!(ss >> s.range >> s.theta >> s.reflectivity >> s.freq_shift))
        throw config_error("scatterer: expected `r_m theta_rad alpha f_shift_hz`");
      cfg.phantom.scatterers.push_back(s);
    } else if (key == "beam.theta_list_rad") {
      std::istringstream ss(value);
      double t = 0.0;
      cfg.thetas.clear();
      while (ss >> t) cfg.thetas.push_back(t);
    } else if (key == "beam.theta_min_rad") { theta_min = to_double(key, value); theta_span_seen = true; }
    else if (key == "beam.theta_max_rad") { theta_max = to_double(key, value); theta_span_seen = true; }
    else if (key == "beam.theta_count") { theta_count = to_long(key, value); theta_span_seen = true; }
    else if (key == "run.methods") {
      cfg.methods.clear();
      for (const auto& tok : split(value, ',')) {
        if (tok == "pre") cfg.methods.push_back(Method::pre);
        else if (tok == "post") cfg.methods.push_back(Method::post);
        else if (tok == "focus") cfg.methods.push_back(Method::focus);
        else throw config_error("run.methods: unknown method `" + tok + "`");
      }
    } else if (key == "run.nq_list") {
      cfg.nq_list.clear();
      for (const auto& tok : split(value, ',')) cfg.nq_list.push_back(static_cast<int>(to_long(key, tok)));
    } else if (key == "run.p_list") {
      cfg.p_list.clear();
      for (const auto& tok : split(value, ',')) cfg.p_list.push_back(to_double(key, tok));
    } else if (key == "run.workers") cfg.workers = static_cast<unsigned>(to_long(key, value));
    else if (key == "fdbf.n1") cfg.n_before = static_cast<int>(to_long(key, value));
    else if (key == "fdbf.n2") cfg.n_after = static_cast<int>(to_long(key, value));
    else if (key == "fdbf.band_threshold_db") cfg.band_threshold_db = to_double(key, value);
    else if (key == "fdbf.oversample") cfg.q_oversample = static_cast<int>(to_long(key, value));
    else if (key == "noise.rms") cfg.noise_rms = to_double(key, value);
    else if (key == "noise.seed") cfg.seed = static_cast<std::uint64_t>(to_long(key, value));
    else if (key == "report.log_base") {
      if (value == "2") cfg.log_base = 2.0;
      else if (value == "e") cfg.log_base = std::exp(1.0);
      else throw config_error("report.log_base: expected 2 | e");
    } else if (key == "report.nh_mode") {
      if (value == "measured") cfg.nh_mode = FilterLenMode::measured;
      else if (value == "dp") cfg.nh_mode = FilterLenMode::oversampling_product;
      else throw config_error("report.nh_mode: expected measured | dp");
    } else if (key == "output.dir") cfg.out_dir = value;
    else if (key == "output.lut_dir") cfg.lut_dir = value;
    else throw config_error(name + ":" + std::to_string(lineno) + ": unknown key `" + key + "`");
  }

  if (theta_span_seen) {
    if (theta_count < 2)
      throw config_error("beam.theta_count must be >= 2 when a theta span is given");
    cfg.thetas.clear();
    for (long i = 0; i < theta_count; ++i)
      cfg.thetas.push_back(theta_min + (theta_max - theta_min) * static_cast<double>(i) /
                                           static_cast<double>(theta_count - 1));
  }

  // validation
  if (cfg.f0 <= 0.0) throw config_error("pulse.f0_hz must be > 0");
  if (cfg.elements == 0) throw config_error("array.elements must be >= 1");
  if (!cfg.phantom_file.empty() && !std::filesystem::exists(cfg.phantom_file))
    throw config_error("phantom.file does not exist: " + cfg.phantom_file.string());
  if (cfg.n_before < 0 && cfg.n_after >= 0)
    throw config_error("fdbf.n1 and fdbf.n2 must be given together");
  if (cfg.n_before >= 0 && cfg.n_after < 0)
    throw config_error("fdbf.n1 and fdbf.n2 must be given together");
  const bool symmetric = cfg.n_before < 0;
  for (int nq : cfg.nq_list) {
    if (nq < 1) throw config_error("run.nq_list: N_q must be >= 1");
    if (symmetric && nq % 2 == 0)
      throw config_error("run.nq_list: symmetric truncation needs odd N_q (got " +
                         std::to_string(nq) + ")");
  }
  if (cfg.q_oversample < 1) throw config_error("fdbf.oversample must be >= 1");
  if (!std::is_sorted(cfg.thetas.begin(), cfg.thetas.end()))
    throw config_error("beam angles must be sorted ascending");
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  auto cfg = parse_config(ss.str(), path.string());
  if (!cfg.phantom_file.empty()) {
    auto ph = load_phantom(cfg.phantom_file);
    cfg.phantom.scatterers.insert(cfg.phantom.scatterers.end(), ph.scatterers.begin(),
                                  ph.scatterers.end());
  }
  return cfg;
}

std::string canonical_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  const auto d = [](double v) { return dsp::format_double(v); };
  out << "f0=" << d(cfg.f0) << ";B=" << d(cfg.bandwidth_or_default())
      << ";Tp=" << d(cfg.duration_or_default()) << ";win=" << static_cast<int>(cfg.window.kind)
      << ";taper=" << d(cfg.window.taper) << ";fs=" << d(cfg.fs_or_default())
      << ";T=" << d(cfg.acquisition_window) << ";M=" << cfg.elements
      << ";pitch=" << d(cfg.pitch_or_default()) << ";c=" << d(cfg.sound_speed) << ";ph=";
  for (const auto& s : cfg.phantom.scatterers)
    out << d(s.range) << ',' << d(s.theta) << ',' << d(s.reflectivity) << ',' << d(s.freq_shift)
        << '|';
  out << ";th=";
  for (double t : cfg.thetas) out << d(t) << '|';
  out << ";methods=";
  for (auto m : cfg.methods) out << method_name(m) << '|';
  out << ";nq=";
  for (int n : cfg.nq_list) out << n << '|';
  out << ";p=";
  for (double p : cfg.p_list) out << d(p) << '|';
  out << ";n1=" << cfg.n_before << ";n2=" << cfg.n_after
      << ";thr=" << d(cfg.band_threshold_db) << ";os=" << cfg.q_oversample
      << ";noise=" << d(cfg.noise_rms) << ";seed=" << cfg.seed << ";log=" << d(cfg.log_base)
      << ";nh=" << static_cast<int>(cfg.nh_mode);
  return out.str();
}

}  // namespace cebeam
