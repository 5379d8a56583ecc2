#include "cli/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "qmem/error.hpp"

namespace qmem::cli {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& why) {
  throw Error(ErrorCode::InvalidConfig, path + ": " + why);
}

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

const json* member(const json& obj, const std::string& key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const json& object_at(const json& obj, const std::string& key, const std::string& path) {
  static const json empty = json::object();
  const json* v = member(obj, key);
  if (v == nullptr || v->is_null()) return empty;
  if (!v->is_object()) bad(path, "must be an object");
  return *v;
}

double number(const json& obj, const std::string& key, const std::string& prefix,
              double fallback) {
  const json* v = member(obj, key);
  if (v == nullptr) return fallback;
  if (!v->is_number()) bad(join(prefix, key), "must be a number");
  return v->get<double>();
}

double required_number(const json& obj, const std::string& key, const std::string& prefix) {
  if (member(obj, key) == nullptr) bad(join(prefix, key), "is required");
  return number(obj, key, prefix, 0.0);
}

std::int64_t integer(const json& obj, const std::string& key, const std::string& prefix,
                     std::int64_t fallback) {
  const json* v = member(obj, key);
  if (v == nullptr) return fallback;
  if (!v->is_number_integer()) bad(join(prefix, key), "must be an integer");
  return v->get<std::int64_t>();
}

std::uint64_t seed_value(const json& obj, const std::string& key, const std::string& prefix,
                         std::uint64_t fallback) {
  const json* v = member(obj, key);
  if (v == nullptr) return fallback;
  if (v->is_number_unsigned()) return v->get<std::uint64_t>();
  if (v->is_number_integer() && v->get<std::int64_t>() >= 0) return v->get<std::uint64_t>();
  bad(join(prefix, key), "must be a non-negative integer");
}

std::string text(const json& obj, const std::string& key, const std::string& prefix,
                 const std::string& fallback) {
  const json* v = member(obj, key);
  if (v == nullptr) return fallback;
  if (!v->is_string()) bad(join(prefix, key), "must be a string");
  return v->get<std::string>();
}

Complex complex_entry(const json& v, const std::string& path) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  bad(path, "must be a number or a [re, im] pair");
}

CMatrix parse_matrix(const json& rows, int d, const std::string& path) {
  if (!rows.is_array() || static_cast<int>(rows.size()) != d) {
    bad(path, "must be a " + std::to_string(d) + "x" + std::to_string(d) + " array");
  }
  CMatrix m(d, d);
  for (int r = 0; r < d; ++r) {
    const std::string rp = path + "[" + std::to_string(r) + "]";
    if (!rows[r].is_array() || static_cast<int>(rows[r].size()) != d) {
      bad(rp, "must hold " + std::to_string(d) + " entries");
    }
    for (int c = 0; c < d; ++c) {
      m(r, c) = complex_entry(rows[r][c], rp + "[" + std::to_string(c) + "]");
    }
  }
  return m;
}

double probability(const json& obj, const std::string& prefix) {
  const double p = required_number(obj, "p", prefix);
  if (!(p >= 0.0 && p <= 1.0)) bad(join(prefix, "p"), "must lie in [0, 1]");
  return p;
}

KrausChannel parse_channel(const json& doc, int d) {
  const json* spec = member(doc, "channel");
  if (spec == nullptr || spec->is_null()) return identity_channel(d);
  if (spec->is_string()) {
    const auto name = spec->get<std::string>();
    if (name == "identity") return identity_channel(d);
    if (name == "null") return null_channel(d);
    bad("channel", "unknown channel '" + name + "'");
  }
  if (!spec->is_object()) bad("channel", "must be a string or an object");
  const std::string type = text(*spec, "type", "channel", "");
  if (type == "identity") return identity_channel(d);
  if (type == "null") return null_channel(d);
  if (type == "depolarizing") return depolarizing_channel(d, probability(*spec, "channel"));
  if (type == "dephasing") return dephasing_channel(d, probability(*spec, "channel"));
  if (type == "unitary") {
    const double theta = required_number(*spec, "theta", "channel");
    if (!std::isfinite(theta)) bad("channel.theta", "must be finite");
    return phase_unitary_channel(d, theta);
  }
  if (type == "kraus") {
    const json* ops = member(*spec, "operators");
    if (ops == nullptr || !ops->is_array() || ops->empty()) {
      bad("channel.operators", "must be a non-empty array of matrices");
    }
    std::vector<CMatrix> kraus;
    for (std::size_t k = 0; k < ops->size(); ++k) {
      kraus.push_back(parse_matrix((*ops)[k], d, "channel.operators[" + std::to_string(k) + "]"));
    }
    try {
      return KrausChannel(d, std::move(kraus));
    } catch (const Error& e) {
      bad("channel.operators", e.what());
    }
  }
  if (type.empty()) bad("channel.type", "is required");
  bad("channel.type", "unknown channel type '" + type + "'");
}

}  // namespace

MeasurementMode parse_mode(const std::string& value, const std::string& path) {
  if (value == "abstract") return MeasurementMode::Abstract;
  if (value == "optical-ideal") return MeasurementMode::OpticalIdeal;
  if (value == "optical-phase-only") return MeasurementMode::OpticalPhaseOnly;
  bad(path, "must be one of abstract, optical-ideal, optical-phase-only");
}

const char* to_string(MeasurementMode mode) {
  switch (mode) {
    case MeasurementMode::Abstract: return "abstract";
    case MeasurementMode::OpticalIdeal: return "optical-ideal";
    case MeasurementMode::OpticalPhaseOnly: return "optical-phase-only";
  }
  return "?";
}

StateVector parse_state(const json& spec, const std::string& path) {
  if (spec.is_string()) {
    const auto name = spec.get<std::string>();
    if (name == "L") return oam_state(Oam::L);
    if (name == "G") return oam_state(Oam::G);
    if (name == "R") return oam_state(Oam::R);
    if (name == "Psi1") return qutrit_psi1();
    if (name == "Psi2") return qutrit_psi2();
    if (name.size() == 6 && name.rfind("input", 0) == 0 && name[5] >= '1' && name[5] <= '9') {
      return canonical_input_states()[static_cast<std::size_t>(name[5] - '1')];
    }
    bad(path, "unknown state '" + name + "' (expected L, G, R, Psi1, Psi2 or input1..input9)");
  }
  if (!spec.is_array()) bad(path, "must be a state name or an amplitude array");
  if (spec.size() != 3) bad(path, "must hold 3 amplitudes");
  CVector v(3);
  for (int k = 0; k < 3; ++k) v(k) = complex_entry(spec[k], path + "[" + std::to_string(k) + "]");
  try {
    return StateVector::normalized(v);
  } catch (const Error&) {
    bad(path, "amplitudes must not all vanish");
  }
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputUnreadable("cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputUnreadable("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

RunConfig parse_run_config(const json& doc) {
  if (!doc.is_object()) bad("config", "must be a JSON object");
  RunConfig cfg;
  cfg.document = doc;

  cfg.dimension = static_cast<int>(integer(doc, "dimension", "", 3));
  if (cfg.dimension != 3) bad("dimension", "only qutrit runs (3) are supported");
  cfg.channel = parse_channel(doc, cfg.dimension);

  const json& src = object_at(doc, "source", "source");
  cfg.source.counts_per_setting =
      number(src, "counts_per_setting", "source", cfg.source.counts_per_setting);
  cfg.source.background = number(src, "background", "source", cfg.source.background);
  cfg.source.efficiency = number(src, "efficiency", "source", cfg.source.efficiency);
  cfg.source.window_s = number(src, "window_s", "source", cfg.source.window_s);
  cfg.source.seed = seed_value(src, "seed", "source", 0);
  const std::string sampling = text(src, "sampling", "source", "poisson");
  if (sampling == "poisson") {
    cfg.sampling = stats::Sampling::Poisson;
  } else if (sampling == "expected") {
    cfg.sampling = stats::Sampling::Expected;
  } else {
    bad("source.sampling", "must be poisson or expected");
  }
  cfg.source.validate();

  const json& opt = object_at(doc, "optics", "optics");
  const std::int64_t grid = integer(opt, "grid_size", "optics", cfg.optics.grid_size);
  if (grid < 0 || grid > (1 << 14)) bad("optics.grid_size", "must be a power of two >= 128");
  cfg.optics.grid_size = static_cast<int>(grid);
  cfg.optics.extent = number(opt, "extent", "optics", cfg.optics.extent);
  cfg.optics.waist = number(opt, "waist", "optics", cfg.optics.waist);
  cfg.optics.fiber_waist = number(opt, "fiber_waist", "optics", cfg.optics.fiber_waist);
  cfg.mode = parse_mode(text(opt, "mode", "optics", "abstract"), "optics.mode");
  cfg.optics.validate();

  const json& exp = object_at(doc, "experiment", "experiment");
  const std::string kind = text(exp, "kind", "experiment", "process");
  if (kind == "process") {
    cfg.kind = ExperimentKind::Process;
  } else if (kind == "state") {
    cfg.kind = ExperimentKind::State;
  } else {
    bad("experiment.kind", "must be process or state");
  }
  if (const json* st = member(exp, "state"); st != nullptr && !st->is_null()) {
    cfg.target = parse_state(*st, "experiment.state");
  }
  if (cfg.kind == ExperimentKind::State && !cfg.target) {
    bad("experiment.state", "is required for state experiments");
  }

  const json& rec = object_at(doc, "reconstruction", "reconstruction");
  const std::int64_t samples = integer(rec, "bootstrap", "reconstruction", 200);
  if (samples < 0 || samples > 100000) {
    bad("reconstruction.bootstrap", "must lie in [0, 100000]");
  }
  cfg.bootstrap_samples = static_cast<int>(samples);
  cfg.bootstrap_seed = seed_value(rec, "seed", "reconstruction", 0);

  const json& out = object_at(doc, "output", "output");
  cfg.counts_path = text(out, "counts", "output", "");
  cfg.report_path = text(out, "report", "output", "");
  cfg.modes_dir = text(out, "modes", "output", "");
  return cfg;
}

}  // namespace qmem::cli
