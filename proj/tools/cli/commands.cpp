#include "cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

#include "cli/config.hpp"
#include "qmem/counts_io.hpp"
#include "qmem/optics.hpp"
#include "qmem/tomography.hpp"

namespace qmem::cli {

using nlohmann::json;
using ordered = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// output helpers

// Fixed 9 significant digits; nlohmann then prints the shortest round-trip
// form of the rounded value, so reports are stable byte streams.
double round9(double v) {
  if (!std::isfinite(v)) return v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  const double r = std::strtod(buf, nullptr);
  return r == 0.0 ? 0.0 : r;
}

void append_number(std::string& out, double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.9g", v == 0.0 ? 0.0 : v);
  out.append(buf, static_cast<std::size_t>(n));
}

ordered complex_matrix(const CMatrix& m) {
  ordered rows = ordered::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ordered row = ordered::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back({round9(m(r, c).real()), round9(m(r, c).imag())});
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered complex_vector(const CVector& v) {
  ordered out = ordered::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    out.push_back({round9(v(k).real()), round9(v(k).imag())});
  }
  return out;
}

struct WriteFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Writes every file to "<path>.partial" first and renames only when all of
// them are complete.
class StagedOutput {
 public:
  StagedOutput() = default;
  StagedOutput(const StagedOutput&) = delete;
  StagedOutput& operator=(const StagedOutput&) = delete;
  ~StagedOutput() {
    std::error_code ec;
    for (const auto& [tmp, dest] : staged_) fs::remove(tmp, ec);
  }

  void add(const fs::path& dest, const std::function<void(std::ostream&)>& writer) {
    fs::path tmp = dest;
    tmp += ".partial";
    staged_.emplace_back(tmp, dest);
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw WriteFailed("cannot write '" + dest.string() + "'");
    writer(os);
    os.flush();
    if (!os) throw WriteFailed("error while writing '" + dest.string() + "'");
  }

  void commit() {
    for (const auto& [tmp, dest] : staged_) fs::rename(tmp, dest);
    staged_.clear();
  }

 private:
  std::vector<std::pair<fs::path, fs::path>> staged_;
};

void write_json_file(const std::string& path, const ordered& doc) {
  StagedOutput out;
  out.add(path, [&](std::ostream& os) { os << doc.dump(2) << '\n'; });
  out.commit();
}

// ---------------------------------------------------------------------------
// error handling

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::IncompleteData: return kExitIncompleteSettings;
    case ErrorCode::DegenerateData: return kExitDegenerateData;
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidDimension:
    case ErrorCode::NotNormalized: return kExitInvalidParameter;
    default: return kExitFailure;
  }
}

int guarded(std::ostream& err, const std::function<void()>& body) {
  try {
    body();
    return kExitOk;
  } catch (const InputUnreadable& e) {
    err << "error: " << e.what() << '\n';
    return kExitUnreadableConfig;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

[[noreturn]] void missing(const std::string& what) {
  throw Error(ErrorCode::InvalidConfig, what);
}

// ---------------------------------------------------------------------------
// configuration plumbing

json with_overrides(json doc, const CommandOptions& opts) {
  if (opts.seed) doc["source"]["seed"] = *opts.seed;
  if (opts.mode) doc["optics"]["mode"] = *opts.mode;
  return doc;
}

CountsFile load_counts(const std::string& path) {
  if (path.empty()) missing("--counts: a counts file is required");
  std::ifstream in(path);
  if (!in) throw InputUnreadable("cannot open counts file '" + path + "'");
  try {
    return read_counts(in);
  } catch (const Error& e) {
    throw InputUnreadable("counts file '" + path + "': " + e.what());
  }
}

// The explicit --config wins; otherwise the configuration echoed into the
// counts file; otherwise defaults.
RunConfig reconstruction_config(const CommandOptions& opts, const CountsFile& counts) {
  json doc = json::object();
  if (!opts.config_path.empty()) {
    doc = load_json_file(opts.config_path);
  } else if (const std::string echoed = counts.meta("config"); !echoed.empty()) {
    try {
      doc = json::parse(echoed);
    } catch (const json::parse_error&) {
      throw InputUnreadable("counts file '" + opts.counts_path + "': config header is not JSON");
    }
  }
  return parse_run_config(with_overrides(std::move(doc), opts));
}

optics::Modulation modulation_of(MeasurementMode mode) {
  return mode == MeasurementMode::OpticalPhaseOnly ? optics::Modulation::PhaseOnly
                                                   : optics::Modulation::Ideal;
}

std::uint64_t bootstrap_seed(const CommandOptions& opts, const RunConfig& cfg) {
  return opts.seed ? *opts.seed : cfg.bootstrap_seed;
}

ordered bootstrap_entry(const BootstrapSummary& b, std::uint64_t seed) {
  ordered out;
  out["samples"] = b.samples;
  out["seed"] = seed;
  out["mean"] = round9(b.mean);
  out["stddev"] = round9(b.stddev);
  return out;
}

// ---------------------------------------------------------------------------
// grid export

void write_grid(std::ostream& os, const optics::RealGrid& g, double extent) {
  std::string line;
  line.reserve(static_cast<std::size_t>(g.cols()) * 16);
  os << g.rows() << ' ';
  line.clear();
  append_number(line, extent);
  os << line << '\n';
  for (Eigen::Index r = 0; r < g.rows(); ++r) {
    line.clear();
    for (Eigen::Index c = 0; c < g.cols(); ++c) {
      if (c > 0) line.push_back(' ');
      append_number(line, g(r, c));
    }
    line.push_back('\n');
    os << line;
  }
}

StateVector state_from_option(const std::string& spec) {
  const auto first = spec.find_first_not_of(" \t");
  if (first != std::string::npos && spec[first] == '[') {
    json parsed;
    try {
      parsed = json::parse(spec);
    } catch (const json::parse_error&) {
      throw Error(ErrorCode::InvalidConfig, "--state: amplitude array is not valid JSON");
    }
    return parse_state(parsed, "--state");
  }
  return parse_state(json(spec), "--state");
}

}  // namespace

// ---------------------------------------------------------------------------
// commands

int run_simulate(const CommandOptions& opts, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    if (opts.config_path.empty()) missing("--config: a configuration file is required");
    const RunConfig cfg = parse_run_config(with_overrides(load_json_file(opts.config_path), opts));
    const std::string out = opts.out_path.empty() ? cfg.counts_path : opts.out_path;
    if (out.empty()) missing("output.counts: no counts path given (use --out)");

    const auto settings = MeasurementSettings::canonical();
    const bool optical = cfg.mode != MeasurementMode::Abstract;
    std::vector<CountRecord> records;
    if (cfg.kind == ExperimentKind::Process) {
      const ProbabilityTable table =
          optical ? optics::optical_probability_table(cfg.channel, settings, cfg.optics,
                                                      modulation_of(cfg.mode))
                  : predict_probabilities(cfg.channel, settings);
      records = stats::simulate_counts(table, cfg.source, cfg.sampling);
    } else {
      Eigen::VectorXd p;
      if (optical) {
        const optics::OpticalMeasurement om(settings.measurement_states(), cfg.optics,
                                            modulation_of(cfg.mode));
        p = om.channel_probabilities(cfg.channel, *cfg.target);
      } else {
        p = predict_state_probabilities(apply_channel_kraus(cfg.channel, projector_of(*cfg.target)),
                                        settings);
      }
      records = stats::simulate_state_counts(p, cfg.source, cfg.sampling);
    }

    CountsFile file;
    file.metadata = {
        {"kind", cfg.kind == ExperimentKind::Process ? "process" : "state"},
        {"mode", to_string(cfg.mode)},
        {"sampling", cfg.sampling == stats::Sampling::Poisson ? "poisson" : "expected"},
        {"seed", std::to_string(cfg.source.seed)},
        {"config", cfg.document.dump()},
    };
    file.records = std::move(records);
    StagedOutput staged;
    staged.add(out, [&](std::ostream& os) { write_counts(os, file); });
    staged.commit();
    log << "wrote " << file.records.size() << " count records to " << out << '\n';
  });
}

int run_reconstruct_process(const CommandOptions& opts, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const CountsFile counts = load_counts(opts.counts_path);
    const RunConfig cfg = reconstruction_config(opts, counts);
    const std::string out = opts.out_path.empty() ? cfg.report_path : opts.out_path;
    if (out.empty()) missing("output.report: no report path given (use --out)");

    const ProcessTomography qpt(MeasurementSettings::canonical());
    const auto rec = reconstruct_process(counts.records, qpt);
    const auto ideal = ideal_storage_chi(qpt.settings().basis());

    ordered report;
    report["kind"] = "process";
    report["dimension"] = cfg.dimension;
    report["records"] = counts.records.size();
    report["chi"] = complex_matrix(rec.physical.matrix());
    report["chi_raw"] = complex_matrix(rec.raw.matrix());
    report["trace"] = {{"raw", round9(rec.raw.trace())}, {"physical", round9(rec.physical.trace())}};
    report["min_eigenvalue"] = {{"raw", round9(rec.raw_min_eigenvalue)},
                                {"physical", round9(rec.physical_min_eigenvalue)}};
    report["process_fidelity"] = round9(process_fidelity(rec.physical, ideal));
    if (cfg.document.contains("channel")) {
      const auto truth = chi_from_kraus(cfg.channel, qpt.settings().basis());
      if (truth.trace() > 1e-12) {
        report["channel_fidelity"] = round9(process_fidelity(rec.physical, truth));
      }
    }
    if (cfg.bootstrap_samples > 0) {
      const auto seed = bootstrap_seed(opts, cfg);
      const auto b = bootstrap_process_fidelity(counts.records, qpt, ideal, cfg.bootstrap_samples,
                                                seed);
      report["bootstrap"] = bootstrap_entry(b, seed);
    }
    write_json_file(out, report);
    log << "process fidelity " << report["process_fidelity"].dump() << "; report written to "
        << out << '\n';
  });
}

int run_reconstruct_state(const CommandOptions& opts, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const CountsFile counts = load_counts(opts.counts_path);
    const RunConfig cfg = reconstruction_config(opts, counts);
    const std::string out = opts.out_path.empty() ? cfg.report_path : opts.out_path;
    if (out.empty()) missing("output.report: no report path given (use --out)");

    const auto settings = MeasurementSettings::canonical();
    const auto rec = reconstruct_state(counts.records, settings);

    ordered report;
    report["kind"] = "state";
    report["dimension"] = cfg.dimension;
    report["records"] = counts.records.size();
    report["rho"] = complex_matrix(rec.physical.matrix());
    report["rho_raw"] = complex_matrix(rec.raw.matrix());
    report["min_eigenvalue"] = {{"raw", round9(rec.raw_min_eigenvalue)},
                                {"physical", round9(rec.physical_min_eigenvalue)}};
    if (cfg.target) {
      const auto target = projector_of(*cfg.target);
      report["target"] = complex_vector(cfg.target->amplitudes());
      report["state_fidelity"] = round9(state_fidelity(rec.physical, target));
      if (cfg.bootstrap_samples > 0) {
        const auto seed = bootstrap_seed(opts, cfg);
        const auto b =
            bootstrap_state_fidelity(counts.records, settings, target, cfg.bootstrap_samples, seed);
        report["bootstrap"] = bootstrap_entry(b, seed);
      }
    }
    write_json_file(out, report);
    log << "state report written to " << out << '\n';
  });
}

int run_modes(const CommandOptions& opts, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    json doc = opts.config_path.empty() ? json::object() : load_json_file(opts.config_path);
    if (!opts.state.empty()) {
      // the command-line state replaces whatever the config declares
      if (doc.contains("experiment") && doc["experiment"].is_object()) {
        doc["experiment"].erase("state");
      }
    }
    const RunConfig cfg = parse_run_config(with_overrides(std::move(doc), opts));
    StateVector state = oam_state(Oam::G);
    if (!opts.state.empty()) {
      state = state_from_option(opts.state);
    } else if (cfg.target) {
      state = *cfg.target;
    } else {
      missing("--state: a state is required");
    }
    const std::string dir = opts.out_path.empty() ? cfg.modes_dir : opts.out_path;
    if (dir.empty()) missing("output.modes: no output directory given (use --out)");
    fs::create_directories(dir);

    const auto mask = optics::prepared_field(state, cfg.optics, modulation_of(cfg.mode));
    const auto fourier = optics::lens_fourier(mask);
    const auto image = optics::four_f_image(mask);
    const std::pair<const char*, const optics::FieldGrid*> planes[] = {
        {"mask", &mask}, {"fourier", &fourier}, {"image", &image}};

    StagedOutput staged;
    for (const auto& [name, field] : planes) {
      const optics::RealGrid intensity = field->samples().abs2();
      const optics::RealGrid phase = optics::phase_mask_of(*field).phases();
      const double extent = field->extent();
      staged.add(fs::path(dir) / (std::string(name) + "_intensity.txt"),
                 [&](std::ostream& os) { write_grid(os, intensity, extent); });
      staged.add(fs::path(dir) / (std::string(name) + "_phase.txt"),
                 [&](std::ostream& os) { write_grid(os, phase, extent); });
    }
    staged.commit();
    log << "wrote 6 grids (" << cfg.optics.grid_size << "x" << cfg.optics.grid_size << ") to "
        << dir << '\n';
  });
}

}  // namespace qmem::cli
