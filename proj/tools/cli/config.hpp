#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "qmem/channels.hpp"
#include "qmem/optics.hpp"
#include "qmem/photon_stats.hpp"
#include "qmem/qudit.hpp"

namespace qmem::cli {

enum class MeasurementMode { Abstract, OpticalIdeal, OpticalPhaseOnly };
enum class ExperimentKind { Process, State };

/// Everything a run reads from its JSON configuration. Parsing throws
/// Error(InvalidConfig) with a message that starts with the offending field
/// path, e.g. "source.efficiency: must lie in [0, 1]".
struct RunConfig {
  int dimension = 3;
  KrausChannel channel = identity_channel(3);
  stats::SourceConfig source;
  stats::Sampling sampling = stats::Sampling::Poisson;
  optics::OpticsConfig optics;
  MeasurementMode mode = MeasurementMode::Abstract;
  ExperimentKind kind = ExperimentKind::Process;
  std::optional<StateVector> target;  // state experiments
  int bootstrap_samples = 200;
  std::uint64_t bootstrap_seed = 0;
  std::string counts_path;
  std::string report_path;
  std::string modes_dir;

  /// The parsed document with command-line overrides folded in; echoed into
  /// counts files so that a reconstruction can recover the run.
  nlohmann::json document;
};

RunConfig parse_run_config(const nlohmann::json& doc);

/// A config or counts file that cannot be opened or parsed at all.
struct InputUnreadable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Reads and parses a JSON file; throws InputUnreadable.
nlohmann::json load_json_file(const std::string& path);

/// "L", "G", "R", "Psi1", "Psi2", "input1" ... "input9", or an amplitude
/// array whose entries are numbers or [re, im] pairs (rescaled to unit norm).
StateVector parse_state(const nlohmann::json& spec, const std::string& path);

MeasurementMode parse_mode(const std::string& text, const std::string& path);
const char* to_string(MeasurementMode mode);

}  // namespace qmem::cli
