#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace qmem::cli {

// Process exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUnreadableConfig = 2;
inline constexpr int kExitInvalidParameter = 3;
inline constexpr int kExitIncompleteSettings = 4;
inline constexpr int kExitDegenerateData = 5;

struct CommandOptions {
  std::string config_path;
  std::string counts_path;
  std::string out_path;
  std::string state;  // modes: state name or JSON amplitude array
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
};

// Each command writes its outputs through a temporary file and renames it
// into place, so a failing run leaves no partial output behind. Progress goes
// to `log`, diagnostics to `err`; the return value is the exit status.

/// Config -> counts file (81 records for process runs, 9 for state runs).
int run_simulate(const CommandOptions& opts, std::ostream& log, std::ostream& err);

/// Counts file -> JSON report with chi, eigenvalue diagnostics and fidelity.
int run_reconstruct_process(const CommandOptions& opts, std::ostream& log, std::ostream& err);

/// Counts file -> JSON report with rho and the fidelity to the target state.
int run_reconstruct_state(const CommandOptions& opts, std::ostream& log, std::ostream& err);

/// State -> intensity and phase grids of the mask, Fourier and image planes.
int run_modes(const CommandOptions& opts, std::ostream& log, std::ostream& err);

}  // namespace qmem::cli
