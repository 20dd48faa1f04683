#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pair/error.hpp"
#include "pair/recon.hpp"
#include "pair/sim.hpp"

namespace pair::cli {

using nlohmann::json;

// Process exit codes, a stable contract.
inline constexpr int kExitConverged = 0;
inline constexpr int kExitMaxIters = 2;
inline constexpr int kExitDiverged = 3;
inline constexpr int kExitConfig = 4;
inline constexpr int kExitIo = 5;

int exit_code(ErrorKind kind);

/// Every recognized key with its default value.
json default_config();

/// Parses "a.b=value". The value is read as JSON when it parses, otherwise
/// taken as a string. The key must already exist.
void apply_override(json &config, const std::string &assignment);

/// Rejects keys absent from the defaults and values of the wrong type.
void validate_config(const json &config);

/// Defaults, then the file, then --set overrides, then --seed and --out-dir.
json resolve_config(const std::optional<std::string> &path,
                    const std::vector<std::string> &overrides,
                    std::optional<std::uint64_t> seed,
                    const std::optional<std::string> &out_dir);

/// SHA-256 hex digest of the canonical (sorted-key, compact) dump. out_dir is
/// left out, so the same run written elsewhere carries the same hash.
std::string config_hash(const json &config);

SimulationConfig simulation_config(const json &config);
ReconConfig recon_config(const json &config);

// Subcommands. Each returns its exit code; errors surface as exceptions.
int cmd_simulate(const json &config, std::ostream &log);
int cmd_recon(const json &config, std::ostream &log);
int cmd_compare(const json &config, std::ostream &log);
int cmd_metrics(const json &config, std::ostream &log);

/// Full command line: subcommand plus flags. Maps errors to exit codes.
int run(int argc, char **argv);

} // namespace pair::cli
