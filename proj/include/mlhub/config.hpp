#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "mlhub/errors.hpp"

namespace mlhub {

class ConfigError : public Error {
  public:
    explicit ConfigError(const std::string& message, std::size_t line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
          line_(line) {}

    std::size_t line() const { return line_; }

  private:
    std::size_t line_;  // 0 when not tied to a file line
};

struct Config {
    std::string server_url = "http://localhost:8080";
    std::string apikey;  // empty = anonymous; otherwise 32 lowercase hex chars
    std::filesystem::path cachedir;
    int verbosity = 1;  // 0, 1 or 2
    bool confirm_upload = false;

    bool operator==(const Config&) const = default;
};

/// Partial overrides for set_config_session; unset fields keep their value.
struct ConfigOverrides {
    std::optional<std::string> server_url;
    std::optional<std::string> apikey;
    std::optional<std::filesystem::path> cachedir;
    std::optional<int> verbosity;
    std::optional<bool> confirm_upload;
};

/// The user's config home: $MLHUB_HOME if set, else $HOME, else the current directory.
std::filesystem::path config_home();

/// Built-in defaults for the given home (cachedir = <home>/.openml/cache).
Config default_config(const std::filesystem::path& home);

/// Throws ConfigError if any field is out of contract (bad apikey, bad URL, ...).
void validate_config(const Config& cfg);

/// Write <home>/.openml/config, creating the directory if needed. Returns the
/// file path. Saving the same config twice yields byte-identical files.
std::filesystem::path save_config(const Config& cfg, const std::filesystem::path& home);

/// File contents merged over built-in defaults; a missing file yields pure
/// defaults. Unknown keys and malformed lines raise ConfigError with the line.
Config load_config(const std::filesystem::path& home);

/// Current in-process config: the last loaded/overridden snapshot. Starts as
/// load_config(config_home()) on first use.
Config session_config();

/// Apply validated overrides to the in-process config only; the file on disk
/// is untouched. On validation failure the previous session config is kept.
Config set_config_session(const ConfigOverrides& overrides);

/// Replace the whole in-process snapshot (used by the CLI after loading).
void set_session_snapshot(const Config& cfg);

/// Drop the in-process snapshot; next session_config() reloads from disk.
void reset_config_session();

}  // namespace mlhub
