#include "mlhub/config.hpp"

#include <atomic>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>

namespace mlhub {

namespace {

bool is_hex32(const std::string& s) {
    if (s.size() != 32) {
        return false;
    }
    for (const char c : s) {
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) {
            return false;
        }
    }
    return true;
}

bool is_http_url(const std::string& s) {
    return s.rfind("http://", 0) == 0 || s.rfind("https://", 0) == 0;
}

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::mutex session_mutex;
std::shared_ptr<const Config> session_snapshot;  // null = not loaded yet

}  // namespace

std::filesystem::path config_home() {
    if (const char* env = std::getenv("MLHUB_HOME"); env && *env) {
        return env;
    }
    if (const char* home = std::getenv("HOME"); home && *home) {
        return home;
    }
    return std::filesystem::current_path();
}

Config default_config(const std::filesystem::path& home) {
    Config cfg;
    cfg.cachedir = home / ".openml" / "cache";
    return cfg;
}

void validate_config(const Config& cfg) {
    if (!cfg.apikey.empty() && !is_hex32(cfg.apikey)) {
        throw ConfigError("apikey must be 32 lowercase hex characters");
    }
    if (!is_http_url(cfg.server_url)) {
        throw ConfigError("server_url must be an absolute http(s) URL");
    }
    if (cfg.verbosity < 0 || cfg.verbosity > 2) {
        throw ConfigError("verbosity must be 0, 1 or 2");
    }
    if (cfg.cachedir.empty()) {
        throw ConfigError("cachedir must not be empty");
    }
}

std::filesystem::path save_config(const Config& cfg, const std::filesystem::path& home) {
    validate_config(cfg);
    const std::filesystem::path dir = home / ".openml";
    std::filesystem::create_directories(dir);
    const std::filesystem::path file = dir / "config";

    std::ostringstream out;
    out << "server_url = " << cfg.server_url << "\n";
    out << "apikey = " << cfg.apikey << "\n";
    out << "cachedir = " << cfg.cachedir.string() << "\n";
    out << "verbosity = " << cfg.verbosity << "\n";
    out << "confirm_upload = " << (cfg.confirm_upload ? "true" : "false") << "\n";

    std::ofstream f(file, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw ConfigError("cannot write " + file.string());
    }
    f << out.str();
    f.close();
    if (!f) {
        throw ConfigError("failed writing " + file.string());
    }
    return file;
}

Config load_config(const std::filesystem::path& home) {
    Config cfg = default_config(home);
    const std::filesystem::path file = home / ".openml" / "config";
    std::ifstream f(file, std::ios::binary);
    if (!f) {
        return cfg;  // no file -> pure defaults
    }
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') {
            continue;
        }
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("expected 'key = value'", lineno);
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key == "server_url") {
            cfg.server_url = value;
        } else if (key == "apikey") {
            cfg.apikey = value;
        } else if (key == "cachedir") {
            cfg.cachedir = value;
        } else if (key == "verbosity") {
            try {
                cfg.verbosity = std::stoi(value);
            } catch (const std::exception&) {
                throw ConfigError("verbosity must be an integer", lineno);
            }
        } else if (key == "confirm_upload") {
            if (value == "true") {
                cfg.confirm_upload = true;
            } else if (value == "false") {
                cfg.confirm_upload = false;
            } else {
                throw ConfigError("confirm_upload must be true or false", lineno);
            }
        } else {
            throw ConfigError("unknown configuration key '" + key + "'", lineno);
        }
    }
    try {
        validate_config(cfg);
    } catch (const ConfigError& e) {
        throw ConfigError(std::string(e.what()) + " (in " + file.string() + ")");
    }
    return cfg;
}

Config session_config() {
    std::lock_guard lock(session_mutex);
    if (!session_snapshot) {
        session_snapshot = std::make_shared<const Config>(load_config(config_home()));
    }
    return *session_snapshot;
}

Config set_config_session(const ConfigOverrides& overrides) {
    Config next = session_config();
    if (overrides.server_url) next.server_url = *overrides.server_url;
    if (overrides.apikey) next.apikey = *overrides.apikey;
    if (overrides.cachedir) next.cachedir = *overrides.cachedir;
    if (overrides.verbosity) next.verbosity = *overrides.verbosity;
    if (overrides.confirm_upload) next.confirm_upload = *overrides.confirm_upload;
    validate_config(next);  // throws before the snapshot is touched
    std::lock_guard lock(session_mutex);
    session_snapshot = std::make_shared<const Config>(next);
    return next;
}

void set_session_snapshot(const Config& cfg) {
    validate_config(cfg);
    std::lock_guard lock(session_mutex);
    session_snapshot = std::make_shared<const Config>(cfg);
}

void reset_config_session() {
    std::lock_guard lock(session_mutex);
    session_snapshot.reset();
}

}  // namespace mlhub
