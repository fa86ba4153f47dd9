#pragma once

// HTTP JSON API and the command-line front end.

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>

namespace specled::service {

struct ServerOptions {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::filesystem::path ui_dir;       // static assets, optional
    std::filesystem::path fixtures_dir; // empty = io::fixtures_dir()
    int default_timeout_ms = 30000;
};

/// GET  /healthz
/// GET  /api/fixtures
/// POST /api/solve     problem JSON (+ optional "timeout_ms") -> solution
/// POST /api/evaluate  {"problem": ..., "solution": ...} -> report
/// POST /api/preview   {"problem": ..., "solution": ...} -> swatch rows
///
/// Relative paths in request bodies resolve against the fixtures directory.
class Server {
public:
    explicit Server(ServerOptions options);
    ~Server();
    Server(const Server &) = delete;
    Server &operator=(const Server &) = delete;

    /// Binds; a port of 0 picks a free one. Returns the bound port or -1.
    int bind();
    /// Blocks until stop().
    bool listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Exit codes: 0 success/feasible, 1 input error, 2 infeasible.
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace specled::service
