#include "specled/service.hpp"

#include <chrono>
#include <iostream>

// Eigen must be parsed before httplib pulls in <resolv.h>, which defines `_res`.
#include "specled/evaluate.hpp"
#include "specled/io.hpp"

#include <httplib.h>

namespace specled::service {

namespace {

using io::Json;

void send_error(httplib::Response &res, int status, const std::string &code, const std::string &message,
                const Json *solution = nullptr) {
    Json body{{"error", {{"code", code}, {"message", message}}}};
    if (solution) {
        body["solution"] = *solution;
    }
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

// Wraps a handler so library errors become 400s and anything else a 500.
template <typename Handler>
auto guarded(Handler handler) {
    return [handler](const httplib::Request &req, httplib::Response &res) {
        try {
            handler(req, res);
        } catch (const Error &e) {
            send_error(res, 400, std::string(to_string(e.code())), e.what());
        } catch (const nlohmann::json::exception &e) {
            send_error(res, 400, "schema_error", e.what());
        } catch (const std::exception &e) {
            send_error(res, 500, "internal", e.what());
        }
    };
}

} // namespace

struct Server::Impl {
    ServerOptions options;
    httplib::Server http;
    std::filesystem::path fixtures;

    Json parse_body(const httplib::Request &req) const { return io::parse_json_text(req.body, "request body"); }

    std::pair<SolveProblem, SolveSolution> problem_and_solution(const Json &body) const {
        if (!body.is_object() || !body.contains("problem") || !body.contains("solution")) {
            throw Error(ErrorCode::SchemaError, "body needs 'problem' and 'solution'");
        }
        return {io::problem_from_json(body.at("problem"), fixtures), io::solution_from_json(body.at("solution"))};
    }

    void routes() {
        http.Get("/healthz", [](const httplib::Request &, httplib::Response &res) {
            res.set_content(R"({"status":"ok"})", "application/json");
        });

        http.Get("/api/fixtures", guarded([this](const httplib::Request &, httplib::Response &res) {
                     res.set_content(io::fixtures_index(fixtures).dump(), "application/json");
                 }));

        http.Post("/api/solve", guarded([this](const httplib::Request &req, httplib::Response &res) {
                      const Json body = parse_body(req);
                      const SolveProblem problem = io::problem_from_json(body, fixtures);
                      int timeout_ms = options.default_timeout_ms;
                      if (body.contains("timeout_ms")) {
                          timeout_ms = std::min(body.at("timeout_ms").get<int>(), options.default_timeout_ms);
                      }
                      SolveControl control;
                      control.deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
                      const SolveSolution s = solve(problem, control);
                      if (!s.feasible) {
                          const Json j = io::solution_to_json(s);
                          send_error(res, 422, "infeasible", "no start reached a feasible point", &j);
                          return;
                      }
                      res.set_content(io::format_solution(s), "application/json");
                  }));

        http.Post("/api/evaluate", guarded([this](const httplib::Request &req, httplib::Response &res) {
                      const auto [problem, solution] = problem_and_solution(parse_body(req));
                      res.set_content(io::report_to_json(evaluate(problem, solution)).dump(2) + "\n",
                                      "application/json");
                  }));

        http.Post("/api/preview", guarded([this](const httplib::Request &req, httplib::Response &res) {
                      const auto [problem, solution] = problem_and_solution(parse_body(req));
                      const auto rows = preview_swatches(problem, solution.alpha1, solution.alpha2);
                      res.set_content(io::swatches_to_json(rows).dump(2) + "\n", "application/json");
                  }));

        if (!options.ui_dir.empty()) {
            http.set_mount_point("/", options.ui_dir.string());
        }
    }
};

Server::Server(ServerOptions options) : impl_(std::make_unique<Impl>()) {
    impl_->options = std::move(options);
    impl_->fixtures = impl_->options.fixtures_dir.empty() ? io::fixtures_dir() : impl_->options.fixtures_dir;
    impl_->routes();
}

Server::~Server() { stop(); }

int Server::bind() {
    if (impl_->options.port == 0) {
        return impl_->http.bind_to_any_port(impl_->options.host);
    }
    return impl_->http.bind_to_port(impl_->options.host, impl_->options.port) ? impl_->options.port : -1;
}

bool Server::listen() { return impl_->http.listen_after_bind(); }

void Server::stop() {
    if (impl_->http.is_running()) {
        impl_->http.stop();
    }
}

} // namespace specled::service
