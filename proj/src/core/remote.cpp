// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

// Eigen must precede httplib, whose system headers define conflicting macros.
#include "error.hpp"
#include "interfaces.hpp"
#include "wire.hpp"

#include <httplib.h>

#include <atomic>
#include <chrono>
#include <optional>
#include <thread>

namespace scene_forge {

namespace {

struct Endpoint {
    std::string origin; // scheme://host[:port]
    std::string path;   // base path without trailing slash
};

Endpoint split_endpoint(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) fail(ErrorCode::Config, "endpoint must be an http URL: " + url, "endpoint");
    if (url.compare(0, scheme, "http") != 0)
        fail(ErrorCode::Config, "only plain http endpoints are supported: " + url, "endpoint");
    const auto slash = url.find('/', scheme + 3);
    Endpoint e;
    e.origin = url.substr(0, slash);
    e.path = slash == std::string::npos ? "" : url.substr(slash);
    while (!e.path.empty() && e.path.back() == '/') e.path.pop_back();
    return e;
}

class RemoteCompleter final : public ViewCompleter {
public:
    RemoteCompleter(const std::string& endpoint, double timeout, RetryPolicy retry)
        : endpoint_(split_endpoint(endpoint)), timeout_(timeout), retry_(retry) {
        if (!(timeout > 0.0)) fail(ErrorCode::Config, "timeout must be positive", "timeout");
        if (retry.max_attempts < 1) fail(ErrorCode::Config, "max_attempts must be at least 1", "max_attempts");
    }

    std::vector<Image> complete(const std::vector<Image>& frames, const std::vector<Image>& alphas,
                                const Trajectory& trajectory) override {
        if (frames.size() != trajectory.size() || alphas.size() != trajectory.size())
            fail(ErrorCode::Shape, "frames, alphas and trajectory differ in length");
        CompletionRequest request{trajectory, frames, alphas, next_request_id()};
        const std::string body = encode_completion_request(request).dump();

        auto backoff = retry_.initial_backoff;
        for (int attempt = 1;; ++attempt) {
            std::string failure;
            if (auto frames_out = attempt_once(body, request, failure)) return std::move(*frames_out);
            if (attempt >= retry_.max_attempts)
                fail(ErrorCode::Transport,
                     failure + " (after " + std::to_string(attempt) + " attempts)", "completer");
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
    }

private:
    // Returns frames on success, nullopt with `failure` set on a retryable transport error,
    // and throws for everything else.
    std::optional<std::vector<Image>> attempt_once(const std::string& body, const CompletionRequest& request,
                                                   std::string& failure) {
        httplib::Client client(endpoint_.origin);
        const auto secs = std::chrono::duration<double>(timeout_);
        const auto us = std::chrono::duration_cast<std::chrono::microseconds>(secs);
        client.set_connection_timeout(us);
        client.set_read_timeout(us);
        client.set_write_timeout(us);

        const auto started = std::chrono::steady_clock::now();
        auto res = client.Post(endpoint_.path + "/v1/complete", body, "application/json");
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

        if (!res) {
            const auto err = res.error();
            const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                                   ((err == httplib::Error::Read || err == httplib::Error::Write) &&
                                    elapsed >= 0.9 * timeout_);
            if (timed_out)
                fail(ErrorCode::Timeout, "completer did not answer within " + std::to_string(timeout_) + " s",
                     "completer");
            failure = "transport failure: " + httplib::to_string(err);
            return std::nullopt;
        }
        if (res->status >= 500) {
            failure = "server error " + std::to_string(res->status);
            return std::nullopt;
        }
        if (res->status != 200) {
            std::string detail = res->body;
            auto parsed = nlohmann::json::parse(res->body, nullptr, false);
            if (!parsed.is_discarded() && parsed.is_object() && parsed.contains("error"))
                detail = parsed["error"].is_string() ? parsed["error"].get<std::string>() : parsed["error"].dump();
            fail(ErrorCode::Protocol, "completer rejected the request (" + std::to_string(res->status) + "): " + detail,
                 "status");
        }
        auto parsed = nlohmann::json::parse(res->body, nullptr, false);
        if (parsed.is_discarded()) fail(ErrorCode::Protocol, "response body is not valid JSON", "$");
        const auto& k = request.trajectory.intrinsics;
        return decode_completion_response(parsed, request.frames.size(), k.width, k.height, request.request_id);
    }

    std::string next_request_id() {
        static std::atomic<std::uint64_t> counter{0};
        const auto now = std::chrono::system_clock::now().time_since_epoch().count();
        return "sf-" + std::to_string(now) + "-" + std::to_string(counter.fetch_add(1));
    }

    Endpoint endpoint_;
    double timeout_;
    RetryPolicy retry_;
};

} // namespace

std::unique_ptr<ViewCompleter> remote_completer(const std::string& endpoint, double timeout_seconds,
                                                RetryPolicy retry) {
    return std::make_unique<RemoteCompleter>(endpoint, timeout_seconds, retry);
}

} // namespace scene_forge
