// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

// Eigen-using headers first; httplib pulls in system headers that clash otherwise.
#include "error.hpp"
#include "interfaces.hpp"
#include "wire.hpp"

#include <httplib.h>

#include <atomic>
#include <chrono>
#include <functional>
#include <thread>

using namespace scene_forge;
using namespace std::chrono_literals;

namespace {

const CameraIntrinsics kK{40, 40, 15.5, 11.5, 32, 24};

// In-process completer service on an ephemeral port.
class StubServer {
public:
    using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

    explicit StubServer(Handler h) {
        server_.Post("/v1/complete", [this, h](const httplib::Request& req, httplib::Response& res) {
            ++calls;
            h(req, res);
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~StubServer() {
        server_.stop();
        thread_.join();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

    std::atomic<int> calls{0};

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

void echo(const httplib::Request& req, httplib::Response& res) {
    const CompletionRequest r = decode_completion_request(nlohmann::json::parse(req.body));
    res.set_content(encode_completion_response(r.frames, r.request_id).dump(), "application/json");
}

struct Payload {
    Trajectory trajectory;
    std::vector<Image> frames, alphas;
};

Payload payload(int n) {
    Payload p;
    p.trajectory = plan_zoom_out(CameraPose::identity(), 1.0, n, kK);
    for (int i = 0; i < n; ++i) {
        Image f(32, 24, 3), a(32, 24, 1, 1.0f);
        for (std::size_t j = 0; j < f.data.size(); ++j) f.data[j] = float((5 * j + 11 * i) % 256) / 255.0f;
        p.frames.push_back(f);
        p.alphas.push_back(a);
    }
    return p;
}

RetryPolicy fast_retry(int attempts = 3) { return {attempts, 10ms}; }

Error error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e;
    }
    FAIL("expected an error");
    return Error(ErrorCode::Invariant, "unreachable");
}

} // namespace

TEST_CASE("echo round trip of a full trajectory") {
    const Payload p = payload(49);
    int frames_seen = 0;
    StubServer counting([&](const httplib::Request& req, httplib::Response& res) {
        frames_seen = int(nlohmann::json::parse(req.body)["frames"].size());
        echo(req, res);
    });
    auto c = remote_completer(counting.url(), 10.0, fast_retry());
    const auto out = c->complete(p.frames, p.alphas, p.trajectory);
    CHECK(frames_seen == 49);
    REQUIRE(out.size() == 49);
    for (int i = 0; i < 49; ++i) CHECK(out[i].data == p.frames[i].data);
}

TEST_CASE("422 surfaces the server's field path") {
    StubServer server([](const httplib::Request&, httplib::Response& res) {
        res.status = 422;
        res.set_content(R"({"error": "trajectory.poses: missing field"})", "application/json");
    });
    const Payload p = payload(3);
    auto c = remote_completer(server.url(), 5.0, fast_retry());
    const Error e = error_of([&] { c->complete(p.frames, p.alphas, p.trajectory); });
    CHECK(e.code() == ErrorCode::Protocol);
    CHECK(std::string(e.what()).find("trajectory.poses") != std::string::npos);
    CHECK(server.calls == 1);
}

TEST_CASE("truncated body is a protocol error") {
    StubServer server([](const httplib::Request& req, httplib::Response& res) {
        const CompletionRequest r = decode_completion_request(nlohmann::json::parse(req.body));
        std::string body = encode_completion_response(r.frames, r.request_id).dump();
        body.resize(body.size() / 2);
        res.set_content(body, "application/json");
    });
    const Payload p = payload(3);
    auto c = remote_completer(server.url(), 5.0, fast_retry());
    CHECK(error_of([&] { c->complete(p.frames, p.alphas, p.trajectory); }).code() == ErrorCode::Protocol);
}

TEST_CASE("wrong frame count in the response") {
    StubServer server([](const httplib::Request& req, httplib::Response& res) {
        CompletionRequest r = decode_completion_request(nlohmann::json::parse(req.body));
        r.frames.pop_back();
        res.set_content(encode_completion_response(r.frames, r.request_id).dump(), "application/json");
    });
    const Payload p = payload(3);
    auto c = remote_completer(server.url(), 5.0, fast_retry());
    const Error e = error_of([&] { c->complete(p.frames, p.alphas, p.trajectory); });
    CHECK(e.code() == ErrorCode::Protocol);
    CHECK(e.where() == "frames");
}

TEST_CASE("server errors are retried") {
    std::atomic<int> n{0};
    StubServer server([&](const httplib::Request& req, httplib::Response& res) {
        if (n++ < 2) {
            res.status = 503;
            return;
        }
        echo(req, res);
    });
    const Payload p = payload(2);
    auto c = remote_completer(server.url(), 5.0, fast_retry());
    CHECK(c->complete(p.frames, p.alphas, p.trajectory).size() == 2);
    CHECK(server.calls == 3);
}

TEST_CASE("persistent failure becomes a transport error after the attempt budget") {
    StubServer server([](const httplib::Request&, httplib::Response& res) { res.status = 500; });
    const Payload p = payload(2);
    auto c = remote_completer(server.url(), 5.0, fast_retry(3));
    const auto t0 = std::chrono::steady_clock::now();
    CHECK(error_of([&] { c->complete(p.frames, p.alphas, p.trajectory); }).code() == ErrorCode::Transport);
    CHECK(server.calls == 3);
    // Backoff doubles: 10 ms then 20 ms.
    CHECK(std::chrono::steady_clock::now() - t0 >= 30ms);
}

TEST_CASE("unreachable endpoint is a transport error") {
    // Reserved top-level domain, never resolves.
    const Payload p = payload(2);
    auto c = remote_completer("http://scene-forge.invalid:8080", 2.0, fast_retry(2));
    CHECK(error_of([&] { c->complete(p.frames, p.alphas, p.trajectory); }).code() == ErrorCode::Transport);
}

TEST_CASE("slow server times out") {
    StubServer server([](const httplib::Request& req, httplib::Response& res) {
        std::this_thread::sleep_for(1500ms);
        echo(req, res);
    });
    const Payload p = payload(2);
    auto c = remote_completer(server.url(), 0.5, fast_retry());
    CHECK(error_of([&] { c->complete(p.frames, p.alphas, p.trajectory); }).code() == ErrorCode::Timeout);
    CHECK(server.calls == 1);
}

TEST_CASE("endpoint validation") {
    CHECK(error_of([] { remote_completer("https://example.com", 1.0); }).code() == ErrorCode::Config);
    CHECK(error_of([] { remote_completer("localhost:80", 1.0); }).code() == ErrorCode::Config);
    CHECK(error_of([] { remote_completer("http://localhost:80", 0.0); }).code() == ErrorCode::Config);
}
