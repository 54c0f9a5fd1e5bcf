#pragma once

#include <memory>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "personae/service/server.hpp"

namespace testing_support {

/// A Service mounted on a loopback server with an ephemeral port.
class LocalService {
public:
    explicit LocalService(personae::service::ServiceDeps deps) : service_(std::move(deps)) {
        service_.mount(server_);
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~LocalService() {
        server_.stop();
        thread_.join();
    }
    LocalService(const LocalService&) = delete;
    LocalService& operator=(const LocalService&) = delete;

    personae::service::Service& service() { return service_; }

    httplib::Client client(const std::string& token = {}) const {
        httplib::Client c("127.0.0.1", port_);
        c.set_read_timeout(30, 0);
        if (!token.empty()) c.set_bearer_token_auth(token);
        return c;
    }

private:
    personae::service::Service service_;
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

/// Drops fields that differ between otherwise identical runs: wall-clock
/// timings and retrieval timestamps.
inline nlohmann::json without_volatile(nlohmann::json j) {
    if (j.is_object()) {
        for (const char* key : {"timing", "elapsed_ms", "retrieved_at", "created_at"}) j.erase(key);
        for (auto it = j.begin(); it != j.end(); ++it) *it = without_volatile(*it);
    } else if (j.is_array()) {
        for (auto& v : j) v = without_volatile(v);
    }
    return j;
}

} // namespace testing_support
