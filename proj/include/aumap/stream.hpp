#pragma once

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "aumap/projector.hpp"

namespace aumap {

// Handles one newline-delimited JSON request line and returns the response
// line (no trailing newline). Never throws: every failure becomes an in-band
// error response with one of the codes parse_error, dimension_mismatch,
// non_finite_value, internal. Deterministic except for latency_us.
//
// Request:  {"id": "<non-empty, <=64 bytes>", "x": [numbers...]}
// Success:  {"id": "...", "u": [...], "latency_us": N}
// Failure:  {"id": "...", "error": {"code": "...", "message": "..."}}
// Unknown request fields are ignored; numbers are emitted with 17
// significant digits.
std::string handle_request(const Projector& projector, std::string_view line);

// Reads request lines from `in` until EOF, writing one response line each.
void serve_stdio(const Projector& projector, std::istream& in, std::ostream& out);

// TCP transport: one thread per connection, responses in request order per
// connection, malformed lines answered in-band, connections never dropped by
// the server. The projector is shared read-only across connections.
class StreamServer {
public:
    // Binds and listens immediately; port 0 picks an ephemeral port.
    StreamServer(const Projector& projector, const std::string& host, std::uint16_t port);
    ~StreamServer();
    StreamServer(const StreamServer&) = delete;
    StreamServer& operator=(const StreamServer&) = delete;

    std::uint16_t port() const noexcept { return port_; }

    // Accept loop; returns after stop(). In-flight requests complete and
    // their responses are flushed before connection threads are joined.
    void run();

    // Async-signal-safe: flips the stop flag and shuts down the listener.
    void stop();

private:
    void handle_connection(std::size_t slot);

    const Projector& projector_;
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::atomic<bool> stopping_{false};
    std::mutex mutex_;                // guards conns_ and threads_
    std::vector<int> conns_;          // -1 once a connection has closed
    std::vector<std::thread> threads_;
};

}  // namespace aumap
