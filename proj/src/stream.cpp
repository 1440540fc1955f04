#include "aumap/stream.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "aumap/dataio.hpp"
#include "aumap/error.hpp"

namespace aumap {
namespace {

std::string json_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (unsigned char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (c < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += static_cast<char>(c);
                }
        }
    }
    return out;
}

std::string error_response(std::string_view id, const char* code, std::string_view message) {
    std::string out = "{\"id\":\"";
    out += json_escape(id);
    out += "\",\"error\":{\"code\":\"";
    out += code;
    out += "\",\"message\":\"";
    out += json_escape(message);
    out += "\"}}";
    return out;
}

// Projection failures that map onto the wire's closed code set; everything
// else is reported as internal.
const char* wire_code(ErrorCode code) {
    switch (code) {
        case ErrorCode::dimension_mismatch: return "dimension_mismatch";
        case ErrorCode::non_finite_value: return "non_finite_value";
        default: return "internal";
    }
}

}  // namespace

std::string handle_request(const Projector& projector, std::string_view line) {
    nlohmann::json req;
    try {
        req = nlohmann::json::parse(line);
    } catch (const nlohmann::json::out_of_range&) {
        // Strict JSON cannot spell NaN or infinity; a number outside double
        // range is the wire-level equivalent of a non-finite coordinate.
        return error_response("", "non_finite_value", "number outside representable range");
    } catch (const nlohmann::json::parse_error&) {
        return error_response("", "parse_error", "line is not valid JSON");
    } catch (const std::exception& e) {
        return error_response("", "internal", e.what());
    }
    if (!req.is_object())
        return error_response("", "parse_error", "line is not a JSON object");

    std::string id;
    if (const auto it = req.find("id"); it != req.end() && it->is_string())
        id = it->get<std::string>();
    if (id.empty() || id.size() > 64)
        return error_response("", "parse_error",
                              "id must be a non-empty string of at most 64 bytes");

    const auto xit = req.find("x");
    if (xit == req.end() || !xit->is_array())
        return error_response(id, "parse_error", "x must be an array of numbers");
    std::vector<double> x;
    x.reserve(xit->size());
    for (const auto& v : *xit) {
        if (!v.is_number())
            return error_response(id, "parse_error", "x must be an array of numbers");
        x.push_back(v.get<double>());
    }

    try {
        const auto start = std::chrono::steady_clock::now();
        const Projection u = projector.project_point(x);
        const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(
                                std::chrono::steady_clock::now() - start)
                                .count();
        std::string out = "{\"id\":\"";
        out += json_escape(id);
        out += "\",\"u\":[";
        for (std::size_t j = 0; j < u.size(); ++j) {
            if (j) out += ',';
            out += format_double(u[j]);
        }
        out += "],\"latency_us\":";
        out += std::to_string(micros);
        out += '}';
        return out;
    } catch (const Error& e) {
        return error_response(id, wire_code(e.code()), e.what());
    } catch (const std::exception& e) {
        return error_response(id, "internal", e.what());
    }
}

void serve_stdio(const Projector& projector, std::istream& in, std::ostream& out) {
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        out << handle_request(projector, line) << '\n' << std::flush;
    }
}

StreamServer::StreamServer(const Projector& projector, const std::string& host,
                           std::uint16_t port)
    : projector_(projector) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0)
        raise(ErrorCode::bind_failure, std::string("socket: ") + std::strerror(errno));

    const int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    const std::string resolved = host == "localhost" ? "127.0.0.1" : host;
    if (::inet_pton(AF_INET, resolved.c_str(), &addr.sin_addr) != 1) {
        ::close(listen_fd_);
        listen_fd_ = -1;
        raise(ErrorCode::bind_failure, "invalid listen address '" + host + "'");
    }
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
        ::listen(listen_fd_, 64) != 0) {
        const std::string reason = std::strerror(errno);
        ::close(listen_fd_);
        listen_fd_ = -1;
        raise(ErrorCode::bind_failure, "cannot listen on " + host + ":" +
                                           std::to_string(port) + ": " + reason);
    }

    sockaddr_in bound{};
    socklen_t len = sizeof bound;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = ntohs(bound.sin_port);
}

StreamServer::~StreamServer() {
    if (listen_fd_ >= 0) ::close(listen_fd_);
}

void StreamServer::stop() {
    stopping_.store(true);
    if (listen_fd_ >= 0) ::shutdown(listen_fd_, SHUT_RDWR);
}

void StreamServer::run() {
    while (!stopping_.load()) {
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            if (errno == EINTR) continue;
            break;  // listener shut down or failed
        }
        std::lock_guard<std::mutex> lock(mutex_);
        const std::size_t slot = conns_.size();
        conns_.push_back(fd);
        threads_.emplace_back(&StreamServer::handle_connection, this, slot);
    }

    // Graceful shutdown: stop reading on every live connection; each thread
    // finishes the requests it already received, flushes, and exits.
    {
        std::lock_guard<std::mutex> lock(mutex_);
        for (const int fd : conns_)
            if (fd >= 0) ::shutdown(fd, SHUT_RD);
    }
    for (std::thread& t : threads_) t.join();
    threads_.clear();
}

void StreamServer::handle_connection(std::size_t slot) {
    int fd;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        fd = conns_[slot];
    }

    bool writable = true;
    const auto send_all = [&](const std::string& data) {
        std::size_t sent = 0;
        while (writable && sent < data.size()) {
            const ssize_t n =
                ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
            if (n < 0) {
                if (errno == EINTR) continue;
                writable = false;  // peer gone; keep draining input silently
            } else {
                sent += static_cast<std::size_t>(n);
            }
        }
    };
    const auto respond = [&](std::string_view line) {
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        send_all(handle_request(projector_, line) + "\n");
    };

    std::string inbox;
    char buf[4096];
    for (;;) {
        const ssize_t n = ::recv(fd, buf, sizeof buf, 0);
        if (n > 0) {
            inbox.append(buf, static_cast<std::size_t>(n));
            std::size_t start = 0;
            for (std::size_t nl; (nl = inbox.find('\n', start)) != std::string::npos;
                 start = nl + 1)
                respond(std::string_view(inbox).substr(start, nl - start));
            inbox.erase(0, start);
        } else if (n == 0) {
            break;  // EOF (or SHUT_RD during shutdown)
        } else {
            if (errno == EINTR) continue;
            break;
        }
    }
    if (!inbox.empty()) respond(inbox);  // final line without trailing newline

    // Unregister before closing so the shutdown loop never touches a
    // recycled descriptor.
    {
        std::lock_guard<std::mutex> lock(mutex_);
        conns_[slot] = -1;
    }
    ::close(fd);
}

}  // namespace aumap
