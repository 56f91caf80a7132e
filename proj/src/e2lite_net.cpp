#include "stormsim/e2lite_net.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <iostream>
#include <thread>

namespace stormsim::e2lite {

using std::chrono::milliseconds;
using std::chrono::steady_clock;

namespace {

void write_all(int fd, const std::uint8_t* data, std::size_t len) {
    std::size_t sent = 0;
    while (sent < len) {
        const ssize_t n = ::send(fd, data + sent, len - sent, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            fail(Errc::io_error, std::string("send: ") + std::strerror(errno));
        }
        sent += static_cast<std::size_t>(n);
    }
}

/// Reads exactly len bytes. Returns false on a clean EOF at a frame boundary
/// (offset 0); throws on mid-frame EOF or errors.
bool read_exact(int fd, std::uint8_t* data, std::size_t len) {
    std::size_t got = 0;
    while (got < len) {
        const ssize_t n = ::recv(fd, data + got, len - got, 0);
        if (n == 0) {
            if (got == 0) return false;
            fail(Errc::io_error, "connection closed mid-frame");
        }
        if (n < 0) {
            if (errno == EINTR) continue;
            fail(Errc::io_error, std::string("recv: ") + std::strerror(errno));
        }
        got += static_cast<std::size_t>(n);
    }
    return true;
}

bool wait_readable(int fd, milliseconds timeout) {
    pollfd pfd{fd, POLLIN, 0};
    while (true) {
        const int rc = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
        if (rc < 0) {
            if (errno == EINTR) continue;
            fail(Errc::io_error, std::string("poll: ") + std::strerror(errno));
        }
        return rc > 0;
    }
}

}  // namespace

FrameConn::~FrameConn() { close(); }

FrameConn::FrameConn(FrameConn&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

FrameConn& FrameConn::operator=(FrameConn&& other) noexcept {
    if (this != &other) {
        close();
        fd_ = other.fd_;
        other.fd_ = -1;
    }
    return *this;
}

void FrameConn::close() {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

void FrameConn::send(const Message& msg) {
    if (fd_ < 0) fail(Errc::io_error, "send on a closed connection");
    const auto frame = encode(msg);
    write_all(fd_, frame.data(), frame.size());
}

std::optional<Message> FrameConn::recv(milliseconds timeout) {
    if (fd_ < 0) fail(Errc::io_error, "recv on a closed connection");
    if (!wait_readable(fd_, timeout)) return std::nullopt;

    std::uint8_t len_buf[4];
    if (!read_exact(fd_, len_buf, 4)) fail(Errc::io_error, "connection closed");
    const std::uint32_t payload = (std::uint32_t(len_buf[0]) << 24) |
                                  (std::uint32_t(len_buf[1]) << 16) |
                                  (std::uint32_t(len_buf[2]) << 8) | std::uint32_t(len_buf[3]);
    if (payload > kMaxFrameBytes) fail(Errc::frame_too_large, "announced frame exceeds 1 MiB");

    std::vector<std::uint8_t> frame(4 + payload);
    std::memcpy(frame.data(), len_buf, 4);
    if (payload > 0 && !read_exact(fd_, frame.data() + 4, payload))
        fail(Errc::io_error, "connection closed mid-frame");
    return decode(frame);
}

// ---------------------------------------------------------------------------

Server::Server(std::uint16_t port, std::uint32_t cell_id, std::int64_t window_ms,
               Timeouts timeouts)
    : cell_id_(cell_id), window_ms_(window_ms), timeouts_(timeouts) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) fail(Errc::io_error, std::string("socket: ") + std::strerror(errno));
    const int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(port);
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0)
        fail(Errc::io_error, std::string("bind: ") + std::strerror(errno));
    if (::listen(listen_fd_, 1) < 0)
        fail(Errc::io_error, std::string("listen: ") + std::strerror(errno));

    socklen_t len = sizeof(addr);
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
}

void Server::send(Message msg) {
    msg.seq = ++tx_seq_;
    conn_.send(msg);
}

void Server::drop_client() {
    conn_.close();
    subscribed_ = false;
}

void Server::accept_pending(milliseconds timeout) {
    if (conn_.open() || listen_fd_ < 0) return;
    if (!wait_readable(listen_fd_, timeout)) return;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) return;
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    conn_ = FrameConn(fd);
    last_rx_ = steady_clock::now();
}

void Server::handle(const Message& msg) {
    last_rx_ = steady_clock::now();
    switch (msg.type) {
        case MsgType::subscribe: {
            if (msg.cell_id != cell_id_) {
                send(make_error(msg.cell_id, 0, "unknown_cell",
                                "this endpoint serves cell " + std::to_string(cell_id_)));
                return;
            }
            if (subscribed_) {
                send(make_error(cell_id_, 0, "duplicate_subscription",
                                "subscription already active"));
                return;
            }
            subscribed_ = true;
            AckBody ack;
            ack.window_ms = window_ms_;  // the gNB window cadence is authoritative
            send(make_ack(cell_id_, 0, ack));
            break;
        }
        case MsgType::heartbeat:
            break;  // liveness only
        case MsgType::control:
            // Standalone controls (outside a window exchange) are rejected
            // unless subscribed; exchange_window consumes in-band ones.
            if (!subscribed_ || msg.cell_id != cell_id_) {
                send(make_error(msg.cell_id, 0, "unknown_cell", "no active subscription"));
            }
            break;
        case MsgType::error:
            std::cerr << "[e2lite] peer error: " << msg.body.dump() << "\n";
            break;
        default:
            send(make_error(cell_id_, 0, "unexpected_type", to_string(msg.type)));
            break;
    }
}

void Server::poll(milliseconds budget) {
    accept_pending(conn_.open() ? milliseconds{0} : budget);
    if (!conn_.open()) return;
    try {
        while (auto msg = conn_.recv(milliseconds{0})) handle(*msg);
    } catch (const Error& e) {
        if (e.code() == Errc::io_error) {
            drop_client();
        } else if (e.code() == Errc::unknown_version) {
            send(make_error(cell_id_, 0, "unsupported_version", e.what()));
        } else if (e.code() == Errc::unknown_type || e.code() == Errc::malformed_body ||
                   e.code() == Errc::frame_too_large) {
            send(make_error(cell_id_, 0, std::string(to_string(e.code())), e.what()));
        } else {
            throw;
        }
    }
}

bool Server::wait_for_subscription(milliseconds timeout) {
    const auto deadline = steady_clock::now() + timeout;
    while (steady_clock::now() < deadline) {
        accept_pending(milliseconds{50});
        if (conn_.open()) {
            try {
                if (auto msg = conn_.recv(milliseconds{50})) handle(*msg);
            } catch (const Error& e) {
                if (e.code() == Errc::io_error) drop_client();
                else if (e.code() == Errc::unknown_version)
                    send(make_error(cell_id_, 0, "unsupported_version", e.what()));
                else throw;
            }
        }
        if (subscribed_) return true;
    }
    return subscribed_;
}

std::optional<std::vector<Centroid>> Server::exchange_window(const WindowKpm& kpm) {
    if (!subscribed_) return std::nullopt;
    try {
        send(make_indication(cell_id_, 0, kpm));
        const auto start = steady_clock::now();
        while (true) {
            auto msg = conn_.recv(milliseconds{50});
            if (!msg) {
                const auto silent = std::chrono::duration_cast<milliseconds>(
                    steady_clock::now() - std::max(last_rx_, start));
                if (!degraded_ && silent >= timeouts_.degraded) {
                    degraded_ = true;
                    std::cerr << "[e2lite] control loop degraded: no traffic for "
                              << silent.count() << " ms\n";
                }
                if (silent >= timeouts_.hard) {
                    std::cerr << "[e2lite] dropping unresponsive subscriber\n";
                    drop_client();
                    return std::nullopt;
                }
                continue;
            }
            if (msg->type == MsgType::control && msg->cell_id == cell_id_) {
                last_rx_ = steady_clock::now();
                degraded_ = false;
                return msg->body.get<ControlBody>().centroids;
            }
            handle(*msg);
        }
    } catch (const Error& e) {
        if (e.code() == Errc::io_error) {
            drop_client();
            return std::nullopt;
        }
        throw;
    }
}

void Server::send_control_ack(std::uint64_t window_id, std::size_t blocklist_size) {
    if (!conn_.open()) return;
    AckBody ack;
    ack.window_id = window_id;
    ack.blocklist_size = blocklist_size;
    try {
        send(make_ack(cell_id_, 0, ack));
    } catch (const Error&) {
        drop_client();
    }
}

void Server::shutdown() {
    drop_client();
    if (listen_fd_ >= 0) {
        ::close(listen_fd_);
        listen_fd_ = -1;
    }
}

LoopResponse ServerLoop::on_window(const WindowKpm& kpm) {
    auto centroids = server_.exchange_window(kpm);
    if (!centroids) return {};
    return {std::nullopt, std::move(*centroids)};
}

void ServerLoop::on_control_applied(std::uint64_t window_id, std::size_t blocklist_size) {
    server_.send_control_ack(window_id, blocklist_size);
}

// ---------------------------------------------------------------------------

void Client::send(Message msg) {
    msg.seq = ++tx_seq_;
    conn_.send(msg);
}

void Client::connect(const std::string& host, std::uint16_t port, milliseconds retry_budget) {
    const auto deadline = steady_clock::now() + retry_budget;
    while (true) {
        const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd < 0) fail(Errc::io_error, std::string("socket: ") + std::strerror(errno));
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(port);
        if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
            ::close(fd);
            fail(Errc::io_error, "bad host address " + host);
        }
        if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0) {
            const int one = 1;
            ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
            conn_ = FrameConn(fd);
            return;
        }
        ::close(fd);
        if (steady_clock::now() >= deadline)
            fail(Errc::io_error, "cannot connect to " + host + ":" + std::to_string(port));
        std::this_thread::sleep_for(milliseconds{50});
    }
}

std::optional<Message> Client::recv_app(milliseconds total_budget) {
    const auto deadline = steady_clock::now() + total_budget;
    auto last_traffic = steady_clock::now();
    while (true) {
        const auto now = steady_clock::now();
        if (now >= deadline) return std::nullopt;
        if (now - last_heartbeat_ >= timeouts_.heartbeat) {
            send(make_heartbeat(0, 0));
            last_heartbeat_ = now;
        }
        auto msg = conn_.recv(milliseconds{50});
        if (!msg) {
            const auto silent =
                std::chrono::duration_cast<milliseconds>(steady_clock::now() - last_traffic);
            if (!degraded_ && silent >= timeouts_.degraded) {
                degraded_ = true;
                std::cerr << "[e2lite] xapp degraded: no traffic for " << silent.count()
                          << " ms\n";
            }
            continue;
        }
        last_traffic = steady_clock::now();
        degraded_ = false;
        if (msg->seq > last_rx_seq_) last_rx_seq_ = msg->seq;
        if (msg->type == MsgType::heartbeat) continue;
        return msg;
    }
}

Message Client::request(Message msg) {
    send(std::move(msg));
    auto reply = recv_app(timeouts_.hard);
    if (!reply) fail(Errc::io_error, "no reply from server");
    if (reply->type == MsgType::error) {
        const auto body = reply->body.get<ErrorBody>();
        if (body.code == "unknown_cell") fail(Errc::unknown_cell, body.message);
        if (body.code == "duplicate_subscription") fail(Errc::duplicate_subscription, body.message);
        fail(Errc::io_error, body.code + ": " + body.message);
    }
    return *reply;
}

std::int64_t Client::subscribe(std::uint32_t cell_id, std::int64_t window_ms) {
    const auto reply = request(make_subscribe(cell_id, 0, window_ms));
    if (reply.type != MsgType::subscribe_ack)
        fail(Errc::io_error, std::string("unexpected reply ") + to_string(reply.type));
    const auto ack = reply.body.get<AckBody>();
    return ack.window_ms.value_or(window_ms);
}

AckBody Client::send_control(std::uint32_t cell_id, const std::vector<Centroid>& centroids) {
    const auto reply = request(make_control(cell_id, 0, centroids));
    if (reply.type != MsgType::subscribe_ack)
        fail(Errc::io_error, std::string("unexpected reply ") + to_string(reply.type));
    return reply.body.get<AckBody>();
}

std::vector<Client::VerdictRecord> Client::run_detector_loop(std::uint32_t cell_id,
                                                             Detector& detector) {
    std::vector<VerdictRecord> verdicts;
    const std::int64_t window_ms = detector.params().window_ms;
    while (true) {
        std::optional<Message> msg;
        try {
            msg = recv_app(timeouts_.hard);
        } catch (const Error& e) {
            if (e.code() == Errc::io_error) break;  // server closed: scenario over
            throw;
        }
        if (!msg) break;
        if (msg->type != MsgType::indication) continue;  // acks flow through recv_app

        const auto kpm = msg->body.get<WindowKpm>();
        auto verdict = detector.ingest(kpm);
        VerdictRecord record;
        record.t = kpm.window_start + window_ms;
        record.window_id = kpm.window_id;
        record.verdict = verdict;
        verdicts.push_back(record);

        // Every indication gets a control reply (possibly empty) so the gNB
        // can pace the loop deterministically in sim time.
        send(make_control(cell_id, 0, verdict.malicious_centroids));
    }
    return verdicts;
}

}  // namespace stormsim::e2lite
