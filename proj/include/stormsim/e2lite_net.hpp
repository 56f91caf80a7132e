#pragma once

#include <chrono>
#include <functional>
#include <optional>

#include "stormsim/e2lite.hpp"
#include "stormsim/sim.hpp"

namespace stormsim::e2lite {

/// Length-prefix framed message stream over a connected socket. Blocking
/// reads with poll-based timeouts; EOF surfaces as std::nullopt.
class FrameConn {
public:
    FrameConn() = default;
    explicit FrameConn(int fd) : fd_(fd) {}
    ~FrameConn();
    FrameConn(FrameConn&& other) noexcept;
    FrameConn& operator=(FrameConn&& other) noexcept;
    FrameConn(const FrameConn&) = delete;
    FrameConn& operator=(const FrameConn&) = delete;

    bool open() const noexcept { return fd_ >= 0; }
    void close();

    void send(const Message& msg);
    /// Waits up to timeout for a frame. Returns the message, or nullopt on
    /// timeout. Throws Errc::io_error on EOF/reset; decode errors propagate.
    std::optional<Message> recv(std::chrono::milliseconds timeout);

private:
    int fd_ = -1;
};

struct Timeouts {
    std::chrono::milliseconds heartbeat{1000};  // send cadence while idle
    std::chrono::milliseconds degraded{3000};   // silence before degraded state
    std::chrono::milliseconds hard{10000};      // silence before giving up
};

/// gNB-side endpoint: accepts one xApp connection, answers subscriptions and
/// runs the per-window indication/control exchange in lockstep with the
/// simulator. One server serves exactly one cell.
class Server {
public:
    /// Binds and listens; port 0 picks an ephemeral port.
    Server(std::uint16_t port, std::uint32_t cell_id, std::int64_t window_ms,
           Timeouts timeouts = {});

    std::uint16_t port() const noexcept { return port_; }
    bool has_subscription() const noexcept { return subscribed_; }
    bool degraded() const noexcept { return degraded_; }

    /// Waits for a client to connect and subscribe. Returns false on timeout.
    bool wait_for_subscription(std::chrono::milliseconds timeout);

    /// Processes pending control-plane traffic (subscribe, heartbeat) without
    /// blocking longer than `budget`.
    void poll(std::chrono::milliseconds budget);

    /// Lockstep exchange: emits the Indication for `kpm` and blocks until the
    /// Control reply arrives (heartbeats are answered inline). Returns the
    /// centroid list (possibly empty). A disconnect drops the subscription
    /// and returns nullopt.
    std::optional<std::vector<Centroid>> exchange_window(const WindowKpm& kpm);

    /// Completes the exchange: acks the control once it has been applied.
    void send_control_ack(std::uint64_t window_id, std::size_t blocklist_size);

    void shutdown();

private:
    void accept_pending(std::chrono::milliseconds timeout);
    void handle(const Message& msg);
    void send(Message msg);
    void drop_client();

    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::uint32_t cell_id_ = 0;
    std::int64_t window_ms_ = 0;
    Timeouts timeouts_;
    FrameConn conn_;
    bool subscribed_ = false;
    bool degraded_ = false;
    std::uint64_t tx_seq_ = 0;
    std::chrono::steady_clock::time_point last_rx_{};
    std::chrono::steady_clock::time_point last_heartbeat_{};
};

/// Simulator loop adapter: forwards each emitted window over the server and
/// feeds the returned centroids back into the simulation.
class ServerLoop : public ClosedLoop {
public:
    explicit ServerLoop(Server& server) : server_(server) {}
    LoopResponse on_window(const WindowKpm& kpm) override;
    void on_control_applied(std::uint64_t window_id, std::size_t blocklist_size) override;
    void on_end() override { server_.shutdown(); }

private:
    Server& server_;
};

/// xApp-side endpoint: subscribes to one cell and drives the detector from
/// the indication stream, answering every indication with a control message
/// (empty when there is nothing to block).
class Client {
public:
    explicit Client(Timeouts timeouts = {}) : timeouts_(timeouts) {}

    void connect(const std::string& host, std::uint16_t port,
                 std::chrono::milliseconds retry_budget = std::chrono::milliseconds{5000});

    /// Subscribes and returns the server's authoritative window length.
    std::int64_t subscribe(std::uint32_t cell_id, std::int64_t window_ms);

    /// Sends a standalone control message and waits for its ack.
    AckBody send_control(std::uint32_t cell_id, const std::vector<Centroid>& centroids);

    struct VerdictRecord {
        SimTime t;  // emission time of the window that produced the verdict
        std::uint64_t window_id = 0;
        DetectionVerdict verdict;
    };

    /// Receives indications until the server closes, ingesting each window
    /// into `detector` and replying with a control message. Returns the
    /// verdict log.
    std::vector<VerdictRecord> run_detector_loop(std::uint32_t cell_id, Detector& detector);

    bool degraded() const noexcept { return degraded_; }
    std::uint64_t last_rx_seq() const noexcept { return last_rx_seq_; }

private:
    Message request(Message msg);
    std::optional<Message> recv_app(std::chrono::milliseconds total_budget);
    void send(Message msg);

    Timeouts timeouts_;
    FrameConn conn_;
    bool degraded_ = false;
    std::uint64_t tx_seq_ = 0;
    std::uint64_t last_rx_seq_ = 0;
    std::chrono::steady_clock::time_point last_heartbeat_{};
};

}  // namespace stormsim::e2lite
