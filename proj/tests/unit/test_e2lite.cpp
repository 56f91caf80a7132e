#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <future>
#include <random>
#include <thread>

#include "stormsim/e2lite_net.hpp"

using namespace stormsim;
namespace e2 = stormsim::e2lite;

namespace {

WindowKpm sample_kpm(int n_fps) {
    WindowKpm kpm;
    kpm.window_id = 3;
    kpm.window_start = SimTime{300};
    kpm.n3 = n_fps;
    kpm.n4 = n_fps;
    kpm.n5 = 2;
    for (int i = 0; i < n_fps; ++i)
        kpm.fingerprints.push_back(
            {SimTime{300 + i}, {32, -41.25 + 0.01 * i}, static_cast<std::uint64_t>(1000 + i)});
    return kpm;
}

}  // namespace

TEST_CASE("indication round-trip is exact") {
    const auto kpm = sample_kpm(40);
    const auto msg = e2::make_indication(7, 11, kpm);
    const auto decoded = e2::decode(e2::encode(msg));
    CHECK(decoded == msg);
    const auto back = decoded.body.get<WindowKpm>();
    CHECK(back == kpm);
}

TEST_CASE("random fingerprints survive the codec") {
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> ta(0, 1000);
    std::uniform_real_distribution<double> rssi(-139.0, -1.0);
    for (int i = 0; i < 200; ++i) {
        WindowKpm kpm;
        kpm.n3 = 1;
        kpm.fingerprints.push_back({SimTime{i}, {ta(rng), rssi(rng)}, 1});
        const auto decoded = e2::decode(e2::encode(e2::make_indication(1, i, kpm)));
        const auto back = decoded.body.get<WindowKpm>();
        CHECK(back.fingerprints[0].fp.ta == kpm.fingerprints[0].fp.ta);
        CHECK(back.fingerprints[0].fp.rssi ==
              doctest::Approx(kpm.fingerprints[0].fp.rssi).epsilon(1e-9));
    }
}

TEST_CASE("control preserves centroid order") {
    const std::vector<Centroid> centroids{{32.0, -41.0}, {30.5, -46.25}};
    const auto decoded = e2::decode(e2::encode(e2::make_control(1, 5, centroids)));
    const auto body = decoded.body.get<e2::ControlBody>();
    REQUIRE(body.centroids.size() == 2);
    CHECK(body.centroids[0] == centroids[0]);
    CHECK(body.centroids[1] == centroids[1]);
}

TEST_CASE("decode rejects malformed frames without crashing") {
    const auto frame = e2::encode(e2::make_heartbeat(1, 1));

    auto truncated = frame;
    truncated.resize(frame.size() - 3);
    CHECK_THROWS_AS(e2::decode(truncated), Error);

    std::vector<std::uint8_t> tiny{0x00, 0x01};
    CHECK_THROWS_AS(e2::decode(tiny), Error);

    auto bad_version = frame;
    bad_version[4] = 9;
    try {
        e2::decode(bad_version);
        FAIL("expected unknown_version");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::unknown_version);
    }

    auto bad_type = frame;
    bad_type[5] = 42;
    try {
        e2::decode(bad_type);
        FAIL("expected unknown_type");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::unknown_type);
    }

    auto bad_body = frame;
    bad_body.back() = '{';
    try {
        e2::decode(bad_body);
        FAIL("expected malformed_body");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::malformed_body);
    }

    std::vector<std::uint8_t> huge{0x7f, 0xff, 0xff, 0xff};
    try {
        e2::decode(huge);
        FAIL("expected frame_too_large");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::frame_too_large);
    }
}

TEST_CASE("oversized bodies refuse to encode") {
    e2::Message msg = e2::make_heartbeat(1, 1);
    msg.body = json{{"blob", std::string(e2::kMaxFrameBytes, 'x')}};
    CHECK_THROWS_AS(e2::encode(msg), Error);
}

TEST_CASE("subscribe handshake, duplicate and unknown-cell errors") {
    e2::Server server(0, 1, 100);
    std::thread server_side([&] {
        server.wait_for_subscription(std::chrono::milliseconds{2000});
        // Keep answering control-plane traffic for the error cases.
        for (int i = 0; i < 40; ++i) server.poll(std::chrono::milliseconds{10});
    });

    e2::Client client;
    client.connect("127.0.0.1", server.port());
    CHECK(client.subscribe(1, 100) == 100);
    CHECK_THROWS_AS(client.subscribe(1, 100), Error);   // duplicate
    CHECK_THROWS_AS(client.subscribe(9, 100), Error);   // wrong cell

    server_side.join();
    server.shutdown();
}

TEST_CASE("window exchange carries controls and acks with the blocklist size") {
    e2::Server server(0, 1, 100);
    const auto params = default_params();

    std::thread gnb([&] {
        if (!server.wait_for_subscription(std::chrono::milliseconds{2000})) return;
        BlockList bl;
        // Two windows: the client answers each with one centroid.
        for (int w = 0; w < 2; ++w) {
            auto centroids = server.exchange_window(sample_kpm(4));
            if (!centroids) return;
            absorb_fingerprints(bl, *centroids, SimTime{100 * (w + 1)}, params);
            server.send_control_ack(w, bl.size());
        }
    });

    e2::Client client;
    client.connect("127.0.0.1", server.port());
    CHECK(client.subscribe(1, 100) == 100);
    // Duplicate centroid on the second window: the ack still reports one entry.
    const auto ack1 = client.send_control(1, {{32.0, -41.0}});
    CHECK(ack1.blocklist_size == 1);
    const auto ack2 = client.send_control(1, {{32.2, -41.4}});
    CHECK(ack2.blocklist_size == 1);

    gnb.join();
    server.shutdown();
}

TEST_CASE("unknown protocol version gets an error reply and the connection survives") {
    e2::Server server(0, 1, 100);
    std::thread server_side([&] {
        for (int i = 0; i < 100 && !server.has_subscription(); ++i)
            server.poll(std::chrono::milliseconds{10});
    });

    // Raw connection so we can forge the version byte.
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(server.port());
    inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
    REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0);
    e2::FrameConn conn(fd);

    e2::Message bad = e2::make_heartbeat(1, 1);
    bad.version = 9;
    conn.send(bad);
    auto reply = conn.recv(std::chrono::milliseconds{1000});
    REQUIRE(reply.has_value());
    CHECK(reply->type == e2::MsgType::error);
    CHECK(reply->body.at("code") == "unsupported_version");

    // Same connection, valid subscribe: still served.
    conn.send(e2::make_subscribe(1, 2, 100));
    reply = conn.recv(std::chrono::milliseconds{1000});
    REQUIRE(reply.has_value());
    CHECK(reply->type == e2::MsgType::subscribe_ack);

    server_side.join();
    CHECK(server.has_subscription());
    conn.close();
    server.shutdown();
}

TEST_CASE("two cells never cross their indication streams") {
    e2::Server cell1(0, 1, 100);
    e2::Server cell2(0, 2, 100);

    auto serve = [](e2::Server& server, int windows) {
        if (!server.wait_for_subscription(std::chrono::milliseconds{2000})) return;
        for (int w = 0; w < windows; ++w) {
            auto kpm = sample_kpm(2);
            kpm.window_id = w;
            auto reply = server.exchange_window(kpm);
            if (!reply) return;
            server.send_control_ack(w, 0);
        }
    };
    std::thread t1([&] { serve(cell1, 3); });
    std::thread t2([&] { serve(cell2, 3); });

    auto drive = [](std::uint16_t port, std::uint32_t cell) {
        e2::Client client;
        client.connect("127.0.0.1", port);
        client.subscribe(cell, 100);
        Detector detector(default_params());
        return client.run_detector_loop(cell, detector);
    };
    auto v1 = std::async(std::launch::async, drive, cell1.port(), 1u);
    auto v2 = std::async(std::launch::async, drive, cell2.port(), 2u);
    CHECK(v1.get().size() == 3);
    CHECK(v2.get().size() == 3);
    t1.join();
    t2.join();
    cell1.shutdown();
    cell2.shutdown();
}

TEST_CASE("a slow controller is reported as degraded but the loop recovers") {
    e2::Timeouts timeouts;
    timeouts.degraded = std::chrono::milliseconds{60};
    timeouts.hard = std::chrono::milliseconds{5000};
    e2::Server server(0, 1, 100, timeouts);

    std::thread gnb([&] {
        if (!server.wait_for_subscription(std::chrono::milliseconds{2000})) return;
        auto centroids = server.exchange_window(sample_kpm(4));
        CHECK(centroids.has_value());
        server.send_control_ack(0, 1);
    });

    e2::Client client;
    client.connect("127.0.0.1", server.port());
    client.subscribe(1, 100);
    std::this_thread::sleep_for(std::chrono::milliseconds{150});  // starve the server
    const auto ack = client.send_control(1, {{32.0, -41.0}});
    CHECK(ack.blocklist_size == 1);
    gnb.join();
    CHECK(server.degraded());  // the stall was noticed, nothing crashed
    server.shutdown();
}

TEST_CASE("subscribing mid-simulation yields one indication per remaining window") {
    ScenarioConfig config;
    config.duration_ms = 1000;
    config.gnb.max_ue = 16;
    UeProfile ue;
    ue.id = "vue0";
    ue.track = {{SimTime{0}, {14.0, 0.0}}};
    ue.attach_times = {SimTime{150}};
    config.ues.push_back(ue);

    e2::Server server(0, config.cell_id, config.params.window_ms);
    e2::ServerLoop loop(server);

    std::thread xapp([&] {
        e2::Client client;
        client.connect("127.0.0.1", server.port());
        client.subscribe(config.cell_id, config.params.window_ms);
        Detector detector(config.params);
        const auto verdicts = client.run_detector_loop(config.cell_id, detector);
        CHECK(verdicts.size() == 10);  // 1 s of sim at W = 100 ms
        std::uint64_t expected_id = 0;
        for (const auto& v : verdicts) CHECK(v.window_id == expected_id++);
    });

    REQUIRE(server.wait_for_subscription(std::chrono::milliseconds{2000}));
    Simulator sim(config);
    sim.set_loop(&loop);
    sim.run();
    xapp.join();
}
