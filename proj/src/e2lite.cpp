#include "stormsim/e2lite.hpp"

namespace stormsim::e2lite {

const char* to_string(MsgType t) {
    switch (t) {
        case MsgType::subscribe: return "subscribe";
        case MsgType::subscribe_ack: return "subscribe_ack";
        case MsgType::indication: return "indication";
        case MsgType::control: return "control";
        case MsgType::heartbeat: return "heartbeat";
        case MsgType::error: return "error";
    }
    return "unknown";
}

namespace {

constexpr std::size_t kHeaderBytes = 1 + 1 + 4 + 8;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8)
        out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in) {
    return (std::uint32_t(in[0]) << 24) | (std::uint32_t(in[1]) << 16) |
           (std::uint32_t(in[2]) << 8) | std::uint32_t(in[3]);
}

std::uint64_t get_u64(std::span<const std::uint8_t> in) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | in[i];
    return v;
}

}  // namespace

std::vector<std::uint8_t> encode(const Message& msg) {
    const std::string body = msg.body.dump();
    const std::size_t payload = kHeaderBytes + body.size();
    if (payload > kMaxFrameBytes) fail(Errc::frame_too_large, "encoded frame exceeds 1 MiB");

    std::vector<std::uint8_t> out;
    out.reserve(4 + payload);
    put_u32(out, static_cast<std::uint32_t>(payload));
    out.push_back(msg.version);
    out.push_back(static_cast<std::uint8_t>(msg.type));
    put_u32(out, msg.cell_id);
    put_u64(out, msg.seq);
    out.insert(out.end(), body.begin(), body.end());
    return out;
}

Message decode(std::span<const std::uint8_t> frame) {
    if (frame.size() < 4) fail(Errc::malformed_body, "frame shorter than its length prefix");
    const std::uint32_t payload = get_u32(frame);
    if (payload > kMaxFrameBytes) fail(Errc::frame_too_large, "frame length exceeds 1 MiB");
    if (frame.size() != 4 + static_cast<std::size_t>(payload))
        fail(Errc::malformed_body, "frame truncated or overlong");
    if (payload < kHeaderBytes) fail(Errc::malformed_body, "payload shorter than the header");

    Message msg;
    msg.version = frame[4];
    const std::uint8_t type = frame[5];
    msg.cell_id = get_u32(frame.subspan(6));
    msg.seq = get_u64(frame.subspan(10));
    if (msg.version != kProtocolVersion)
        fail(Errc::unknown_version, "protocol version " + std::to_string(msg.version));
    if (type < 1 || type > 6) fail(Errc::unknown_type, "msg type " + std::to_string(type));
    msg.type = static_cast<MsgType>(type);

    const auto body = frame.subspan(4 + kHeaderBytes);
    try {
        msg.body = json::parse(body.begin(), body.end());
    } catch (const json::parse_error& e) {
        fail(Errc::malformed_body, std::string("body is not valid JSON: ") + e.what());
    }
    return msg;
}

void to_json(json& j, const SubscribeBody& b) { j = json{{"window_ms", b.window_ms}}; }
void from_json(const json& j, SubscribeBody& b) { j.at("window_ms").get_to(b.window_ms); }

void to_json(json& j, const AckBody& b) {
    j = json{{"ok", b.ok}};
    if (b.window_ms) j["window_ms"] = *b.window_ms;
    if (b.blocklist_size) j["blocklist_size"] = *b.blocklist_size;
    if (b.window_id) j["window_id"] = *b.window_id;
}

void from_json(const json& j, AckBody& b) {
    j.at("ok").get_to(b.ok);
    if (j.contains("window_ms")) b.window_ms = j.at("window_ms").get<std::int64_t>();
    if (j.contains("blocklist_size")) b.blocklist_size = j.at("blocklist_size").get<std::uint64_t>();
    if (j.contains("window_id")) b.window_id = j.at("window_id").get<std::uint64_t>();
}

void to_json(json& j, const ControlBody& b) { j = json{{"centroids", b.centroids}}; }
void from_json(const json& j, ControlBody& b) { j.at("centroids").get_to(b.centroids); }

void to_json(json& j, const ErrorBody& b) {
    j = json{{"code", b.code}, {"message", b.message}};
}
void from_json(const json& j, ErrorBody& b) {
    j.at("code").get_to(b.code);
    j.at("message").get_to(b.message);
}

Message make_subscribe(std::uint32_t cell_id, std::uint64_t seq, std::int64_t window_ms) {
    return {kProtocolVersion, MsgType::subscribe, cell_id, seq, json(SubscribeBody{window_ms})};
}

Message make_ack(std::uint32_t cell_id, std::uint64_t seq, const AckBody& body) {
    return {kProtocolVersion, MsgType::subscribe_ack, cell_id, seq, json(body)};
}

Message make_indication(std::uint32_t cell_id, std::uint64_t seq, const WindowKpm& kpm) {
    return {kProtocolVersion, MsgType::indication, cell_id, seq, json(kpm)};
}

Message make_control(std::uint32_t cell_id, std::uint64_t seq,
                     const std::vector<Centroid>& centroids) {
    return {kProtocolVersion, MsgType::control, cell_id, seq, json(ControlBody{centroids})};
}

Message make_heartbeat(std::uint32_t cell_id, std::uint64_t seq) {
    return {kProtocolVersion, MsgType::heartbeat, cell_id, seq, json::object()};
}

Message make_error(std::uint32_t cell_id, std::uint64_t seq, const std::string& code,
                   const std::string& message) {
    return {kProtocolVersion, MsgType::error, cell_id, seq, json(ErrorBody{code, message})};
}

}  // namespace stormsim::e2lite
