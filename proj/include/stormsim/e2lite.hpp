#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stormsim/json_io.hpp"

namespace stormsim::e2lite {

inline constexpr std::uint8_t kProtocolVersion = 1;
/// Upper bound on the payload (everything after the 4-byte length prefix).
inline constexpr std::size_t kMaxFrameBytes = 1 << 20;

enum class MsgType : std::uint8_t {
    subscribe = 1,
    subscribe_ack = 2,  // generic acknowledgment (subscription and control)
    indication = 3,
    control = 4,
    heartbeat = 5,
    error = 6,
};

const char* to_string(MsgType t);

/// One protocol message. The frame layout is:
///   u32  length of the remainder, big endian
///   u8   version
///   u8   msg type
///   u32  cell id, big endian
///   u64  sequence number, big endian (strictly increasing per direction)
///   ...  body: canonical UTF-8 JSON, schema per msg type
struct Message {
    std::uint8_t version = kProtocolVersion;
    MsgType type = MsgType::heartbeat;
    std::uint32_t cell_id = 0;
    std::uint64_t seq = 0;
    json body = json::object();

    bool operator==(const Message&) const = default;
};

/// Serializes a message into a full frame (length prefix included).
/// Throws Errc::frame_too_large when the body exceeds kMaxFrameBytes.
std::vector<std::uint8_t> encode(const Message& msg);

/// Parses a full frame. Throws Errc::malformed_body on truncated or
/// non-JSON input, Errc::unknown_type on an unknown type byte,
/// Errc::unknown_version on a version mismatch and Errc::frame_too_large on
/// an oversized length prefix.
Message decode(std::span<const std::uint8_t> frame);

// Typed bodies.

struct SubscribeBody {
    std::int64_t window_ms = 0;
};

struct AckBody {
    bool ok = true;
    std::optional<std::int64_t> window_ms;         // subscription acks
    std::optional<std::uint64_t> blocklist_size;   // control acks
    std::optional<std::uint64_t> window_id;        // control acks
};

struct ControlBody {
    std::vector<Centroid> centroids;
};

struct ErrorBody {
    std::string code;
    std::string message;
};

void to_json(json& j, const SubscribeBody& b);
void from_json(const json& j, SubscribeBody& b);
void to_json(json& j, const AckBody& b);
void from_json(const json& j, AckBody& b);
void to_json(json& j, const ControlBody& b);
void from_json(const json& j, ControlBody& b);
void to_json(json& j, const ErrorBody& b);
void from_json(const json& j, ErrorBody& b);

Message make_subscribe(std::uint32_t cell_id, std::uint64_t seq, std::int64_t window_ms);
Message make_ack(std::uint32_t cell_id, std::uint64_t seq, const AckBody& body);
Message make_indication(std::uint32_t cell_id, std::uint64_t seq, const WindowKpm& kpm);
Message make_control(std::uint32_t cell_id, std::uint64_t seq,
                     const std::vector<Centroid>& centroids);
Message make_heartbeat(std::uint32_t cell_id, std::uint64_t seq);
Message make_error(std::uint32_t cell_id, std::uint64_t seq, const std::string& code,
                   const std::string& message);

}  // namespace stormsim::e2lite
