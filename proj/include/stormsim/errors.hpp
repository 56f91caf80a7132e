#pragma once

#include <stdexcept>
#include <string>

namespace stormsim {

enum class Errc {
    invalid_params,
    invalid_kpm,
    empty_input,
    config_error,
    unknown_attempt,
    degenerate_geometry,
    frame_too_large,
    malformed_body,
    unknown_type,
    unknown_version,
    unknown_cell,
    duplicate_subscription,
    incomplete_trace,
    io_error,
};

const char* to_string(Errc c);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace stormsim
