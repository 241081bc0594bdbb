#include "abom/error.hpp"

namespace abom {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Io: return "io";
        case ErrorKind::Parse: return "parse";
        case ErrorKind::Capacity: return "capacity";
        case ErrorKind::NotAnAbom: return "not-an-abom";
        case ErrorKind::UnsupportedVersion: return "unsupported-version";
        case ErrorKind::Truncated: return "truncated";
        case ErrorKind::Malformed: return "malformed";
        case ErrorKind::CorruptPayload: return "corrupt-payload";
        case ErrorKind::UnsupportedFormat: return "unsupported-format";
        case ErrorKind::Structural: return "structural";
        case ErrorKind::InvalidArgument: return "invalid-argument";
    }
    return "unknown";
}

}  // namespace abom
