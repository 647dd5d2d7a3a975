#include "dialogos/error.hpp"

namespace dialogos {

std::string_view code_name(Errc code) noexcept {
  switch (code) {
    case Errc::malformed_doc: return "MALFORMED_DOC";
    case Errc::unknown_act_ref: return "UNKNOWN_ACT_REF";
    case Errc::empty_root: return "EMPTY_ROOT";
    case Errc::unknown_act: return "UNKNOWN_ACT";
    case Errc::unknown_parent: return "UNKNOWN_PARENT";
    case Errc::act_forbidden: return "ACT_FORBIDDEN";
    case Errc::empty_body: return "EMPTY_BODY";
    case Errc::body_too_large: return "BODY_TOO_LARGE";
    case Errc::unknown_node: return "UNKNOWN_NODE";
    case Errc::unsorted_input: return "UNSORTED_INPUT";
    case Errc::dangling_ref: return "DANGLING_REF";
    case Errc::unknown_object: return "UNKNOWN_OBJECT";
    case Errc::unknown_user: return "UNKNOWN_USER";
    case Errc::schema_violation: return "SCHEMA_VIOLATION";
    case Errc::storage_failure: return "STORAGE_FAILURE";
    case Errc::corrupt_log: return "CORRUPT_LOG";
    case Errc::bad_frame: return "BAD_FRAME";
    case Errc::unauthenticated: return "UNAUTHENTICATED";
    case Errc::unknown_channel: return "UNKNOWN_CHANNEL";
    case Errc::unsupported_version: return "UNSUPPORTED_VERSION";
    case Errc::already_joined: return "ALREADY_JOINED";
    case Errc::not_joined: return "NOT_JOINED";
    case Errc::channel_exists: return "CHANNEL_EXISTS";
  }
  return "UNKNOWN";
}

}  // namespace dialogos
