// dialogos/error.hpp — typed failures shared by every module.
//
// Every failure that crosses a module boundary is a dialogos::Error carrying
// one of the stable Errc codes below. The upper-case code names are part of
// the wire protocol and the CLI output; never rename them.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dialogos {

enum class Errc {
  malformed_doc,
  unknown_act_ref,
  empty_root,
  unknown_act,
  unknown_parent,
  act_forbidden,
  empty_body,
  body_too_large,
  unknown_node,
  unsorted_input,
  dangling_ref,
  unknown_object,
  unknown_user,
  schema_violation,
  storage_failure,
  corrupt_log,
  bad_frame,
  unauthenticated,
  unknown_channel,
  unsupported_version,
  already_joined,
  not_joined,
  channel_exists,
};

std::string_view code_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string detail)
      : std::runtime_error(std::string(code_name(code)) + ": " + detail),
        code_(code),
        detail_(std::move(detail)) {}

  [[nodiscard]] Errc code() const noexcept { return code_; }
  [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

  // ACT_FORBIDDEN carries the legal successor set, sorted.
  [[nodiscard]] const std::vector<std::string>& allowed() const noexcept { return allowed_; }
  Error& with_allowed(std::vector<std::string> allowed) {
    allowed_ = std::move(allowed);
    return *this;
  }

  // CORRUPT_LOG carries the first bad sequence number.
  [[nodiscard]] std::optional<std::uint64_t> bad_seq() const noexcept { return bad_seq_; }
  Error& with_bad_seq(std::uint64_t seq) {
    bad_seq_ = seq;
    return *this;
  }

 private:
  Errc code_;
  std::string detail_;
  std::vector<std::string> allowed_;
  std::optional<std::uint64_t> bad_seq_;
};

}  // namespace dialogos
