#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace cgc {

inline constexpr std::string_view kAddrToken = "<addr>";
inline constexpr std::string_view kStartToken = "<start>";
inline constexpr std::string_view kEndToken = "<end>";
inline constexpr std::string_view kUnknownToken = "<unknown>";
inline constexpr std::string_view kPadToken = "<pad>";

// Canonical instruction token: mnemonic and register/keyword operands
// lowercased, whitespace collapsed, operands joined with ", ", and
// address-like operands (hex literals >= 0x1000, call/jump targets,
// loc_*/sub_*/off_* symbols) replaced by <addr>. Idempotent.
// Throws EmptyInstruction on whitespace-only input.
std::string normalize_instruction(const std::string& raw);

bool is_register(std::string_view token);
bool is_branch_mnemonic(std::string_view lowercase_mnemonic);

// Symbol called by a `call` instruction body, if it names one directly.
// Indirect calls (registers, memory operands) and bare numeric targets
// resolve to nothing.
std::optional<std::string> call_target(const std::string& raw_body);

}  // namespace cgc
