#include "cgc/asm/normalize.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <unordered_set>
#include <vector>

#include "cgc/util/errors.hpp"

namespace cgc {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

const std::unordered_set<std::string>& operand_keywords() {
    static const std::unordered_set<std::string> s = {
        "ptr", "byte", "word", "dword", "qword", "tbyte", "xmmword", "offset", "short",
        "near", "far", "small", "large", "ds", "es", "cs", "ss", "fs", "gs", "st"};
    return s;
}

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '@' || c == '?' ||
           c == '$' || c == '.' || c == '<' || c == '>';
}

bool is_decimal(std::string_view t) {
    return !t.empty() && std::all_of(t.begin(), t.end(), [](unsigned char c) { return std::isdigit(c); });
}

bool all_hex(std::string_view t) {
    return std::all_of(t.begin(), t.end(), [](unsigned char c) { return std::isxdigit(c); });
}

// 0x1234 or IDA-style 1234h; value returned when the form matches
bool parse_hex_literal(std::string_view t, uint64_t& value) {
    if (t.size() > 2 && (t[0] == '0') && (t[1] == 'x' || t[1] == 'X') && all_hex(t.substr(2)) &&
        t.size() <= 2 + 16) {
        value = std::stoull(std::string(t.substr(2)), nullptr, 16);
        return true;
    }
    if (t.size() >= 2 && (t.back() == 'h' || t.back() == 'H') &&
        std::isdigit(static_cast<unsigned char>(t[0])) && all_hex(t.substr(0, t.size() - 1)) &&
        t.size() <= 17) {
        value = std::stoull(std::string(t.substr(0, t.size() - 1)), nullptr, 16);
        return true;
    }
    return false;
}

bool is_addr_symbol(std::string_view t) {
    for (std::string_view prefix : {"loc_", "sub_", "off_"}) {
        if (t.size() > prefix.size() && t.substr(0, prefix.size()) == prefix &&
            all_hex(t.substr(prefix.size())))
            return true;
    }
    return false;
}

bool is_special_token(std::string_view t) {
    return t == kAddrToken || t == kStartToken || t == kEndToken || t == kUnknownToken ||
           t == kPadToken;
}

struct Piece {
    bool run = false;
    std::string text;
};

std::vector<Piece> split_pieces(std::string_view s) {
    std::vector<Piece> pieces;
    std::size_t i = 0;
    while (i < s.size()) {
        char c = s[i];
        if (is_ident_char(c)) {
            std::size_t j = i;
            while (j < s.size() && is_ident_char(s[j])) ++j;
            pieces.push_back({true, std::string(s.substr(i, j - i))});
            i = j;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
            pieces.push_back({false, " "});
        } else {
            pieces.push_back({false, std::string(1, c)});
            ++i;
        }
    }
    return pieces;
}

std::string normalize_run(const std::string& run) {
    if (is_special_token(run)) return run;
    if (is_addr_symbol(run)) return std::string(kAddrToken);
    uint64_t value = 0;
    if (parse_hex_literal(run, value))
        return value >= 0x1000 ? std::string(kAddrToken) : lower(run);
    if (is_decimal(run)) return run;
    std::string low = lower(run);
    if (is_register(low) || operand_keywords().count(low)) return low;
    return run;
}

std::string join_pieces(const std::vector<Piece>& pieces) {
    std::string out;
    for (const auto& p : pieces) out += p.text;
    return std::string(trim(out));
}

std::vector<std::string> split_operands(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == ',') {
            out.emplace_back(trim(s.substr(start, i - start)));
            start = i + 1;
        }
    }
    if (out.size() == 1 && out[0].empty()) out.clear();
    return out;
}

}  // namespace

bool is_register(std::string_view token) {
    static const std::unordered_set<std::string> regs = [] {
        std::unordered_set<std::string> s = {
            "al", "ah", "bl", "bh", "cl", "ch", "dl", "dh", "spl", "bpl", "sil", "dil",
            "ax", "bx", "cx", "dx", "si", "di", "bp", "sp",
            "eax", "ebx", "ecx", "edx", "esi", "edi", "ebp", "esp",
            "rax", "rbx", "rcx", "rdx", "rsi", "rdi", "rbp", "rsp", "rip",
            "cr0", "cr2", "cr3", "cr4", "dr0", "dr1", "dr2", "dr3", "dr6", "dr7"};
        for (int i = 8; i <= 15; ++i) {
            std::string base = "r" + std::to_string(i);
            s.insert(base);
            s.insert(base + "b");
            s.insert(base + "w");
            s.insert(base + "d");
        }
        for (int i = 0; i <= 15; ++i) {
            s.insert("xmm" + std::to_string(i));
            s.insert("ymm" + std::to_string(i));
        }
        for (int i = 0; i <= 7; ++i) {
            s.insert("mm" + std::to_string(i));
            s.insert("st" + std::to_string(i));
        }
        return s;
    }();
    return regs.count(std::string(token)) > 0;
}

bool is_branch_mnemonic(std::string_view m) {
    static const std::unordered_set<std::string> branches = {
        "call", "jmp", "ja", "jae", "jb", "jbe", "jc", "jcxz", "jecxz", "jrcxz", "je",
        "jg", "jge", "jl", "jle", "jna", "jnae", "jnb", "jnbe", "jnc", "jne", "jng",
        "jnge", "jnl", "jnle", "jno", "jnp", "jns", "jnz", "jo", "jp", "jpe", "jpo",
        "js", "jz", "loop", "loope", "loopne", "loopnz", "loopz"};
    return branches.count(std::string(m)) > 0;
}

std::string normalize_instruction(const std::string& raw) {
    std::string_view body = trim(raw);
    std::size_t semi = body.find(';');
    if (semi != std::string_view::npos) body = trim(body.substr(0, semi));
    if (body.empty()) throw EmptyInstruction("whitespace-only instruction");

    std::size_t sp = 0;
    while (sp < body.size() && !std::isspace(static_cast<unsigned char>(body[sp]))) ++sp;
    std::string mnemonic = lower(std::string(body.substr(0, sp)));
    std::string_view rest = trim(body.substr(sp));

    auto operands = split_operands(rest);
    bool branch = is_branch_mnemonic(mnemonic);

    std::vector<std::string> normalized;
    normalized.reserve(operands.size());
    for (const auto& op : operands) {
        auto pieces = split_pieces(op);
        bool indirect = false;
        for (auto& p : pieces) {
            if (!p.run && p.text == "[") indirect = true;
            if (p.run) p.text = normalize_run(p.text);
        }
        // direct call/jump targets become <addr>
        if (branch && operands.size() == 1 && !indirect) {
            for (auto it = pieces.rbegin(); it != pieces.rend(); ++it) {
                if (!it->run) continue;
                const std::string& t = it->text;
                if (t != kAddrToken && !is_register(t) && !operand_keywords().count(t) &&
                    !is_decimal(t) && !is_special_token(t) &&
                    !std::isdigit(static_cast<unsigned char>(t[0])))
                    it->text = std::string(kAddrToken);
                break;
            }
        }
        normalized.push_back(join_pieces(pieces));
    }

    std::string out = mnemonic;
    for (std::size_t i = 0; i < normalized.size(); ++i) {
        out += (i == 0) ? " " : ", ";
        out += normalized[i];
    }
    return out;
}

std::optional<std::string> call_target(const std::string& raw_body) {
    std::string_view body = trim(raw_body);
    std::size_t semi = body.find(';');
    if (semi != std::string_view::npos) body = trim(body.substr(0, semi));

    std::size_t sp = 0;
    while (sp < body.size() && !std::isspace(static_cast<unsigned char>(body[sp]))) ++sp;
    std::string_view rest = trim(body.substr(sp));
    if (rest.empty() || rest.find(',') != std::string_view::npos) return std::nullopt;
    if (rest.find('[') != std::string_view::npos) return std::nullopt;

    // drop size/distance keywords and segment prefixes
    std::vector<std::string> words;
    {
        std::size_t i = 0;
        while (i < rest.size()) {
            while (i < rest.size() && std::isspace(static_cast<unsigned char>(rest[i]))) ++i;
            std::size_t j = i;
            while (j < rest.size() && !std::isspace(static_cast<unsigned char>(rest[j]))) ++j;
            if (j > i) words.emplace_back(rest.substr(i, j - i));
            i = j;
        }
    }
    std::string candidate;
    for (const auto& w : words) {
        if (operand_keywords().count(lower(w))) continue;
        if (!candidate.empty()) return std::nullopt;
        candidate = w;
    }
    if (candidate.empty()) return std::nullopt;

    std::size_t colon = candidate.rfind(':');
    if (colon != std::string::npos) {
        std::string prefix = lower(candidate.substr(0, colon));
        if (!operand_keywords().count(prefix)) return std::nullopt;
        candidate = candidate.substr(colon + 1);
    }
    if (candidate.empty()) return std::nullopt;

    char first = candidate[0];
    if (std::isdigit(static_cast<unsigned char>(first))) return std::nullopt;
    bool ident = (std::isalpha(static_cast<unsigned char>(first)) || first == '_' || first == '@' ||
                  first == '?' || first == '$') &&
                 std::all_of(candidate.begin(), candidate.end(), [](unsigned char c) {
                     return std::isalnum(c) || c == '_' || c == '@' || c == '?' || c == '$' || c == '.';
                 });
    if (!ident) return std::nullopt;
    if (is_register(lower(candidate))) return std::nullopt;
    return candidate;
}

}  // namespace cgc
