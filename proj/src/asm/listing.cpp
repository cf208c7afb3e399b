#include "cgc/asm/listing.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <unordered_set>

#include "cgc/asm/normalize.hpp"
#include "cgc/util/errors.hpp"

namespace cgc {

namespace {

bool is_hex_digit(char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}

bool is_section_first(char c) {
    return c == '.' || c == '_' || std::isalpha(static_cast<unsigned char>(c));
}

bool is_section_rest(char c) {
    return c == '_' || std::isalnum(static_cast<unsigned char>(c));
}

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

std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        std::size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
        if (j > i) out.emplace_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

// Bodies whose first word is one of these never count as instructions.
const std::unordered_set<std::string>& data_directives() {
    static const std::unordered_set<std::string> s = {"db", "dd", "dw", "dq", "dt", "align"};
    return s;
}

const std::unordered_set<std::string>& assembler_directives() {
    static const std::unordered_set<std::string> s = {
        "extrn", "public", "assume", "include", "end", "org", "model", "unicode", "segment", "ends"};
    return s;
}

bool mnemonic_shaped(std::string_view t) {
    if (t.empty() || !std::isalpha(static_cast<unsigned char>(t[0]))) return false;
    return std::all_of(t.begin(), t.end(),
                       [](unsigned char c) { return std::isalnum(c); });
}

}  // namespace

bool is_known_mnemonic(const std::string& m) {
    static const std::unordered_set<std::string> table = {
        // data movement
        "mov", "movzx", "movsx", "movsxd", "lea", "xchg", "push", "pop", "pusha", "popa",
        "pushad", "popad", "pushf", "popf", "lahf", "sahf", "cwd", "cdq", "cbw", "cwde",
        "cdqe", "bswap", "movabs",
        // arithmetic / logic
        "add", "adc", "sub", "sbb", "mul", "imul", "div", "idiv", "inc", "dec", "neg",
        "and", "or", "xor", "not", "shl", "shr", "sal", "sar", "rol", "ror", "rcl", "rcr",
        "shld", "shrd", "cmp", "test", "bt", "bts", "btr", "btc", "bsf", "bsr",
        // control flow
        "call", "ret", "retn", "retf", "jmp", "ja", "jae", "jb", "jbe", "jc", "jcxz",
        "jecxz", "jrcxz", "je", "jg", "jge", "jl", "jle", "jna", "jnae", "jnb", "jnbe",
        "jnc", "jne", "jng", "jnge", "jnl", "jnle", "jno", "jnp", "jns", "jnz", "jo",
        "jp", "jpe", "jpo", "js", "jz", "loop", "loope", "loopne", "loopnz", "loopz",
        "int", "into", "iret", "iretd", "enter", "leave", "syscall", "sysenter",
        // string ops
        "movs", "movsb", "movsw", "movsd", "movsq", "cmps", "cmpsb", "cmpsw", "cmpsd",
        "scas", "scasb", "scasw", "scasd", "lods", "lodsb", "lodsw", "lodsd", "stos",
        "stosb", "stosw", "stosd", "rep", "repe", "repne", "repz", "repnz",
        // misc
        "nop", "hlt", "wait", "cmc", "clc", "stc", "cli", "sti", "cld", "std", "cpuid",
        "rdtsc", "xlat", "bound", "in", "out", "ins", "outs", "insb", "insw", "insd",
        "outsb", "outsw", "outsd", "seta", "setae", "setb", "setbe", "setc", "sete",
        "setg", "setge", "setl", "setle", "setne", "setnz", "setz", "setns", "sets",
        "setno", "seto", "setnp", "setp", "cmova", "cmovae", "cmovb", "cmovbe", "cmove",
        "cmovg", "cmovge", "cmovl", "cmovle", "cmovne", "cmovnz", "cmovz", "cmovs",
        "cmovns", "xadd", "cmpxchg", "lock",
        // x87 / sse commonly seen in listings
        "fld", "fst", "fstp", "fild", "fist", "fistp", "fadd", "fsub", "fmul", "fdiv",
        "fcom", "fcomp", "fxch", "fchs", "fabs", "fsqrt", "fldz", "fld1", "finit",
        "fninit", "fwait", "movaps", "movups", "movdqa", "movdqu", "movd", "movq",
        "addps", "addsd", "addss", "subsd", "subss", "mulsd", "mulss", "divsd", "divss",
        "xorps", "xorpd", "pxor", "por", "pand", "paddb", "paddw", "paddd", "psubb",
        "psubw", "psubd", "cvtsi2sd", "cvtsd2si", "cvttsd2si", "comisd", "ucomisd",
        "emms", "ldmxcsr", "stmxcsr", "prefetchnta", "sfence", "lfence", "mfence"};
    return table.count(m) > 0;
}

AsmListing parse_listing(const std::string& raw_text, const std::string& path) {
    AsmListing listing;
    listing.path = path;

    std::istringstream stream(raw_text);
    std::string line;
    int line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string_view sv = line;

        std::string_view stripped = trim(sv);
        if (stripped.empty()) {
            ++listing.skipped_lines;
            continue;
        }

        // SECTION:HEXADDR prefix
        std::size_t colon = std::string_view::npos;
        if (is_section_first(stripped[0])) {
            std::size_t i = 1;
            while (i < stripped.size() && is_section_rest(stripped[i])) ++i;
            if (i < stripped.size() && stripped[i] == ':') colon = i;
        }
        if (colon == std::string_view::npos) {
            ++listing.skipped_lines;
            continue;
        }
        std::size_t addr_begin = colon + 1;
        std::size_t addr_end = addr_begin;
        while (addr_end < stripped.size() && addr_end - addr_begin < 16 && is_hex_digit(stripped[addr_end]))
            ++addr_end;
        std::size_t addr_len = addr_end - addr_begin;
        if (addr_len < 8) {
            ++listing.skipped_lines;  // no address: not a listing line
            continue;
        }
        // The prefix matched; from here on problems are malformed lines.
        if (addr_end < stripped.size() && !std::isspace(static_cast<unsigned char>(stripped[addr_end])))
            throw MalformedLine("line " + std::to_string(line_no) + ": no separator after address");

        std::string section(stripped.substr(0, colon));
        uint64_t address = std::stoull(std::string(stripped.substr(addr_begin, addr_len)), nullptr, 16);
        std::string_view body = trim(stripped.substr(addr_end));

        // strip trailing comment
        std::size_t semi = body.find(';');
        if (semi != std::string_view::npos) body = trim(body.substr(0, semi));
        if (body.empty()) {
            ++listing.skipped_lines;
            continue;
        }

        auto words = split_ws(body);
        std::string w0 = lower(words[0]);

        if (data_directives().count(w0) || assembler_directives().count(w0)) {
            ++listing.skipped_lines;
            continue;
        }
        // labels: `loc_401005:`
        if (words.size() == 1 && words[0].back() == ':') {
            ++listing.skipped_lines;
            continue;
        }
        if (words.size() >= 2) {
            std::string w1 = lower(words[1]);
            // named data: `unk_404000 db 0`
            if (data_directives().count(w1)) {
                ++listing.skipped_lines;
                continue;
            }
            if (w1 == "proc") {
                if (words.size() != 3 || (lower(words[2]) != "near" && lower(words[2]) != "far"))
                    throw MalformedLine("line " + std::to_string(line_no) + ": bad proc declaration");
                ListingLine l{section, address, std::string(body), LineKind::ProcBegin, words[0], line_no};
                listing.lines.push_back(std::move(l));
                continue;
            }
            if (w1 == "endp") {
                if (words.size() != 2)
                    throw MalformedLine("line " + std::to_string(line_no) + ": bad endp declaration");
                ListingLine l{section, address, std::string(body), LineKind::ProcEnd, words[0], line_no};
                listing.lines.push_back(std::move(l));
                continue;
            }
        }

        if (!mnemonic_shaped(words[0]))
            throw MalformedLine("line " + std::to_string(line_no) + ": unparsable instruction body '" +
                                std::string(body) + "'");

        ListingLine l{section, address, std::string(body), LineKind::Instruction, "", line_no};
        listing.lines.push_back(std::move(l));
    }
    return listing;
}

bool is_code_section(const std::string& section_name,
                     const std::vector<ListingLine>& lines,
                     double min_code_fraction) {
    if (section_name == ".text" || section_name == ".code") return true;
    if (lines.empty()) return false;
    long valid = 0;
    for (const auto& l : lines) {
        if (l.kind != LineKind::Instruction) {
            ++valid;  // proc/endp markers only appear around code
            continue;
        }
        auto words = split_ws(l.text);
        if (!words.empty() && is_known_mnemonic(lower(words[0]))) ++valid;
    }
    return static_cast<double>(valid) >= min_code_fraction * static_cast<double>(lines.size());
}

}  // namespace cgc
