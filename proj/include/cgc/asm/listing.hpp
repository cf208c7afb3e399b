#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cgc {

enum class LineKind { Instruction, ProcBegin, ProcEnd };

struct ListingLine {
    std::string section;
    uint64_t address = 0;
    std::string text;       // body with any trailing ';' comment stripped
    LineKind kind = LineKind::Instruction;
    std::string proc_name;  // ProcBegin / ProcEnd only
    int source_line = 0;    // 1-based
};

// One disassembly listing. Lines follow `SECTION:HEXADDR  BODY`; comment,
// data-declaration, label and blank bodies are skipped and counted.
struct AsmListing {
    std::string path;
    std::vector<ListingLine> lines;
    long skipped_lines = 0;
};

// Throws MalformedLine (with the line number) when a line carries the
// SECTION:HEXADDR prefix but its body cannot be parsed. Empty input yields an
// empty listing.
AsmListing parse_listing(const std::string& raw_text, const std::string& path = "");

// .text/.code are code by name; any other section qualifies when at least
// min_code_fraction of its lines look like x86 instructions.
bool is_code_section(const std::string& section_name,
                     const std::vector<ListingLine>& lines,
                     double min_code_fraction = 0.5);

bool is_known_mnemonic(const std::string& lowercase_mnemonic);

}  // namespace cgc
