#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cgc/asm/listing.hpp"

namespace cgc {

struct FunctionRecord {
    std::string name;
    std::string section;
    std::vector<std::string> tokens;        // normalized instructions
    std::vector<std::string> callee_names;  // call operands, in order, duplicates kept
    bool is_external = false;

    bool operator==(const FunctionRecord&) const = default;
};

struct ExtractionResult {
    std::vector<FunctionRecord> functions;
    long instruction_lines = 0;      // instruction lines in the whole listing
    long assigned_instructions = 0;  // instructions placed into functions
    long skipped_outside_code = 0;   // instructions in non-code sections
    long indirect_calls_dropped = 0;
    long empty_functions_dropped = 0;
    std::vector<std::string> warnings;
};

// proc/endp regions become internal functions; code outside any region is
// grouped into synthetic functions split at unconditional control-flow
// breaks. A proc without endp is closed at section end with a warning.
ExtractionResult extract_functions(const AsmListing& listing, double min_code_fraction = 0.5);

// Line-delimited JSON with fields {name, section, is_external, tokens, callees}.
std::string function_records_to_jsonl(const std::vector<FunctionRecord>& records);
std::vector<FunctionRecord> function_records_from_jsonl(const std::string& text);

}  // namespace cgc
