#include "cgc/asm/functions.hpp"

#include <map>
#include <sstream>

#include "json.hpp"

#include "cgc/asm/normalize.hpp"
#include "cgc/util/errors.hpp"

namespace cgc {

namespace {

bool is_flow_break(const std::string& token) {
    std::size_t sp = token.find(' ');
    std::string m = sp == std::string::npos ? token : token.substr(0, sp);
    return m == "jmp" || m == "ret" || m == "retn" || m == "retf" || m == "iret" ||
           m == "iretd" || m == "hlt";
}

std::string hex_addr(uint64_t a) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%08llx", static_cast<unsigned long long>(a));
    return buf;
}

struct Builder {
    ExtractionResult& result;
    std::string section;
    std::string name;
    bool in_proc = false;
    uint64_t start_addr = 0;
    FunctionRecord current;

    void open(const std::string& fn_name, const std::string& sec, uint64_t addr, bool proc) {
        current = FunctionRecord{};
        current.name = fn_name.empty() ? "orphan_" + hex_addr(addr) : fn_name;
        current.section = sec;
        in_proc = proc;
        start_addr = addr;
    }

    void add_instruction(const ListingLine& line) {
        std::string mnemonic = line.text.substr(0, line.text.find_first_of(" \t"));
        for (auto& c : mnemonic) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (mnemonic == "call") {
            if (auto target = call_target(line.text))
                current.callee_names.push_back(*target);
            else
                ++result.indirect_calls_dropped;
        }
        current.tokens.push_back(normalize_instruction(line.text));
        ++result.assigned_instructions;
    }

    void close() {
        if (current.tokens.empty()) {
            if (in_proc) {
                ++result.empty_functions_dropped;
                result.warnings.push_back("empty function dropped: " + current.name);
            }
        } else {
            result.functions.push_back(std::move(current));
        }
        current = FunctionRecord{};
        in_proc = false;
    }

    bool active() const { return in_proc || !current.tokens.empty(); }
};

}  // namespace

ExtractionResult extract_functions(const AsmListing& listing, double min_code_fraction) {
    ExtractionResult result;

    // group lines by section, preserving first-appearance order
    std::vector<std::string> section_order;
    std::map<std::string, std::vector<ListingLine>> sections;
    for (const auto& line : listing.lines) {
        auto [it, inserted] = sections.try_emplace(line.section);
        if (inserted) section_order.push_back(line.section);
        it->second.push_back(line);
        if (line.kind == LineKind::Instruction) ++result.instruction_lines;
    }

    for (const auto& sec : section_order) {
        const auto& lines = sections[sec];
        if (!is_code_section(sec, lines, min_code_fraction)) {
            for (const auto& l : lines)
                if (l.kind == LineKind::Instruction) ++result.skipped_outside_code;
            continue;
        }

        Builder b{result};
        for (const auto& line : lines) {
            switch (line.kind) {
                case LineKind::ProcBegin:
                    if (b.in_proc) {
                        result.warnings.push_back("unterminated function '" + b.current.name +
                                                  "' closed at new proc (line " +
                                                  std::to_string(line.source_line) + ")");
                        b.close();
                    } else if (b.active()) {
                        b.close();  // flush synthetic run
                    }
                    b.open(line.proc_name, sec, line.address, true);
                    break;
                case LineKind::ProcEnd:
                    if (b.in_proc) {
                        if (b.current.name != line.proc_name)
                            result.warnings.push_back("endp name mismatch: '" + line.proc_name +
                                                      "' closes '" + b.current.name + "'");
                        b.close();
                    } else {
                        result.warnings.push_back("stray endp '" + line.proc_name + "' ignored (line " +
                                                  std::to_string(line.source_line) + ")");
                    }
                    break;
                case LineKind::Instruction:
                    if (!b.active()) b.open("", sec, line.address, false);
                    b.add_instruction(line);
                    if (!b.in_proc && is_flow_break(b.current.tokens.back())) b.close();
                    break;
            }
        }
        if (b.in_proc)
            result.warnings.push_back("unterminated function '" + b.current.name +
                                      "' closed at section end");
        if (b.active()) b.close();
    }
    return result;
}

std::string function_records_to_jsonl(const std::vector<FunctionRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        nlohmann::json j{{"name", r.name},
                         {"section", r.section},
                         {"is_external", r.is_external},
                         {"tokens", r.tokens},
                         {"callees", r.callee_names}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::vector<FunctionRecord> function_records_from_jsonl(const std::string& text) {
    std::vector<FunctionRecord> records;
    std::istringstream stream(text);
    std::string line;
    int line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw IoError("bad function record on line " + std::to_string(line_no) + ": " + e.what());
        }
        FunctionRecord r;
        r.name = j.at("name").get<std::string>();
        r.section = j.at("section").get<std::string>();
        r.is_external = j.at("is_external").get<bool>();
        r.tokens = j.at("tokens").get<std::vector<std::string>>();
        r.callee_names = j.at("callees").get<std::vector<std::string>>();
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace cgc
