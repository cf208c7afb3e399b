#include "doctest.h"

#include "cgc/asm/listing.hpp"
#include "cgc/asm/normalize.hpp"
#include "cgc/asm/vocabulary.hpp"
#include "cgc/util/errors.hpp"
#include "cgc/util/rng.hpp"

using namespace cgc;

TEST_SUITE_BEGIN("asm");

TEST_CASE("parse_listing single instruction line") {
    AsmListing listing = parse_listing(".text:00401000  mov edi, edi");
    REQUIRE(listing.lines.size() == 1);
    CHECK(listing.lines[0].section == ".text");
    CHECK(listing.lines[0].address == 0x401000);
    CHECK(listing.lines[0].text == "mov edi, edi");
    CHECK(listing.lines[0].kind == LineKind::Instruction);
    CHECK(listing.skipped_lines == 0);
}

TEST_CASE("parse_listing empty input") {
    AsmListing listing = parse_listing("");
    CHECK(listing.lines.empty());
    CHECK(listing.skipped_lines == 0);
}

TEST_CASE("parse_listing comment-only body is skipped") {
    AsmListing listing = parse_listing(".text:00401000 ; comment only");
    CHECK(listing.lines.empty());
    CHECK(listing.skipped_lines == 1);
}

TEST_CASE("parse_listing skips data, labels and directives") {
    std::string text =
        ".data:00403000  db 0\n"
        ".data:00403001  unk_403001 dd 5\n"
        ".text:00401000  loc_401000:\n"
        ".text:00401001  align 4\n"
        "random garbage line\n"
        "\n"
        ".text:00401005  push ebp\n";
    AsmListing listing = parse_listing(text);
    REQUIRE(listing.lines.size() == 1);
    CHECK(listing.lines[0].text == "push ebp");
    CHECK(listing.skipped_lines == 6);
}

TEST_CASE("parse_listing proc markers") {
    std::string text =
        ".text:00401000  start proc near\n"
        ".text:00401005  push ebp\n"
        ".text:0040100a  start endp\n";
    AsmListing listing = parse_listing(text);
    REQUIRE(listing.lines.size() == 3);
    CHECK(listing.lines[0].kind == LineKind::ProcBegin);
    CHECK(listing.lines[0].proc_name == "start");
    CHECK(listing.lines[2].kind == LineKind::ProcEnd);
}

TEST_CASE("parse_listing malformed body throws with line number") {
    CHECK_THROWS_AS(parse_listing(".text:00401000  12garbage eax"), MalformedLine);
    CHECK_THROWS_AS(parse_listing(".text:00401000  f proc sideways"), MalformedLine);
    try {
        parse_listing(".text:00401000  push ebp\n.text:00401005  99bottles");
    } catch (const MalformedLine& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("is_code_section") {
    AsmListing code = parse_listing(
        ".brick:00401000  push ebp\n"
        ".brick:00401001  mov ebp, esp\n"
        ".brick:00401002  pop ebp\n"
        ".brick:00401003  ret\n"
        ".brick:00401004  iuagwws eax, 5\n");
    AsmListing junk = parse_listing(
        ".reloc:00500000  qqq a\n"
        ".reloc:00500001  zzz b\n");
    CHECK(is_code_section(".text", {}));
    CHECK(is_code_section(".code", {}));
    CHECK(is_code_section(".brick", code.lines));       // 4 of 5 valid
    CHECK_FALSE(is_code_section(".reloc", junk.lines));  // 0 of 2 valid
    CHECK_FALSE(is_code_section(".reloc", {}));
}

TEST_CASE("normalize_instruction spec examples") {
    CHECK(normalize_instruction("call 0x401B20") == "call <addr>");
    CHECK(normalize_instruction("push ebp") == "push ebp");
    CHECK(normalize_instruction("SUB ESP, 48") == "sub esp, 48");
}

TEST_CASE("normalize_instruction address forms") {
    CHECK(normalize_instruction("jmp loc_40100A") == "jmp <addr>");
    CHECK(normalize_instruction("call sub_401000") == "call <addr>");
    CHECK(normalize_instruction("push off_403000") == "push <addr>");
    CHECK(normalize_instruction("mov eax, 0x2000") == "mov eax, <addr>");
    CHECK(normalize_instruction("mov eax, 0x800") == "mov eax, 0x800");
    CHECK(normalize_instruction("mov eax, 2000h") == "mov eax, <addr>");
    CHECK(normalize_instruction("call GetProcAddress") == "call <addr>");
    CHECK(normalize_instruction("call eax") == "call eax");
    CHECK(normalize_instruction("call dword ptr [eax+4]") == "call dword ptr [eax+4]");
    CHECK(normalize_instruction("lea ecx, [ebp+8]") == "lea ecx, [ebp+8]");
    CHECK(normalize_instruction("MOV   EAX ,  EBX") == "mov eax, ebx");
}

TEST_CASE("normalize_instruction empty input") {
    CHECK_THROWS_AS(normalize_instruction("   "), EmptyInstruction);
    CHECK_THROWS_AS(normalize_instruction(" ; just a comment"), EmptyInstruction);
}

TEST_CASE("normalize_instruction is idempotent") {
    std::vector<std::string> samples = {
        "call 0x401B20",  "push ebp",          "SUB ESP, 48",
        "jmp loc_40100A", "call GetProcAddress", "call eax",
        "mov eax, 0x2000", "lea ecx, [ebp+8]",  "call ds:CreateFileA",
        "rep movsd",       "jmp short loc_401",  "xor eax, eax",
    };
    for (const auto& s : samples) {
        std::string once = normalize_instruction(s);
        CHECK(normalize_instruction(once) == once);
    }
}

TEST_CASE("call_target extraction") {
    CHECK(call_target("call sub_401000").value() == "sub_401000");
    CHECK(call_target("call GetProcAddress").value() == "GetProcAddress");
    CHECK(call_target("call ds:CreateFileA").value() == "CreateFileA");
    CHECK(call_target("call near ptr Sleep").value() == "Sleep");
    CHECK_FALSE(call_target("call eax").has_value());
    CHECK_FALSE(call_target("call dword ptr [ebp-4]").has_value());
    CHECK_FALSE(call_target("call 0x401000").has_value());
}

namespace {

AsmListing fixture_listing() {
    return parse_listing(
        ".text:00401000  alpha proc near\n"
        ".text:00401001  push ebp\n"
        ".text:00401002  call beta\n"
        ".text:00401003  call beta\n"
        ".text:00401004  call CreateFileA\n"
        ".text:00401005  call eax\n"
        ".text:00401006  retn\n"
        ".text:00401007  alpha endp\n"
        ".text:00401008  beta proc near\n"
        ".text:00401009  xor eax, eax\n"
        ".text:0040100a  retn\n"
        ".text:0040100b  beta endp\n"
        ".text:0040100c  mov eax, ebx\n"
        ".text:0040100d  jmp loc_401100\n"
        ".text:0040100e  push ecx\n"
        ".data:00404000  blah eax, 1\n");
}

}  // namespace

TEST_CASE("extract_functions proc regions and callees") {
    ExtractionResult result = extract_functions(fixture_listing());
    REQUIRE(result.functions.size() == 4);  // alpha, beta, two synthetic runs

    const FunctionRecord& alpha = result.functions[0];
    CHECK(alpha.name == "alpha");
    CHECK(alpha.section == ".text");
    CHECK(alpha.tokens.size() == 6);
    CHECK(alpha.callee_names == std::vector<std::string>{"beta", "beta", "CreateFileA"});
    CHECK(result.indirect_calls_dropped == 1);

    // synthetic functions split at the unconditional jmp
    CHECK(result.functions[2].name == "orphan_0040100c");
    CHECK(result.functions[2].tokens.size() == 2);
    CHECK(result.functions[3].tokens.size() == 1);
}

TEST_CASE("extract_functions conservation invariant") {
    ExtractionResult result = extract_functions(fixture_listing());
    long assigned = 0;
    for (const auto& f : result.functions) assigned += static_cast<long>(f.tokens.size());
    CHECK(assigned == result.assigned_instructions);
    CHECK(result.assigned_instructions + result.skipped_outside_code == result.instruction_lines);
    CHECK(result.skipped_outside_code == 1);  // the .data instruction
}

TEST_CASE("extract_functions no code sections") {
    ExtractionResult result = extract_functions(parse_listing(".reloc:00500000  qqq a\n"));
    CHECK(result.functions.empty());
    CHECK(result.skipped_outside_code == 1);
}

TEST_CASE("extract_functions unterminated proc recovers with warning") {
    ExtractionResult result = extract_functions(parse_listing(
        ".text:00401000  f proc near\n"
        ".text:00401001  push ebp\n"));
    REQUIRE(result.functions.size() == 1);
    CHECK(result.functions[0].name == "f");
    REQUIRE(result.warnings.size() == 1);
    CHECK(result.warnings[0].find("unterminated") != std::string::npos);
}

TEST_CASE("function record JSONL round trip") {
    ExtractionResult result = extract_functions(fixture_listing());
    std::string jsonl = function_records_to_jsonl(result.functions);
    auto parsed = function_records_from_jsonl(jsonl);
    CHECK(parsed == result.functions);
    CHECK(function_records_to_jsonl(parsed) == jsonl);
}

TEST_CASE("vocabulary frequency order and cutoff") {
    FunctionRecord f;
    f.name = "f";
    f.section = ".text";
    f.tokens = {"push ebp", "push ebp", "push ebp", "pop ecx"};
    Vocabulary v = Vocabulary::build({f}, 1);
    CHECK(v.content_size() == 1);
    CHECK(v.encode("push ebp") == Vocabulary::kReserved);
    CHECK(v.encode("pop ecx") == Vocabulary::kUnknownId);
    CHECK(v.encode("never seen") == Vocabulary::kUnknownId);
    CHECK(v.decode(v.encode("never seen")) == "<unknown>");
}

TEST_CASE("vocabulary tie-break is lexicographic") {
    FunctionRecord f;
    f.name = "f";
    f.section = ".text";
    f.tokens = {"zz", "aa", "mm"};  // all frequency 1
    Vocabulary v = Vocabulary::build({f}, 2);
    CHECK(v.encode("aa") == Vocabulary::kReserved);
    CHECK(v.encode("mm") == Vocabulary::kReserved + 1);
    CHECK(v.encode("zz") == Vocabulary::kUnknownId);
}

TEST_CASE("vocabulary max_size cut on larger corpus") {
    std::vector<FunctionRecord> corpus;
    FunctionRecord f;
    f.name = "f";
    f.section = ".text";
    for (int i = 0; i < 300; ++i) f.tokens.push_back("tok" + std::to_string(i));
    corpus.push_back(f);
    Vocabulary v = Vocabulary::build(corpus, 200);
    CHECK(v.content_size() == 200);
    CHECK(v.size() == 204);
}

TEST_CASE("vocabulary determinism and round trips") {
    Rng rng(42);
    std::vector<FunctionRecord> corpus;
    for (int i = 0; i < 20; ++i) {
        FunctionRecord f;
        f.name = "f" + std::to_string(i);
        f.section = ".text";
        for (int t = 0; t < 30; ++t)
            f.tokens.push_back("tok" + std::to_string(rng.bounded(40)));
        corpus.push_back(std::move(f));
    }
    Vocabulary a = Vocabulary::build(corpus, 25);
    Vocabulary b = Vocabulary::build(corpus, 25);
    CHECK(a == b);

    Vocabulary c = Vocabulary::from_json(a.to_json());
    CHECK(a == c);
    CHECK(a.hash() == c.hash());

    // encode/decode identity on content tokens
    for (std::size_t id = Vocabulary::kReserved; id < a.size(); ++id)
        CHECK(a.encode(a.decode(static_cast<int>(id))) == static_cast<int>(id));
}

TEST_CASE("vocabulary empty corpus") {
    CHECK_THROWS_AS(Vocabulary::build({}, 10), EmptyCorpus);
}

TEST_CASE("encode_sequence basic and truncation") {
    FunctionRecord f;
    f.name = "f";
    f.section = ".text";
    f.tokens = {"push ebp"};
    Vocabulary v = Vocabulary::build({f}, 10);

    auto ids = encode_sequence(f, v, 300);
    CHECK(ids == std::vector<int>{Vocabulary::kStartId, v.encode("push ebp"), Vocabulary::kEndId});

    FunctionRecord long_f;
    long_f.name = "g";
    long_f.section = ".text";
    for (int i = 0; i < 500; ++i) long_f.tokens.push_back("push ebp");
    auto truncated = encode_sequence(long_f, v, 300);
    CHECK(truncated.size() == 302);

    FunctionRecord unk;
    unk.name = "h";
    unk.section = ".text";
    unk.tokens = {"a b", "c d"};
    auto unknowns = encode_sequence(unk, v, 300);
    CHECK(unknowns == std::vector<int>{Vocabulary::kStartId, Vocabulary::kUnknownId,
                                       Vocabulary::kUnknownId, Vocabulary::kEndId});

    FunctionRecord ext;
    ext.name = "imp";
    ext.is_external = true;
    CHECK_THROWS_AS(encode_sequence(ext, v, 300), ExternalFunction);
}

TEST_SUITE_END();
