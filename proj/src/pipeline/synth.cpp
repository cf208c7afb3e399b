#include "cgc/pipeline/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "cgc/util/errors.hpp"
#include "cgc/util/fs_io.hpp"
#include "cgc/util/rng.hpp"

namespace cgc {

namespace {

const std::vector<std::string>& registers() {
    static const std::vector<std::string> regs = {"eax", "ebx", "ecx", "edx",
                                                  "esi", "edi", "ebp", "esp"};
    return regs;
}

// One random instruction body. Immediates stay below 0x1000 so they survive
// normalization verbatim.
std::string random_instruction(Rng& rng) {
    const auto& regs = registers();
    auto reg = [&] { return regs[static_cast<std::size_t>(rng.bounded(regs.size()))]; };
    auto imm = [&] { return std::to_string(rng.uniform_int(0, 255)); };
    switch (rng.bounded(14)) {
        case 0: return "push " + reg();
        case 1: return "pop " + reg();
        case 2: return "mov " + reg() + ", " + reg();
        case 3: return "mov " + reg() + ", " + imm();
        case 4: return "add " + reg() + ", " + imm();
        case 5: return "sub " + reg() + ", " + imm();
        case 6: return "xor " + reg() + ", " + reg();
        case 7: return "cmp " + reg() + ", " + imm();
        case 8: return "test " + reg() + ", " + reg();
        case 9: return "lea " + reg() + ", [" + reg() + "+" + imm() + "]";
        case 10: return "inc " + reg();
        case 11: return "dec " + reg();
        case 12: return "shl " + reg() + ", 1";
        default: return "nop";
    }
}

std::string file_index_id(const std::string& family, int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%03d", index);
    return family + "_" + buf;
}

}  // namespace

void SyntheticFamilySpec::validate() const {
    if (name.empty()) throw InvalidSpec("family name must not be empty");
    if (motif_count < 1) throw InvalidSpec("family '" + name + "': needs at least one motif");
    if (motif_min_len < 1 || motif_max_len < motif_min_len)
        throw InvalidSpec("family '" + name + "': bad motif length range");
    if (mutation_rate < 0.0 || mutation_rate > 1.0)
        throw InvalidSpec("family '" + name + "': mutation_rate must be in [0, 1]");
    if (functions_min < 1 || functions_max < functions_min)
        throw InvalidSpec("family '" + name + "': bad function count range");
    if (edge_density < 0.0) throw InvalidSpec("family '" + name + "': edge_density must be >= 0");
    if (samples < 1) throw InvalidSpec("family '" + name + "': samples must be >= 1");
}

nlohmann::json SyntheticFamilySpec::to_json() const {
    return nlohmann::json{{"name", name},
                          {"motif_count", motif_count},
                          {"motif_min_len", motif_min_len},
                          {"motif_max_len", motif_max_len},
                          {"mutation_rate", mutation_rate},
                          {"functions_min", functions_min},
                          {"functions_max", functions_max},
                          {"edge_density", edge_density},
                          {"imports", imports},
                          {"samples", samples}};
}

SyntheticFamilySpec SyntheticFamilySpec::from_json(const nlohmann::json& j) {
    SyntheticFamilySpec s;
    s.name = j.at("name").get<std::string>();
    s.motif_count = j.value("motif_count", s.motif_count);
    s.motif_min_len = j.value("motif_min_len", s.motif_min_len);
    s.motif_max_len = j.value("motif_max_len", s.motif_max_len);
    s.mutation_rate = j.value("mutation_rate", s.mutation_rate);
    s.functions_min = j.value("functions_min", s.functions_min);
    s.functions_max = j.value("functions_max", s.functions_max);
    s.edge_density = j.value("edge_density", s.edge_density);
    if (j.contains("imports")) s.imports = j.at("imports").get<std::vector<std::string>>();
    s.samples = j.value("samples", s.samples);
    s.validate();
    return s;
}

SyntheticCorpus generate_synthetic_corpus(const std::vector<SyntheticFamilySpec>& specs,
                                          uint64_t seed) {
    if (specs.empty()) throw InvalidSpec("no family specs");
    std::set<std::string> names;
    for (const auto& spec : specs) {
        spec.validate();
        if (!names.insert(spec.name).second)
            throw InvalidSpec("duplicate family name '" + spec.name + "'");
    }

    SyntheticCorpus corpus;
    int family_index = 0;
    for (const auto& spec : specs) {
        // family motif library
        Rng motif_rng = Rng::substream(seed, "synth:motifs:" + spec.name);
        std::vector<std::vector<std::string>> motifs(static_cast<std::size_t>(spec.motif_count));
        for (auto& motif : motifs) {
            int len = static_cast<int>(motif_rng.uniform_int(spec.motif_min_len, spec.motif_max_len));
            motif.reserve(static_cast<std::size_t>(len));
            for (int i = 0; i < len; ++i) motif.push_back(random_instruction(motif_rng));
        }
        // family wiring skew: callee choice bias differs per family
        double wiring_bias = 1.0 + 0.8 * static_cast<double>(family_index);

        for (int sample = 0; sample < spec.samples; ++sample) {
            std::string file_id = file_index_id(spec.name, sample);
            Rng file_rng = Rng::substream(seed, "synth:file:" + file_id);
            int n = static_cast<int>(file_rng.uniform_int(spec.functions_min, spec.functions_max));

            // topology depends only on (family, n): files of equal size share
            // wiring, so mutation_rate 0 yields identical function multisets
            Rng topo_rng =
                Rng::substream(seed, "synth:topo:" + spec.name + ":" + std::to_string(n));

            // distinct internal call pairs
            std::set<std::pair<int, int>> internal_edges;
            long target = std::lround(spec.edge_density * static_cast<double>(n));
            for (long attempt = 0; attempt < target * 8 &&
                                   static_cast<long>(internal_edges.size()) < target;
                 ++attempt) {
                int caller = static_cast<int>(topo_rng.bounded(static_cast<uint64_t>(n)));
                double u = topo_rng.uniform01();
                int callee = static_cast<int>(std::pow(u, wiring_bias) * n);
                if (callee >= n) callee = n - 1;
                if (caller == callee) continue;
                internal_edges.insert({caller, callee});
            }
            // import attachments
            std::vector<std::pair<int, std::string>> import_calls;
            std::set<std::string> imports_used;
            for (const auto& import_name : spec.imports) {
                int attach = static_cast<int>(topo_rng.uniform_int(1, std::min(4, n)));
                std::set<int> callers;
                while (static_cast<int>(callers.size()) < attach)
                    callers.insert(static_cast<int>(topo_rng.bounded(static_cast<uint64_t>(n))));
                for (int caller : callers) import_calls.emplace_back(caller, import_name);
                imports_used.insert(import_name);
            }

            // per-function call lists and insertion offsets
            std::vector<std::vector<std::string>> calls(static_cast<std::size_t>(n));
            std::vector<uint64_t> fn_addr(static_cast<std::size_t>(n));
            uint64_t addr = 0x401000;
            std::vector<std::vector<std::string>> bodies(static_cast<std::size_t>(n));
            for (int f = 0; f < n; ++f) {
                fn_addr[static_cast<std::size_t>(f)] = addr;
                const auto& motif = motifs[static_cast<std::size_t>(f) % motifs.size()];
                auto& body = bodies[static_cast<std::size_t>(f)];
                body = motif;
                addr += 0x40 + 8 * static_cast<uint64_t>(motif.size());
            }
            auto fn_name = [&](int f) {
                char buf[24];
                std::snprintf(buf, sizeof(buf), "sub_%06llx",
                              static_cast<unsigned long long>(fn_addr[static_cast<std::size_t>(f)]));
                return std::string(buf);
            };
            for (const auto& [caller, callee] : internal_edges)
                calls[static_cast<std::size_t>(caller)].push_back("call " + fn_name(callee));
            for (const auto& [caller, import_name] : import_calls)
                calls[static_cast<std::size_t>(caller)].push_back("call " + import_name);
            for (int f = 0; f < n; ++f) {
                auto& body = bodies[static_cast<std::size_t>(f)];
                for (const auto& call : calls[static_cast<std::size_t>(f)]) {
                    std::size_t pos = topo_rng.bounded(body.size() + 1);
                    body.insert(body.begin() + static_cast<std::ptrdiff_t>(pos), call);
                }
            }

            // content mutation (calls excluded so the topology stays exact)
            Rng mut_rng = Rng::substream(seed, "synth:mut:" + file_id);
            for (auto& body : bodies)
                for (auto& instr : body) {
                    if (instr.rfind("call ", 0) == 0) continue;
                    if (mut_rng.uniform01() < spec.mutation_rate) instr = random_instruction(mut_rng);
                }

            // emit listing
            std::string text = "; synthetic sample " + file_id + "\n";
            uint64_t line_addr = 0x401000;
            for (int f = 0; f < n; ++f) {
                char buf[64];
                auto emit = [&](const std::string& body_text) {
                    std::snprintf(buf, sizeof(buf), ".text:%08llx  ",
                                  static_cast<unsigned long long>(line_addr));
                    text += buf;
                    text += body_text;
                    text += '\n';
                    line_addr += 5;
                };
                emit(fn_name(f) + " proc near");
                for (const auto& instr : bodies[static_cast<std::size_t>(f)]) emit(instr);
                emit("retn");
                emit(fn_name(f) + " endp");
            }
            // a little non-code data to exercise the section filter
            char buf[64];
            std::snprintf(buf, sizeof(buf), ".data:%08llx  ", static_cast<unsigned long long>(line_addr));
            text += std::string(buf) + "unk_" + std::to_string(sample) + " db 0\n";
            std::snprintf(buf, sizeof(buf), ".data:%08llx  ", static_cast<unsigned long long>(line_addr + 8));
            text += std::string(buf) + "dd 12345678h\n";

            SyntheticFileTruth truth;
            truth.file_id = file_id;
            truth.family = spec.name;
            truth.function_count = n;
            truth.vertex_count = n + static_cast<long>(imports_used.size());
            truth.edge_count =
                static_cast<long>(internal_edges.size()) + static_cast<long>(import_calls.size());
            corpus.truth.push_back(std::move(truth));
            corpus.labels[file_id] = spec.name;
            corpus.files.emplace_back(file_id, std::move(text));
            (void)file_rng;
        }
        ++family_index;
    }
    return corpus;
}

void write_synthetic_corpus(const SyntheticCorpus& corpus, const std::string& dir) {
    ensure_dir(dir);
    for (const auto& [id, text] : corpus.files) write_file_atomic(dir + "/" + id + ".asm", text);
    nlohmann::json labels(corpus.labels);
    write_json_file(dir + "/labels.json", labels);
    auto truth = nlohmann::json::array();
    for (const auto& t : corpus.truth)
        truth.push_back({{"file_id", t.file_id},
                         {"family", t.family},
                         {"function_count", t.function_count},
                         {"vertex_count", t.vertex_count},
                         {"edge_count", t.edge_count}});
    write_json_file(dir + "/truth.json", truth);
}

std::vector<SyntheticFamilySpec> default_family_specs(int families, int samples_per_family,
                                                      int functions_min, int functions_max) {
    static const std::vector<std::string> family_names = {
        "alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel", "india"};
    static const std::vector<std::string> import_pool = {
        "CreateFileA",      "ReadFile",        "WriteFile",       "CloseHandle",
        "GetProcAddress",   "LoadLibraryA",    "VirtualAlloc",    "VirtualFree",
        "RegOpenKeyExA",    "RegSetValueExA",  "InternetOpenA",   "InternetReadFile",
        "send",             "recv",            "socket",          "connect",
        "GetTickCount",     "Sleep",           "CreateThread",    "ExitProcess",
        "GetModuleHandleA", "FindFirstFileA",  "FindNextFileA",   "DeleteFileA"};
    if (families < 1 || families > static_cast<int>(family_names.size()))
        throw InvalidSpec("families must be between 1 and " +
                          std::to_string(family_names.size()));

    std::vector<SyntheticFamilySpec> specs;
    for (int f = 0; f < families; ++f) {
        SyntheticFamilySpec s;
        s.name = family_names[static_cast<std::size_t>(f)];
        s.motif_count = 14;
        s.motif_min_len = 6;
        s.motif_max_len = 28;
        s.mutation_rate = 0.08;
        s.functions_min = functions_min;
        s.functions_max = functions_max;
        s.edge_density = 1.2 + 0.25 * static_cast<double>(f);
        s.samples = samples_per_family;
        // six imports per family, overlapping with neighbours
        for (int i = 0; i < 6; ++i)
            s.imports.push_back(import_pool[static_cast<std::size_t>(3 * f + i) % import_pool.size()]);
        specs.push_back(std::move(s));
    }
    return specs;
}

}  // namespace cgc
