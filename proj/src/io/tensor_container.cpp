#include "cgc/io/tensor_container.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

#include "cgc/util/errors.hpp"

namespace cgc {

namespace {
constexpr char kMagic[4] = {'C', 'G', 'C', 'T'};
constexpr uint32_t kVersion = 1;

void write_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void write_u64(std::string& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
uint32_t read_u32(const char* p) {
    uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(p[i]);
    return v;
}
uint64_t read_u64(const char* p) {
    uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(p[i]);
    return v;
}
}  // namespace

void TensorContainer::add(const std::string& name, const Eigen::MatrixXd& m) {
    tensors_.emplace_back(name, m);
}

void TensorContainer::add(const std::string& name, const Eigen::VectorXd& v) {
    tensors_.emplace_back(name, Eigen::MatrixXd(v));
}

bool TensorContainer::has(const std::string& name) const {
    for (const auto& [n, t] : tensors_)
        if (n == name) return true;
    return false;
}

const Eigen::MatrixXd& TensorContainer::get(const std::string& name) const {
    for (const auto& [n, t] : tensors_)
        if (n == name) return t;
    throw IoError("tensor not found in container: " + name);
}

Eigen::VectorXd TensorContainer::get_vector(const std::string& name) const {
    const Eigen::MatrixXd& m = get(name);
    if (m.cols() != 1) throw IoError("tensor is not a vector: " + name);
    return m.col(0);
}

void TensorContainer::save(const std::string& path) const {
    nlohmann::json header;
    header["schema"] = schema;
    header["meta"] = meta;
    auto manifest = nlohmann::json::array();
    uint64_t offset = 0;
    for (const auto& [name, t] : tensors_) {
        manifest.push_back({{"name", name},
                            {"rows", t.rows()},
                            {"cols", t.cols()},
                            {"offset", offset}});
        offset += static_cast<uint64_t>(t.size()) * sizeof(double);
    }
    header["tensors"] = manifest;
    std::string header_text = header.dump();

    std::string out;
    out.append(kMagic, 4);
    write_u32(out, kVersion);
    write_u64(out, header_text.size());
    out += header_text;
    for (const auto& [name, t] : tensors_) {
        using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
        RowMajor rm = t;
        out.append(reinterpret_cast<const char*>(rm.data()),
                   static_cast<std::size_t>(rm.size()) * sizeof(double));
    }

    std::filesystem::path target(path);
    if (target.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(target.parent_path(), ec);
    }
    std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw UnwritablePath("cannot write container: " + tmp);
        f.write(out.data(), static_cast<std::streamsize>(out.size()));
        if (!f) throw UnwritablePath("short write: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw UnwritablePath("rename failed: " + path);
}

TensorContainer TensorContainer::load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open container: " + path);
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw IoError("not a tensor container: " + path);
    uint32_t version = read_u32(bytes.data() + 4);
    if (version != kVersion) throw IoError("unsupported container version in " + path);
    uint64_t header_len = read_u64(bytes.data() + 8);
    if (16 + header_len > bytes.size()) throw IoError("truncated container header: " + path);

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(bytes.substr(16, header_len));
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("corrupt container header: ") + e.what());
    }

    TensorContainer c;
    c.schema = header.at("schema").get<std::string>();
    c.meta = header.value("meta", nlohmann::json::object());

    std::size_t payload_base = 16 + header_len;
    uint64_t expected = 0;
    for (const auto& entry : header.at("tensors")) expected += entry.at("rows").get<uint64_t>() * entry.at("cols").get<uint64_t>() * sizeof(double);
    if (payload_base + expected != bytes.size())
        throw IoError("container payload size does not match shape manifest: " + path);

    for (const auto& entry : header.at("tensors")) {
        auto name = entry.at("name").get<std::string>();
        auto rows = entry.at("rows").get<Eigen::Index>();
        auto cols = entry.at("cols").get<Eigen::Index>();
        auto offset = entry.at("offset").get<uint64_t>();
        if (rows < 0 || cols < 0) throw IoError("negative shape in manifest: " + path);
        std::size_t nbytes = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) * sizeof(double);
        if (payload_base + offset + nbytes > bytes.size()) throw IoError("tensor extends past end of file: " + path);
        using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
        RowMajor rm(rows, cols);
        std::memcpy(rm.data(), bytes.data() + payload_base + offset, nbytes);
        c.tensors_.emplace_back(name, Eigen::MatrixXd(rm));
    }
    return c;
}

}  // namespace cgc
