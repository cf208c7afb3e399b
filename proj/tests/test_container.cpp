#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cgc/io/tensor_container.hpp"
#include "cgc/util/errors.hpp"
#include "cgc/util/rng.hpp"

using namespace cgc;

TEST_SUITE_BEGIN("container");

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("tensor container round trip is bitwise") {
    Rng rng(7);
    Eigen::MatrixXd m(5, 3);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.gaussian();
    Eigen::VectorXd v(4);
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.uniform01();

    TensorContainer c;
    c.schema = "test/1";
    c.meta = {{"note", "round trip"}};
    c.add("m", m);
    c.add("v", v);

    std::string path = temp_path("cgc_container_test.cgct");
    c.save(path);
    TensorContainer loaded = TensorContainer::load(path);
    CHECK(loaded.schema == "test/1");
    CHECK(loaded.meta.at("note") == "round trip");
    CHECK(loaded.get("m") == m);
    CHECK(loaded.get_vector("v") == v);
    std::remove(path.c_str());
}

TEST_CASE("container rejects corrupt magic") {
    std::string path = temp_path("cgc_container_bad.cgct");
    std::ofstream(path) << "not a container at all";
    CHECK_THROWS_AS(TensorContainer::load(path), IoError);
    std::remove(path.c_str());
}

TEST_CASE("container rejects payload/manifest mismatch") {
    TensorContainer c;
    c.schema = "test/1";
    c.add("m", Eigen::MatrixXd(Eigen::MatrixXd::Ones(3, 3)));
    std::string path = temp_path("cgc_container_trunc.cgct");
    c.save(path);

    // truncate the payload
    std::string bytes;
    {
        std::ifstream in(path, std::ios::binary);
        bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    bytes.resize(bytes.size() - 8);
    std::ofstream(path, std::ios::binary | std::ios::trunc).write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    CHECK_THROWS_AS(TensorContainer::load(path), IoError);
    std::remove(path.c_str());
}

TEST_SUITE_END();
