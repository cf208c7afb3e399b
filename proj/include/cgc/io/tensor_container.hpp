#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace cgc {

// Single-file model container: a JSON header carrying a schema tag, free-form
// metadata and a shape manifest, followed by the tensors as row-major 64-bit
// floats. Loading validates every shape and the payload size against the
// manifest.
class TensorContainer {
public:
    std::string schema;
    nlohmann::json meta = nlohmann::json::object();

    void add(const std::string& name, const Eigen::MatrixXd& m);
    void add(const std::string& name, const Eigen::VectorXd& v);

    bool has(const std::string& name) const;
    const Eigen::MatrixXd& get(const std::string& name) const;  // IoError if missing
    Eigen::VectorXd get_vector(const std::string& name) const;  // requires 1 column

    const std::vector<std::pair<std::string, Eigen::MatrixXd>>& tensors() const { return tensors_; }

    void save(const std::string& path) const;
    static TensorContainer load(const std::string& path);

private:
    std::vector<std::pair<std::string, Eigen::MatrixXd>> tensors_;
};

}  // namespace cgc
