#pragma once

// Central finite differences over every model parameter, compared against
// the analytic gradients. Independent of the backpropagation path: only the
// forward loss is exercised.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cgc/nn/autoencoder.hpp"

namespace oracle {

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::string worst_param;
    long components = 0;
};

inline double batch_loss(const cgc::GruAutoencoderModel& model,
                         const std::vector<std::vector<int>>& batch) {
    double loss = 0.0;
    for (const auto& seq : batch) loss += cgc::sequence_loss(model, seq);
    return loss / static_cast<double>(batch.size());
}

inline GradCheckResult gradient_check(cgc::GruAutoencoderModel model,
                                      const std::vector<std::vector<int>>& batch,
                                      double epsilon = 1e-5) {
    cgc::LossGrads lg = cgc::loss_and_gradients(model, batch);

    // analytic gradient tensors in for_each_param order
    std::vector<const double*> grad_data;
    lg.grads.for_each_param([&](const std::string&, auto& g) { grad_data.push_back(g.data()); });

    GradCheckResult result;
    std::size_t param_index = 0;
    model.for_each_param([&](const std::string& name, auto& tensor) {
        const double* grads = grad_data[param_index++];
        double* data = tensor.data();
        for (Eigen::Index i = 0; i < tensor.size(); ++i) {
            double saved = data[i];
            data[i] = saved + epsilon;
            double up = batch_loss(model, batch);
            data[i] = saved - epsilon;
            double down = batch_loss(model, batch);
            data[i] = saved;

            double numeric = (up - down) / (2.0 * epsilon);
            double a = grads[i];
            double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-5});
            if (rel > result.max_rel_error) {
                result.max_rel_error = rel;
                result.worst_param = name;
            }
            ++result.components;
        }
    });
    return result;
}

}  // namespace oracle
