#pragma once

// Scalar-loop GRU step reference, written independently of the vectorized
// implementation. Plain loops over raw arrays, no Eigen expressions.

#include <cmath>
#include <vector>

#include "cgc/nn/gru.hpp"

namespace oracle {

inline std::vector<double> gru_step_scalar(const cgc::GruCellParams& p,
                                           const std::vector<double>& x,
                                           const std::vector<double>& h_prev) {
    const int H = p.hidden_dim();
    const int I = p.input_dim();
    std::vector<double> z(H), r(H), c(H), h(H);
    for (int i = 0; i < H; ++i) {
        double az = p.b_z(i), ar = p.b_r(i);
        for (int j = 0; j < I; ++j) {
            az += p.W_z(i, j) * x[static_cast<std::size_t>(j)];
            ar += p.W_r(i, j) * x[static_cast<std::size_t>(j)];
        }
        for (int j = 0; j < H; ++j) {
            az += p.U_z(i, j) * h_prev[static_cast<std::size_t>(j)];
            ar += p.U_r(i, j) * h_prev[static_cast<std::size_t>(j)];
        }
        z[static_cast<std::size_t>(i)] = 1.0 / (1.0 + std::exp(-az));
        r[static_cast<std::size_t>(i)] = 1.0 / (1.0 + std::exp(-ar));
    }
    for (int i = 0; i < H; ++i) {
        double ac = p.b_h(i);
        for (int j = 0; j < I; ++j) ac += p.W_h(i, j) * x[static_cast<std::size_t>(j)];
        for (int j = 0; j < H; ++j)
            ac += p.U_h(i, j) * (r[static_cast<std::size_t>(j)] * h_prev[static_cast<std::size_t>(j)]);
        c[static_cast<std::size_t>(i)] = std::tanh(ac);
    }
    for (int i = 0; i < H; ++i)
        h[static_cast<std::size_t>(i)] =
            (1.0 - z[static_cast<std::size_t>(i)]) * h_prev[static_cast<std::size_t>(i)] +
            z[static_cast<std::size_t>(i)] * c[static_cast<std::size_t>(i)];
    return h;
}

}  // namespace oracle
