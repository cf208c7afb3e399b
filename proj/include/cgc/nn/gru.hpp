#pragma once

#include <Eigen/Dense>
#include <vector>

namespace cgc {

// Gated recurrent unit parameters. Update gate z, reset gate r, candidate c:
//   z_t = sigmoid(W_z x_t + U_z h_{t-1} + b_z)
//   r_t = sigmoid(W_r x_t + U_r h_{t-1} + b_r)
//   h_t = (1 - z_t) o h_{t-1} + z_t o tanh(W_h x_t + U_h (r_t o h_{t-1}) + b_h)
struct GruCellParams {
    Eigen::MatrixXd W_z, W_r, W_h;  // hidden x input
    Eigen::MatrixXd U_z, U_r, U_h;  // hidden x hidden
    Eigen::VectorXd b_z, b_r, b_h;  // hidden

    static GruCellParams zeros(int hidden_dim, int input_dim);

    int hidden_dim() const { return static_cast<int>(W_z.rows()); }
    int input_dim() const { return static_cast<int>(W_z.cols()); }

    void check_consistent() const;  // DimensionMismatch

    template <class F>
    void for_each(const std::string& prefix, F&& f) {
        f(prefix + ".W_z", W_z);
        f(prefix + ".W_r", W_r);
        f(prefix + ".W_h", W_h);
        f(prefix + ".U_z", U_z);
        f(prefix + ".U_r", U_r);
        f(prefix + ".U_h", U_h);
        f(prefix + ".b_z", b_z);
        f(prefix + ".b_r", b_r);
        f(prefix + ".b_h", b_h);
    }
};

Eigen::VectorXd gru_step(const GruCellParams& p,
                         const Eigen::Ref<const Eigen::VectorXd>& x,
                         const Eigen::Ref<const Eigen::VectorXd>& h_prev);

// Per-step activations kept for backpropagation through time.
struct GruLayerTrace {
    std::vector<Eigen::VectorXd> z, r, c, h;
};

// Runs the cell over inputs, returns the final hidden state. When trace is
// non-null all per-step activations are recorded.
Eigen::VectorXd gru_layer_forward(const GruCellParams& p,
                                  const std::vector<Eigen::VectorXd>& inputs,
                                  const Eigen::VectorXd& h0,
                                  GruLayerTrace* trace);

// dh_out[t] is the gradient arriving at h_t from outside the recurrence.
// Accumulates parameter gradients into `grads`, writes input gradients and
// the gradient with respect to h0.
void gru_layer_backward(const GruCellParams& p,
                        const std::vector<Eigen::VectorXd>& inputs,
                        const Eigen::VectorXd& h0,
                        const GruLayerTrace& trace,
                        const std::vector<Eigen::VectorXd>& dh_out,
                        GruCellParams& grads,
                        std::vector<Eigen::VectorXd>& dinputs,
                        Eigen::VectorXd& dh0);

}  // namespace cgc
