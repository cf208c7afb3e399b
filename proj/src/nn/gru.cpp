#include "cgc/nn/gru.hpp"

#include "cgc/util/errors.hpp"

namespace cgc {

namespace {

inline Eigen::ArrayXd sigmoid(const Eigen::ArrayXd& a) {
    return 1.0 / (1.0 + (-a).exp());
}

struct StepActivations {
    Eigen::VectorXd z, r, c, h;
};

StepActivations step(const GruCellParams& p,
                     const Eigen::Ref<const Eigen::VectorXd>& x,
                     const Eigen::Ref<const Eigen::VectorXd>& h_prev) {
    StepActivations a;
    a.z = sigmoid((p.W_z * x + p.U_z * h_prev + p.b_z).array());
    a.r = sigmoid((p.W_r * x + p.U_r * h_prev + p.b_r).array());
    a.c = (p.W_h * x + p.U_h * (a.r.array() * h_prev.array()).matrix() + p.b_h).array().tanh();
    a.h = ((1.0 - a.z.array()) * h_prev.array() + a.z.array() * a.c.array()).matrix();
    return a;
}

}  // namespace

GruCellParams GruCellParams::zeros(int hidden_dim, int input_dim) {
    GruCellParams p;
    p.W_z = Eigen::MatrixXd::Zero(hidden_dim, input_dim);
    p.W_r = Eigen::MatrixXd::Zero(hidden_dim, input_dim);
    p.W_h = Eigen::MatrixXd::Zero(hidden_dim, input_dim);
    p.U_z = Eigen::MatrixXd::Zero(hidden_dim, hidden_dim);
    p.U_r = Eigen::MatrixXd::Zero(hidden_dim, hidden_dim);
    p.U_h = Eigen::MatrixXd::Zero(hidden_dim, hidden_dim);
    p.b_z = Eigen::VectorXd::Zero(hidden_dim);
    p.b_r = Eigen::VectorXd::Zero(hidden_dim);
    p.b_h = Eigen::VectorXd::Zero(hidden_dim);
    return p;
}

void GruCellParams::check_consistent() const {
    Eigen::Index h = W_z.rows();
    Eigen::Index in = W_z.cols();
    auto expect = [&](bool ok) {
        if (!ok) throw DimensionMismatch("inconsistent GRU cell parameter shapes");
    };
    expect(W_r.rows() == h && W_r.cols() == in);
    expect(W_h.rows() == h && W_h.cols() == in);
    expect(U_z.rows() == h && U_z.cols() == h);
    expect(U_r.rows() == h && U_r.cols() == h);
    expect(U_h.rows() == h && U_h.cols() == h);
    expect(b_z.size() == h && b_r.size() == h && b_h.size() == h);
}

Eigen::VectorXd gru_step(const GruCellParams& p,
                         const Eigen::Ref<const Eigen::VectorXd>& x,
                         const Eigen::Ref<const Eigen::VectorXd>& h_prev) {
    p.check_consistent();
    if (x.size() != p.input_dim())
        throw DimensionMismatch("gru_step: input has size " + std::to_string(x.size()) +
                                ", expected " + std::to_string(p.input_dim()));
    if (h_prev.size() != p.hidden_dim())
        throw DimensionMismatch("gru_step: hidden state has size " + std::to_string(h_prev.size()) +
                                ", expected " + std::to_string(p.hidden_dim()));
    return step(p, x, h_prev).h;
}

Eigen::VectorXd gru_layer_forward(const GruCellParams& p,
                                  const std::vector<Eigen::VectorXd>& inputs,
                                  const Eigen::VectorXd& h0,
                                  GruLayerTrace* trace) {
    Eigen::VectorXd h = h0;
    if (trace) {
        trace->z.clear();
        trace->r.clear();
        trace->c.clear();
        trace->h.clear();
        trace->z.reserve(inputs.size());
        trace->r.reserve(inputs.size());
        trace->c.reserve(inputs.size());
        trace->h.reserve(inputs.size());
    }
    for (const auto& x : inputs) {
        StepActivations a = step(p, x, h);
        h = a.h;
        if (trace) {
            trace->z.push_back(std::move(a.z));
            trace->r.push_back(std::move(a.r));
            trace->c.push_back(std::move(a.c));
            trace->h.push_back(h);
        }
    }
    return h;
}

void gru_layer_backward(const GruCellParams& p,
                        const std::vector<Eigen::VectorXd>& inputs,
                        const Eigen::VectorXd& h0,
                        const GruLayerTrace& trace,
                        const std::vector<Eigen::VectorXd>& dh_out,
                        GruCellParams& grads,
                        std::vector<Eigen::VectorXd>& dinputs,
                        Eigen::VectorXd& dh0) {
    const std::size_t T = inputs.size();
    dinputs.assign(T, Eigen::VectorXd());

    Eigen::VectorXd dh = Eigen::VectorXd::Zero(p.hidden_dim());
    for (std::size_t ti = T; ti-- > 0;) {
        dh += dh_out[ti];
        const Eigen::VectorXd& h_prev = ti == 0 ? h0 : trace.h[ti - 1];
        const Eigen::ArrayXd z = trace.z[ti].array();
        const Eigen::ArrayXd r = trace.r[ti].array();
        const Eigen::ArrayXd c = trace.c[ti].array();
        const Eigen::ArrayXd dh_a = dh.array();

        Eigen::ArrayXd dz = dh_a * (c - h_prev.array());
        Eigen::ArrayXd dc = dh_a * z;
        Eigen::VectorXd dah = (dc * (1.0 - c.square())).matrix();
        Eigen::VectorXd daz = (dz * z * (1.0 - z)).matrix();

        Eigen::VectorXd dh_prev = (dh_a * (1.0 - z)).matrix();

        // candidate path
        grads.W_h.noalias() += dah * inputs[ti].transpose();
        grads.U_h.noalias() += dah * (r * h_prev.array()).matrix().transpose();
        grads.b_h += dah;
        Eigen::VectorXd drh = p.U_h.transpose() * dah;
        Eigen::ArrayXd dr = drh.array() * h_prev.array();
        dh_prev.array() += drh.array() * r;
        Eigen::VectorXd dar = (dr * r * (1.0 - r)).matrix();

        // gates
        grads.W_z.noalias() += daz * inputs[ti].transpose();
        grads.U_z.noalias() += daz * h_prev.transpose();
        grads.b_z += daz;
        dh_prev.noalias() += p.U_z.transpose() * daz;

        grads.W_r.noalias() += dar * inputs[ti].transpose();
        grads.U_r.noalias() += dar * h_prev.transpose();
        grads.b_r += dar;
        dh_prev.noalias() += p.U_r.transpose() * dar;

        dinputs[ti] = p.W_z.transpose() * daz + p.W_r.transpose() * dar + p.W_h.transpose() * dah;
        dh = std::move(dh_prev);
    }
    dh0 = dh;
}

}  // namespace cgc
