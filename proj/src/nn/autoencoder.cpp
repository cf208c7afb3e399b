#include "cgc/nn/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "cgc/io/tensor_container.hpp"
#include "cgc/util/errors.hpp"
#include "cgc/util/rng.hpp"

namespace cgc {

namespace {

void check_ids(const GruAutoencoderModel& model, std::span<const int> ids) {
    if (ids.size() < 2)
        throw EmptySequence("sequence must contain the <start> and <end> sentinels");
    for (int id : ids)
        if (id < 0 || id >= model.vocab_size)
            throw DimensionMismatch("token id out of vocabulary range: " + std::to_string(id));
}

std::vector<Eigen::VectorXd> embed_ids(const GruAutoencoderModel& model, std::span<const int> ids) {
    std::vector<Eigen::VectorXd> xs;
    xs.reserve(ids.size());
    for (int id : ids) xs.push_back(model.embedding.row(id).transpose());
    return xs;
}

// numerically stable log-softmax cross entropy and softmax probabilities
double cross_entropy(const Eigen::VectorXd& logits, int target, Eigen::VectorXd& probs) {
    double mx = logits.maxCoeff();
    Eigen::ArrayXd shifted = logits.array() - mx;
    Eigen::ArrayXd exps = shifted.exp();
    double sum = exps.sum();
    probs = (exps / sum).matrix();
    return -(shifted(target) - std::log(sum));
}

struct SequenceWork {
    GruLayerTrace enc1_trace, enc2_trace, dec_trace;
    std::vector<Eigen::VectorXd> inputs1, inputs2, dec_inputs;
    Eigen::VectorXd h_enc;
};

Eigen::VectorXd forward_encoder(const GruAutoencoderModel& model, std::span<const int> ids,
                                SequenceWork* work) {
    auto inputs1 = embed_ids(model, ids);
    Eigen::VectorXd h0 = Eigen::VectorXd::Zero(model.hidden_dim);
    GruLayerTrace trace1;
    gru_layer_forward(model.encoder1, inputs1, h0, work ? &work->enc1_trace : &trace1);
    const GruLayerTrace& t1 = work ? work->enc1_trace : trace1;
    std::vector<Eigen::VectorXd> inputs2(t1.h.begin(), t1.h.end());
    GruLayerTrace trace2;
    Eigen::VectorXd h_enc =
        gru_layer_forward(model.encoder2, inputs2, h0, work ? &work->enc2_trace : &trace2);
    if (work) {
        work->inputs1 = std::move(inputs1);
        work->inputs2 = std::move(inputs2);
        work->h_enc = h_enc;
    }
    return h_enc;
}

}  // namespace

GruAutoencoderModel GruAutoencoderModel::zeros(int vocab_size, int embed_dim, int hidden_dim) {
    GruAutoencoderModel m;
    m.vocab_size = vocab_size;
    m.embed_dim = embed_dim;
    m.hidden_dim = hidden_dim;
    m.embedding = Eigen::MatrixXd::Zero(vocab_size, embed_dim);
    m.encoder1 = GruCellParams::zeros(hidden_dim, embed_dim);
    m.encoder2 = GruCellParams::zeros(hidden_dim, hidden_dim);
    m.decoder = GruCellParams::zeros(hidden_dim, embed_dim);
    m.output_w = Eigen::MatrixXd::Zero(vocab_size, hidden_dim);
    m.output_b = Eigen::VectorXd::Zero(vocab_size);
    return m;
}

GruAutoencoderModel GruAutoencoderModel::init(int vocab_size, int embed_dim, int hidden_dim,
                                              uint64_t seed) {
    GruAutoencoderModel m = zeros(vocab_size, embed_dim, hidden_dim);
    m.seed = seed;
    Rng rng(seed);
    m.for_each_param([&](const std::string&, auto& tensor) {
        double* data = tensor.data();
        for (Eigen::Index i = 0; i < tensor.size(); ++i) data[i] = rng.uniform(-0.08, 0.08);
    });
    return m;
}

Eigen::VectorXd encode(const GruAutoencoderModel& model, std::span<const int> ids) {
    check_ids(model, ids);
    return forward_encoder(model, ids, nullptr);
}

Eigen::MatrixXd decode_teacher_forced(const GruAutoencoderModel& model,
                                      const Eigen::VectorXd& h_enc,
                                      std::span<const int> target_ids) {
    check_ids(model, target_ids);
    if (h_enc.size() != model.hidden_dim)
        throw DimensionMismatch("decoder initial state has wrong size");
    const std::size_t steps = target_ids.size() - 1;
    Eigen::MatrixXd logits(steps, model.vocab_size);
    Eigen::VectorXd h = h_enc;
    for (std::size_t t = 0; t < steps; ++t) {
        Eigen::VectorXd x = model.embedding.row(target_ids[t]).transpose();
        h = gru_step(model.decoder, x, h);
        logits.row(t) = (model.output_w * h + model.output_b).transpose();
    }
    return logits;
}

LossGrads loss_and_gradients(const GruAutoencoderModel& model,
                             const std::vector<std::vector<int>>& batch) {
    if (batch.empty()) throw EmptyCorpus("loss_and_gradients: empty batch");
    LossGrads out;
    out.grads = GruAutoencoderModel::zeros(model.vocab_size, model.embed_dim, model.hidden_dim);
    const double batch_weight = 1.0 / static_cast<double>(batch.size());

    Eigen::VectorXd h0 = Eigen::VectorXd::Zero(model.hidden_dim);
    for (const auto& ids : batch) {
        check_ids(model, ids);
        SequenceWork work;
        forward_encoder(model, ids, &work);

        const std::size_t steps = ids.size() - 1;
        work.dec_inputs.reserve(steps);
        for (std::size_t t = 0; t < steps; ++t)
            work.dec_inputs.push_back(model.embedding.row(ids[t]).transpose());
        gru_layer_forward(model.decoder, work.dec_inputs, work.h_enc, &work.dec_trace);

        const double w = batch_weight / static_cast<double>(steps);
        double seq_loss = 0.0;
        std::vector<Eigen::VectorXd> dh_dec(steps);
        for (std::size_t t = 0; t < steps; ++t) {
            Eigen::VectorXd logits = model.output_w * work.dec_trace.h[t] + model.output_b;
            if (!logits.allFinite()) throw NonFiniteLoss("non-finite decoder logits");
            Eigen::VectorXd probs;
            seq_loss += cross_entropy(logits, ids[t + 1], probs);
            Eigen::VectorXd dlogits = probs * w;
            dlogits(ids[t + 1]) -= w;
            out.grads.output_w.noalias() += dlogits * work.dec_trace.h[t].transpose();
            out.grads.output_b += dlogits;
            dh_dec[t] = model.output_w.transpose() * dlogits;
        }
        out.loss += seq_loss / static_cast<double>(steps) * batch_weight;

        std::vector<Eigen::VectorXd> ddec_inputs;
        Eigen::VectorXd dh_enc;
        gru_layer_backward(model.decoder, work.dec_inputs, work.h_enc, work.dec_trace, dh_dec,
                           out.grads.decoder, ddec_inputs, dh_enc);
        for (std::size_t t = 0; t < steps; ++t)
            out.grads.embedding.row(ids[t]) += ddec_inputs[t].transpose();

        // encoder stack: only the final state of layer 2 feeds the decoder
        std::vector<Eigen::VectorXd> dh2(ids.size(), Eigen::VectorXd::Zero(model.hidden_dim));
        dh2.back() = dh_enc;
        std::vector<Eigen::VectorXd> dinputs2;
        Eigen::VectorXd dh0_unused;
        gru_layer_backward(model.encoder2, work.inputs2, h0, work.enc2_trace, dh2,
                           out.grads.encoder2, dinputs2, dh0_unused);
        std::vector<Eigen::VectorXd> dinputs1;
        gru_layer_backward(model.encoder1, work.inputs1, h0, work.enc1_trace, dinputs2,
                           out.grads.encoder1, dinputs1, dh0_unused);
        for (std::size_t t = 0; t < ids.size(); ++t)
            out.grads.embedding.row(ids[t]) += dinputs1[t].transpose();
    }
    if (!std::isfinite(out.loss)) throw NonFiniteLoss("non-finite loss");
    return out;
}

double sequence_loss(const GruAutoencoderModel& model, std::span<const int> ids) {
    check_ids(model, ids);
    Eigen::VectorXd h_enc = encode(model, ids);
    Eigen::MatrixXd logits = decode_teacher_forced(model, h_enc, ids);
    if (!logits.allFinite()) throw NonFiniteLoss("non-finite decoder logits");
    double loss = 0.0;
    Eigen::VectorXd probs;
    for (Eigen::Index t = 0; t < logits.rows(); ++t)
        loss += cross_entropy(logits.row(t).transpose(), ids[static_cast<std::size_t>(t) + 1], probs);
    return loss / static_cast<double>(logits.rows());
}

namespace {

struct AdamState {
    std::map<std::string, Eigen::MatrixXd> m, v;
    long t = 0;
};

void adam_step(GruAutoencoderModel& model, GruAutoencoderModel& grads, AdamState& state,
               double lr, double clip_norm) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    double sq_norm = 0.0;
    grads.for_each_param(
        [&](const std::string&, auto& g) { sq_norm += g.squaredNorm(); });
    double norm = std::sqrt(sq_norm);
    double scale = (clip_norm > 0.0 && norm > clip_norm) ? clip_norm / norm : 1.0;

    ++state.t;
    double correction1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
    double correction2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));

    // walk model and grads in lockstep (identical for_each_param order)
    std::vector<std::tuple<std::string, double*, Eigen::Index>> model_params;
    std::vector<double*> grad_params;
    model.for_each_param([&](const std::string& name, auto& p) {
        model_params.emplace_back(name, p.data(), p.size());
    });
    grads.for_each_param([&](const std::string&, auto& g) { grad_params.push_back(g.data()); });
    for (std::size_t k = 0; k < model_params.size(); ++k) {
        const std::string& name = std::get<0>(model_params[k]);
        Eigen::Index n = std::get<2>(model_params[k]);
        auto& m = state.m.try_emplace(name, Eigen::MatrixXd::Zero(n, 1)).first->second;
        auto& v = state.v.try_emplace(name, Eigen::MatrixXd::Zero(n, 1)).first->second;
        double* p = std::get<1>(model_params[k]);
        double* g = grad_params[k];
        for (Eigen::Index i = 0; i < n; ++i) {
            double gi = g[i] * scale;
            m(i, 0) = beta1 * m(i, 0) + (1.0 - beta1) * gi;
            v(i, 0) = beta2 * v(i, 0) + (1.0 - beta2) * gi * gi;
            double mhat = m(i, 0) / correction1;
            double vhat = v(i, 0) / correction2;
            p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
}

}  // namespace

TrainResult train_autoencoder(const std::vector<std::vector<int>>& train,
                              const std::vector<std::vector<int>>& val,
                              const TrainingConfig& cfg) {
    if (train.empty()) throw EmptyCorpus("train_autoencoder: empty corpus");
    int vocab = 0;
    for (const auto& seq : train)
        for (int id : seq) vocab = std::max(vocab, id + 1);
    for (const auto& seq : val)
        for (int id : seq) vocab = std::max(vocab, id + 1);

    GruAutoencoderModel model =
        GruAutoencoderModel::init(vocab, cfg.embed_dim, cfg.hidden_dim, cfg.seed);
    AdamState adam;
    Rng order_rng = Rng::substream(cfg.seed, "ae-batches");

    TrainResult result;
    double best = std::numeric_limits<double>::infinity();

    std::vector<std::size_t> indices(train.size());
    std::iota(indices.begin(), indices.end(), 0);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        order_rng.shuffle(indices);
        double epoch_loss = 0.0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < indices.size(); start += cfg.batch_size) {
            std::size_t end = std::min(indices.size(), start + cfg.batch_size);
            std::vector<std::vector<int>> batch;
            batch.reserve(end - start);
            for (std::size_t i = start; i < end; ++i) batch.push_back(train[indices[i]]);
            LossGrads lg = loss_and_gradients(model, batch);
            adam_step(model, lg.grads, adam, cfg.learning_rate, cfg.gradient_clip_norm);
            epoch_loss += lg.loss * static_cast<double>(batch.size());
            seen += batch.size();
        }
        double train_loss = epoch_loss / static_cast<double>(seen);
        result.train_loss.push_back(train_loss);

        double monitored = train_loss;
        if (!val.empty()) {
            double vl = 0.0;
            for (const auto& seq : val) vl += sequence_loss(model, seq);
            vl /= static_cast<double>(val.size());
            result.val_loss.push_back(vl);
            monitored = vl;
        }
        if (monitored < best) {
            best = monitored;
            result.best_epoch = epoch;
            result.model = model;
        }
    }
    if (result.best_epoch < 0) result.model = model;
    return result;
}

std::vector<int> reconstruct(const GruAutoencoderModel& model, std::span<const int> ids, int max_len) {
    Eigen::VectorXd h = encode(model, ids);
    std::vector<int> out;
    int prev = ids[0];  // <start>
    for (int steps = 0; steps < max_len; ++steps) {
        Eigen::VectorXd x = model.embedding.row(prev).transpose();
        h = gru_step(model.decoder, x, h);
        Eigen::VectorXd logits = model.output_w * h + model.output_b;
        Eigen::Index best = 0;
        logits.maxCoeff(&best);  // first maximum: ties break to the lowest id
        int next = static_cast<int>(best);
        out.push_back(next);
        if (next == ids[ids.size() - 1]) break;  // <end>
        prev = next;
    }
    return out;
}

double reconstruction_accuracy(const GruAutoencoderModel& model, std::span<const int> ids, int max_len) {
    std::vector<int> decoded = reconstruct(model, ids, max_len);
    std::size_t target_len = ids.size() - 1;  // ids[1..], content plus <end>
    long correct = 0;
    for (std::size_t i = 0; i < target_len; ++i)
        if (i < decoded.size() && decoded[i] == ids[i + 1]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(target_len);
}

void GruAutoencoderModel::save(const std::string& path) const {
    TensorContainer c;
    c.schema = "gru-autoencoder/1";
    c.meta = {{"hidden_dim", hidden_dim},
              {"embed_dim", embed_dim},
              {"vocab_size", vocab_size},
              {"vocab_hash", vocab_hash},
              {"seed", seed}};
    const_cast<GruAutoencoderModel*>(this)->for_each_param(
        [&](const std::string& name, auto& tensor) { c.add(name, Eigen::MatrixXd(tensor)); });
    c.save(path);
}

GruAutoencoderModel GruAutoencoderModel::load(const std::string& path) {
    TensorContainer c = TensorContainer::load(path);
    if (c.schema != "gru-autoencoder/1") throw IoError("not a gru-autoencoder/1 container: " + path);
    GruAutoencoderModel m = zeros(c.meta.at("vocab_size").get<int>(),
                                  c.meta.at("embed_dim").get<int>(),
                                  c.meta.at("hidden_dim").get<int>());
    m.vocab_hash = c.meta.at("vocab_hash").get<uint64_t>();
    m.seed = c.meta.at("seed").get<uint64_t>();
    m.for_each_param([&](const std::string& name, auto& tensor) {
        const Eigen::MatrixXd& stored = c.get(name);
        if (stored.rows() != tensor.rows() || stored.cols() != tensor.cols())
            throw IoError("tensor shape mismatch for " + name + " in " + path);
        tensor = stored;
    });
    return m;
}

}  // namespace cgc
