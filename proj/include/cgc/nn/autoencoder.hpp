#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cgc/nn/gru.hpp"

namespace cgc {

struct TrainingConfig {
    double learning_rate = 1e-3;
    int batch_size = 32;
    int epochs = 30;
    int max_len = 300;
    double gradient_clip_norm = 5.0;
    uint64_t seed = 1;
    int hidden_dim = 64;
    int embed_dim = 64;
};

// Sequence-to-sequence autoencoder: token embedding, two stacked encoder GRU
// layers, one decoder GRU layer initialized with the encoder's final top
// hidden state, and a linear projection back onto the vocabulary.
struct GruAutoencoderModel {
    Eigen::MatrixXd embedding;  // vocab x embed_dim
    GruCellParams encoder1;     // embed_dim -> hidden
    GruCellParams encoder2;     // hidden -> hidden
    GruCellParams decoder;      // embed_dim -> hidden
    Eigen::MatrixXd output_w;   // vocab x hidden
    Eigen::VectorXd output_b;   // vocab

    int hidden_dim = 0;
    int embed_dim = 0;
    int vocab_size = 0;
    uint64_t vocab_hash = 0;
    uint64_t seed = 0;

    static GruAutoencoderModel zeros(int vocab_size, int embed_dim, int hidden_dim);
    // uniform [-0.08, 0.08] initialization
    static GruAutoencoderModel init(int vocab_size, int embed_dim, int hidden_dim, uint64_t seed);

    template <class F>
    void for_each_param(F&& f) {
        f("embedding", embedding);
        encoder1.for_each("encoder1", f);
        encoder2.for_each("encoder2", f);
        decoder.for_each("decoder", f);
        f("output.w", output_w);
        f("output.b", output_b);
    }

    void save(const std::string& path) const;
    static GruAutoencoderModel load(const std::string& path);
};

// Final hidden state of the second encoder layer. The sequence must carry the
// <start>/<end> sentinels (length >= 2, throws EmptySequence otherwise).
Eigen::VectorXd encode(const GruAutoencoderModel& model, std::span<const int> ids);

// Teacher forcing: decoder consumes the true previous token; row t-1 holds
// the logits predicting target_ids[t].
Eigen::MatrixXd decode_teacher_forced(const GruAutoencoderModel& model,
                                      const Eigen::VectorXd& h_enc,
                                      std::span<const int> target_ids);

// Mean over sequences of mean per-token softmax cross-entropy against the
// one-step-shifted targets; gradients by backpropagation through time.
struct LossGrads {
    double loss = 0.0;
    GruAutoencoderModel grads;
};
LossGrads loss_and_gradients(const GruAutoencoderModel& model,
                             const std::vector<std::vector<int>>& batch);

double sequence_loss(const GruAutoencoderModel& model, std::span<const int> ids);

struct TrainResult {
    GruAutoencoderModel model;
    std::vector<double> train_loss;  // per epoch
    std::vector<double> val_loss;    // per epoch; empty when no validation set
    int best_epoch = -1;
};

// Adam with global-norm gradient clipping; returns the parameters from the
// epoch with the lowest validation loss (training loss when val is empty).
TrainResult train_autoencoder(const std::vector<std::vector<int>>& train,
                              const std::vector<std::vector<int>>& val,
                              const TrainingConfig& cfg);

// Greedy decoding from the sequence's embedding; the decoder consumes its own
// previous prediction and stops at <end> or max_len emitted tokens.
std::vector<int> reconstruct(const GruAutoencoderModel& model, std::span<const int> ids, int max_len);

// Fraction of positions of ids[1..] (content plus <end>) reproduced by
// greedy reconstruction.
double reconstruction_accuracy(const GruAutoencoderModel& model, std::span<const int> ids, int max_len);

}  // namespace cgc
