#include "doctest.h"

#include <cmath>

#include "cgc/nn/autoencoder.hpp"
#include "cgc/util/errors.hpp"
#include "cgc/util/rng.hpp"
#include "oracles/finite_diff.hpp"

#include <cstdio>
#include <filesystem>

using namespace cgc;

TEST_SUITE_BEGIN("autoencoder");

namespace {

// toy sequences over a small vocabulary; ids 0..3 reserved, content from 4
std::vector<std::vector<int>> toy_corpus(int count, int vocab, int max_content_len, uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<int>> out;
    for (int i = 0; i < count; ++i) {
        std::vector<int> seq{1};
        int len = static_cast<int>(rng.uniform_int(1, max_content_len));
        for (int t = 0; t < len; ++t) seq.push_back(static_cast<int>(rng.uniform_int(4, vocab - 1)));
        seq.push_back(2);
        out.push_back(std::move(seq));
    }
    return out;
}

}  // namespace

TEST_CASE("encode of [start,end] with a zero model is the zero vector") {
    GruAutoencoderModel m = GruAutoencoderModel::zeros(8, 4, 6);
    std::vector<int> ids{1, 2};
    Eigen::VectorXd h = encode(m, ids);
    CHECK(h.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("encode is deterministic") {
    GruAutoencoderModel m = GruAutoencoderModel::init(10, 4, 6, 77);
    std::vector<int> ids{1, 5, 6, 7, 2};
    CHECK(encode(m, ids) == encode(m, ids));
}

TEST_CASE("encode rejects sequences without sentinels") {
    GruAutoencoderModel m = GruAutoencoderModel::zeros(8, 4, 6);
    std::vector<int> ids{1};
    CHECK_THROWS_AS(encode(m, ids), EmptySequence);
}

TEST_CASE("teacher-forced decode shapes and zero-model logits") {
    GruAutoencoderModel m = GruAutoencoderModel::zeros(8, 4, 6);
    std::vector<int> one_step{1, 2};
    Eigen::MatrixXd logits = decode_teacher_forced(m, Eigen::VectorXd::Zero(6), one_step);
    CHECK(logits.rows() == 1);
    CHECK(logits.cols() == 8);
    CHECK(logits.cwiseAbs().maxCoeff() == 0.0);

    std::vector<int> longer{1, 4, 5, 6, 2};
    CHECK(decode_teacher_forced(m, Eigen::VectorXd::Zero(6), longer).rows() == 4);
}

TEST_CASE("zero model loss is ln(vocab)") {
    GruAutoencoderModel m = GruAutoencoderModel::zeros(4, 3, 5);
    std::vector<std::vector<int>> batch{{1, 3, 3, 2}};
    LossGrads lg = loss_and_gradients(m, batch);
    CHECK(lg.loss == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("duplicated sequence leaves the mean gradient unchanged") {
    GruAutoencoderModel m = GruAutoencoderModel::init(9, 3, 4, 3);
    std::vector<int> seq{1, 4, 7, 5, 2};
    LossGrads single = loss_and_gradients(m, {seq});
    LossGrads doubled = loss_and_gradients(m, {seq, seq});
    CHECK(doubled.loss == doctest::Approx(single.loss).epsilon(1e-12));

    std::vector<const double*> a, b;
    std::vector<Eigen::Index> sizes;
    single.grads.for_each_param([&](const std::string&, auto& t) {
        a.push_back(t.data());
        sizes.push_back(t.size());
    });
    doubled.grads.for_each_param([&](const std::string&, auto& t) { b.push_back(t.data()); });
    for (std::size_t k = 0; k < a.size(); ++k)
        for (Eigen::Index i = 0; i < sizes[k]; ++i)
            CHECK(std::abs(a[k][i] - b[k][i]) < 1e-14);
}

TEST_CASE("non-finite weights raise NonFiniteLoss") {
    GruAutoencoderModel m = GruAutoencoderModel::init(6, 3, 4, 3);
    m.output_w(0, 0) = std::numeric_limits<double>::infinity();
    std::vector<std::vector<int>> batch{{1, 4, 2}};
    CHECK_THROWS_AS(loss_and_gradients(m, batch), NonFiniteLoss);
}

TEST_CASE("analytic gradients match finite differences on small models") {
    Rng rng(2025);
    for (int trial = 0; trial < 5; ++trial) {
        int vocab = static_cast<int>(rng.uniform_int(5, 9));
        int embed = static_cast<int>(rng.uniform_int(2, 4));
        int hidden = static_cast<int>(rng.uniform_int(2, 5));
        GruAutoencoderModel m = GruAutoencoderModel::init(vocab, embed, hidden, rng.next_u64());
        std::vector<std::vector<int>> batch;
        int seqs = static_cast<int>(rng.uniform_int(1, 2));
        for (int s = 0; s < seqs; ++s) {
            std::vector<int> seq{1};
            int len = static_cast<int>(rng.uniform_int(1, 4));
            for (int t = 0; t < len; ++t)
                seq.push_back(static_cast<int>(rng.uniform_int(4, vocab - 1)));
            seq.push_back(2);
            batch.push_back(std::move(seq));
        }
        auto result = oracle::gradient_check(m, batch);
        CHECK(result.max_rel_error < 1e-4);
    }
}

TEST_CASE("training memorizes a single sequence") {
    std::vector<std::vector<int>> corpus{{1, 4, 5, 6, 4, 2}};
    TrainingConfig cfg;
    cfg.hidden_dim = 16;
    cfg.embed_dim = 8;
    cfg.epochs = 150;
    cfg.batch_size = 1;
    cfg.seed = 11;
    TrainResult result = train_autoencoder(corpus, {}, cfg);
    CHECK(result.train_loss.back() < 0.05);
}

TEST_CASE("fixed seed reproduces the loss trajectory bitwise") {
    auto corpus = toy_corpus(12, 10, 6, 4);
    TrainingConfig cfg;
    cfg.hidden_dim = 8;
    cfg.embed_dim = 4;
    cfg.epochs = 5;
    cfg.seed = 21;
    TrainResult a = train_autoencoder(corpus, {}, cfg);
    TrainResult b = train_autoencoder(corpus, {}, cfg);
    REQUIRE(a.train_loss.size() == b.train_loss.size());
    for (std::size_t i = 0; i < a.train_loss.size(); ++i)
        CHECK(a.train_loss[i] == b.train_loss[i]);
    CHECK(a.model.embedding == b.model.embedding);
}

TEST_CASE("reconstruct with a zero model emits the lowest id until max_len") {
    GruAutoencoderModel m = GruAutoencoderModel::zeros(8, 4, 6);
    std::vector<int> ids{1, 4, 5, 2};
    std::vector<int> decoded = reconstruct(m, ids, 7);
    CHECK(decoded == std::vector<int>(7, 0));

    std::vector<int> trivial{1, 2};
    CHECK(reconstruct(m, trivial, 5).size() <= 5);
}

TEST_CASE("trained toy model reconstructs and separates") {
    auto corpus = toy_corpus(30, 12, 8, 77);
    TrainingConfig cfg;
    cfg.hidden_dim = 24;
    cfg.embed_dim = 10;
    cfg.epochs = 120;
    cfg.batch_size = 8;
    cfg.seed = 5;
    TrainResult result = train_autoencoder(corpus, {}, cfg);

    double acc = 0.0;
    for (const auto& seq : corpus)
        acc += reconstruction_accuracy(result.model, seq, cfg.max_len);
    acc /= static_cast<double>(corpus.size());
    CHECK(acc > 0.8);

    // one-token edits land nearer than random other sequences (median test)
    Rng rng(123);
    std::vector<double> edit_dist, random_dist;
    for (int trial = 0; trial < 100; ++trial) {
        const auto& seq = corpus[rng.bounded(corpus.size())];
        std::vector<int> edited = seq;
        std::size_t pos = 1 + rng.bounded(seq.size() - 2);
        edited[pos] = static_cast<int>(rng.uniform_int(4, 11));
        const auto& other = corpus[rng.bounded(corpus.size())];

        Eigen::VectorXd e0 = encode(result.model, seq);
        edit_dist.push_back((e0 - encode(result.model, edited)).norm());
        random_dist.push_back((e0 - encode(result.model, other)).norm());
    }
    std::sort(edit_dist.begin(), edit_dist.end());
    std::sort(random_dist.begin(), random_dist.end());
    CHECK(edit_dist[50] < random_dist[50]);

    // distinct sequences embed distinctly
    std::vector<int> seq_a = corpus[0];
    std::vector<int> seq_b = seq_a;
    seq_b[1] = seq_b[1] == 4 ? 5 : 4;
    CHECK((encode(result.model, seq_a) - encode(result.model, seq_b)).norm() > 1e-8);
}

TEST_CASE("model save/load round trip validates shapes") {
    GruAutoencoderModel m = GruAutoencoderModel::init(12, 5, 7, 99);
    m.vocab_hash = 0xabcdef;
    std::string path =
        (std::filesystem::temp_directory_path() / "cgc_ae_roundtrip.cgct").string();
    m.save(path);
    GruAutoencoderModel loaded = GruAutoencoderModel::load(path);
    CHECK(loaded.embedding == m.embedding);
    CHECK(loaded.output_w == m.output_w);
    CHECK(loaded.vocab_hash == m.vocab_hash);
    std::vector<int> ids{1, 4, 9, 2};
    CHECK(encode(loaded, ids) == encode(m, ids));
    std::remove(path.c_str());
}

TEST_SUITE_END();
