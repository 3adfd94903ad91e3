#include <cmath>
#include <vector>

#include <doctest.h>

#include "vne/errors.hpp"
#include "vne/rng.hpp"
#include "vne/trainer.hpp"

using namespace vne;

namespace {

// central-difference check of d(task_loss + reg_value)/d(parameters)
double param_fd_worst(MlpModel model, const TrainConfig& cfg, const Mat& xb,
                      const std::vector<int>& yb, const Mat* v2) {
    const auto eval = [&](const MlpModel& m) {
        const LossGrads lg =
            v2 ? ssl_loss_and_grads(m, xb, *v2, cfg) : supervised_loss_and_grads(m, xb, yb, cfg);
        return lg.task_loss + lg.reg_value;
    };
    const LossGrads lg =
        v2 ? ssl_loss_and_grads(model, xb, *v2, cfg) : supervised_loss_and_grads(model, xb, yb, cfg);
    double worst = 0.0;
    for (std::size_t l = 0; l < model.w.size(); ++l) {
        for (Eigen::Index r = 0; r < model.w[l].rows(); ++r) {
            for (Eigen::Index c = 0; c < model.w[l].cols(); ++c) {
                const double step = 1e-5;
                const double keep = model.w[l](r, c);
                model.w[l](r, c) = keep + step;
                const double fp = eval(model);
                model.w[l](r, c) = keep - step;
                const double fm = eval(model);
                model.w[l](r, c) = keep;
                const double fd = (fp - fm) / (2 * step);
                const double denom = std::max({std::abs(fd), std::abs(lg.gw[l](r, c)), 1e-8});
                worst = std::max(worst, std::abs(fd - lg.gw[l](r, c)) / denom);
            }
        }
        for (Eigen::Index r = 0; r < model.b[l].size(); ++r) {
            const double step = 1e-5;
            const double keep = model.b[l][r];
            model.b[l][r] = keep + step;
            const double fp = eval(model);
            model.b[l][r] = keep - step;
            const double fm = eval(model);
            model.b[l][r] = keep;
            const double fd = (fp - fm) / (2 * step);
            const double denom = std::max({std::abs(fd), std::abs(lg.gb[l][r]), 1e-8});
            worst = std::max(worst, std::abs(fd - lg.gb[l][r]) / denom);
        }
    }
    return worst;
}

TrainConfig tiny_supervised() {
    TrainConfig cfg = supervised_defaults();
    cfg.dataset.classes = 2;
    cfg.dataset.input_dim = 4;
    cfg.dataset.samples_per_class = 16;
    cfg.hidden = {8, 4};
    cfg.batch_size = 8;
    cfg.epochs = 10;
    return cfg;
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("synthetic dataset: shape, labels, class means, determinism") {
    DatasetSpec spec;
    spec.classes = 3;
    spec.input_dim = 5;
    spec.samples_per_class = 128;
    spec.class_separation = 3.0;
    const Dataset ds = make_synthetic_dataset(spec, 7);
    REQUIRE(ds.x.rows() == 384);
    CHECK(ds.x.cols() == 5);
    REQUIRE(ds.labels.size() == 384);

    for (int k = 0; k < 3; ++k) {
        const Mat block = ds.x.middleRows(128 * k, 128);
        for (Eigen::Index j = 0; j < 5; ++j) {
            const double mean = block.col(j).mean();
            const double target = j == k ? 3.0 : 0.0;
            CHECK(std::abs(mean - target) < 0.35);
        }
        CHECK(ds.labels[static_cast<std::size_t>(128 * k)] == k);
    }

    const Dataset again = make_synthetic_dataset(spec, 7);
    CHECK((ds.x - again.x).cwiseAbs().maxCoeff() == 0.0);

    spec.input_dim = 2;  // cannot hold 3 class means
    CHECK_THROWS_AS(make_synthetic_dataset(spec, 7), ShapeError);
}

TEST_CASE("mlp init: shapes, spread, zero biases") {
    Rng rng(5);
    const MlpModel model = make_mlp({32, 128, 8}, rng);
    REQUIRE(model.layers() == 2);
    CHECK(model.w[0].rows() == 32);
    CHECK(model.w[0].cols() == 128);
    CHECK(model.w[1].rows() == 128);
    CHECK(model.b[1].size() == 8);
    CHECK(model.b[0].cwiseAbs().maxCoeff() == 0.0);
    const double var = model.w[0].array().square().mean();
    CHECK(var == doctest::Approx(2.0 / 32.0).epsilon(0.15));
}

TEST_CASE("forward pass by hand") {
    MlpModel model;
    model.w.push_back((Mat(2, 2) << 1, 0, 0, -1).finished());
    model.b.push_back((Vec(2) << 0.0, 0.5).finished());
    model.w.push_back(Mat::Identity(2, 2));
    model.b.push_back(Vec::Zero(2));

    Mat x(1, 2);
    x << 1, 1;
    const Forward f = mlp_forward(model, x);
    CHECK(f.pre[0](0, 0) == 1.0);
    CHECK(f.pre[0](0, 1) == -0.5);
    CHECK(f.act[1](0, 0) == 1.0);
    CHECK(f.act[1](0, 1) == 0.0);  // rectified
    CHECK(f.act[2](0, 0) == 1.0);
    CHECK(f.act[2](0, 1) == 0.0);

    CHECK_THROWS_AS(mlp_forward(model, Mat::Zero(1, 3)), ShapeMismatch);
}

TEST_CASE("uniform logits give ln(classes) cross-entropy") {
    MlpModel model;
    model.w.push_back(Mat::Zero(3, 4));
    model.b.push_back(Vec::Zero(4));
    model.w.push_back(Mat::Zero(4, 2));
    model.b.push_back(Vec::Zero(2));
    TrainConfig cfg = supervised_defaults();
    cfg.regularizer = Regularizer::Vanilla;
    Rng rng(1);
    const Mat xb = rng.gaussian_matrix(4, 3);
    const LossGrads lg = supervised_loss_and_grads(model, xb, {0, 1, 0, 1}, cfg);
    CHECK(lg.task_loss == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(lg.reg_value == 0.0);
}

TEST_CASE("supervised gradients match finite differences in every regime") {
    Rng rng(3);
    const MlpModel model = make_mlp({2, 3, 2}, rng);
    const Mat xb = rng.gaussian_matrix(4, 2);
    const std::vector<int> yb{0, 1, 0, 1};

    TrainConfig cfg = supervised_defaults();
    cfg.dataset.classes = 2;

    SUBCASE("vanilla") { cfg.regularizer = Regularizer::Vanilla; }
    SUBCASE("entropy up") {
        cfg.regularizer = Regularizer::VnePlus;
        cfg.alpha = 0.3;
    }
    SUBCASE("entropy down") {
        cfg.regularizer = Regularizer::VneMinus;
        cfg.alpha = 0.3;
    }
    SUBCASE("frobenius") {
        cfg.regularizer = Regularizer::Frobenius;
        cfg.alpha = 0.5;
        cfg.frobenius_c = 1.0 / 3.0;
    }
    SUBCASE("entropy up, pre-rectifier hook") {
        cfg.regularizer = Regularizer::VnePlus;
        cfg.alpha = 0.3;
        cfg.vne_on_preactivation = true;
    }
    CHECK(param_fd_worst(model, cfg, xb, yb, nullptr) < 1e-4);
}

TEST_CASE("ssl gradients match finite differences") {
    Rng rng(5);
    const MlpModel model = make_mlp({2, 3, 2}, rng);
    const Mat v1 = rng.gaussian_matrix(3, 2);
    const Mat v2 = rng.gaussian_matrix(3, 2);
    TrainConfig cfg = ssl_defaults();
    cfg.alpha1 = 2.0;

    SUBCASE("with entropy term") { cfg.alpha2 = 0.7; }
    SUBCASE("invariance only") { cfg.alpha2 = 0.0; }
    CHECK(param_fd_worst(model, cfg, v1, {}, &v2) < 1e-4);
}

TEST_CASE("tiny supervised run learns the separable mixture") {
    const TrainConfig cfg = tiny_supervised();
    const TrainReport rep = train_supervised(cfg);
    REQUIRE(rep.accuracy.size() == 10);
    REQUIRE(rep.task_loss.size() == 10);
    REQUIRE(rep.entropy.size() == 10);
    CHECK(rep.accuracy.back() >= 0.9);
    CHECK(rep.task_loss.back() < rep.task_loss.front());
    CHECK(rep.final_report.entropy.entropy >= 0.0);
    CHECK(rep.eval_rows_dropped == 0);
}

TEST_CASE("alpha = 0 walks exactly the regularizer-free path") {
    TrainConfig vanilla = tiny_supervised();
    vanilla.epochs = 3;
    vanilla.regularizer = Regularizer::Vanilla;
    TrainConfig zeroed = vanilla;
    zeroed.regularizer = Regularizer::VnePlus;
    zeroed.alpha = 0.0;

    const TrainReport a = train_supervised(vanilla);
    const TrainReport b = train_supervised(zeroed);
    REQUIRE(a.task_loss.size() == b.task_loss.size());
    for (std::size_t e = 0; e < a.task_loss.size(); ++e) {
        CHECK(a.task_loss[e] == b.task_loss[e]);
        CHECK(a.entropy[e] == b.entropy[e]);
        CHECK(a.accuracy[e] == b.accuracy[e]);
    }
    CHECK(a.final_report.entropy.entropy == b.final_report.entropy.entropy);
}

TEST_CASE("tiny ssl run holds alignment and spread") {
    TrainConfig cfg = ssl_defaults();
    cfg.dataset.classes = 2;
    cfg.dataset.input_dim = 4;
    cfg.dataset.samples_per_class = 8;
    cfg.hidden = {8};
    cfg.ssl_output_dim = 8;
    cfg.batch_size = 8;
    cfg.epochs = 20;
    cfg.alpha1 = 5.0;
    cfg.alpha2 = 1.0;
    const TrainReport rep = train_ssl(cfg);
    REQUIRE(rep.alignment.size() == 20);
    REQUIRE(rep.entropy.size() == 20);
    CHECK(rep.alignment.back() > 0.5);
    CHECK(rep.entropy.back() > 0.5);
    CHECK(rep.final_report.rank_surrogate >= 2);
}

TEST_CASE("training is deterministic") {
    TrainConfig cfg = tiny_supervised();
    cfg.epochs = 4;
    const TrainReport a = train_supervised(cfg);
    const TrainReport b = train_supervised(cfg);
    CHECK(a.entropy == b.entropy);
    CHECK(a.task_loss == b.task_loss);
}

TEST_CASE("config and argument validation") {
    TrainConfig cfg = tiny_supervised();
    cfg.alpha = -0.1;
    CHECK_THROWS_AS(train_supervised(cfg), Error);

    cfg = tiny_supervised();
    cfg.batch_size = 1000;
    CHECK_THROWS_AS(train_supervised(cfg), ShapeError);

    cfg = tiny_supervised();
    cfg.epochs = 0;
    CHECK_THROWS_AS(train_supervised(cfg), Error);

    cfg = tiny_supervised();
    cfg.hidden = {};
    CHECK_THROWS_AS(train_supervised(cfg), ShapeError);

    cfg = tiny_supervised();
    CHECK_THROWS_AS(train_ssl(cfg), Error);  // wrong task tag

    TrainConfig ssl = ssl_defaults();
    ssl.ssl_output_dim = 1;
    CHECK_THROWS_AS(train_ssl(ssl), ShapeError);
}

TEST_CASE("enum names round-trip") {
    CHECK(to_string(TrainTask::Supervised) == "supervised");
    CHECK(to_string(TrainTask::Ssl) == "ssl");
    CHECK(task_from_string("ssl") == TrainTask::Ssl);
    CHECK_THROWS_AS(task_from_string("sslx"), ParseError);
    for (Regularizer r : {Regularizer::Vanilla, Regularizer::VnePlus, Regularizer::VneMinus,
                          Regularizer::Frobenius})
        CHECK(regularizer_from_string(to_string(r)) == r);
    CHECK_THROWS_AS(regularizer_from_string("vne"), ParseError);
}

}  // TEST_SUITE
