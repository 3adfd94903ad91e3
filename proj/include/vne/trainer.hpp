#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vne/diagnostics.hpp"
#include "vne/entropy.hpp"
#include "vne/rng.hpp"

namespace vne {

enum class TrainTask { Supervised, Ssl };
enum class Regularizer { Vanilla, VnePlus, VneMinus, Frobenius };

struct DatasetSpec {
    int classes = 8;
    Eigen::Index input_dim = 32;
    int samples_per_class = 128;
    double class_separation = 3.0;  // class means sit on a scaled orthogonal frame
    double noise_scale = 0.25;      // additive view noise for the two SSL views
};

struct Dataset {
    Mat x;
    std::vector<int> labels;
};

struct TrainConfig {
    TrainTask task = TrainTask::Supervised;
    Regularizer regularizer = Regularizer::Vanilla;
    double alpha = 0.01;           // supervised regularizer weight; sign lives in the regime
    double frobenius_c = 1.0 / 64.0;
    double alpha1 = 15.0;          // ssl invariance (cosine) weight
    double alpha2 = 1.0;           // ssl entropy weight; 0 = invariance-only ablation
    int epochs = 100;
    Eigen::Index batch_size = 128;
    double learning_rate = 0.1;
    std::uint64_t seed = 7;
    DatasetSpec dataset;
    std::vector<Eigen::Index> hidden = {128, 64};  // widths between input and output
    Eigen::Index ssl_output_dim = 128;             // ssl representation width
    bool vne_on_preactivation = false;  // regularize pre-rectifier penultimate instead
};

TrainConfig supervised_defaults();
TrainConfig ssl_defaults();

std::string to_string(TrainTask task);
std::string to_string(Regularizer reg);
TrainTask task_from_string(const std::string& s);        // "supervised" | "ssl"
Regularizer regularizer_from_string(const std::string& s);  // "vanilla" | "vne+" | "vne-" | "frobenius"

struct MlpModel {
    std::vector<Mat> w;  // layer l maps (dims[l] -> dims[l+1])
    std::vector<Vec> b;
    Eigen::Index layers() const { return static_cast<Eigen::Index>(w.size()); }
};

// rectifier on hidden layers, identity on the output layer
struct Forward {
    std::vector<Mat> pre;  // pre-activation per layer
    std::vector<Mat> act;  // act[0] = input, act[l+1] = layer l output
};

MlpModel make_mlp(const std::vector<Eigen::Index>& dims, Rng& rng);
Forward mlp_forward(const MlpModel& model, const Mat& x);

struct LossGrads {
    double task_loss = 0.0;  // cross-entropy, or the ssl invariance term
    double reg_value = 0.0;  // signed value of the regime term added to the objective
    double alignment = 0.0;  // ssl mean positive-pair cosine (0 for supervised)
    std::vector<Mat> gw;
    std::vector<Vec> gb;
};

// One batch: objective value and full parameter gradients (used by the train
// loops and by finite-difference tests).
LossGrads supervised_loss_and_grads(const MlpModel& model, const Mat& xb,
                                    const std::vector<int>& yb, const TrainConfig& cfg);
LossGrads ssl_loss_and_grads(const MlpModel& model, const Mat& v1, const Mat& v2,
                             const TrainConfig& cfg);

struct TrainReport {
    std::vector<double> task_loss;  // per epoch, mean over batches
    std::vector<double> reg_value;  // per epoch, mean over batches
    std::vector<double> entropy;    // per epoch (supervised: full-set penultimate;
                                    //            ssl: last training batch)
    std::vector<double> accuracy;   // supervised only
    std::vector<double> alignment;  // ssl only
    DiagnosticsReport final_report;  // on the full evaluation set
    Eigen::Index eval_rows_dropped = 0;  // zero-norm representation rows excluded
};

// Gaussian mixture on an orthogonal frame: mean of class k = separation * e_k,
// isotropic unit within-class noise; deterministic per seed.
Dataset make_synthetic_dataset(const DatasetSpec& spec, std::uint64_t seed);

TrainReport train_supervised(const TrainConfig& cfg);
TrainReport train_ssl(const TrainConfig& cfg);

}  // namespace vne
