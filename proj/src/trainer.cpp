#include "vne/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "vne/errors.hpp"

namespace vne {

namespace {

constexpr double kRowEps = 1e-30;  // rows below this norm are unusable for entropy

struct FilteredRows {
    Mat sub;
    std::vector<Eigen::Index> keep;
    Eigen::Index dropped = 0;
};

FilteredRows filter_zero_rows(const Mat& rep) {
    FilteredRows f;
    f.keep.reserve(static_cast<std::size_t>(rep.rows()));
    for (Eigen::Index i = 0; i < rep.rows(); ++i)
        if (rep.row(i).norm() > kRowEps) f.keep.push_back(i);
    f.dropped = rep.rows() - static_cast<Eigen::Index>(f.keep.size());
    f.sub.resize(static_cast<Eigen::Index>(f.keep.size()), rep.cols());
    for (std::size_t i = 0; i < f.keep.size(); ++i) f.sub.row(static_cast<Eigen::Index>(i)) = rep.row(f.keep[i]);
    return f;
}

// entropy of the usable rows; a fully collapsed batch scores 0 by convention
double entropy_of_rows(const Mat& rep) {
    FilteredRows f = filter_zero_rows(rep);
    if (f.sub.rows() == 0) return 0.0;
    return vne_of({f.sub, false}).entropy;
}

void validate_common(const TrainConfig& cfg) {
    if (cfg.alpha < 0.0) throw Error("regularizer weight must be nonnegative; the regime carries the sign");
    if (cfg.alpha1 < 0.0 || cfg.alpha2 < 0.0) throw Error("ssl weights must be nonnegative");
    if (cfg.epochs < 1) throw Error("epochs must be at least 1");
    if (cfg.batch_size < 1) throw ShapeError("batch size must be at least 1");
    if (!(cfg.learning_rate > 0.0)) throw Error("learning rate must be positive");
    for (Eigen::Index h : cfg.hidden)
        if (h < 1) throw ShapeError("hidden widths must be positive");
}

void check_finite(const MlpModel& model, int epoch) {
    for (std::size_t l = 0; l < model.w.size(); ++l)
        if (!model.w[l].allFinite() || !model.b[l].allFinite())
            throw NonFinite("training diverged at epoch " + std::to_string(epoch));
}

std::vector<Eigen::Index> model_dims(const TrainConfig& cfg, Eigen::Index out_dim) {
    std::vector<Eigen::Index> dims;
    dims.reserve(cfg.hidden.size() + 2);
    dims.push_back(cfg.dataset.input_dim);
    for (Eigen::Index h : cfg.hidden) dims.push_back(h);
    dims.push_back(out_dim);
    return dims;
}

}  // namespace

std::string to_string(TrainTask task) {
    return task == TrainTask::Supervised ? "supervised" : "ssl";
}

std::string to_string(Regularizer reg) {
    switch (reg) {
        case Regularizer::Vanilla: return "vanilla";
        case Regularizer::VnePlus: return "vne+";
        case Regularizer::VneMinus: return "vne-";
        case Regularizer::Frobenius: return "frobenius";
    }
    throw Error("unknown regularizer");
}

TrainTask task_from_string(const std::string& s) {
    if (s == "supervised") return TrainTask::Supervised;
    if (s == "ssl") return TrainTask::Ssl;
    throw ParseError("unknown task '" + s + "' (expected supervised or ssl)");
}

Regularizer regularizer_from_string(const std::string& s) {
    if (s == "vanilla") return Regularizer::Vanilla;
    if (s == "vne+") return Regularizer::VnePlus;
    if (s == "vne-") return Regularizer::VneMinus;
    if (s == "frobenius") return Regularizer::Frobenius;
    throw ParseError("unknown regularizer '" + s + "' (expected vanilla, vne+, vne-, or frobenius)");
}

TrainConfig supervised_defaults() {
    TrainConfig cfg;
    cfg.task = TrainTask::Supervised;
    cfg.regularizer = Regularizer::Vanilla;
    cfg.alpha = 0.01;
    cfg.frobenius_c = 1.0 / 64.0;
    cfg.epochs = 100;
    cfg.batch_size = 128;
    cfg.hidden = {128, 64};
    return cfg;
}

TrainConfig ssl_defaults() {
    TrainConfig cfg;
    cfg.task = TrainTask::Ssl;
    cfg.regularizer = Regularizer::VnePlus;
    cfg.alpha1 = 15.0;
    cfg.alpha2 = 1.0;
    cfg.epochs = 400;
    cfg.batch_size = 64;
    cfg.hidden = {128};
    cfg.ssl_output_dim = 128;
    cfg.dataset.noise_scale = 0.25;
    return cfg;
}

MlpModel make_mlp(const std::vector<Eigen::Index>& dims, Rng& rng) {
    if (dims.size() < 2) throw ShapeError("a model needs an input and an output width");
    for (Eigen::Index d : dims)
        if (d < 1) throw ShapeError("layer widths must be positive");
    MlpModel model;
    const std::size_t layers = dims.size() - 1;
    model.w.reserve(layers);
    model.b.reserve(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        const double scale = std::sqrt(2.0 / static_cast<double>(dims[l]));
        model.w.push_back(rng.gaussian_matrix(dims[l], dims[l + 1]) * scale);
        model.b.push_back(Vec::Zero(dims[l + 1]));
    }
    return model;
}

Forward mlp_forward(const MlpModel& model, const Mat& x) {
    const Eigen::Index layers = model.layers();
    if (layers == 0) throw ShapeError("empty model");
    if (x.cols() != model.w[0].rows())
        throw ShapeMismatch("input width " + std::to_string(x.cols()) + " does not match the first layer (" +
                            std::to_string(model.w[0].rows()) + ")");
    Forward f;
    f.pre.reserve(static_cast<std::size_t>(layers));
    f.act.reserve(static_cast<std::size_t>(layers) + 1);
    f.act.push_back(x);
    for (Eigen::Index l = 0; l < layers; ++l) {
        Mat pre = f.act.back() * model.w[static_cast<std::size_t>(l)];
        pre.rowwise() += model.b[static_cast<std::size_t>(l)].transpose();
        f.pre.push_back(pre);
        if (l + 1 < layers)
            f.act.push_back(pre.cwiseMax(0.0));  // rectifier, flat at exactly 0
        else
            f.act.push_back(std::move(pre));  // linear head
    }
    return f;
}

LossGrads supervised_loss_and_grads(const MlpModel& model, const Mat& xb,
                                    const std::vector<int>& yb, const TrainConfig& cfg) {
    const Eigen::Index m = xb.rows();
    const Eigen::Index layers = model.layers();
    if (m == 0) throw ShapeError("empty batch");
    if (static_cast<Eigen::Index>(yb.size()) != m)
        throw ShapeMismatch("batch has " + std::to_string(m) + " rows but " +
                            std::to_string(yb.size()) + " labels");
    if (layers < 2) throw ShapeError("supervised model needs a hidden layer before the head");

    Forward f = mlp_forward(model, xb);
    const Mat& logits = f.act[static_cast<std::size_t>(layers)];
    const Eigen::Index classes = logits.cols();

    // softmax cross-entropy, shifted by the row max for stability
    Mat dlogits(m, classes);
    double ce = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        if (yb[static_cast<std::size_t>(i)] < 0 || yb[static_cast<std::size_t>(i)] >= classes)
            throw Error("label " + std::to_string(yb[static_cast<std::size_t>(i)]) + " outside the class range");
        const double mx = logits.row(i).maxCoeff();
        Eigen::RowVectorXd e = (logits.row(i).array() - mx).exp();
        const double sum = e.sum();
        dlogits.row(i) = e / sum;
        ce += std::log(sum) - (logits(i, yb[static_cast<std::size_t>(i)]) - mx);
    }
    ce /= static_cast<double>(m);
    for (Eigen::Index i = 0; i < m; ++i) dlogits(i, yb[static_cast<std::size_t>(i)]) -= 1.0;
    dlogits /= static_cast<double>(m);

    // representation-level term: objective = CE + reg_value, with
    //   vne+ : reg_value = -alpha * S   (entropy pushed up)
    //   vne- : reg_value = +alpha * S   (entropy pushed down)
    //   frob : reg_value = +alpha * ||Z^T Z / m - c I||_F^2
    const bool use_reg = cfg.regularizer != Regularizer::Vanilla && cfg.alpha != 0.0;
    const bool on_pre = cfg.vne_on_preactivation;
    double reg_value = 0.0;
    Mat d_rep;
    if (use_reg) {
        const Mat& rep = on_pre ? f.pre[static_cast<std::size_t>(layers - 2)]
                                : f.act[static_cast<std::size_t>(layers - 1)];
        d_rep = Mat::Zero(rep.rows(), rep.cols());
        FilteredRows fr = filter_zero_rows(rep);
        if (fr.sub.rows() > 0) {
            Mat g_sub;
            if (cfg.regularizer == Regularizer::Frobenius) {
                const RepresentationMatrix z = normalize_rows({fr.sub, false});
                auto [lf, gz] = frobenius_loss(z, cfg.frobenius_c);
                g_sub = cfg.alpha * chain_grad_through_row_normalization(fr.sub, z.m, gz);
                reg_value = cfg.alpha * lf;
            } else {
                auto [val, gh] = vne_gradient({fr.sub, false});
                const double sign = cfg.regularizer == Regularizer::VnePlus ? -1.0 : 1.0;
                g_sub = sign * cfg.alpha * gh;
                reg_value = sign * cfg.alpha * val.entropy;
            }
            for (std::size_t i = 0; i < fr.keep.size(); ++i)
                d_rep.row(fr.keep[i]) = g_sub.row(static_cast<Eigen::Index>(i));
        }
    }

    LossGrads out;
    out.task_loss = ce;
    out.reg_value = reg_value;
    out.gw.resize(static_cast<std::size_t>(layers));
    out.gb.resize(static_cast<std::size_t>(layers));

    Mat da = std::move(dlogits);  // gradient w.r.t. act[l + 1] while walking down
    for (Eigen::Index l = layers - 1; l >= 0; --l) {
        const std::size_t ul = static_cast<std::size_t>(l);
        Mat dp;
        if (l == layers - 1) {
            dp = std::move(da);
        } else {
            dp = da.cwiseProduct((f.pre[ul].array() > 0.0).cast<double>().matrix());
            if (use_reg && on_pre && l == layers - 2) dp += d_rep;  // pre-rectifier hook
        }
        out.gw[ul] = f.act[ul].transpose() * dp;
        out.gb[ul] = dp.colwise().sum().transpose();
        if (l > 0) {
            da = dp * model.w[ul].transpose();
            if (use_reg && !on_pre && l == layers - 1) da += d_rep;  // post-rectifier hook
        }
    }
    return out;
}

LossGrads ssl_loss_and_grads(const MlpModel& model, const Mat& v1, const Mat& v2,
                             const TrainConfig& cfg) {
    if (v1.rows() != v2.rows() || v1.cols() != v2.cols())
        throw ShapeMismatch("the two views must share a shape");
    if (v1.rows() == 0) throw ShapeError("empty batch");
    const Eigen::Index layers = model.layers();

    Forward f1 = mlp_forward(model, v1);
    Forward f2 = mlp_forward(model, v2);
    RegularizerConfig rc;
    rc.alpha1 = cfg.alpha1;
    rc.alpha2 = cfg.alpha2;
    const IvneResult res = ivne_loss({f1.act[static_cast<std::size_t>(layers)], false},
                                     {f2.act[static_cast<std::size_t>(layers)], false}, rc);

    LossGrads out;
    out.task_loss = -cfg.alpha1 * res.mean_cosine;  // invariance part
    out.reg_value = res.loss - out.task_loss;       // entropy part (0 in the ablation)
    out.alignment = res.mean_cosine;
    out.gw.assign(static_cast<std::size_t>(layers), Mat());
    out.gb.assign(static_cast<std::size_t>(layers), Vec());
    for (Eigen::Index l = 0; l < layers; ++l) {
        out.gw[static_cast<std::size_t>(l)] = Mat::Zero(model.w[static_cast<std::size_t>(l)].rows(),
                                                        model.w[static_cast<std::size_t>(l)].cols());
        out.gb[static_cast<std::size_t>(l)] = Vec::Zero(model.b[static_cast<std::size_t>(l)].size());
    }

    auto backward = [&](const Forward& f, const Mat& d_out) {
        Mat da = d_out;
        for (Eigen::Index l = layers - 1; l >= 0; --l) {
            const std::size_t ul = static_cast<std::size_t>(l);
            Mat dp = (l == layers - 1)
                         ? std::move(da)
                         : da.cwiseProduct((f.pre[ul].array() > 0.0).cast<double>().matrix()).eval();
            out.gw[ul] += f.act[ul].transpose() * dp;
            out.gb[ul] += dp.colwise().sum().transpose();
            if (l > 0) da = dp * model.w[ul].transpose();
        }
    };
    backward(f1, res.grad1);
    backward(f2, res.grad2);
    return out;
}

Dataset make_synthetic_dataset(const DatasetSpec& spec, std::uint64_t seed) {
    if (spec.classes < 2) throw Error("need at least two classes");
    if (spec.samples_per_class < 1) throw Error("need at least one sample per class");
    if (spec.input_dim < spec.classes)
        throw ShapeError("input dimension must be at least the class count to hold the mean frame");
    Rng rng(seed);
    const Eigen::Index n = static_cast<Eigen::Index>(spec.classes) * spec.samples_per_class;
    Dataset ds;
    ds.x.resize(n, spec.input_dim);
    ds.labels.reserve(static_cast<std::size_t>(n));
    Eigen::Index row = 0;
    for (int k = 0; k < spec.classes; ++k) {
        for (int s = 0; s < spec.samples_per_class; ++s, ++row) {
            for (Eigen::Index j = 0; j < spec.input_dim; ++j)
                ds.x(row, j) = (j == k ? spec.class_separation : 0.0) + rng.gaussian();
            ds.labels.push_back(k);
        }
    }
    return ds;
}

TrainReport train_supervised(const TrainConfig& cfg) {
    if (cfg.task != TrainTask::Supervised) throw Error("config does not describe a supervised run");
    validate_common(cfg);
    if (cfg.hidden.empty()) throw ShapeError("supervised training needs at least one hidden layer");
    if (cfg.hidden.back() < 2) throw ShapeError("penultimate width must be at least 2");

    const Dataset ds = make_synthetic_dataset(cfg.dataset, cfg.seed);
    const Eigen::Index n = ds.x.rows();
    if (cfg.batch_size > n) throw ShapeError("batch size exceeds the dataset");

    Rng init_rng(cfg.seed + 1);
    MlpModel model = make_mlp(model_dims(cfg, cfg.dataset.classes), init_rng);
    const Eigen::Index layers = model.layers();
    Rng loop_rng(cfg.seed + 2);

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});

    TrainReport report;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        loop_rng.shuffle(order);
        double task_sum = 0.0, reg_sum = 0.0;
        int batches = 0;
        for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
            const Eigen::Index m = std::min(cfg.batch_size, n - start);
            Mat xb(m, ds.x.cols());
            std::vector<int> yb(static_cast<std::size_t>(m));
            for (Eigen::Index i = 0; i < m; ++i) {
                xb.row(i) = ds.x.row(order[static_cast<std::size_t>(start + i)]);
                yb[static_cast<std::size_t>(i)] =
                    ds.labels[static_cast<std::size_t>(order[static_cast<std::size_t>(start + i)])];
            }
            const LossGrads lg = supervised_loss_and_grads(model, xb, yb, cfg);
            task_sum += lg.task_loss;
            reg_sum += lg.reg_value;
            ++batches;
            for (Eigen::Index l = 0; l < layers; ++l) {
                model.w[static_cast<std::size_t>(l)] -= cfg.learning_rate * lg.gw[static_cast<std::size_t>(l)];
                model.b[static_cast<std::size_t>(l)] -= cfg.learning_rate * lg.gb[static_cast<std::size_t>(l)];
            }
        }
        report.task_loss.push_back(task_sum / batches);
        report.reg_value.push_back(reg_sum / batches);

        // end-of-epoch full pass: accuracy and penultimate entropy
        const Forward f = mlp_forward(model, ds.x);
        const Mat& logits = f.act[static_cast<std::size_t>(layers)];
        Eigen::Index correct = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            Eigen::Index arg = 0;
            logits.row(i).maxCoeff(&arg);
            if (arg == ds.labels[static_cast<std::size_t>(i)]) ++correct;
        }
        report.accuracy.push_back(static_cast<double>(correct) / static_cast<double>(n));
        const Mat& rep = cfg.vne_on_preactivation ? f.pre[static_cast<std::size_t>(layers - 2)]
                                                  : f.act[static_cast<std::size_t>(layers - 1)];
        report.entropy.push_back(entropy_of_rows(rep));
        check_finite(model, epoch);
    }

    const Forward f = mlp_forward(model, ds.x);
    const Mat& rep = cfg.vne_on_preactivation ? f.pre[static_cast<std::size_t>(layers - 2)]
                                              : f.act[static_cast<std::size_t>(layers - 1)];
    FilteredRows fr = filter_zero_rows(rep);
    report.eval_rows_dropped = fr.dropped;
    if (fr.sub.rows() == 0) throw DegenerateSpectrum("every representation row collapsed to zero");
    report.final_report = full_report({fr.sub, false}, cfg.seed);
    return report;
}

TrainReport train_ssl(const TrainConfig& cfg) {
    if (cfg.task != TrainTask::Ssl) throw Error("config does not describe an ssl run");
    validate_common(cfg);
    if (cfg.ssl_output_dim < 2) throw ShapeError("representation width must be at least 2");

    const Dataset ds = make_synthetic_dataset(cfg.dataset, cfg.seed);
    const Eigen::Index n = ds.x.rows();
    if (cfg.batch_size > n) throw ShapeError("batch size exceeds the dataset");

    Rng init_rng(cfg.seed + 1);
    MlpModel model = make_mlp(model_dims(cfg, cfg.ssl_output_dim), init_rng);
    const Eigen::Index layers = model.layers();
    Rng loop_rng(cfg.seed + 2);

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});

    TrainReport report;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        loop_rng.shuffle(order);
        double task_sum = 0.0, reg_sum = 0.0, align_sum = 0.0;
        int batches = 0;
        Eigen::Index last_start = 0, last_m = 0;
        for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
            const Eigen::Index m = std::min(cfg.batch_size, n - start);
            Mat xb(m, ds.x.cols());
            for (Eigen::Index i = 0; i < m; ++i)
                xb.row(i) = ds.x.row(order[static_cast<std::size_t>(start + i)]);
            const Mat v1 = xb + cfg.dataset.noise_scale * loop_rng.gaussian_matrix(m, xb.cols());
            const Mat v2 = xb + cfg.dataset.noise_scale * loop_rng.gaussian_matrix(m, xb.cols());
            const LossGrads lg = ssl_loss_and_grads(model, v1, v2, cfg);
            task_sum += lg.task_loss;
            reg_sum += lg.reg_value;
            align_sum += lg.alignment;
            ++batches;
            for (Eigen::Index l = 0; l < layers; ++l) {
                model.w[static_cast<std::size_t>(l)] -= cfg.learning_rate * lg.gw[static_cast<std::size_t>(l)];
                model.b[static_cast<std::size_t>(l)] -= cfg.learning_rate * lg.gb[static_cast<std::size_t>(l)];
            }
            last_start = start;
            last_m = m;
        }
        report.task_loss.push_back(task_sum / batches);
        report.reg_value.push_back(reg_sum / batches);
        report.alignment.push_back(align_sum / batches);

        // entropy curve: clean encoder output of the last batch, current weights
        Mat xe(last_m, ds.x.cols());
        for (Eigen::Index i = 0; i < last_m; ++i)
            xe.row(i) = ds.x.row(order[static_cast<std::size_t>(last_start + i)]);
        const Forward fe = mlp_forward(model, xe);
        report.entropy.push_back(entropy_of_rows(fe.act[static_cast<std::size_t>(layers)]));
        check_finite(model, epoch);
    }

    const Forward f = mlp_forward(model, ds.x);  // clean full-set encoder output
    const Mat& rep = f.act[static_cast<std::size_t>(layers)];
    FilteredRows fr = filter_zero_rows(rep);
    report.eval_rows_dropped = fr.dropped;
    if (fr.sub.rows() == 0) throw DegenerateSpectrum("every representation row collapsed to zero");
    report.final_report = full_report({fr.sub, false}, cfg.seed);
    return report;
}

}  // namespace vne
