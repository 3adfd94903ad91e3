#include "vne/cli.hpp"

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "vne/diagnostics.hpp"
#include "vne/entropy.hpp"
#include "vne/errors.hpp"
#include "vne/io.hpp"
#include "vne/optimize.hpp"
#include "vne/trainer.hpp"
#include "vne/verify.hpp"

namespace vne {

namespace {

std::optional<std::uint64_t> env_default_seed() {
    const char* raw = std::getenv("VNE_SEED");
    if (raw == nullptr || *raw == '\0') return std::nullopt;
    std::uint64_t value = 0;
    const char* end = raw;
    while (*end != '\0') ++end;
    const auto res = std::from_chars(raw, end, value);
    if (res.ec != std::errc{} || res.ptr != end)
        throw ParseError(std::string("VNE_SEED is not an unsigned integer: '") + raw + "'");
    return value;
}

void emit_json(const Json& doc, const std::string& path, std::ostream& out) {
    const std::string text = doc.dump(2) + "\n";
    if (path.empty())
        out << text;
    else
        write_text_file(path, text);
}

MatrixFormat format_from_string(const std::string& s) {
    if (s == "auto") return MatrixFormat::Auto;
    if (s == "csv") return MatrixFormat::Csv;
    if (s == "bin") return MatrixFormat::Binary;
    throw ParseError("unknown matrix format '" + s + "'");
}

// Config-file overrides for train: known keys only, applied over the task
// defaults and themselves overridden by explicit flags.
void apply_train_config(TrainConfig& cfg, const Json& j) {
    if (!j.is_object()) throw ParseError("config file must hold a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key == "task") {
            throw ParseError("set the task with --task, not the config file");
        } else if (key == "regularizer") {
            cfg.regularizer = regularizer_from_string(value.get<std::string>());
        } else if (key == "alpha") {
            cfg.alpha = value.get<double>();
        } else if (key == "frobenius_c") {
            cfg.frobenius_c = value.get<double>();
        } else if (key == "alpha1") {
            cfg.alpha1 = value.get<double>();
        } else if (key == "alpha2") {
            cfg.alpha2 = value.get<double>();
        } else if (key == "epochs") {
            cfg.epochs = value.get<int>();
        } else if (key == "batch_size") {
            cfg.batch_size = value.get<Eigen::Index>();
        } else if (key == "learning_rate") {
            cfg.learning_rate = value.get<double>();
        } else if (key == "seed") {
            cfg.seed = value.get<std::uint64_t>();
        } else if (key == "hidden") {
            cfg.hidden = value.get<std::vector<Eigen::Index>>();
        } else if (key == "ssl_output_dim") {
            cfg.ssl_output_dim = value.get<Eigen::Index>();
        } else if (key == "vne_on_preactivation") {
            cfg.vne_on_preactivation = value.get<bool>();
        } else if (key == "dataset") {
            if (!value.is_object()) throw ParseError("config key 'dataset' must be an object");
            for (const auto& [dk, dv] : value.items()) {
                if (dk == "classes")
                    cfg.dataset.classes = dv.get<int>();
                else if (dk == "input_dim")
                    cfg.dataset.input_dim = dv.get<Eigen::Index>();
                else if (dk == "samples_per_class")
                    cfg.dataset.samples_per_class = dv.get<int>();
                else if (dk == "class_separation")
                    cfg.dataset.class_separation = dv.get<double>();
                else if (dk == "noise_scale")
                    cfg.dataset.noise_scale = dv.get<double>();
                else
                    throw ParseError("unknown config key 'dataset." + dk + "'");
            }
        } else {
            throw ParseError("unknown config key '" + key + "'");
        }
    }
}

struct TimedMs {
    double ms = 0.0;
};

template <typename F>
TimedMs time_mean_ms(int repeat, F&& body) {
    body();  // warm-up, not counted
    const auto start = std::chrono::steady_clock::now();
    for (int r = 0; r < repeat; ++r) body();
    const auto stop = std::chrono::steady_clock::now();
    const double total = std::chrono::duration<double, std::milli>(stop - start).count();
    return {total / repeat};
}

void run_bench(const std::vector<int>& sizes, int repeat, std::ostream& out) {
    if (repeat < 1) throw Error("repeat must be at least 1");
    constexpr Eigen::Index kBatch = 256;
    constexpr Eigen::Index kInput = 64;
    out << std::left << std::setw(8) << "width" << std::setw(12) << "vne_ms" << std::setw(12)
        << "step_ms" << "overhead\n";
    for (int size : sizes) {
        if (size < 2) throw Error("widths must be at least 2");
        const Eigen::Index d = size;
        Rng data_rng(42 + static_cast<std::uint64_t>(size));
        const Mat h = data_rng.gaussian_matrix(kBatch, d);

        // reference step: plain forward/backward at this representation width
        TrainConfig cfg = supervised_defaults();
        cfg.hidden = {d};
        cfg.dataset.input_dim = kInput;
        Rng init_rng(7);
        const MlpModel model = make_mlp({kInput, d, static_cast<Eigen::Index>(cfg.dataset.classes)}, init_rng);
        const Mat xb = data_rng.gaussian_matrix(kBatch, kInput);
        std::vector<int> yb(static_cast<std::size_t>(kBatch));
        for (auto& y : yb) y = static_cast<int>(data_rng.below(static_cast<std::uint64_t>(cfg.dataset.classes)));

        const TimedMs vne_t = time_mean_ms(repeat, [&] { (void)vne_gradient({h, false}); });
        const TimedMs step_t =
            time_mean_ms(repeat, [&] { (void)supervised_loss_and_grads(model, xb, yb, cfg); });

        std::ostringstream row;
        row << std::left << std::setw(8) << size << std::setw(12) << std::fixed
            << std::setprecision(3) << vne_t.ms << std::setw(12) << step_t.ms
            << std::setprecision(1) << (100.0 * vne_t.ms / step_t.ms) << "%";
        out << row.str() << "\n";
    }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"von Neumann entropy toolkit for deep-representation autocorrelation spectra"};
    app.name("vne");
    app.require_subcommand(1);

    // ----- analyze -----
    auto* analyze = app.add_subcommand("analyze", "Full diagnostics report for a matrix file");
    struct {
        std::string input;
        std::string format = "auto";
        std::string report;
        std::uint64_t seed = 0;
        int probes = 512;
        std::size_t max_pairs = 2000;
        bool values = false;
    } an;
    analyze->add_option("--input", an.input, "matrix file, CSV or raw binary")->required();
    analyze->add_option("--format", an.format, "input format")
        ->check(CLI::IsMember({"auto", "csv", "bin"}));
    analyze->add_option("--report", an.report, "write the JSON report here (default: stdout)");
    auto* an_seed = analyze->add_option("--seed", an.seed, "probe seed");
    analyze->add_option("--probes", an.probes, "isotropy probe count")->check(CLI::Range(2, 1 << 20));
    analyze->add_option("--max-pairs", an.max_pairs, "component pair sample cap");
    analyze->add_flag("--values", an.values, "embed per-probe and per-pair values");

    // ----- optimize -----
    auto* optimize = app.add_subcommand("optimize", "Entropy ascent/descent on the unit-row manifold");
    struct {
        std::string mode = "max";
        OptimizeConfig cfg;
        std::string out_path;
    } op;
    optimize->add_option("--mode", op.mode, "max or min")->check(CLI::IsMember({"max", "min"}));
    optimize->add_option("--n", op.cfg.n, "rows")->check(CLI::PositiveNumber);
    optimize->add_option("--d", op.cfg.d, "columns")->check(CLI::PositiveNumber);
    optimize->add_option("--steps", op.cfg.steps, "gradient steps")->check(CLI::PositiveNumber);
    optimize->add_option("--lr", op.cfg.step_size, "step size");
    auto* op_seed = optimize->add_option("--seed", op.cfg.seed, "init seed");
    optimize->add_option("--record-every", op.cfg.record_every, "history stride")
        ->check(CLI::PositiveNumber);
    optimize->add_option("--out", op.out_path, "write the trajectory JSON here (default: stdout)");

    // ----- train -----
    auto* train = app.add_subcommand("train", "Toy training with spectrum-shaping regularizers");
    struct {
        std::string task = "supervised";
        std::string reg;
        double alpha = 0.0;
        std::string config_path;
        std::string out_path;
        std::uint64_t seed = 0;
        int epochs = 0;
        Eigen::Index batch = 0;
        double lr = 0.0;
        std::string dump_dataset;
        bool pre = false;
    } tr;
    train->add_option("--task", tr.task, "supervised or ssl")
        ->check(CLI::IsMember({"supervised", "ssl"}));
    auto* tr_reg = train->add_option("--reg", tr.reg, "vanilla, vne+, vne-, or frobenius");
    auto* tr_alpha =
        train->add_option("--alpha", tr.alpha, "regularizer weight (ssl: entropy weight)");
    train->add_option("--config", tr.config_path, "JSON file overriding config fields");
    train->add_option("--out", tr.out_path, "write the training report here (default: stdout)");
    auto* tr_seed = train->add_option("--seed", tr.seed, "run seed");
    auto* tr_epochs = train->add_option("--epochs", tr.epochs)->check(CLI::PositiveNumber);
    auto* tr_batch = train->add_option("--batch", tr.batch)->check(CLI::PositiveNumber);
    auto* tr_lr = train->add_option("--lr", tr.lr)->check(CLI::PositiveNumber);
    train->add_option("--dump-dataset", tr.dump_dataset,
                      "also write the synthetic dataset (features plus a label column)");
    train->add_flag("--pre", tr.pre, "regularize the pre-rectifier penultimate instead");

    // ----- verify -----
    auto* verify = app.add_subcommand("verify", "Seeded numerical verification suites");
    struct {
        std::string suite = "all";
        std::uint64_t seed = 0;
    } ve;
    verify->add_option("--suite", ve.suite, "which battery to run")
        ->check(CLI::IsMember({"all", "bounds", "rank", "disentangle", "isotropy", "gradient", "paths"}));
    auto* ve_seed = verify->add_option("--seed", ve.seed, "override every suite seed");

    // ----- bench -----
    auto* bench = app.add_subcommand("bench", "Entropy wall time against a reference training step");
    struct {
        std::vector<int> sizes = {64, 128, 256};
        int repeat = 5;
    } be;
    bench->add_option("--sizes", be.sizes, "representation widths")->delimiter(',');
    bench->add_option("--repeat", be.repeat, "timing repetitions")->check(CLI::PositiveNumber);

    // parse with a synthetic argv so argument order matches the shell exactly
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("vne");
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? 0 : 2;
    }

    try {
        const std::optional<std::uint64_t> env_seed = env_default_seed();
        const auto pick_seed = [&](const CLI::Option* opt, std::uint64_t flag_value,
                                   std::uint64_t fallback) {
            if (opt->count() > 0) return flag_value;
            if (env_seed) return *env_seed;
            return fallback;
        };

        if (app.got_subcommand(analyze)) {
            const Mat h = read_matrix(an.input, format_from_string(an.format));
            const std::uint64_t seed = pick_seed(an_seed, an.seed, 0);
            const DiagnosticsReport rep = full_report({h, false}, seed, an.probes, an.max_pairs);
            emit_json(report_json(rep, seed, an.values), an.report, out);
            return 0;
        }

        if (app.got_subcommand(optimize)) {
            op.cfg.mode = op.mode == "min" ? OptimizeMode::Minimize : OptimizeMode::Maximize;
            op.cfg.seed = pick_seed(op_seed, op.cfg.seed, op.cfg.seed);
            const Trajectory traj = optimize_vne(op.cfg);
            emit_json(trajectory_json(traj, op.cfg), op.out_path, out);
            return 0;
        }

        if (app.got_subcommand(train)) {
            const TrainTask task = task_from_string(tr.task);
            TrainConfig cfg = task == TrainTask::Ssl ? ssl_defaults() : supervised_defaults();
            if (!tr.config_path.empty()) {
                Json j;
                try {
                    j = Json::parse(read_text_file(tr.config_path));
                } catch (const nlohmann::json::exception& e) {
                    throw ParseError(tr.config_path + ": " + e.what());
                }
                try {
                    apply_train_config(cfg, j);
                } catch (const nlohmann::json::exception& e) {
                    throw ParseError(tr.config_path + ": " + e.what());
                }
            }
            if (tr_reg->count() > 0) {
                const Regularizer reg = regularizer_from_string(tr.reg);
                if (task == TrainTask::Ssl && reg != Regularizer::Vanilla && reg != Regularizer::VnePlus) {
                    err << "error: ssl training supports only --reg vanilla or vne+\n";
                    return 2;
                }
                cfg.regularizer = reg;
                if (task == TrainTask::Ssl && reg == Regularizer::Vanilla) cfg.alpha2 = 0.0;
            }
            if (tr_alpha->count() > 0) {
                if (task == TrainTask::Ssl)
                    cfg.alpha2 = tr.alpha;
                else
                    cfg.alpha = tr.alpha;
            }
            if (tr_epochs->count() > 0) cfg.epochs = tr.epochs;
            if (tr_batch->count() > 0) cfg.batch_size = tr.batch;
            if (tr_lr->count() > 0) cfg.learning_rate = tr.lr;
            cfg.seed = pick_seed(tr_seed, tr.seed, cfg.seed);
            cfg.vne_on_preactivation = tr.pre || cfg.vne_on_preactivation;

            if (!tr.dump_dataset.empty()) {
                const Dataset ds = make_synthetic_dataset(cfg.dataset, cfg.seed);
                Mat dump(ds.x.rows(), ds.x.cols() + 1);
                dump.leftCols(ds.x.cols()) = ds.x;
                for (Eigen::Index i = 0; i < ds.x.rows(); ++i)
                    dump(i, ds.x.cols()) = static_cast<double>(ds.labels[static_cast<std::size_t>(i)]);
                write_matrix(tr.dump_dataset, dump);
            }

            const TrainReport rep =
                task == TrainTask::Ssl ? train_ssl(cfg) : train_supervised(cfg);
            emit_json(train_report_json(rep, cfg), tr.out_path, out);
            return 0;
        }

        if (app.got_subcommand(verify)) {
            const bool seeded = ve_seed->count() > 0 || env_seed.has_value();
            const std::uint64_t s = ve_seed->count() > 0 ? ve.seed : env_seed.value_or(0);
            std::vector<VerifyOutcome> outcomes;
            const auto want = [&](const char* name) { return ve.suite == "all" || ve.suite == name; };
            if (want("bounds")) outcomes.push_back(seeded ? verify_entropy_bounds(1000, s) : verify_entropy_bounds());
            if (want("paths"))
                outcomes.push_back(seeded ? verify_path_equivalence(500, s) : verify_path_equivalence());
            if (want("gradient")) outcomes.push_back(seeded ? verify_gradient(200, s) : verify_gradient());
            if (want("rank")) outcomes.push_back(seeded ? verify_rank_bound(500, s) : verify_rank_bound());
            if (want("disentangle"))
                outcomes.push_back(seeded ? verify_disentanglement(16, 500, s) : verify_disentanglement());
            if (want("isotropy"))
                outcomes.push_back(seeded ? verify_isotropy_theorem(8, 32, 2000, s)
                                          : verify_isotropy_theorem());
            const Json doc = verify_json(outcomes);
            out << doc.dump(2) << "\n";
            return doc.at("all_pass").get<bool>() ? 0 : 1;
        }

        if (app.got_subcommand(bench)) {
            run_bench(be.sizes, be.repeat, out);
            return 0;
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;  // unreachable with require_subcommand(1)
}

}  // namespace vne
