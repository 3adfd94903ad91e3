#include "vne/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <system_error>

#include "vne/errors.hpp"
#include "vne/version.hpp"

namespace vne {

namespace {

constexpr char kMagic[4] = {'V', 'N', 'E', 'M'};
constexpr std::uint8_t kBinaryVersion = 1;
constexpr std::uint64_t kMaxElements = 1ull << 30;  // refuse absurd headers

std::uint64_t to_le(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::little) return v;
    std::uint64_t out = 0;
    for (int i = 0; i < 8; ++i) out = (out << 8) | ((v >> (8 * i)) & 0xff);
    return out;
}

void append_u64_le(std::string& buf, std::uint64_t v) {
    const std::uint64_t le = to_le(v);
    char bytes[8];
    std::memcpy(bytes, &le, 8);
    buf.append(bytes, 8);
}

std::uint64_t take_u64_le(const char* p) {
    std::uint64_t le = 0;
    std::memcpy(&le, p, 8);
    return to_le(le);
}

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

Mat parse_csv(const std::string& text, const std::string& path) {
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        ++line_no;
        std::string_view line(text.data() + pos, eol - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        const bool at_end = eol >= text.size();
        pos = eol + 1;
        if (line.empty()) {
            if (at_end) break;  // trailing newline
            throw ParseError(path + ": line " + std::to_string(line_no) + " is empty");
        }
        std::vector<double> cells;
        std::size_t cell_start = 0;
        while (true) {
            std::size_t comma = line.find(',', cell_start);
            std::string_view cell = line.substr(
                cell_start, comma == std::string_view::npos ? std::string_view::npos : comma - cell_start);
            while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
            while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t')) cell.remove_suffix(1);
            double value = 0.0;
            const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), value);
            if (cell.empty() || res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
                throw ParseError(path + ": line " + std::to_string(line_no) + ": '" + std::string(cell) +
                                 "' is not a number");
            cells.push_back(value);
            if (comma == std::string_view::npos) break;
            cell_start = comma + 1;
        }
        if (!rows.empty() && cells.size() != rows.front().size())
            throw NonRectangular(path + ": line " + std::to_string(line_no) + " has " +
                                 std::to_string(cells.size()) + " cells, expected " +
                                 std::to_string(rows.front().size()));
        rows.push_back(std::move(cells));
        if (at_end) break;
    }
    if (rows.empty()) throw ParseError(path + ": empty matrix file");
    Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return m;
}

Mat parse_binary(const std::string& blob, const std::string& path) {
    if (blob.size() < 21 || std::memcmp(blob.data(), kMagic, 4) != 0)
        throw ParseError(path + ": not a matrix blob (bad magic)");
    const std::uint8_t version = static_cast<std::uint8_t>(blob[4]);
    if (version != kBinaryVersion)
        throw ParseError(path + ": unsupported blob version " + std::to_string(version));
    const std::uint64_t n = take_u64_le(blob.data() + 5);
    const std::uint64_t d = take_u64_le(blob.data() + 13);
    if (n == 0 || d == 0) throw ParseError(path + ": empty matrix");
    if (n > kMaxElements || d > kMaxElements || n * d > kMaxElements)
        throw ParseError(path + ": unreasonable matrix header");
    const std::size_t expected = 21 + static_cast<std::size_t>(n * d) * 8;
    if (blob.size() != expected)
        throw ParseError(path + ": expected " + std::to_string(expected) + " bytes, found " +
                         std::to_string(blob.size()));
    Mat m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    const char* p = blob.data() + 21;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j, p += 8)
            m(i, j) = std::bit_cast<double>(take_u64_le(p));
    return m;
}

bool binary_extension(const std::string& path) {
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos) return false;
    const std::string ext = path.substr(dot);
    return ext == ".bin" || ext == ".vnem";
}

}  // namespace

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw Error("failed reading " + path);
    return content;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("failed writing " + path);
}

Mat read_matrix(const std::string& path, MatrixFormat format) {
    const std::string blob = read_text_file(path);
    if (format == MatrixFormat::Auto)
        format = (blob.size() >= 4 && std::memcmp(blob.data(), kMagic, 4) == 0) ? MatrixFormat::Binary
                                                                                : MatrixFormat::Csv;
    Mat m = format == MatrixFormat::Binary ? parse_binary(blob, path) : parse_csv(blob, path);
    if (!m.allFinite()) throw NonFinite(path + ": matrix holds non-finite entries");
    return m;
}

void write_matrix(const std::string& path, const Mat& m, MatrixFormat format) {
    if (m.rows() == 0 || m.cols() == 0) throw ShapeError("refusing to write an empty matrix");
    if (!m.allFinite()) throw NonFinite("refusing to write non-finite entries");
    if (format == MatrixFormat::Auto)
        format = binary_extension(path) ? MatrixFormat::Binary : MatrixFormat::Csv;
    std::string buf;
    if (format == MatrixFormat::Binary) {
        buf.reserve(21 + static_cast<std::size_t>(m.size()) * 8);
        buf.append(kMagic, 4);
        buf.push_back(static_cast<char>(kBinaryVersion));
        append_u64_le(buf, static_cast<std::uint64_t>(m.rows()));
        append_u64_le(buf, static_cast<std::uint64_t>(m.cols()));
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j)
                append_u64_le(buf, std::bit_cast<std::uint64_t>(m(i, j)));
    } else {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                if (j) buf.push_back(',');
                buf += format_double(m(i, j));
            }
            buf.push_back('\n');
        }
    }
    write_text_file(path, buf);
}

// ===== Report serialization =====

namespace {

Json meta_json(std::uint64_t seed, const std::string& timestamp) {
    Json meta;
    meta["tool_version"] = kToolVersion;
    meta["seed"] = seed;
    meta["timestamp"] = timestamp;
    return meta;
}

Json finite_or_null_array(const std::vector<double>& values) {
    Json arr = Json::array();
    for (double v : values) {
        if (std::isfinite(v))
            arr.push_back(v);
        else
            arr.push_back(nullptr);
    }
    return arr;
}

}  // namespace

Json report_body(const DiagnosticsReport& rep, bool include_values) {
    Json body;
    body["entropy"] = rep.entropy.entropy;
    body["spectrum_log10"] = finite_or_null_array(rep.spectrum_log10);
    body["rank_surrogate"] = rep.rank_surrogate;
    body["rank_bound_gap"] = rep.rank_bound_gap;
    Json iso;
    iso["mean"] = rep.isotropy.mean();
    iso["min"] = rep.isotropy.min();
    if (include_values) iso["values"] = rep.isotropy.normalized_values;
    body["isotropy"] = std::move(iso);
    Json dis;
    dis["mean_abs"] = rep.disentanglement.mean_abs();
    dis["p95"] = rep.disentanglement.p95_abs();
    if (include_values) dis["values"] = rep.disentanglement.values;
    body["disentanglement"] = std::move(dis);
    body["dead_units"] = rep.dead_units;
    return body;
}

Json report_json(const DiagnosticsReport& rep, std::uint64_t seed, bool include_values,
                 const std::string& timestamp) {
    Json doc;
    doc["meta"] = meta_json(seed, timestamp);
    doc.update(report_body(rep, include_values));  // body keys after meta, in body order
    return doc;
}

Json trajectory_json(const Trajectory& traj, const OptimizeConfig& cfg, const std::string& timestamp) {
    Json doc;
    doc["meta"] = meta_json(cfg.seed, timestamp);
    Json conf;
    conf["n"] = cfg.n;
    conf["d"] = cfg.d;
    conf["mode"] = cfg.mode == OptimizeMode::Maximize ? "maximize" : "minimize";
    conf["steps"] = cfg.steps;
    conf["step_size"] = cfg.step_size;
    conf["record_every"] = cfg.record_every;
    doc["config"] = std::move(conf);
    Json hist = Json::array();
    for (const auto& [step, entropy] : traj.entropy_history) hist.push_back(Json::array({step, entropy}));
    doc["entropy_history"] = std::move(hist);
    doc["final_entropy"] =
        traj.entropy_history.empty() ? 0.0 : traj.entropy_history.back().second;
    std::vector<double> spec_log;
    spec_log.reserve(static_cast<std::size_t>(traj.final_spectrum.eigenvalues.size()));
    for (Eigen::Index k = 0; k < traj.final_spectrum.eigenvalues.size(); ++k) {
        const double lam = traj.final_spectrum.eigenvalues[k];
        spec_log.push_back(lam > kEpsDrop ? std::log10(lam) : std::numeric_limits<double>::quiet_NaN());
    }
    doc["final_spectrum_log10"] = finite_or_null_array(spec_log);
    return doc;
}

Json train_report_json(const TrainReport& rep, const TrainConfig& cfg, const std::string& timestamp) {
    Json doc;
    doc["meta"] = meta_json(cfg.seed, timestamp);
    Json conf;
    conf["task"] = to_string(cfg.task);
    conf["regularizer"] = to_string(cfg.regularizer);
    conf["alpha"] = cfg.alpha;
    conf["frobenius_c"] = cfg.frobenius_c;
    conf["alpha1"] = cfg.alpha1;
    conf["alpha2"] = cfg.alpha2;
    conf["epochs"] = cfg.epochs;
    conf["batch_size"] = cfg.batch_size;
    conf["learning_rate"] = cfg.learning_rate;
    Json ds;
    ds["classes"] = cfg.dataset.classes;
    ds["input_dim"] = cfg.dataset.input_dim;
    ds["samples_per_class"] = cfg.dataset.samples_per_class;
    ds["class_separation"] = cfg.dataset.class_separation;
    ds["noise_scale"] = cfg.dataset.noise_scale;
    conf["dataset"] = std::move(ds);
    conf["hidden"] = cfg.hidden;
    conf["ssl_output_dim"] = cfg.ssl_output_dim;
    conf["vne_on_preactivation"] = cfg.vne_on_preactivation;
    doc["config"] = std::move(conf);
    Json curves;
    curves["task_loss"] = rep.task_loss;
    curves["reg_value"] = rep.reg_value;
    curves["entropy"] = rep.entropy;
    if (cfg.task == TrainTask::Supervised)
        curves["accuracy"] = rep.accuracy;
    else
        curves["alignment"] = rep.alignment;
    doc["curves"] = std::move(curves);
    doc["final_report"] = report_body(rep.final_report);
    doc["eval_rows_dropped"] = rep.eval_rows_dropped;
    return doc;
}

Json verify_json(const std::vector<VerifyOutcome>& outcomes, const std::string& timestamp) {
    Json doc;
    Json meta;
    meta["tool_version"] = kToolVersion;
    meta["timestamp"] = timestamp;
    doc["meta"] = std::move(meta);
    Json suites = Json::array();
    bool all_pass = true;
    for (const VerifyOutcome& o : outcomes) {
        Json s;
        s["suite"] = o.suite;
        s["trials"] = o.trials;
        s["tolerance"] = o.tolerance;
        s["worst_violation"] = o.worst_violation;
        s["pass"] = o.pass;
        s["details"] = o.details;
        suites.push_back(std::move(s));
        all_pass = all_pass && o.pass;
    }
    doc["suites"] = std::move(suites);
    doc["all_pass"] = all_pass;
    return doc;
}

}  // namespace vne
