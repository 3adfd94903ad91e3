// Writes small representation-matrix fixtures for tests and by-hand poking.
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "vne/errors.hpp"
#include "vne/io.hpp"
#include "vne/linalg.hpp"
#include "vne/rng.hpp"

int main(int argc, char** argv) {
    CLI::App app{"representation-matrix fixture generator"};
    std::string kind = "gaussian";
    std::string out_path;
    std::string format = "auto";
    Eigen::Index n = 16, d = 32, rank = 2;
    std::uint64_t seed = 1;
    app.add_option("--kind", kind, "gaussian, orthonormal, collapsed, or lowrank")
        ->check(CLI::IsMember({"gaussian", "orthonormal", "collapsed", "lowrank"}));
    app.add_option("--n", n, "rows")->check(CLI::PositiveNumber);
    app.add_option("--d", d, "columns")->check(CLI::PositiveNumber);
    app.add_option("--rank", rank, "target rank for lowrank")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed);
    app.add_option("--out", out_path, "output path")->required();
    app.add_option("--format", format)->check(CLI::IsMember({"auto", "csv", "bin"}));
    CLI11_PARSE(app, argc, argv);

    try {
        vne::Rng rng(seed);
        vne::Mat m;
        if (kind == "gaussian") {
            m = rng.gaussian_matrix(n, d);
        } else if (kind == "orthonormal") {
            if (n > d) throw vne::ShapeError("orthonormal rows need n <= d");
            vne::Mat s = rng.gaussian_matrix(d, d);
            vne::Mat sym = s + s.transpose();
            const vne::Mat u = vne::sym_eigh(sym).eigenvectors;
            m = u.leftCols(n).transpose();
        } else if (kind == "collapsed") {
            m = rng.gaussian_matrix(1, d).replicate(n, 1);
        } else {  // lowrank
            if (rank > std::min(n, d)) throw vne::ShapeError("rank exceeds min(n, d)");
            m = rng.gaussian_matrix(n, rank) * rng.gaussian_matrix(rank, d);
        }
        vne::MatrixFormat fmt = vne::MatrixFormat::Auto;
        if (format == "csv") fmt = vne::MatrixFormat::Csv;
        if (format == "bin") fmt = vne::MatrixFormat::Binary;
        vne::write_matrix(out_path, m, fmt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
