#include "dtn/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dtn/error.hpp"

namespace dtn::io {

namespace {

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    return out;
}

int side_from_boundary_count(Eigen::Index m, const std::string& what) {
    if (m < 4 || m % 4 != 0) throw ShapeError(what + " size " + std::to_string(m) + " is not 4n");
    return static_cast<int>(m / 4);
}

json matrix_values(const Mat& m) {
    json values = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) values.push_back(m(i, j));
    return values;
}

}  // namespace

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17e", x);
    return buf;
}

void write_matrix_csv(const fs::path& path, const Mat& m) {
    auto out = open_out(path);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_double(m(i, j));
        out << '\n';
    }
}

Mat read_matrix_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ConfigError("bad number '" + cell + "' in " + path.string());
            }
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw ShapeError("ragged rows in " + path.string());
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ShapeError(path.string() + " is empty");
    Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

json dtn_to_json(const Mat& lambda) {
    return json{{"n", side_from_boundary_count(lambda.rows(), "DtN matrix")},
                {"boundary_ordering", kBoundaryOrdering},
                {"values", matrix_values(lambda)}};
}

Mat dtn_from_json(const json& j) {
    try {
        const int n = j.at("n").get<int>();
        if (n < 1) throw ShapeError("DtN JSON has n < 1");
        if (j.contains("boundary_ordering") && j.at("boundary_ordering").get<std::string>() != kBoundaryOrdering)
            throw ConfigError("unsupported boundary ordering '" + j.at("boundary_ordering").get<std::string>() + "'");
        const auto& values = j.at("values");
        const int m = 4 * n;
        if (values.size() != static_cast<std::size_t>(m) * m)
            throw ShapeError("DtN JSON holds " + std::to_string(values.size()) + " values, expected " +
                             std::to_string(m * m));
        Mat lambda(m, m);
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c) lambda(r, c) = values[static_cast<std::size_t>(r * m + c)].get<double>();
        return lambda;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed DtN JSON: ") + e.what());
    }
}

Mat read_dtn(const fs::path& path) {
    Mat lambda = path.extension() == ".json" ? dtn_from_json(read_json(path)) : read_matrix_csv(path);
    if (lambda.rows() != lambda.cols()) throw ShapeError("DtN matrix in " + path.string() + " is not square");
    side_from_boundary_count(lambda.rows(), "DtN matrix");
    return lambda;
}

void write_dtn(const fs::path& stem, const Mat& lambda) {
    write_matrix_csv(fs::path(stem.string() + ".csv"), lambda);
    write_json(fs::path(stem.string() + ".json"), dtn_to_json(lambda));
}

json conductivity_to_json(int n, const Vec& gamma) {
    return json{{"n", n}, {"edge_ordering", kEdgeOrdering}, {"gamma", std::vector<double>(gamma.data(), gamma.data() + gamma.size())}};
}

Vec conductivity_from_json(const json& j, int* n_out) {
    try {
        const int n = j.at("n").get<int>();
        const auto values = j.at("gamma").get<std::vector<double>>();
        const SquareLattice lattice(n);
        if (static_cast<int>(values.size()) != lattice.edge_count())
            throw ShapeError("conductivity file holds " + std::to_string(values.size()) + " values, expected " +
                             std::to_string(lattice.edge_count()));
        if (n_out) *n_out = n;
        return Eigen::Map<const Vec>(values.data(), static_cast<Eigen::Index>(values.size()));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed conductivity JSON: ") + e.what());
    }
}

Vec read_conductivity(const fs::path& path, int* n) { return conductivity_from_json(read_json(path), n); }

json weights_to_json(const WeightState& w) {
    return json{{"n", w.n},
                {"scheme", to_string(w.scheme)},
                {"seed", w.seed},
                {"edge_weights", std::vector<double>(w.edge_weights.data(), w.edge_weights.data() + w.edge_weights.size())},
                {"green_block", matrix_values(w.green_block)}};
}

WeightState weights_from_json(const json& j) {
    try {
        WeightState w;
        w.n = j.at("n").get<int>();
        const SquareLattice lattice(w.n);
        w.scheme = parse_init_scheme(j.at("scheme").get<std::string>());
        w.seed = j.at("seed").get<std::uint64_t>();
        const auto edges = j.at("edge_weights").get<std::vector<double>>();
        const auto green = j.at("green_block").get<std::vector<double>>();
        const int ni = lattice.interior_count();
        const int nb = lattice.boundary_count();
        if (static_cast<int>(edges.size()) != lattice.edge_count() ||
            green.size() != static_cast<std::size_t>(ni) * static_cast<std::size_t>(nb))
            throw ShapeError("checkpoint arrays do not match n=" + std::to_string(w.n));
        w.edge_weights = Eigen::Map<const Vec>(edges.data(), static_cast<Eigen::Index>(edges.size()));
        w.green_block.resize(ni, nb);
        for (int r = 0; r < ni; ++r)
            for (int c = 0; c < nb; ++c) w.green_block(r, c) = green[static_cast<std::size_t>(r * nb + c)];
        return w;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed checkpoint JSON: ") + e.what());
    }
}

EdgeGrids edge_grids(const SquareLattice& lattice, const Vec& per_edge) {
    if (per_edge.size() != lattice.edge_count()) throw ShapeError("per-edge vector has the wrong length");
    const int n = lattice.n();
    EdgeGrids grids{Mat::Zero(n, n + 1), Mat::Zero(n + 1, n)};
    for (int e = 0; e < lattice.edge_count(); ++e) {
        const Edge& edge = lattice.edge(e);
        Mat& grid = edge.orientation == Orientation::Horizontal ? grids.horizontal : grids.vertical;
        grid(edge.anchor.i - 1, edge.anchor.j - 1) = per_edge[e];
    }
    return grids;
}

void write_edge_grids(const fs::path& stem, const SquareLattice& lattice, const Vec& per_edge) {
    const EdgeGrids grids = edge_grids(lattice, per_edge);
    write_matrix_csv(fs::path(stem.string() + "_horizontal.csv"), grids.horizontal);
    write_matrix_csv(fs::path(stem.string() + "_vertical.csv"), grids.vertical);
}

void write_training_log(const fs::path& path, const TrainReport& report, const AdamConfig& config) {
    auto out = open_out(path);
    out << "iteration,loss,step,beta1,beta2\n";
    double step = config.initial_step;
    double beta1 = config.beta1_schedule.front();
    double beta2 = config.beta2_schedule.front();
    std::size_t next = 0;
    for (std::size_t t = 0; t < report.loss_history.size(); ++t) {
        const long iteration = static_cast<long>(t) + 1;
        out << iteration << ',' << format_double(report.loss_history[t]) << ',' << format_double(step) << ','
            << beta1 << ',' << beta2 << '\n';
        // A schedule change logged at iteration t applies from t + 1 on.
        while (next < report.schedule.size() && report.schedule[next].iteration <= iteration) {
            step = report.schedule[next].step;
            beta1 = report.schedule[next].beta1;
            beta2 = report.schedule[next].beta2;
            ++next;
        }
    }
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
    }
}

void write_json(const fs::path& path, const json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

}  // namespace dtn::io
