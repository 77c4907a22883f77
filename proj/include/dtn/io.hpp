#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "dtn/forward.hpp"
#include "dtn/nn_model.hpp"
#include "dtn/trainer.hpp"

namespace dtn::io {

namespace fs = std::filesystem;
using nlohmann::json;

/// Boundary ordering tag written next to every DtN matrix.
inline constexpr const char* kBoundaryOrdering = "right-down,bottom-left,left-up,top-right";
inline constexpr const char* kEdgeOrdering = "horizontal-row-major,vertical-row-major";

std::string format_double(double x);

/// Row-major CSV, one matrix row per line, full precision scientific notation.
void write_matrix_csv(const fs::path& path, const Mat& m);
Mat read_matrix_csv(const fs::path& path);

json dtn_to_json(const Mat& lambda);
Mat dtn_from_json(const json& j);

/// Reads a DtN matrix from .json or .csv (chosen by extension).
Mat read_dtn(const fs::path& path);
/// Writes `<stem>.csv` and `<stem>.json`.
void write_dtn(const fs::path& stem, const Mat& lambda);

json conductivity_to_json(int n, const Vec& gamma);
Vec conductivity_from_json(const json& j, int* n = nullptr);
Vec read_conductivity(const fs::path& path, int* n = nullptr);

json weights_to_json(const WeightState& w);
WeightState weights_from_json(const json& j);

/// Horizontal edges as an n x (n+1) grid and vertical edges as an (n+1) x n
/// grid; cell (i-1, j-1) holds the value on the edge anchored at (i, j).
struct EdgeGrids {
    Mat horizontal;
    Mat vertical;
};

EdgeGrids edge_grids(const SquareLattice& lattice, const Vec& per_edge);
/// Writes `<stem>_horizontal.csv` and `<stem>_vertical.csv`.
void write_edge_grids(const fs::path& stem, const SquareLattice& lattice, const Vec& per_edge);

/// CSV with header iteration,loss,step,beta1,beta2 (iterations from 1).
void write_training_log(const fs::path& path, const TrainReport& report, const AdamConfig& config);

json read_json(const fs::path& path);
void write_json(const fs::path& path, const json& j);

}  // namespace dtn::io
