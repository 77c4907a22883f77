#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace dtn {

using BoolMat = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// A set of observed DtN entries (0-based row, column) over a 4n x 4n matrix.
///
/// Named masks: full; C3n = last 3n columns; C2n = last 2n columns;
/// D2n = first 2n columns; Tsq = rows 1..3n x columns n+1..4n;
/// Tre = rows 1..2n x columns n+1..4n (1-based ranges).
struct DataMask {
    std::string name;
    int n = 0;
    BoolMat known;

    /// Observed entries in row-major order; this is the row order of restricted Jacobians.
    std::vector<std::pair<int, int>> indices() const;
    long count() const { return static_cast<long>(known.count()); }
    /// Columns whose every entry is observed.
    std::vector<int> full_columns() const;
};

const std::vector<std::string>& mask_names();

/// Throws ConfigError for an unknown name.
DataMask build_mask(const std::string& name, int n);

/// Mask from explicit 0-based (row, column) pairs; throws on out-of-range pairs.
DataMask custom_mask(int n, const std::vector<std::pair<int, int>>& entries);

}  // namespace dtn
