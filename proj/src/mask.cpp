#include "dtn/mask.hpp"

#include "dtn/error.hpp"

namespace dtn {

std::vector<std::pair<int, int>> DataMask::indices() const {
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < known.rows(); ++i)
        for (int j = 0; j < known.cols(); ++j)
            if (known(i, j)) out.emplace_back(i, j);
    return out;
}

std::vector<int> DataMask::full_columns() const {
    std::vector<int> out;
    for (int j = 0; j < known.cols(); ++j)
        if (known.col(j).all()) out.push_back(j);
    return out;
}

const std::vector<std::string>& mask_names() {
    static const std::vector<std::string> names{"full", "C3n", "C2n", "D2n", "Tsq", "Tre"};
    return names;
}

DataMask build_mask(const std::string& name, int n) {
    if (n < 1) throw InvalidArgument("mask size must be >= 1");
    const int m = 4 * n;
    DataMask mask;
    mask.name = name;
    mask.n = n;
    mask.known = BoolMat::Constant(m, m, false);
    if (name == "full")
        mask.known.setConstant(true);
    else if (name == "C3n")
        mask.known.rightCols(3 * n).setConstant(true);
    else if (name == "C2n")
        mask.known.rightCols(2 * n).setConstant(true);
    else if (name == "D2n")
        mask.known.leftCols(2 * n).setConstant(true);
    else if (name == "Tsq")
        mask.known.block(0, n, 3 * n, 3 * n).setConstant(true);
    else if (name == "Tre")
        mask.known.block(0, n, 2 * n, 3 * n).setConstant(true);
    else
        throw ConfigError("unknown mask '" + name + "' (expected full, C3n, C2n, D2n, Tsq, Tre or custom)");
    return mask;
}

DataMask custom_mask(int n, const std::vector<std::pair<int, int>>& entries) {
    if (n < 1) throw InvalidArgument("mask size must be >= 1");
    const int m = 4 * n;
    DataMask mask;
    mask.name = "custom";
    mask.n = n;
    mask.known = BoolMat::Constant(m, m, false);
    for (const auto& [i, j] : entries) {
        if (i < 0 || i >= m || j < 0 || j >= m)
            throw ConfigError("mask entry (" + std::to_string(i) + "," + std::to_string(j) + ") out of range");
        mask.known(i, j) = true;
    }
    if (mask.count() == 0) throw DomainError("custom mask is empty");
    return mask;
}

}  // namespace dtn
