#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace dtn {

// Every failure the library raises derives from Error so callers (the CLI in
// particular) can turn it into a machine-readable record by kind.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& what) : Error("invalid_argument", what) {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error("domain_error", what) {}
};

class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& what) : Error("shape_error", what) {}
};

class NumericalFailure : public Error {
public:
    NumericalFailure(const std::string& what, double residual)
        : Error("numerical_failure", what), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class RankDeficiency : public Error {
public:
    RankDeficiency(const std::string& what, double sigma_min)
        : Error("rank_deficiency", what), sigma_min_(sigma_min) {}

    double sigma_min() const noexcept { return sigma_min_; }

private:
    double sigma_min_;
};

class CompletionFailure : public Error {
public:
    CompletionFailure(const std::string& what, int row, int col)
        : Error("completion_failure", what), row_(row), col_(col) {}

    int row() const noexcept { return row_; }
    int col() const noexcept { return col_; }

private:
    int row_;
    int col_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("config_error", what) {}
};

}  // namespace dtn
