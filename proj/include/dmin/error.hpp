#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dmin {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& what)
        : Error(what), offset_(offset), expected_(std::move(expected)) {}

    std::size_t offset() const noexcept { return offset_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
    std::size_t offset_;
    std::vector<std::string> expected_;
};

class UnknownIdentifierError : public ParseError {
public:
    UnknownIdentifierError(std::size_t offset, std::string name)
        : ParseError(offset, {}, "unknown identifier '" + name + "' at offset " + std::to_string(offset)),
          name_(std::move(name)) {}

    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

enum class EvalErrorKind { domain, division_by_zero, overflow };

class EvalError : public Error {
public:
    EvalError(EvalErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
    EvalErrorKind kind() const noexcept { return kind_; }

private:
    EvalErrorKind kind_;
};

class IntegrationError : public Error {
public:
    using Error::Error;
};

class DegenerateMetricError : public Error {
public:
    DegenerateMetricError(double det, const std::string& what) : Error(what), det_(det) {}
    double det() const noexcept { return det_; }

private:
    double det_;
};

class InvalidIsometryError : public Error {
public:
    using Error::Error;
};

class NearZeroError : public Error {
public:
    using Error::Error;
};

class Data2ViolationError : public Error {
public:
    Data2ViolationError(std::complex<double> worst, double residual, const std::string& what)
        : Error(what), worst_(worst), residual_(residual) {}
    std::complex<double> worst_point() const noexcept { return worst_; }
    double residual() const noexcept { return residual_; }

private:
    std::complex<double> worst_;
    double residual_;
};

class ContourError : public Error {
public:
    using Error::Error;
};

class ConsistencyError : public Error {
public:
    using Error::Error;
};

class CodazziError : public Error {
public:
    CodazziError(double residual, const std::string& what) : Error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class NonSpacelikeError : public Error {
public:
    using Error::Error;
};

class NotInSliceError : public Error {
public:
    NotInSliceError(double u, double v, double gap, const std::string& what)
        : Error(what), u_(u), v_(v), gap_(gap) {}
    double u() const noexcept { return u_; }
    double v() const noexcept { return v_; }
    double gap() const noexcept { return gap_; }

private:
    double u_, v_, gap_;
};

class UnknownNameError : public Error {
public:
    using Error::Error;
};

/// An interval that must lie in (0, inf) does not.
class RangeError : public Error {
public:
    using Error::Error;
};

} // namespace dmin
