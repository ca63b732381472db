#pragma once

#include <stdexcept>
#include <string>

namespace qlap {

// Numeric failure that is a legitimate runtime outcome rather than a caller
// bug: divergent integrals, shooting brackets that cannot be closed, etc.
// Contract violations (bad dimensions, non-SPD matrices, empty grids) use
// std::invalid_argument / std::domain_error directly.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// An integral that provably diverges (e.g. |x|^{-s} with s >= d integrated
// across the origin).  Callers that sweep families of windows catch this and
// mark the offending entry instead of aborting the sweep.
class diverged_error : public numeric_error {
public:
    explicit diverged_error(const std::string& what) : numeric_error(what) {}
};

// No solution found within the search budget (shooting bracket exhausted,
// iteration cap hit before the tolerance).
class no_solution_error : public numeric_error {
public:
    explicit no_solution_error(const std::string& what) : numeric_error(what) {}
};

// Requested dimension (or parameter combination) outside the supported range.
class unsupported_error : public std::invalid_argument {
public:
    explicit unsupported_error(const std::string& what) : std::invalid_argument(what) {}
};

} // namespace qlap
