// Error types shared across the library.
#pragma once

#include <stdexcept>
#include <string>

namespace fmc {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct invalid_grid_error : error {
    using error::error;
};

struct grid_mismatch_error : error {
    using error::error;
};

// Gram-Schmidt pivot fell below tolerance; carries the offending index.
struct rank_deficiency_error : error {
    int index;
    rank_deficiency_error(const std::string& msg, int idx) : error(msg), index(idx) {}
};

struct domain_error : error {
    using error::error;
};

struct assumption_violation_error : error {
    using error::error;
};

// Mean-shift landed where every kernel weight vanishes (compact support).
struct dead_zone_error : error {
    using error::error;
};

struct numerical_error : error {
    using error::error;
};

struct undersmoothing_error : error {
    using error::error;
};

// Parse/IO failure; line is 1-based, 0 when not applicable.
struct io_error : error {
    long line;
    io_error(const std::string& msg, long line_no = 0) : error(msg), line(line_no) {}
};

}  // namespace fmc
