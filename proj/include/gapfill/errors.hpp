#pragma once

#include <stdexcept>
#include <string>

namespace gapfill {

// Raster file parsing failures. Each failure mode is distinguishable by kind.
class ParseError : public std::runtime_error {
public:
    enum class Kind { BadHeader, BadDimensions, Truncated };

    ParseError(Kind kind, const std::string& what_arg)
        : std::runtime_error(what_arg), kind_(kind) {}

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// A per-column Gaussian calibration could not be formed (fewer than two
// valid pivot pixels in the matched column).
class CalibrationDegenerateError : public std::runtime_error {
public:
    CalibrationDegenerateError(int band, int column, const std::string& what_arg)
        : std::runtime_error(what_arg), band_(band), column_(column) {}

    int band() const { return band_; }
    int column() const { return column_; }

private:
    int band_;
    int column_;
};

// Not enough observations to run an estimator (valid blocks, distinct
// vectors, non-zero labels...).
class NotEnoughDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A quality measure whose defining formula is degenerate on this input.
class UndefinedMeasureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace gapfill
