#pragma once

#include <stdexcept>
#include <string>

namespace sgmrd {

// Wrong number of entries, mismatched lengths, bad matrix shape.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Non-finite or unparsable input data, missing labels, degenerate input.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Dimension or arm index outside its valid range.
class IndexError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

// Parameter outside its documented domain.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace sgmrd
