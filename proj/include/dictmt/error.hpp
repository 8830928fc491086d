#pragma once

#include <stdexcept>
#include <string>

namespace dictmt {

// Malformed or inconsistent input data. The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// I/O failure (unreadable path, failed write). Also exit code 2.
class IoError : public DataError {
public:
  explicit IoError(const std::string& what) : DataError(what) {}
};

}  // namespace dictmt
