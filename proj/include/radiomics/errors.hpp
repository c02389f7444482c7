#pragma once

#include <stdexcept>
#include <string>

namespace radiomics {

// Error taxonomy mirrored by the CLI exit codes: data/io problems exit 2,
// numerical failures exit 3.
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

class data_error : public std::runtime_error {
public:
    explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace radiomics
