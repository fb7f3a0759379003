#pragma once

#include <stdexcept>
#include <string>

namespace covspot {

// All library failures throw Error. The message carries the specifics:
// expected vs. actual dimensions, offending layer or sample index, byte
// counts, file paths.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace covspot
