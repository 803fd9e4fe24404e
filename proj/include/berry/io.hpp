#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace berry {

// Shortest round-trip decimal, '.' separator, no locale.
std::string fmt(double v);

class Csv {
public:
    explicit Csv(std::vector<std::string> header);
    Csv& row(const std::vector<double>& values);
    Csv& row_text(const std::vector<std::string>& cells);
    const std::string& str() const { return buf_; }

private:
    std::size_t ncol_;
    std::string buf_;
};

// Write via a temporary sibling then rename.
void write_atomic(const std::filesystem::path& path, const std::string& content);

} // namespace berry
