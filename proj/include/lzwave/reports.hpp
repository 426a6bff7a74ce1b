#ifndef LZWAVE_REPORTS_HPP
#define LZWAVE_REPORTS_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lzwave {

// fixed 17-significant-digit formatting keeps report bodies byte-identical
// across runs with the same config and seeds
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class CsvWriter {
  public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) {
        std::filesystem::create_directories(path.parent_path());
        out_.open(path);
        if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path.string());
        for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
        out_ << "\n";
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << "\n";
    }

  private:
    std::ofstream out_;
};

} // namespace lzwave

#endif
